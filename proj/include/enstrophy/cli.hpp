#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "enstrophy/verify.hpp"
#include "json.hpp"

namespace enstrophy::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitTestFailure = 1;
inline constexpr int kExitConfigError = 2;

/// Invalid configuration; `path` names the offending field, e.g.
/// "tests[2].cutoffs[0]".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path(std::move(path)) {}
  std::string path;
};

struct Job {
  std::string name;
  std::function<TestReport()> run;
};

/// Parsed and validated experiment. Every job is bound to its parameters at
/// parse time, so a config that parses cannot fail validation later.
struct Experiment {
  std::string name;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  std::vector<Job> jobs;
};

/// Trig-polynomial test function from a JSON list of terms
/// {"cos": [n1, n2], "amp": a}, {"sin": [n1, n2], "amp": a} or {"const": c}.
SpectralField parse_field(const nlohmann::json& terms, const std::string& path);

Experiment parse_experiment(const nlohmann::json& config, std::optional<std::uint64_t> seed_override = {});

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed_override;
};

/// `run <config>`: executes the jobs, writes reports/<name>.{json,csv},
/// summary.csv and manifest.json under the output directory, and returns an
/// exit code. Progress goes to `log`.
int run(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& log);

/// `bench`: direct vs dealiased drift throughput for N in {0, 2, 4, ...} up
/// to max_n. Returns kExitTestFailure if the strategies disagree.
int bench(int max_n, std::ostream& out);

std::string sha256_hex(std::string_view bytes);

}  // namespace enstrophy::cli
