#include <iostream>

#include "CLI11.hpp"
#include "enstrophy/cli.hpp"

int main(int argc, char** argv) {
  namespace cli = enstrophy::cli;

  CLI::App app{"enstrophy_lab: finite-N checks for the truncated 2D Euler flow under the enstrophy measure"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  std::uint64_t seed_override = 0;
  auto* run = app.add_subcommand("run", "run the tests listed in a JSON config");
  run->add_option("config", config, "config file")->required();
  auto* out_opt = run->add_option("--out-dir", out_dir, "output directory (overrides output_dir)");
  auto* seed_opt = run->add_option("--seed-override", seed_override, "replace the config seed");

  int max_n = 32;
  auto* bench = app.add_subcommand("bench", "direct vs dealiased drift throughput");
  bench->add_option("--max-n", max_n, "largest cutoff")->check(CLI::Range(0, 256));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitConfigError;
  }

  try {
    if (*run) {
      cli::RunOptions options;
      if (*out_opt) options.out_dir = out_dir;
      if (*seed_opt) options.seed_override = seed_override;
      return cli::run(config, options, std::cout);
    }
    return cli::bench(max_n, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitTestFailure;
  }
}
