#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace enstrophy::detail {
namespace {

enum class PlanKind { c2c_forward, c2c_backward, c2r, r2c };

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(PlanKind kind, int n) {
    // Plans never die before the cache, so a per-thread memo avoids the lock.
    thread_local std::map<std::tuple<PlanKind, int>, fftw_plan> local;
    const auto key = std::make_tuple(kind, n);
    if (auto it = local.find(key); it != local.end()) return it->second;
    return local[key] = get_shared(key);
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  fftw_plan get_shared(std::tuple<PlanKind, int> key) {
    std::lock_guard lock(mutex_);
    const auto [kind, n] = key;
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    const auto cells = static_cast<std::size_t>(n) * n;
    const auto half = static_cast<std::size_t>(n) * (n / 2 + 1);
    std::vector<Complex> cbuf(std::max(cells, half));
    std::vector<double> rbuf(cells);
    auto* c = reinterpret_cast<fftw_complex*>(cbuf.data());

    fftw_plan plan = nullptr;
    switch (kind) {
      case PlanKind::c2c_forward:
        plan = fftw_plan_dft_2d(n, n, c, c, FFTW_FORWARD, flags);
        break;
      case PlanKind::c2c_backward:
        plan = fftw_plan_dft_2d(n, n, c, c, FFTW_BACKWARD, flags);
        break;
      case PlanKind::c2r:
        plan = fftw_plan_dft_c2r_2d(n, n, c, rbuf.data(), flags);
        break;
      case PlanKind::r2c:
        plan = fftw_plan_dft_r2c_2d(n, n, rbuf.data(), c, flags);
        break;
    }
    if (plan == nullptr) throw std::runtime_error("fftw: plan creation failed for size " + std::to_string(n));
    plans_.emplace(key, plan);
    return plan;
  }

  std::mutex mutex_;
  std::map<std::tuple<PlanKind, int>, fftw_plan> plans_;
};

fftw_complex* as_fftw(std::span<Complex> s) { return reinterpret_cast<fftw_complex*>(s.data()); }

}  // namespace

void dft_2d(std::span<Complex> data, int grid_size, int sign) {
  if (data.size() != static_cast<std::size_t>(grid_size) * grid_size)
    throw std::invalid_argument("dft_2d: buffer size mismatch");
  auto plan = PlanCache::instance().get(sign > 0 ? PlanKind::c2c_backward : PlanKind::c2c_forward, grid_size);
  fftw_execute_dft(plan, as_fftw(data), as_fftw(data));
}

void synthesize_real_2d(std::span<Complex> half_spectrum, std::span<double> grid, int grid_size) {
  auto plan = PlanCache::instance().get(PlanKind::c2r, grid_size);
  fftw_execute_dft_c2r(plan, as_fftw(half_spectrum), grid.data());
}

void analyze_real_2d(std::span<double> grid, std::span<Complex> half_spectrum, int grid_size) {
  auto plan = PlanCache::instance().get(PlanKind::r2c, grid_size);
  fftw_execute_dft_r2c(plan, grid.data(), as_fftw(half_spectrum));
}

}  // namespace enstrophy::detail
