#include "fft.hpp"

#include "eleuler/errors.hpp"

#include <map>
#include <memory>
#include <mutex>

namespace eleuler::detail {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(int dim, int samples) : dim_(dim), samples_(samples) {
  real_size_ = 1;
  for (int a = 0; a < dim; ++a) real_size_ *= samples;
  half_size_ = real_size_ / samples * (samples / 2 + 1);
  std::vector<int> dims(dim, samples);
  std::lock_guard lock(planner_mutex());
  real_ = fftw_alloc_real(static_cast<size_t>(real_size_));
  half_ = fftw_alloc_complex(static_cast<size_t>(half_size_));
  forward_ = fftw_plan_dft_r2c(dim, dims.data(), real_, half_, FFTW_ESTIMATE);
  backward_ = fftw_plan_dft_c2r(dim, dims.data(), half_, real_, FFTW_ESTIMATE);
  if (!forward_ || !backward_) throw SolverError("FFT planning failed");
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(forward_);
  fftw_destroy_plan(backward_);
  fftw_free(real_);
  fftw_free(half_);
}

RealFft& real_fft(int dim, int samples) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<RealFft>> cache;
  auto& slot = cache[{dim, samples}];
  if (!slot) slot = std::make_unique<RealFft>(dim, samples);
  return *slot;
}

const ModeMap& mode_map(int dim, int modes, int samples) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, std::unique_ptr<ModeMap>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{dim, modes, samples}];
  if (slot) return *slot;
  if (samples < modes) throw ShapeError("transform grid smaller than the mode grid");
  auto map = std::make_unique<ModeMap>();
  const WaveGrid& grid = *WaveGrid::get(dim, modes);
  const int half_last = samples / 2 + 1;
  auto half_index = [&](Eigen::Index flat, bool negate) {
    Eigen::Index out = 0;
    for (int a = 0; a < dim; ++a) {
      int k = grid.k(flat, a);
      if (negate) k = -k;
      const int extent = a == dim - 1 ? half_last : samples;
      const int index = a == dim - 1 ? k : ((k % samples) + samples) % samples;
      out = out * extent + index;
    }
    return out;
  };
  for (Eigen::Index flat = 0; flat < grid.size(); ++flat) {
    if (grid.resolved()(flat) == 0.0) continue;
    const int k_last = grid.k(flat, dim - 1);
    if (k_last >= 0) {
      map->scatter_src.push_back(flat);
      map->scatter_dst.push_back(half_index(flat, false));
      map->gather_src.push_back(half_index(flat, false));
      map->gather_conj.push_back(0);
    } else {
      map->gather_src.push_back(half_index(flat, true));
      map->gather_conj.push_back(1);
    }
    map->gather_dst.push_back(flat);
  }
  slot = std::move(map);
  return *slot;
}

}  // namespace eleuler::detail
