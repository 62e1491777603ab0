#pragma once

#include "eleuler/spectral_field.hpp"

#include <fftw3.h>

#include <vector>

namespace eleuler::detail {

/// Real <-> half-complex transform on an M^n grid with owned scratch buffers.
/// Instances are per thread (see real_fft); not shareable across threads.
class RealFft {
 public:
  RealFft(int dim, int samples);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int dim() const { return dim_; }
  int samples() const { return samples_; }
  Eigen::Index real_size() const { return real_size_; }
  Eigen::Index half_size() const { return half_size_; }

  double* real_data() { return real_; }
  fftw_complex* half_data() { return half_; }

  /// half -> real, unnormalized sum over modes (destroys the half buffer).
  void backward() { fftw_execute(backward_); }
  /// real -> half, unnormalized sum over points.
  void forward() { fftw_execute(forward_); }

 private:
  int dim_;
  int samples_;
  Eigen::Index real_size_;
  Eigen::Index half_size_;
  double* real_;
  fftw_complex* half_;
  fftw_plan forward_;
  fftw_plan backward_;
};

RealFft& real_fft(int dim, int samples);

/// Index maps between an N-mode SpectralField and the half-complex buffer of
/// an M-sample transform (M >= N).
struct ModeMap {
  /// For modes with k_last >= 0 (and not Nyquist): flat mode -> half index.
  std::vector<Eigen::Index> scatter_src;
  std::vector<Eigen::Index> scatter_dst;
  /// For every resolved mode: half index holding coeff(k) or its conjugate.
  std::vector<Eigen::Index> gather_src;
  std::vector<unsigned char> gather_conj;
  std::vector<Eigen::Index> gather_dst;
};

const ModeMap& mode_map(int dim, int modes, int samples);

}  // namespace eleuler::detail
