#pragma once

#include "eleuler/spectral_field.hpp"

#include <span>
#include <vector>

namespace eleuler {

/// Off-grid evaluation of real band-limited fields by direct Fourier
/// summation, f(x) = sum_k coeff(k) e^{i k.x}, using Hermitian symmetry to
/// sum over half the modes. The summation box is trimmed to the smallest
/// max-norm band containing every coefficient above 1e-14 of the largest one;
/// everything outside is roundoff-level.
class TrigEvaluator {
 public:
  TrigEvaluator() = default;
  explicit TrigEvaluator(const SpectralField& field);

  int dim() const { return dim_; }
  int components() const { return components_; }
  int bandwidth() const { return band_; }

  /// x has dim() entries (any real values; periodicity is implicit);
  /// out receives components() values.
  void evaluate(std::span<const double> x, std::span<double> out) const;

 private:
  int dim_ = 0;
  int components_ = 0;
  int band_ = 0;
  int full_ = 1;   // 2 * band + 1
  int half_ = 1;   // band + 1
  Eigen::Index box_ = 1;
  std::vector<double> re_;
  std::vector<double> im_;
};

/// Evaluates all components of f at each point (points: count x dim, row-major).
Eigen::ArrayXXd evaluate_at(const SpectralField& f, const Eigen::ArrayXXd& points);

}  // namespace eleuler
