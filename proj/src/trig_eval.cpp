#include "eleuler/trig_eval.hpp"

#include "eleuler/errors.hpp"
#include "eleuler/parallel.hpp"

#include <cmath>

namespace eleuler {

namespace {

constexpr double kTrimRelative = 1e-14;

// tw[j] = e^{i (j - offset) x} for j in [0, count).
void twiddles(double x, int offset, int count, double* re, double* im) {
  const double c1 = std::cos(x);
  const double s1 = std::sin(x);
  // start at k = -offset
  double cr = std::cos(-offset * x);
  double ci = std::sin(-offset * x);
  for (int j = 0; j < count; ++j) {
    re[j] = cr;
    im[j] = ci;
    const double nr = cr * c1 - ci * s1;
    const double ni = cr * s1 + ci * c1;
    cr = nr;
    ci = ni;
  }
}

}  // namespace

TrigEvaluator::TrigEvaluator(const SpectralField& field)
    : dim_(field.dim()), components_(field.components()) {
  const auto& grid = field.grid();
  const double peak = field.coeffs().abs().maxCoeff();
  band_ = 0;
  if (peak > 0.0) {
    const double floor = kTrimRelative * peak;
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
      if (grid.resolved()(i) == 0.0) continue;
      if (field.coeffs().row(i).abs().maxCoeff() > floor) band_ = std::max(band_, grid.k_max_abs()(i));
    }
  }
  full_ = 2 * band_ + 1;
  half_ = band_ + 1;
  box_ = half_;
  for (int a = 0; a < dim_ - 1; ++a) box_ *= full_;
  re_.assign(static_cast<size_t>(box_ * components_), 0.0);
  im_.assign(static_cast<size_t>(box_ * components_), 0.0);
  std::vector<int> k(static_cast<size_t>(dim_));
  for (Eigen::Index flat_box = 0; flat_box < box_; ++flat_box) {
    Eigen::Index rest = flat_box;
    k[static_cast<size_t>(dim_ - 1)] = static_cast<int>(rest % half_);
    rest /= half_;
    for (int a = dim_ - 2; a >= 0; --a) {
      k[static_cast<size_t>(a)] = static_cast<int>(rest % full_) - band_;
      rest /= full_;
    }
    const Eigen::Index flat = grid.flat_index(k);
    const double weight = k[static_cast<size_t>(dim_ - 1)] > 0 ? 2.0 : 1.0;
    for (int c = 0; c < components_; ++c) {
      const Complex v = field.coeffs()(flat, c) * (weight * grid.resolved()(flat));
      re_[static_cast<size_t>(c * box_ + flat_box)] = v.real();
      im_[static_cast<size_t>(c * box_ + flat_box)] = v.imag();
    }
  }
}

void TrigEvaluator::evaluate(std::span<const double> x, std::span<double> out) const {
  if (static_cast<int>(x.size()) < dim_ || static_cast<int>(out.size()) < components_)
    throw ShapeError("TrigEvaluator::evaluate: buffer sizes do not match");
  // Stack buffers: band <= N/2 and N is at most a few hundred at desk scale.
  thread_local std::vector<double> tw;
  tw.resize(static_cast<size_t>(2 * (full_ * (dim_ - 1) + half_)));
  double* tr[3];
  double* ti[3];
  for (int a = 0; a < dim_; ++a) {
    const int count = a == dim_ - 1 ? half_ : full_;
    const int offset = a == dim_ - 1 ? 0 : band_;
    tr[a] = tw.data() + 2 * a * full_;
    ti[a] = tr[a] + count;
    twiddles(x[static_cast<size_t>(a)], offset, count, tr[a], ti[a]);
  }
  const double* lr = tr[dim_ - 1];
  const double* li = ti[dim_ - 1];
  for (int c = 0; c < components_; ++c) {
    const double* cr = re_.data() + c * box_;
    const double* ci = im_.data() + c * box_;
    double total = 0.0;
    if (dim_ == 2) {
      for (int i0 = 0; i0 < full_; ++i0) {
        const double* rr = cr + i0 * half_;
        const double* ri = ci + i0 * half_;
        double sr = 0.0, si = 0.0;
        for (int j = 0; j < half_; ++j) {
          sr += rr[j] * lr[j] - ri[j] * li[j];
          si += rr[j] * li[j] + ri[j] * lr[j];
        }
        total += tr[0][i0] * sr - ti[0][i0] * si;
      }
    } else {
      for (int i0 = 0; i0 < full_; ++i0) {
        double ar = 0.0, ai = 0.0;
        for (int i1 = 0; i1 < full_; ++i1) {
          const Eigen::Index base = (static_cast<Eigen::Index>(i0) * full_ + i1) * half_;
          const double* rr = cr + base;
          const double* ri = ci + base;
          double sr = 0.0, si = 0.0;
          for (int j = 0; j < half_; ++j) {
            sr += rr[j] * lr[j] - ri[j] * li[j];
            si += rr[j] * li[j] + ri[j] * lr[j];
          }
          ar += tr[1][i1] * sr - ti[1][i1] * si;
          ai += tr[1][i1] * si + ti[1][i1] * sr;
        }
        total += tr[0][i0] * ar - ti[0][i0] * ai;
      }
    }
    out[static_cast<size_t>(c)] = total;
  }
}

Eigen::ArrayXXd evaluate_at(const SpectralField& f, const Eigen::ArrayXXd& points) {
  if (points.cols() != f.dim()) throw ShapeError("evaluate_at: point dimension mismatch");
  TrigEvaluator eval(f);
  Eigen::ArrayXXd out(points.rows(), f.components());
  parallel_for(static_cast<std::size_t>(points.rows()), [&](std::size_t p) {
    double x[3];
    double v[64];
    std::vector<double> heap;
    double* dst = v;
    if (f.components() > 64) {
      heap.resize(static_cast<size_t>(f.components()));
      dst = heap.data();
    }
    for (int a = 0; a < f.dim(); ++a) x[a] = points(static_cast<Eigen::Index>(p), a);
    eval.evaluate({x, static_cast<size_t>(f.dim())}, {dst, static_cast<size_t>(f.components())});
    for (int c = 0; c < f.components(); ++c) out(static_cast<Eigen::Index>(p), c) = dst[c];
  });
  return out;
}

}  // namespace eleuler
