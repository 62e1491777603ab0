#include "eleuler/spectral_field.hpp"

#include "eleuler/errors.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

namespace eleuler {

WaveGrid::WaveGrid(int dim, int grid_n) : dim_(dim), grid_n_(grid_n) {
  if (dim < 2 || dim > 3) throw ConfigError("dimension must be 2 or 3, got " + std::to_string(dim));
  if (grid_n <= 0 || grid_n % 2 != 0)
    throw ConfigError("grid size N must be even and positive, got " + std::to_string(grid_n));
  size_ = 1;
  for (int a = 0; a < dim; ++a) size_ *= grid_n;
  k_.resize(size_, dim);
  k2_.resize(size_);
  kmax_.resize(size_);
  resolved_.resize(size_);
  neg_.resize(size_);
  for (Eigen::Index flat = 0; flat < size_; ++flat) {
    Eigen::Index rest = flat;
    double k2 = 0.0;
    int kmax = 0;
    bool nyquist = false;
    Eigen::Index neg = 0;
    for (int a = dim - 1; a >= 0; --a) {
      const int index = static_cast<int>(rest % grid_n);
      rest /= grid_n;
      const int k = wavenumber(index);
      k_(flat, a) = k;
      k2 += static_cast<double>(k) * k;
      kmax = std::max(kmax, std::abs(k));
      nyquist = nyquist || index == grid_n / 2;
    }
    Eigen::Index stride = 1;
    for (int a = dim - 1; a >= 0; --a) {
      int k = k_(flat, a);
      int index = k == -grid_n / 2 ? grid_n / 2 : ((-k) % grid_n + grid_n) % grid_n;
      neg += stride * index;
      stride *= grid_n;
    }
    k2_(flat) = k2;
    kmax_(flat) = kmax;
    resolved_(flat) = nyquist ? 0.0 : 1.0;
    neg_(flat) = neg;
  }
}

std::shared_ptr<const WaveGrid> WaveGrid::get(int dim, int grid_n) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const WaveGrid>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{dim, grid_n}];
  if (!slot) slot = std::make_shared<const WaveGrid>(dim, grid_n);
  return slot;
}

Eigen::Index WaveGrid::flat_index(std::span<const int> k) const {
  if (static_cast<int>(k.size()) != dim_) throw ShapeError("wavevector has wrong dimension");
  Eigen::Index flat = 0;
  for (int a = 0; a < dim_; ++a) {
    if (std::abs(k[a]) >= grid_n_ / 2 && !(k[a] == -grid_n_ / 2))
      throw ShapeError("wavevector outside the resolved band");
    const int index = ((k[a] % grid_n_) + grid_n_) % grid_n_;
    flat = flat * grid_n_ + index;
  }
  return flat;
}

double WaveGrid::sobolev_weight(double s, double k_squared) {
  if (s == 0.0) return 1.0;
  return std::pow(1.0 + k_squared, s);
}

Eigen::ArrayXd WaveGrid::sobolev_weight(double s) const {
  if (s == 0.0) return Eigen::ArrayXd::Ones(size_);
  return (1.0 + k2_).pow(s);
}

std::array<double, 3> WaveGrid::node(Eigen::Index flat) const {
  std::array<double, 3> x{0.0, 0.0, 0.0};
  const double h = 2.0 * std::numbers::pi / grid_n_;
  for (int a = dim_ - 1; a >= 0; --a) {
    x[a] = h * static_cast<double>(flat % grid_n_);
    flat /= grid_n_;
  }
  return x;
}

SpectralField::SpectralField(int dim, int grid_n, int components)
    : SpectralField(WaveGrid::get(dim, grid_n), components) {}

SpectralField::SpectralField(std::shared_ptr<const WaveGrid> grid, int components)
    : grid_(std::move(grid)) {
  if (components <= 0) throw ShapeError("field needs at least one component");
  coeffs_ = Eigen::ArrayXXcd::Zero(grid_->size(), components);
}

Complex SpectralField::coeff(std::span<const int> k, int component) const {
  return coeffs_(grid_->flat_index(k), component);
}

void SpectralField::set_coeff(std::span<const int> k, int component, Complex value) {
  coeffs_(grid_->flat_index(k), component) = value;
}

SpectralField SpectralField::component_field(int component) const {
  if (component < 0 || component >= components()) throw ShapeError("component index out of range");
  SpectralField out(grid_, 1);
  out.coeffs_.col(0) = coeffs_.col(component);
  return out;
}

void SpectralField::set_component(int component, const SpectralField& scalar) {
  if (!same_grid(scalar) || scalar.components() != 1) throw ShapeError("set_component expects a scalar on the same grid");
  coeffs_.col(component) = scalar.coeffs_.col(0);
}

bool SpectralField::same_grid(const SpectralField& other) const {
  return grid_ && other.grid_ && grid_->dim() == other.grid_->dim() && grid_->grid_n() == other.grid_->grid_n();
}

bool SpectralField::same_shape(const SpectralField& other) const {
  return same_grid(other) && components() == other.components();
}

double SpectralField::hermitian_defect() const {
  double worst = 0.0;
  for (int c = 0; c < components(); ++c)
    for (Eigen::Index i = 0; i < modes(); ++i)
      worst = std::max(worst, std::abs(coeffs_(grid_->negated(i), c) - std::conj(coeffs_(i, c))));
  return worst;
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  if (!same_shape(other)) throw ShapeError("field addition with mismatched shapes");
  coeffs_ += other.coeffs_;
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  if (!same_shape(other)) throw ShapeError("field subtraction with mismatched shapes");
  coeffs_ -= other.coeffs_;
  return *this;
}

SpectralField& SpectralField::operator*=(double scale) {
  coeffs_ *= scale;
  return *this;
}

SpectralField stack(std::span<const SpectralField> fields) {
  if (fields.empty()) throw ShapeError("stack of no fields");
  int total = 0;
  for (const auto& f : fields) {
    if (!f.same_grid(fields.front())) throw ShapeError("stack of fields on different grids");
    total += f.components();
  }
  SpectralField out(fields.front().grid_ptr(), total);
  int col = 0;
  for (const auto& f : fields) {
    out.coeffs().middleCols(col, f.components()) = f.coeffs();
    col += f.components();
  }
  return out;
}

GridField::GridField(int dim_, int samples_, int components) : dim(dim_), samples_per_dim(samples_) {
  Eigen::Index points = 1;
  for (int a = 0; a < dim_; ++a) points *= samples_;
  values = Eigen::ArrayXXd::Zero(points, components);
}

std::array<double, 3> GridField::node(Eigen::Index flat) const {
  std::array<double, 3> x{0.0, 0.0, 0.0};
  const double h = 2.0 * std::numbers::pi / samples_per_dim;
  for (int a = dim - 1; a >= 0; --a) {
    x[a] = h * static_cast<double>(flat % samples_per_dim);
    flat /= samples_per_dim;
  }
  return x;
}

std::pair<std::size_t, double> FieldSeries::locate(double t) const {
  if (samples.empty()) throw ShapeError("empty field series");
  if (steady()) return {0, 0.0};
  const double pos = (t - t0) / dt;
  const double last = static_cast<double>(samples.size() - 1);
  constexpr double slack = 1e-9;
  if (pos < -slack || pos > last + slack) throw SolverError("time outside the sampled window");
  const double clamped = std::clamp(pos, 0.0, last);
  auto lower = static_cast<std::size_t>(std::floor(clamped));
  if (lower >= samples.size() - 1) lower = samples.size() - 2;
  double frac = clamped - static_cast<double>(lower);
  if (std::abs(frac) < 1e-12) frac = 0.0;
  if (std::abs(frac - 1.0) < 1e-12) {
    ++lower;
    frac = 0.0;
    if (lower == samples.size() - 1) return {lower - 1, 1.0};
  }
  return {lower, frac};
}

SpectralField FieldSeries::at(double t) const {
  auto [lower, frac] = locate(t);
  if (frac == 0.0) return samples[lower];
  if (frac == 1.0) return samples[lower + 1];
  SpectralField out = samples[lower];
  out.coeffs() = (1.0 - frac) * samples[lower].coeffs() + frac * samples[lower + 1].coeffs();
  return out;
}

}  // namespace eleuler
