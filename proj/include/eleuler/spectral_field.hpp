#pragma once

#include <Eigen/Core>

#include <array>
#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace eleuler {

using Complex = std::complex<double>;

/// Integer wavevectors of the truncated Fourier basis on the torus [0, 2pi)^n.
///
/// Modes are stored in FFT order along every axis (index i maps to k = i for
/// i < N/2 and k = i - N otherwise) and flattened row-major, first axis
/// slowest. The Nyquist plane (index N/2, i.e. k = -N/2) is never populated.
class WaveGrid {
 public:
  WaveGrid(int dim, int grid_n);

  /// Shared, cached instance for (dim, grid_n).
  static std::shared_ptr<const WaveGrid> get(int dim, int grid_n);

  int dim() const { return dim_; }
  int grid_n() const { return grid_n_; }
  Eigen::Index size() const { return size_; }

  /// Signed wavenumber of a per-axis FFT index.
  int wavenumber(int index) const { return index < grid_n_ / 2 ? index : index - grid_n_; }

  /// k (size x dim) for every flat mode index.
  const Eigen::ArrayXXi& wavevectors() const { return k_; }
  int k(Eigen::Index flat, int axis) const { return k_(flat, axis); }
  const Eigen::ArrayXd& k_squared() const { return k2_; }
  /// max_i |k_i| per mode.
  const Eigen::ArrayXi& k_max_abs() const { return kmax_; }
  /// 1 for resolved modes, 0 on the Nyquist planes.
  const Eigen::ArrayXd& resolved() const { return resolved_; }
  /// Flat index of -k (Nyquist modes map to themselves).
  Eigen::Index negated(Eigen::Index flat) const { return neg_(flat); }

  /// Flat index of wavevector k; components must satisfy |k_i| < N/2.
  Eigen::Index flat_index(std::span<const int> k) const;

  /// (1 + |k|^2)^s for every mode; s = 0 gives exactly one.
  Eigen::ArrayXd sobolev_weight(double s) const;
  static double sobolev_weight(double s, double k_squared);

  /// Physical node coordinates 2 pi i / N along each axis for flat node index.
  std::array<double, 3> node(Eigen::Index flat) const;

 private:
  int dim_;
  int grid_n_;
  Eigen::Index size_;
  Eigen::ArrayXXi k_;
  Eigen::ArrayXd k2_;
  Eigen::ArrayXi kmax_;
  Eigen::ArrayXd resolved_;
  Eigen::Matrix<Eigen::Index, Eigen::Dynamic, 1> neg_;
};

/// A real-valued field with `components` components on T^n, stored as
/// truncated Fourier coefficients normalized as
///   coeff(k) = (2 pi)^-n \int f(x) e^{-i k.x} dx,
/// so that the L2 norm is the plain l2 norm of the coefficients. Columns of
/// coeffs() are components; rows follow the WaveGrid mode order.
class SpectralField {
 public:
  SpectralField() = default;
  SpectralField(int dim, int grid_n, int components);
  SpectralField(std::shared_ptr<const WaveGrid> grid, int components);

  static SpectralField zeros_like(const SpectralField& other) {
    return SpectralField(other.grid_, other.components());
  }

  bool empty() const { return !grid_; }
  int dim() const { return grid_->dim(); }
  int grid_n() const { return grid_->grid_n(); }
  int components() const { return static_cast<int>(coeffs_.cols()); }
  bool is_vector() const { return components() == dim(); }
  Eigen::Index modes() const { return coeffs_.rows(); }

  const WaveGrid& grid() const { return *grid_; }
  const std::shared_ptr<const WaveGrid>& grid_ptr() const { return grid_; }

  Eigen::ArrayXXcd& coeffs() { return coeffs_; }
  const Eigen::ArrayXXcd& coeffs() const { return coeffs_; }

  Complex coeff(std::span<const int> k, int component = 0) const;
  void set_coeff(std::span<const int> k, int component, Complex value);

  /// Single component as a scalar field.
  SpectralField component_field(int component) const;
  void set_component(int component, const SpectralField& scalar);

  bool same_shape(const SpectralField& other) const;
  bool same_grid(const SpectralField& other) const;

  /// max |coeff(-k) - conj(coeff(k))| over all modes and components.
  double hermitian_defect() const;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(double scale);

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(SpectralField a, double s) { return a *= s; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
  friend SpectralField operator-(SpectralField a) { return a *= -1.0; }

 private:
  std::shared_ptr<const WaveGrid> grid_;
  Eigen::ArrayXXcd coeffs_;
};

/// Concatenates fields on the same grid into one multi-component field.
SpectralField stack(std::span<const SpectralField> fields);

/// Point samples on a uniform samples_per_dim^n grid over [0, 2pi)^n, flat
/// row-major ordering (first axis slowest). Columns are components.
struct GridField {
  int dim = 0;
  int samples_per_dim = 0;
  Eigen::ArrayXXd values;

  GridField() = default;
  GridField(int dim_, int samples_, int components);

  Eigen::Index points() const { return values.rows(); }
  int components() const { return static_cast<int>(values.cols()); }
  std::array<double, 3> node(Eigen::Index flat) const;
};

/// Time samples f(t0 + j dt), j = 0..samples-1. A single sample is treated as
/// steady. Evaluation between samples is piecewise linear.
struct FieldSeries {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<SpectralField> samples;

  FieldSeries() = default;
  FieldSeries(double t0_, double dt_, std::vector<SpectralField> samples_)
      : t0(t0_), dt(dt_), samples(std::move(samples_)) {}
  static FieldSeries steady(SpectralField field) { return FieldSeries(0.0, 0.0, {std::move(field)}); }

  bool steady() const { return samples.size() == 1; }
  double t_end() const { return t0 + dt * static_cast<double>(samples.size() - 1); }
  const SpectralField& front() const { return samples.front(); }
  const SpectralField& back() const { return samples.back(); }

  /// Linear interpolation in time; steady series return their only sample.
  SpectralField at(double t) const;

  /// Interpolation weights (lower sample, fraction towards the next one).
  std::pair<std::size_t, double> locate(double t) const;
};

}  // namespace eleuler
