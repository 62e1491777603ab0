#include "eleuler/spectral_ops.hpp"

#include "eleuler/errors.hpp"
#include "fft.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstring>
#include <string>

namespace eleuler {

namespace {

void require_same_grid(const SpectralField& f, const SpectralField& g, const char* op) {
  if (!f.same_grid(g)) throw ShapeError(std::string(op) + ": fields live on different grids");
}

Eigen::ArrayXd node_determinant(const GridField& grad, int dim) {
  const Eigen::Index points = grad.points();
  Eigen::ArrayXd det(points);
  for (Eigen::Index p = 0; p < points; ++p) {
    Eigen::Matrix3d jac = Eigen::Matrix3d::Identity();
    for (int c = 0; c < dim; ++c)
      for (int a = 0; a < dim; ++a) jac(c, a) += grad.values(p, c * dim + a);
    det(p) = dim == 2 ? jac.topLeftCorner<2, 2>().determinant() : jac.determinant();
  }
  return det;
}

}  // namespace

int padded_size(int grid_n) { return (3 * grid_n) / 2; }

GridField to_physical(const SpectralField& f, int samples) {
  const int dim = f.dim();
  const int m = samples == 0 ? f.grid_n() : samples;
  auto& fft = detail::real_fft(dim, m);
  const auto& map = detail::mode_map(dim, f.grid_n(), m);
  GridField out(dim, m, f.components());
  fftw_complex* half = fft.half_data();
  for (int c = 0; c < f.components(); ++c) {
    std::memset(half, 0, sizeof(fftw_complex) * static_cast<size_t>(fft.half_size()));
    const Complex* src = f.coeffs().col(c).data();
    for (std::size_t i = 0; i < map.scatter_src.size(); ++i) {
      const Complex value = src[map.scatter_src[i]];
      half[map.scatter_dst[i]][0] = value.real();
      half[map.scatter_dst[i]][1] = value.imag();
    }
    fft.backward();
    std::memcpy(out.values.col(c).data(), fft.real_data(), sizeof(double) * static_cast<size_t>(fft.real_size()));
  }
  return out;
}

SpectralField to_spectral(const GridField& samples, int modes) {
  if (samples.samples_per_dim <= 0 || modes <= 0 || modes % 2 != 0)
    throw ConfigError("to_spectral needs an even, positive mode count, got " + std::to_string(modes));
  const int dim = samples.dim;
  const int m = samples.samples_per_dim;
  auto& fft = detail::real_fft(dim, m);
  const auto& map = detail::mode_map(dim, modes, m);
  if (samples.points() != fft.real_size()) throw ShapeError("sample array does not match its grid size");
  SpectralField out(dim, modes, samples.components());
  const double scale = 1.0 / static_cast<double>(fft.real_size());
  const fftw_complex* half = fft.half_data();
  for (int c = 0; c < samples.components(); ++c) {
    std::memcpy(fft.real_data(), samples.values.col(c).data(), sizeof(double) * static_cast<size_t>(fft.real_size()));
    fft.forward();
    Complex* dst = out.coeffs().col(c).data();
    for (std::size_t i = 0; i < map.gather_src.size(); ++i) {
      const auto& h = half[map.gather_src[i]];
      dst[map.gather_dst[i]] = map.gather_conj[i] ? Complex(h[0], -h[1]) * scale : Complex(h[0], h[1]) * scale;
    }
  }
  return out;
}

SpectralField to_spectral(const GridField& samples) {
  if (samples.samples_per_dim % 2 != 0)
    throw ConfigError("grid size N must be even, got " + std::to_string(samples.samples_per_dim));
  return to_spectral(samples, samples.samples_per_dim);
}

SpectralField from_function(int dim, int grid_n, int components,
                            const std::function<void(const double* x, double* out)>& fn) {
  GridField g(dim, grid_n, components);
  std::vector<double> buffer(static_cast<size_t>(components));
  for (Eigen::Index p = 0; p < g.points(); ++p) {
    auto x = g.node(p);
    fn(x.data(), buffer.data());
    for (int c = 0; c < components; ++c) g.values(p, c) = buffer[static_cast<size_t>(c)];
  }
  return to_spectral(g);
}

SpectralField derivative(const SpectralField& f, int axis) {
  if (axis < 0 || axis >= f.dim()) throw ShapeError("derivative axis out of range");
  SpectralField out = SpectralField::zeros_like(f);
  const Eigen::ArrayXd k = f.grid().wavevectors().col(axis).cast<double>() * f.grid().resolved();
  for (int c = 0; c < f.components(); ++c) out.coeffs().col(c) = f.coeffs().col(c) * (Complex(0.0, 1.0) * k);
  return out;
}

SpectralField gradient(const SpectralField& f) {
  const int dim = f.dim();
  SpectralField out(f.grid_ptr(), f.components() * dim);
  for (int a = 0; a < dim; ++a) {
    const Eigen::ArrayXd k = f.grid().wavevectors().col(a).cast<double>() * f.grid().resolved();
    for (int c = 0; c < f.components(); ++c)
      out.coeffs().col(c * dim + a) = f.coeffs().col(c) * (Complex(0.0, 1.0) * k);
  }
  return out;
}

SpectralField divergence(const SpectralField& f) {
  if (!f.is_vector()) throw ShapeError("divergence needs a vector field");
  SpectralField out(f.grid_ptr(), 1);
  for (int a = 0; a < f.dim(); ++a) {
    const Eigen::ArrayXd k = f.grid().wavevectors().col(a).cast<double>() * f.grid().resolved();
    out.coeffs().col(0) += f.coeffs().col(a) * (Complex(0.0, 1.0) * k);
  }
  return out;
}

double hs_inner(const SpectralField& f, const SpectralField& g, double s) {
  if (!f.same_shape(g)) throw ShapeError("hs_inner: fields have different shapes");
  const Eigen::ArrayXd w = f.grid().sobolev_weight(s);
  double total = 0.0;
  for (int c = 0; c < f.components(); ++c)
    total += (w * (f.coeffs().col(c) * g.coeffs().col(c).conjugate()).real()).sum();
  return total;
}

double hs_norm(const SpectralField& f, double s) {
  const Eigen::ArrayXd w = f.grid().sobolev_weight(s);
  double total = 0.0;
  for (int c = 0; c < f.components(); ++c) total += (w * f.coeffs().col(c).abs2()).sum();
  return std::sqrt(total);
}

SpectralField pointwise_product(const SpectralField& f, const SpectralField& g) {
  require_same_grid(f, g, "pointwise_product");
  const int fc = f.components();
  const int gc = g.components();
  if (fc != gc && fc != 1 && gc != 1) throw ShapeError("pointwise_product: incompatible component counts");
  const int m = padded_size(f.grid_n());
  GridField pf = to_physical(f, m);
  GridField pg = to_physical(g, m);
  const int out_c = std::max(fc, gc);
  GridField prod(f.dim(), m, out_c);
  for (int c = 0; c < out_c; ++c)
    prod.values.col(c) = pf.values.col(fc == 1 ? 0 : c) * pg.values.col(gc == 1 ? 0 : c);
  return to_spectral(prod, f.grid_n());
}

SpectralField dot(const SpectralField& f, const SpectralField& g) {
  if (!f.same_shape(g)) throw ShapeError("dot: fields have different shapes");
  const int m = padded_size(f.grid_n());
  GridField pf = to_physical(f, m);
  GridField pg = to_physical(g, m);
  GridField prod(f.dim(), m, 1);
  prod.values.col(0) = (pf.values * pg.values).rowwise().sum();
  return to_spectral(prod, f.grid_n());
}

SpectralField leray_project(const SpectralField& f) {
  if (!f.is_vector()) throw ShapeError("leray_project needs a vector field with n components");
  const int dim = f.dim();
  const auto& grid = f.grid();
  const Eigen::ArrayXXd k = grid.wavevectors().cast<double>();
  const Eigen::ArrayXd inv_k2 = (grid.k_squared() > 0.0).select(grid.k_squared().inverse(), 0.0);
  Eigen::ArrayXcd kdot = Eigen::ArrayXcd::Zero(grid.size());
  for (int a = 0; a < dim; ++a) kdot += f.coeffs().col(a) * k.col(a);
  kdot *= inv_k2;
  SpectralField out = f;
  for (int a = 0; a < dim; ++a) out.coeffs().col(a) -= kdot * k.col(a);
  return out;
}

SpectralField truncate(const SpectralField& f, int cutoff) {
  SpectralField out = f;
  const Eigen::ArrayXd keep = (f.grid().k_max_abs() <= cutoff).cast<double>() * f.grid().resolved();
  for (int c = 0; c < f.components(); ++c) out.coeffs().col(c) *= keep;
  return out;
}

SpectralField gradient_potential(const SpectralField& f) {
  if (!f.is_vector()) throw ShapeError("gradient_potential needs a vector field");
  const auto& grid = f.grid();
  const Eigen::ArrayXXd k = grid.wavevectors().cast<double>();
  const Eigen::ArrayXd inv_k2 = (grid.k_squared() > 0.0).select(grid.k_squared().inverse(), 0.0);
  SpectralField out(f.grid_ptr(), 1);
  for (int a = 0; a < f.dim(); ++a) out.coeffs().col(0) += f.coeffs().col(a) * k.col(a);
  out.coeffs().col(0) *= Complex(0.0, -1.0) * inv_k2;
  return out;
}

double max_abs(const SpectralField& f) {
  GridField g = to_physical(f);
  return std::sqrt(g.values.square().rowwise().sum().maxCoeff());
}

Eigen::ArrayXd jacobian_determinant(const SpectralField& eta) {
  if (!eta.is_vector()) throw ShapeError("jacobian_determinant needs a vector displacement");
  return node_determinant(to_physical(gradient(eta)), eta.dim());
}

double max_det_deviation(const SpectralField& eta) {
  return (jacobian_determinant(eta) - 1.0).abs().maxCoeff();
}

Eigen::VectorXd mean(const SpectralField& f) {
  Eigen::VectorXd out(f.components());
  for (int c = 0; c < f.components(); ++c) out(c) = f.coeffs()(0, c).real();
  return out;
}

SpectralField constant_field(int dim, int grid_n, std::span<const double> values) {
  SpectralField out(dim, grid_n, static_cast<int>(values.size()));
  for (std::size_t c = 0; c < values.size(); ++c) out.coeffs()(0, static_cast<Eigen::Index>(c)) = values[c];
  return out;
}

}  // namespace eleuler
