#pragma once

#include "eleuler/spectral_field.hpp"

#include <functional>

namespace eleuler {

/// Samples per axis used for dealiased quadratic products (3/2 zero padding).
int padded_size(int grid_n);

/// Evaluates f on a samples^n grid (samples = 0 means the native N grid).
/// Interpolation is exact for the band-limited field.
GridField to_physical(const SpectralField& f, int samples = 0);

/// Forward transform of physical samples; the mode grid equals the sample
/// grid. Nyquist modes are zeroed. Odd grids are a configuration error.
SpectralField to_spectral(const GridField& samples);

/// Forward transform keeping only the modes of an N-mode grid (N <= samples).
SpectralField to_spectral(const GridField& samples, int modes);

/// Samples fn(x, out) at the native grid nodes and transforms.
SpectralField from_function(int dim, int grid_n, int components,
                            const std::function<void(const double* x, double* out)>& fn);

/// i k_axis coeff(k).
SpectralField derivative(const SpectralField& f, int axis);

/// Column c * dim + a holds d f_c / d x_a.
SpectralField gradient(const SpectralField& f);

/// Scalar sum_a d f_a / d x_a of a vector field.
SpectralField divergence(const SpectralField& f);

/// Re sum_k (1 + |k|^2)^s sum_c f_c(k) conj(g_c(k)).
double hs_inner(const SpectralField& f, const SpectralField& g, double s);
double hs_norm(const SpectralField& f, double s);
inline double l2_norm(const SpectralField& f) { return hs_norm(f, 0.0); }

/// Dealiased pointwise product. Equal component counts multiply
/// componentwise; a scalar factor multiplies every component of the other.
SpectralField pointwise_product(const SpectralField& f, const SpectralField& g);

/// Dealiased sum_c f_c g_c.
SpectralField dot(const SpectralField& f, const SpectralField& g);

/// (I - k k^T / |k|^2) per nonzero mode; the mean mode is left unchanged.
SpectralField leray_project(const SpectralField& f);

/// Zeroes every mode with max_i |k_i| > cutoff.
SpectralField truncate(const SpectralField& f, int cutoff);

/// Scalar potential phi (zero mean) with grad phi equal to the gradient part of f.
SpectralField gradient_potential(const SpectralField& f);

/// Max over grid nodes of the Euclidean norm of the (vector) field.
double max_abs(const SpectralField& f);

/// Sup norm over nodes of det(I + grad eta) - 1.
double max_det_deviation(const SpectralField& eta);

/// Grid values of det(I + grad eta) on the native nodes.
Eigen::ArrayXd jacobian_determinant(const SpectralField& eta);

/// Mean (k = 0) coefficient of each component.
Eigen::VectorXd mean(const SpectralField& f);

/// Constant field with the given per-component values.
SpectralField constant_field(int dim, int grid_n, std::span<const double> values);

}  // namespace eleuler
