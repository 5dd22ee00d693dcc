#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "circradon/radon.hpp"

namespace circradon {

using Complex = std::complex<double>;

/// Angular Fourier coefficient g_n(rho_i) for one mode n over the rho grid.
struct ModeCoefficients {
  int n = 0;
  std::vector<Complex> values;
};

/// All modes of a sinogram. `period` is the number of samples covering one
/// full 2*pi turn: n_phi for a full view, 2*n_phi for a limited (half) view,
/// whose missing half is zero filled.
struct AngularSpectrum {
  MeasurementGrid grid;
  int period = 0;
  std::vector<ModeCoefficients> modes;  // n = -period/2 .. period/2 - 1

  int max_mode() const { return period / 2; }
  const ModeCoefficients& mode(int n) const;
};

/// g_n(rho_i) = (1/period) * sum_j g(rho_i, phi_j) exp(-i n phi_j).
AngularSpectrum angular_fourier(const Sinogram& s);

/// Synthesis g(rho_i, phi_j) = sum_n g_n(rho_i) exp(i n phi_j) on the
/// spectrum's own grid. The imaginary residual is discarded.
Sinogram inverse_angular_fourier(const AngularSpectrum& spec);

/// In-place batched complex DFT along contiguous rows. `sign` is -1 for the
/// analysis direction and +1 for synthesis; no normalization is applied.
void dft_rows(std::span<Complex> data, int rows, int length, int sign);

/// Chebyshev polynomial of the first kind through cos(n arccos x). Arguments
/// within 1e-9 of [-1, 1] are clamped; further out throws std::domain_error.
double chebyshev_T(int n, double x);

inline constexpr double kChebyshevClampTolerance = 1e-9;

/// Volterra kernel of the mode-n problem on a disk of radius R.
double kernel_K(int n, double rho, double u, double R);

struct SingularMoments {
  double m0 = 0.0;  // integral of (rho-u)^(-1/2)
  double m1 = 0.0;  // integral of u (rho-u)^(-1/2)
};

/// Closed-form moments of the weak singularity over [u_lo, u_hi], u_hi <= rho.
SingularMoments singular_moments(double rho, double u_lo, double u_hi);

/// Product-trapezoidal weights for integral_0^rho h(u) (rho-u)^(-1/2) du with h
/// piecewise linear on `u_nodes`. `u_nodes` must start at 0 and contain rho.
/// Weights are returned for every node; nodes beyond rho get zero.
std::vector<double> product_trapezoid_weights(double rho, std::span<const double> u_nodes);

/// Discretized mode-n Volterra operator. Column j of `weights` corresponds to
/// u_j of the u-grid {0} U rho-grid, so row i touches columns 0..i+1.
struct VolterraMatrix {
  int n = 0;
  double radius = 1.0;
  std::vector<double> u;
  Eigen::MatrixXd weights;

  /// Square lower-triangular system on the nodes u_j = rho_j. The u = 0
  /// column multiplies F_n(0) = f_n(R), which vanishes for phantoms supported
  /// in the open disk, and is dropped.
  Eigen::MatrixXd system() const { return weights.rightCols(weights.cols() - 1); }

  /// Radius r = R - u_j at which solution entry j of `system()` lives.
  std::vector<double> solution_radii() const;
};

/// u-grid used by assembly: {0} followed by the rho samples.
std::vector<double> u_grid(std::span<const double> rho);

/// Assembles the product-trapezoidal operator for an arbitrary kernel k(rho, u).
template <class Kernel>
VolterraMatrix assemble_with_kernel(const Kernel& kernel, std::span<const double> rho) {
  VolterraMatrix m;
  m.u = u_grid(rho);
  const auto n_rho = static_cast<Eigen::Index>(rho.size());
  m.weights = Eigen::MatrixXd::Zero(n_rho, n_rho + 1);
  for (Eigen::Index i = 0; i < n_rho; ++i) {
    const auto nodes = std::span<const double>(m.u).first(static_cast<std::size_t>(i) + 2);
    const std::vector<double> w = product_trapezoid_weights(rho[i], nodes);
    for (Eigen::Index j = 0; j <= i + 1; ++j) {
      m.weights(i, j) = w[static_cast<std::size_t>(j)] * kernel(rho[i], m.u[static_cast<std::size_t>(j)]);
    }
  }
  return m;
}

VolterraMatrix assemble_matrix(int n, std::span<const double> rho, double R);

/// Debug dump: one text header line `volterra n=<n> rows=<r> cols=<c> R=<R>`
/// followed by rows*cols little-endian float64 values, row-major.
void write_matrix_dump(std::ostream& os, const VolterraMatrix& m);
VolterraMatrix read_matrix_dump(std::istream& is);

}  // namespace circradon
