#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "circradon/phantom.hpp"
#include "circradon/random.hpp"

namespace circradon {

enum class View { Full, Limited };

/// Sampling of the (rho, phi) measurement space. Radii are cell centered in
/// (0, rho_max), angles start at zero and cover [0, phi_span).
struct MeasurementGrid {
  View view = View::Full;
  int n_rho = 128;
  int n_phi = 128;
  double rho_max = 1.0;
  double phi_span = 2.0 * std::numbers::pi;
  double radius = 1.0;  // acquisition radius R

  static MeasurementGrid full(int n = 128);
  static MeasurementGrid limited(int n = 64);

  double rho(int i) const { return (i + 0.5) * rho_max / n_rho; }
  double phi(int j) const { return j * phi_span / n_phi; }
  std::vector<double> rho_samples() const;

  friend bool operator==(const MeasurementGrid&, const MeasurementGrid&) = default;
};

const char* to_string(View v);
View parse_view(const std::string& s);

/// g(rho_i, phi_j) stored row-major with rho as the outer index.
struct Sinogram {
  MeasurementGrid grid;
  std::vector<double> values;
  double noise_level_percent = 0.0;

  Sinogram() = default;
  explicit Sinogram(const MeasurementGrid& g)
      : grid(g), values(static_cast<std::size_t>(g.n_rho) * g.n_phi, 0.0) {}

  double& at(int i, int j) { return values[static_cast<std::size_t>(i) * grid.n_phi + j]; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * grid.n_phi + j]; }
  double max_abs() const;
};

/// Quadrature controls for the arc integrals. Nodes per arc are
/// max(min_nodes, ceil(arc_length / node_spacing)).
struct ArcQuadrature {
  double node_spacing = 1.0 / 128.0;
  int min_nodes = 32;

  int nodes_for(double arc_length) const {
    return std::max(min_nodes, static_cast<int>(std::ceil(arc_length / node_spacing)));
  }
};

/// Half-angle, about the inward direction, of the part of a circle of radius
/// rho centered on the acquisition circle that lies inside the disk.
/// Throws std::domain_error for rho < 0 or rho > 2R.
double arc_halfwidth(double rho, double R);

/// Circular Radon transform of an ellipse phantom. Each ellipse contributes
/// intensity times the length of the arc inside it, with the arc/ellipse
/// crossings found in closed form.
Sinogram forward_transform(const EllipsePhantom& p, const MeasurementGrid& grid);

/// Circular Radon transform of an arbitrary field f(x, y) by composite
/// midpoint quadrature along the interior arc.
template <class Field>
Sinogram forward_transform_field(const Field& f, const MeasurementGrid& grid,
                                 const ArcQuadrature& quad = {}) {
  Sinogram s(grid);
  const double R = grid.radius;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < grid.n_rho; ++i) {
    const double rho = grid.rho(i);
    const double half = arc_halfwidth(rho, R);
    const int nodes = quad.nodes_for(2.0 * rho * half);
    const double step = 2.0 * half / nodes;
    for (int j = 0; j < grid.n_phi; ++j) {
      const double phi = grid.phi(j);
      const double cx = R * std::cos(phi);
      const double cy = R * std::sin(phi);
      const double start = phi + std::numbers::pi - half;
      double acc = 0.0;
      for (int k = 0; k < nodes; ++k) {
        const double beta = start + (k + 0.5) * step;
        acc += f(cx + rho * std::cos(beta), cy + rho * std::sin(beta));
      }
      s.at(i, j) = acc * rho * step;
    }
  }
  return s;
}

/// Adds i.i.d. N(0, sigma * max|g|) noise, sigma = sqrt(level_percent / 100).
Sinogram add_noise(const Sinogram& s, double level_percent, Rng& rng);

inline double noise_sigma(double level_percent) { return std::sqrt(level_percent / 100.0); }

}  // namespace circradon
