#include "circradon/radon.hpp"

#include <algorithm>
#include <array>
#include <complex>
#include <span>
#include <string>

#include <Eigen/Eigenvalues>

namespace circradon {

namespace {

using Complex = std::complex<double>;

struct EllipseFrame {
  double cx, cy, cos_t, sin_t, inv_a, inv_b, reach, weight;

  explicit EllipseFrame(const Ellipse& e, double scale)
      : cx(e.cx),
        cy(e.cy),
        cos_t(std::cos(e.tilt)),
        sin_t(std::sin(e.tilt)),
        inv_a(1.0 / e.a),
        inv_b(1.0 / e.b),
        reach(std::max(e.a, e.b)),
        weight(scale * e.intensity) {}

  // Negative inside, positive outside.
  double signed_level(double x, double y) const {
    const double dx = x - cx;
    const double dy = y - cy;
    const double u = (cos_t * dx + sin_t * dy) * inv_a;
    const double v = (-sin_t * dx + cos_t * dy) * inv_b;
    return u * u + v * v - 1.0;
  }
};

// Angles beta in (0, span) past `start` at which the circle of radius rho
// about (ccx, ccy) crosses the ellipse boundary. In the ellipse frame the
// boundary condition along the circle is a trigonometric polynomial of degree
// two; its roots are the unit-modulus roots of a quartic in exp(i gamma).
std::vector<double> boundary_crossings(const EllipseFrame& e, double ccx, double ccy, double rho,
                                       double start, double span) {
  const double ox = ccx - e.cx;
  const double oy = ccy - e.cy;
  const double x0 = e.cos_t * ox + e.sin_t * oy;
  const double y0 = -e.sin_t * ox + e.cos_t * oy;
  const double ia2 = e.inv_a * e.inv_a;
  const double ib2 = e.inv_b * e.inv_b;
  const double A = 0.5 * rho * rho * (ia2 - ib2);
  const double C = 2.0 * x0 * rho * ia2;
  const double D = 2.0 * y0 * rho * ib2;
  const double E = x0 * x0 * ia2 + y0 * y0 * ib2 + 0.5 * rho * rho * (ia2 + ib2) - 1.0;

  std::array<Complex, 5> c = {Complex(0.5 * A), Complex(0.5 * C, -0.5 * D), Complex(E),
                              Complex(0.5 * C, 0.5 * D), Complex(0.5 * A)};
  double scale = 0.0;
  for (const Complex& v : c) scale = std::max(scale, std::abs(v));
  std::span<const Complex> poly(c);
  if (std::abs(c[0]) <= 1e-14 * scale) poly = poly.subspan(1, 3);  // circular ellipse
  if (std::abs(poly[0]) <= 1e-14 * scale) return {};  // concentric circles never cross

  const int deg = static_cast<int>(poly.size()) - 1;
  using Companion = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;
  Companion m = Companion::Zero(deg, deg);
  for (int k = 0; k < deg; ++k) m(0, k) = -poly[static_cast<std::size_t>(k) + 1] / poly[0];
  for (int k = 1; k < deg; ++k) m(k, k - 1) = 1.0;
  const Eigen::ComplexEigenSolver<Companion> solver(m, false);

  auto q = [&](double g) { return E + C * std::cos(g) + D * std::sin(g) + A * std::cos(2.0 * g); };
  auto dq = [&](double g) { return -C * std::sin(g) + D * std::cos(g) - 2.0 * A * std::sin(2.0 * g); };

  const double tilt = std::atan2(e.sin_t, e.cos_t);
  std::vector<double> out;
  for (const Complex& z : solver.eigenvalues()) {
    if (std::abs(std::abs(z) - 1.0) > 1e-6) continue;
    double g = std::arg(z);
    for (int it = 0; it < 3; ++it) {
      const double d = dq(g);
      if (std::abs(d) < 1e-12) break;
      g -= q(g) / d;
    }
    double t = std::fmod(g + tilt - start, 2.0 * std::numbers::pi);
    if (t < 0.0) t += 2.0 * std::numbers::pi;
    if (t > 0.0 && t < span) out.push_back(t);
  }
  return out;
}

}  // namespace

MeasurementGrid MeasurementGrid::full(int n) {
  MeasurementGrid g;
  g.view = View::Full;
  g.n_rho = n;
  g.n_phi = n;
  g.phi_span = 2.0 * std::numbers::pi;
  return g;
}

MeasurementGrid MeasurementGrid::limited(int n) {
  MeasurementGrid g;
  g.view = View::Limited;
  g.n_rho = n;
  g.n_phi = n;
  g.phi_span = std::numbers::pi;
  return g;
}

std::vector<double> MeasurementGrid::rho_samples() const {
  std::vector<double> r(n_rho);
  for (int i = 0; i < n_rho; ++i) r[i] = rho(i);
  return r;
}

const char* to_string(View v) { return v == View::Full ? "full" : "limited"; }

View parse_view(const std::string& s) {
  if (s == "full") return View::Full;
  if (s == "limited") return View::Limited;
  throw std::invalid_argument("unknown view '" + s + "' (expected full|limited)");
}

double Sinogram::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double arc_halfwidth(double rho, double R) {
  if (!(rho >= 0.0) || rho > 2.0 * R) {
    throw std::domain_error("arc_halfwidth: radius outside [0, 2R]");
  }
  return std::acos(std::min(1.0, rho / (2.0 * R)));
}

Sinogram forward_transform(const EllipsePhantom& p, const MeasurementGrid& grid) {
  Sinogram s(grid);
  std::vector<EllipseFrame> frames;
  frames.reserve(p.ellipses.size());
  for (const Ellipse& e : p.ellipses) frames.emplace_back(e, p.intensity_scale);

  const double R = grid.radius;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < grid.n_rho; ++i) {
    const double rho = grid.rho(i);
    const double span = 2.0 * arc_halfwidth(rho, R);
    for (int j = 0; j < grid.n_phi; ++j) {
      const double phi = grid.phi(j);
      const double ccx = R * std::cos(phi);
      const double ccy = R * std::sin(phi);
      const double start = phi + std::numbers::pi - 0.5 * span;

      double acc = 0.0;
      for (const EllipseFrame& e : frames) {
        if (e.weight == 0.0) continue;
        const double dist = std::hypot(ccx - e.cx, ccy - e.cy);
        if (dist - rho > e.reach || rho - dist > e.reach) continue;

        std::vector<double> cuts = boundary_crossings(e, ccx, ccy, rho, start, span);
        cuts.push_back(0.0);
        cuts.push_back(span);
        std::sort(cuts.begin(), cuts.end());
        double inside = 0.0;
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
          const double len = cuts[k + 1] - cuts[k];
          if (len <= 0.0) continue;
          const double beta = start + 0.5 * (cuts[k] + cuts[k + 1]);
          if (e.signed_level(ccx + rho * std::cos(beta), ccy + rho * std::sin(beta)) <= 0.0) inside += len;
        }
        acc += e.weight * inside;
      }
      s.at(i, j) = acc * rho;
    }
  }
  return s;
}

Sinogram add_noise(const Sinogram& s, double level_percent, Rng& rng) {
  if (!(level_percent >= 0.0)) throw std::invalid_argument("add_noise: negative noise level");
  Sinogram out = s;
  out.noise_level_percent = level_percent;
  if (level_percent == 0.0) return out;
  const double scale = noise_sigma(level_percent) * s.max_abs();
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : out.values) v += scale * normal(rng);
  return out;
}

}  // namespace circradon
