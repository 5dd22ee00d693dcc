#include "circradon/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <fftw3.h>

namespace circradon {

namespace {

// FFTW planning is not thread safe; execution of distinct plans is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

void dft_rows(std::span<Complex> data, int rows, int length, int sign) {
  if (data.size() != static_cast<std::size_t>(rows) * length) {
    throw std::invalid_argument("dft_rows: buffer size does not match rows*length");
  }
  if (rows == 0 || length == 0) return;
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_many_dft(1, &length, rows, buf, nullptr, 1, length, buf, nullptr, 1, length,
                              sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw std::runtime_error("dft_rows: FFTW planning failed");
  fftw_execute(plan);
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

const ModeCoefficients& AngularSpectrum::mode(int n) const {
  const int half = max_mode();
  if (n < -half || n >= half) throw std::out_of_range("AngularSpectrum: mode out of range");
  return modes[static_cast<std::size_t>(n + half)];
}

AngularSpectrum angular_fourier(const Sinogram& s) {
  const MeasurementGrid& g = s.grid;
  AngularSpectrum spec;
  spec.grid = g;
  spec.period = g.view == View::Full ? g.n_phi : 2 * g.n_phi;
  const int L = spec.period;

  std::vector<Complex> buf(static_cast<std::size_t>(g.n_rho) * L, Complex{});
  for (int i = 0; i < g.n_rho; ++i) {
    for (int j = 0; j < g.n_phi; ++j) buf[static_cast<std::size_t>(i) * L + j] = s.at(i, j);
  }
  dft_rows(buf, g.n_rho, L, -1);

  const int half = L / 2;
  spec.modes.resize(static_cast<std::size_t>(L));
  for (int n = -half; n < half; ++n) {
    ModeCoefficients& mc = spec.modes[static_cast<std::size_t>(n + half)];
    mc.n = n;
    mc.values.resize(static_cast<std::size_t>(g.n_rho));
    const int k = ((n % L) + L) % L;
    for (int i = 0; i < g.n_rho; ++i) {
      mc.values[static_cast<std::size_t>(i)] = buf[static_cast<std::size_t>(i) * L + k] / double(L);
    }
  }
  return spec;
}

Sinogram inverse_angular_fourier(const AngularSpectrum& spec) {
  const MeasurementGrid& g = spec.grid;
  const int L = spec.period;
  std::vector<Complex> buf(static_cast<std::size_t>(g.n_rho) * L, Complex{});
  for (const ModeCoefficients& mc : spec.modes) {
    const int k = ((mc.n % L) + L) % L;
    for (int i = 0; i < g.n_rho; ++i) {
      buf[static_cast<std::size_t>(i) * L + k] = mc.values[static_cast<std::size_t>(i)];
    }
  }
  dft_rows(buf, g.n_rho, L, +1);
  Sinogram s(g);
  for (int i = 0; i < g.n_rho; ++i) {
    for (int j = 0; j < g.n_phi; ++j) s.at(i, j) = buf[static_cast<std::size_t>(i) * L + j].real();
  }
  return s;
}

double chebyshev_T(int n, double x) {
  if (std::abs(x) > 1.0 + kChebyshevClampTolerance || std::isnan(x)) {
    throw std::domain_error("chebyshev_T: argument " + std::to_string(x) + " outside [-1, 1]");
  }
  const double c = std::clamp(x, -1.0, 1.0);
  return std::cos(std::abs(n) * std::acos(c));
}

double kernel_K(int n, double rho, double u, double R) {
  const double radicand = (u + rho) * (2.0 * R + rho - u) * (2.0 * R - rho - u);
  if (!(radicand > 0.0)) {
    throw std::domain_error("kernel_K: (rho, u) outside the Volterra triangle");
  }
  const double ru = R - u;
  const double arg = (ru * ru + R * R - rho * rho) / (2.0 * R * ru);
  return 4.0 * rho * ru * chebyshev_T(n, arg) / std::sqrt(radicand);
}

SingularMoments singular_moments(double rho, double u_lo, double u_hi) {
  if (u_hi > rho) throw std::domain_error("singular_moments: upper limit beyond rho");
  if (!(u_lo < u_hi)) throw std::domain_error("singular_moments: empty interval");
  const double s_lo = std::sqrt(rho - u_lo);
  const double s_hi = std::sqrt(rho - u_hi);
  // Antiderivative of u (rho-u)^(-1/2) is -(2/3) sqrt(rho-u) (2 rho + u).
  const auto g1 = [rho](double s, double u) { return -(2.0 / 3.0) * s * (2.0 * rho + u); };
  return {2.0 * (s_lo - s_hi), g1(s_hi, u_hi) - g1(s_lo, u_lo)};
}

std::vector<double> product_trapezoid_weights(double rho, std::span<const double> u_nodes) {
  std::vector<double> w(u_nodes.size(), 0.0);
  for (std::size_t j = 0; j + 1 < u_nodes.size(); ++j) {
    const double lo = u_nodes[j];
    const double hi = u_nodes[j + 1];
    if (hi > rho) break;
    const SingularMoments m = singular_moments(rho, lo, hi);
    const double h = hi - lo;
    w[j] += (hi * m.m0 - m.m1) / h;
    w[j + 1] += (m.m1 - lo * m.m0) / h;
  }
  return w;
}

std::vector<double> u_grid(std::span<const double> rho) {
  std::vector<double> u;
  u.reserve(rho.size() + 1);
  u.push_back(0.0);
  u.insert(u.end(), rho.begin(), rho.end());
  return u;
}

std::vector<double> VolterraMatrix::solution_radii() const {
  std::vector<double> r;
  r.reserve(u.size() - 1);
  for (std::size_t j = 1; j < u.size(); ++j) r.push_back(radius - u[j]);
  return r;
}

VolterraMatrix assemble_matrix(int n, std::span<const double> rho, double R) {
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (!(rho[i] > 0.0 && rho[i] < R) || (i > 0 && !(rho[i] > rho[i - 1]))) {
      throw std::invalid_argument("assemble_matrix: rho grid must increase strictly inside (0, R)");
    }
  }
  VolterraMatrix m = assemble_with_kernel(
      [n, R](double r, double u) { return kernel_K(n, r, u, R); }, rho);
  m.n = n;
  m.radius = R;
  return m;
}

void write_matrix_dump(std::ostream& os, const VolterraMatrix& m) {
  os << "volterra n=" << m.n << " rows=" << m.weights.rows() << " cols=" << m.weights.cols()
     << " R=" << m.radius << '\n';
  for (Eigen::Index i = 0; i < m.weights.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.weights.cols(); ++j) {
      auto bits = std::bit_cast<std::uint64_t>(m.weights(i, j));
      char bytes[8];
      for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
      os.write(bytes, 8);
    }
  }
}

VolterraMatrix read_matrix_dump(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw std::runtime_error("matrix dump: missing header");
  VolterraMatrix m;
  long rows = 0, cols = 0;
  std::istringstream hs(header);
  std::string tag;
  hs >> tag;
  if (tag != "volterra") throw std::runtime_error("matrix dump: bad header");
  for (std::string field; hs >> field;) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw std::runtime_error("matrix dump: bad header field");
    const std::string key = field.substr(0, eq);
    const std::string val = field.substr(eq + 1);
    if (key == "n") m.n = std::stoi(val);
    else if (key == "rows") rows = std::stol(val);
    else if (key == "cols") cols = std::stol(val);
    else if (key == "R") m.radius = std::stod(val);
  }
  m.weights.resize(rows, cols);
  for (long i = 0; i < rows; ++i) {
    for (long j = 0; j < cols; ++j) {
      unsigned char bytes[8];
      if (!is.read(reinterpret_cast<char*>(bytes), 8)) {
        throw std::runtime_error("matrix dump: truncated payload");
      }
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) bits |= std::uint64_t(bytes[b]) << (8 * b);
      m.weights(i, j) = std::bit_cast<double>(bits);
    }
  }
  return m;
}

}  // namespace circradon
