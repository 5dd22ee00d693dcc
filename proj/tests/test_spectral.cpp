#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "circradon/spectral.hpp"

using namespace circradon;
using std::numbers::pi;

namespace {

Sinogram random_sinogram(const MeasurementGrid& g, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Sinogram s(g);
  for (double& v : s.values) v = u(rng);
  return s;
}

double chebyshev_by_recurrence(int n, double x) {
  double t0 = 1.0, t1 = x;
  if (n == 0) return t0;
  for (int k = 1; k < n; ++k) {
    const double t2 = 2.0 * x * t1 - t0;
    t0 = t1;
    t1 = t2;
  }
  return t1;
}

// integral_0^rho K_n(rho,u) F(u) (rho-u)^(-1/2) du with u = rho - t^2, which
// removes the singularity.
template <class F>
double volterra_oracle(int n, double rho, const F& f) {
  auto integrand = [&](double t) {
    const double u = rho - t * t;
    return 2.0 * kernel_K(n, rho, u, 1.0) * f(u);
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, std::sqrt(rho), 15, 1e-13);
}

std::vector<double> uniform_rho(int count, double top) {
  std::vector<double> r(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) r[static_cast<std::size_t>(k)] = top * (k + 1) / count;
  return r;
}

double condition_number(const Eigen::MatrixXd& a) {
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  return s(0) / s(s.size() - 1);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

TEST_CASE("angular Fourier coefficients of cos(3 phi)") {
  const MeasurementGrid g = MeasurementGrid::full();
  Sinogram s(g);
  for (int i = 0; i < g.n_rho; ++i) {
    for (int j = 0; j < g.n_phi; ++j) s.at(i, j) = std::cos(3.0 * g.phi(j));
  }
  const AngularSpectrum spec = angular_fourier(s);
  CHECK(spec.period == 128);
  CHECK(spec.max_mode() == 64);
  for (int n = -64; n < 64; ++n) {
    const double expect = std::abs(n) == 3 ? 0.5 : 0.0;
    for (int i = 0; i < g.n_rho; i += 17) {
      CHECK(std::abs(spec.mode(n).values[i] - Complex(expect)) < 1e-12);
    }
  }
  CHECK_THROWS_AS(spec.mode(64), std::out_of_range);
  CHECK_THROWS_AS(spec.mode(-65), std::out_of_range);
}

TEST_CASE("limited view is zero filled to the full period") {
  const MeasurementGrid g = MeasurementGrid::limited();
  Sinogram s(g);
  for (double& v : s.values) v = 1.0;
  const AngularSpectrum spec = angular_fourier(s);
  CHECK(spec.period == 128);
  CHECK(std::abs(spec.mode(0).values[0] - Complex(0.5)) < 1e-12);
  // Even modes other than zero vanish for a half-period box.
  CHECK(std::abs(spec.mode(2).values[5]) < 1e-12);
  CHECK(std::abs(spec.mode(1).values[5]) > 0.1);
}

TEST_CASE("DFT round trip and conjugate symmetry") {
  for (const MeasurementGrid& g : {MeasurementGrid::full(), MeasurementGrid::limited(), MeasurementGrid::full(32)}) {
    const Sinogram s = random_sinogram(g, 42);
    const AngularSpectrum spec = angular_fourier(s);
    const Sinogram back = inverse_angular_fourier(spec);
    double worst = 0.0;
    for (std::size_t k = 0; k < s.values.size(); ++k) worst = std::max(worst, std::abs(s.values[k] - back.values[k]));
    CHECK(worst < 1e-10);

    for (int n = 1; n < spec.max_mode(); ++n) {
      for (int i = 0; i < g.n_rho; ++i) {
        CHECK(std::abs(spec.mode(-n).values[i] - std::conj(spec.mode(n).values[i])) < 1e-12);
      }
    }
  }

  std::vector<Complex> buf(10);
  CHECK_THROWS_AS(dft_rows(buf, 3, 4, -1), std::invalid_argument);
}

TEST_CASE("Chebyshev polynomials") {
  for (int n = 0; n <= 20; ++n) {
    for (int k = 0; k <= 200; ++k) {
      const double x = -1.0 + k / 100.0;
      CHECK(chebyshev_T(n, x) == doctest::Approx(chebyshev_by_recurrence(n, x)).epsilon(1e-9).scale(1.0));
      CHECK(chebyshev_T(-n, x) == chebyshev_T(n, x));
    }
  }
  CHECK(chebyshev_T(3, 1.0 + 5e-10) == doctest::Approx(1.0));
  CHECK(chebyshev_T(4, -1.0 - 5e-10) == doctest::Approx(1.0));
  CHECK_THROWS_AS(chebyshev_T(2, 1.01), std::domain_error);
  CHECK_THROWS_AS(chebyshev_T(2, std::nan("")), std::domain_error);
}

TEST_CASE("Volterra kernel") {
  CHECK(kernel_K(0, 0.5, 0.25, 1.0) == doctest::Approx(1.5 / std::sqrt(2.109375)).epsilon(1e-14));
  CHECK(kernel_K(0, 0.5, 0.25, 1.0) == doctest::Approx(1.032796).epsilon(1e-6));
  for (int n = 1; n < 10; ++n) CHECK(kernel_K(-n, 0.6, 0.3, 1.0) == kernel_K(n, 0.6, 0.3, 1.0));
  // T_1 of the cosine argument 0.875 at the example point
  CHECK(kernel_K(1, 0.5, 0.25, 1.0) == doctest::Approx(0.875 * 1.5 / std::sqrt(2.109375)).epsilon(1e-14));
  CHECK_THROWS_AS(kernel_K(0, 1.2, 0.9, 1.0), std::domain_error);
  CHECK_THROWS_AS(kernel_K(0, 0.5, -0.5, 1.0), std::domain_error);
}

TEST_CASE("singular moments") {
  SUBCASE("closed-form examples") {
    const SingularMoments m = singular_moments(1.0, 0.0, 1.0);
    CHECK(m.m0 == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(m.m1 == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
    const SingularMoments q = singular_moments(0.5, 0.25, 0.5);
    CHECK(q.m0 == doctest::Approx(1.0).epsilon(1e-14));
  }

  SUBCASE("tanh-sinh oracle") {
    boost::math::quadrature::tanh_sinh<double> ts;
    Rng rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 50; ++k) {
      const double rho = 0.05 + 0.9 * u(rng);
      const double a = rho * u(rng);
      const double b = k % 3 == 0 ? rho : a + (rho - a) * u(rng);
      const SingularMoments m = singular_moments(rho, a, b);
      // Integrate in the distance to rho so the singular end sits at zero.
      const double m0 = ts.integrate([](double t) { return 1.0 / std::sqrt(t); }, rho - b, rho - a);
      const double m1 = ts.integrate([rho](double t) { return (rho - t) / std::sqrt(t); }, rho - b, rho - a);
      CHECK(m.m0 == doctest::Approx(m0).epsilon(1e-6));
      CHECK(m.m1 == doctest::Approx(m1).epsilon(1e-6));
    }
  }

  CHECK_THROWS_AS(singular_moments(0.5, 0.0, 0.6), std::domain_error);
  CHECK_THROWS_AS(singular_moments(0.5, 0.3, 0.3), std::domain_error);
}

TEST_CASE("product trapezoid weights") {
  const std::vector<double> rho = MeasurementGrid::full().rho_samples();
  const VolterraMatrix ones = assemble_with_kernel([](double, double) { return 1.0; }, rho);
  CHECK(ones.weights.rows() == 128);
  CHECK(ones.weights.cols() == 129);
  for (int i = 0; i < 128; ++i) {
    CHECK(ones.weights.row(i).sum() == doctest::Approx(2.0 * std::sqrt(rho[i])).epsilon(1e-12));
  }

  SUBCASE("linear functions are integrated exactly") {
    Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(ones.u.data(), static_cast<Eigen::Index>(ones.u.size()));
    const Eigen::VectorXd got = ones.weights * u;
    for (int i = 0; i < 128; ++i) {
      CHECK(got(i) == doctest::Approx(singular_moments(rho[i], 0.0, rho[i]).m1).epsilon(1e-12));
    }
  }

  const std::vector<double> nodes = {0.0, 0.2, 0.5, 0.7};
  const std::vector<double> w = product_trapezoid_weights(0.5, nodes);
  CHECK(w[3] == 0.0);
  CHECK(w[0] + w[1] + w[2] == doctest::Approx(2.0 * std::sqrt(0.5)).epsilon(1e-14));
}

TEST_CASE("assembled operator") {
  const std::vector<double> rho = MeasurementGrid::full().rho_samples();
  const VolterraMatrix a = assemble_matrix(0, rho, 1.0);

  SUBCASE("lower triangular system") {
    const Eigen::MatrixXd sys = a.system();
    CHECK(sys.rows() == 128);
    CHECK(sys.cols() == 128);
    for (int i = 0; i < 128; ++i) {
      for (int j = i + 1; j < 128; ++j) CHECK(sys(i, j) == 0.0);
      CHECK(sys(i, i) > 0.0);
    }
    for (int j = 2; j < 129; ++j) CHECK(a.weights(0, j) == 0.0);
    CHECK(a.weights(0, 0) > 0.0);
    CHECK(a.weights(0, 1) > 0.0);
    const std::vector<double> r = a.solution_radii();
    CHECK(r.front() == doctest::Approx(1.0 - rho.front()));
    CHECK(r.back() == doctest::Approx(1.0 - rho.back()));
  }

  SUBCASE("agrees with adaptive quadrature of the mode-0 integral") {
    auto f = [](double u) { return std::cos(3.0 * u) + u * u; };
    Eigen::VectorXd fu(static_cast<Eigen::Index>(a.u.size()));
    for (std::size_t j = 0; j < a.u.size(); ++j) fu(static_cast<Eigen::Index>(j)) = f(a.u[j]);
    const Eigen::VectorXd got = a.weights * fu;
    for (int i = 0; i < 128; ++i) {
      if (rho[i] < 0.1 || rho[i] > 0.9) continue;
      CHECK(got(i) == doctest::Approx(volterra_oracle(0, rho[i], f)).epsilon(0.01));
    }
  }

  SUBCASE("error shrinks under refinement") {
    auto f = [](double u) { return std::cos(3.0 * u) + u * u; };
    std::vector<double> errs;
    for (int count : {32, 64, 128}) {
      const std::vector<double> r = uniform_rho(count, 0.9);
      const VolterraMatrix m = assemble_matrix(2, r, 1.0);
      Eigen::VectorXd fu(static_cast<Eigen::Index>(m.u.size()));
      for (std::size_t j = 0; j < m.u.size(); ++j) fu(static_cast<Eigen::Index>(j)) = f(m.u[j]);
      const Eigen::VectorXd got = m.weights * fu;
      double e = 0.0;
      for (int q = 1; q <= 4; ++q) {
        const int i = q * count / 4 - 1;  // rho = 0.225 q on every grid
        e = std::max(e, std::abs(got(i) - volterra_oracle(2, r[static_cast<std::size_t>(i)], f)));
      }
      errs.push_back(e);
    }
    CHECK(errs[1] < 0.5 * errs[0]);
    CHECK(errs[2] < 0.5 * errs[1]);
  }

  SUBCASE("depends on |n| only") {
    for (int n : {1, 5, 40}) {
      CHECK(assemble_matrix(-n, rho, 1.0).weights == assemble_matrix(n, rho, 1.0).weights);
    }
  }

  SUBCASE("invalid grids") {
    const std::vector<double> bad = {0.2, 0.1};
    CHECK_THROWS_AS(assemble_matrix(0, bad, 1.0), std::invalid_argument);
    const std::vector<double> outside = {0.5, 1.0};
    CHECK_THROWS_AS(assemble_matrix(0, outside, 1.0), std::invalid_argument);
  }

  SUBCASE("dump round trip") {
    const VolterraMatrix m = assemble_matrix(7, rho, 1.0);
    std::stringstream ss;
    write_matrix_dump(ss, m);
    const VolterraMatrix back = read_matrix_dump(ss);
    CHECK(back.n == 7);
    CHECK(back.radius == 1.0);
    CHECK(back.weights == m.weights);

    std::stringstream truncated(ss.str().substr(0, ss.str().size() / 2));
    CHECK_THROWS(read_matrix_dump(truncated));
    std::stringstream bad("matrix n=1 rows=1 cols=1 R=1\n");
    CHECK_THROWS(read_matrix_dump(bad));
  }
}

TEST_CASE("conditioning grows with the mode number") {
  const std::vector<double> rho = MeasurementGrid::full().rho_samples();
  std::vector<double> cond;
  for (int n = 0; n <= 32; ++n) cond.push_back(condition_number(assemble_matrix(n, rho, 1.0).system()));
  auto bucket = [&](int lo, int hi) {
    return median(std::vector<double>(cond.begin() + lo, cond.begin() + hi));
  };
  const double b0 = bucket(0, 2), b1 = bucket(2, 6), b2 = bucket(6, 14), b3 = bucket(14, 33);
  CHECK(b0 < b1);
  CHECK(b1 < b2);
  CHECK(b2 < b3);
  CHECK(*std::max_element(cond.begin(), cond.end()) > 1e6);
}
