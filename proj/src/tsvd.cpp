#include "circradon/tsvd.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include <Eigen/SVD>

namespace circradon {

int TsvdConfig::effective_rank(int n_rho) const {
  const int k = rank_rule == RankRule::HalfRank ? n_rho / 2 : fixed_rank;
  return std::clamp(k, 1, n_rho);
}

TsvdConfig parse_rank(const std::string& s) {
  if (s == "half") return TsvdConfig::half_rank();
  int k = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), k);
  if (ec != std::errc{} || ptr != s.data() + s.size() || k < 1) {
    throw std::invalid_argument("rank must be 'half' or a positive integer, got '" + s + "'");
  }
  return TsvdConfig::fixed(k);
}

Eigen::MatrixXd truncated_pseudo_inverse(const Eigen::MatrixXd& A, int rank, int mode) {
  const auto dim = std::min(A.rows(), A.cols());
  if (rank < 1 || rank > dim) {
    throw std::invalid_argument("tsvd: rank must lie in [1, min(rows, cols)]");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw TsvdError("tsvd: SVD did not converge for mode " + std::to_string(mode), mode);
  }
  const Eigen::VectorXd& s = svd.singularValues();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  for (int k = 0; k < rank; ++k) {
    if (s(k) > 0.0) inv(k) = 1.0 / s(k);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Eigen::VectorXcd tsvd_solve(const Eigen::MatrixXd& A, const Eigen::VectorXcd& b, int rank,
                            int mode) {
  const Eigen::MatrixXd P = truncated_pseudo_inverse(A, rank, mode);
  Eigen::VectorXcd x(P.rows());
  x.real() = P * b.real();
  x.imag() = P * b.imag();
  return x;
}

ImageGrid polar_to_cartesian(const PolarField& f, int side, double R) {
  ImageGrid img(side);
  const auto nr = static_cast<int>(f.radii.size());
  if (nr == 0 || f.n_theta == 0) return img;
  const double r_min = f.radii.front();
  const double r_max = f.radii.back();
  const double dtheta = 2.0 * std::numbers::pi / f.n_theta;

  for (int i = 0; i < side; ++i) {
    const double y = ImageGrid::pixel_y(i, side);
    for (int j = 0; j < side; ++j) {
      const double x = ImageGrid::pixel_x(j, side);
      const double r = std::hypot(x, y);
      if (r > R || r < r_min) continue;

      int r0 = nr - 1;
      double tr = 0.0;
      if (r < r_max) {
        const auto it = std::upper_bound(f.radii.begin(), f.radii.end(), r);
        r0 = static_cast<int>(it - f.radii.begin()) - 1;
        tr = (r - f.radii[r0]) / (f.radii[r0 + 1] - f.radii[r0]);
      }
      const int r1 = std::min(r0 + 1, nr - 1);

      double theta = std::atan2(y, x);
      if (theta < 0.0) theta += 2.0 * std::numbers::pi;
      const double pos = theta / dtheta;
      const int t0 = static_cast<int>(std::floor(pos)) % f.n_theta;
      const int t1 = (t0 + 1) % f.n_theta;
      const double tt = pos - std::floor(pos);

      const double a = (1.0 - tt) * f.at(r0, t0) + tt * f.at(r0, t1);
      const double b = (1.0 - tt) * f.at(r1, t0) + tt * f.at(r1, t1);
      img.at(i, j) = (1.0 - tr) * a + tr * b;
    }
  }
  return img;
}

PolarField cartesian_to_polar(const ImageGrid& img, const std::vector<double>& radii, int n_theta) {
  PolarField f;
  f.radii = radii;
  f.n_theta = n_theta;
  f.values.assign(radii.size() * static_cast<std::size_t>(n_theta), 0.0);
  const int n = img.side;
  auto sample = [&](double x, double y) {
    // continuous pixel coordinates: column index along x, row index along -y
    const double cj = (x + 1.0) * n / 2.0 - 0.5;
    const double ci = (1.0 - y) * n / 2.0 - 0.5;
    const int j0 = static_cast<int>(std::floor(cj));
    const int i0 = static_cast<int>(std::floor(ci));
    const double tj = cj - j0;
    const double ti = ci - i0;
    auto px = [&](int i, int j) {
      i = std::clamp(i, 0, n - 1);
      j = std::clamp(j, 0, n - 1);
      return img.at(i, j);
    };
    return (1 - ti) * ((1 - tj) * px(i0, j0) + tj * px(i0, j0 + 1)) +
           ti * ((1 - tj) * px(i0 + 1, j0) + tj * px(i0 + 1, j0 + 1));
  };
  for (std::size_t r = 0; r < radii.size(); ++r) {
    for (int t = 0; t < n_theta; ++t) {
      const double theta = 2.0 * std::numbers::pi * t / n_theta;
      f.at(static_cast<int>(r), t) = sample(radii[r] * std::cos(theta), radii[r] * std::sin(theta));
    }
  }
  return f;
}

TsvdReconstructor::TsvdReconstructor(const MeasurementGrid& grid, const TsvdConfig& cfg)
    : grid_(grid), cfg_(cfg) {
  rank_ = cfg.effective_rank(grid.n_rho);
  period_ = grid.view == View::Full ? grid.n_phi : 2 * grid.n_phi;
  const int top = period_ / 2 - 1;
  const std::vector<double> rho = grid.rho_samples();
  matrices_.resize(static_cast<std::size_t>(top) + 1);
  pinv_.resize(static_cast<std::size_t>(top) + 1);

#pragma omp parallel for schedule(dynamic)
  for (int n = 0; n <= top; ++n) {
    matrices_[static_cast<std::size_t>(n)] = assemble_matrix(n, rho, grid.radius);
    try {
      pinv_[static_cast<std::size_t>(n)] =
          truncated_pseudo_inverse(matrices_[static_cast<std::size_t>(n)].system(), rank_, n);
    } catch (const TsvdError&) {
      pinv_[static_cast<std::size_t>(n)].resize(0, 0);
    }
  }
  for (int n = 0; n <= top; ++n) {
    if (pinv_[static_cast<std::size_t>(n)].size() == 0) failed_modes_.push_back(n);
  }
}

Reconstruction TsvdReconstructor::reconstruct(const Sinogram& s) const {
  if (s.grid.n_rho != grid_.n_rho || s.grid.n_phi != grid_.n_phi || s.grid.view != grid_.view) {
    throw std::invalid_argument("TsvdReconstructor: sinogram grid does not match");
  }
  const AngularSpectrum spec = angular_fourier(s);
  const int nr = grid_.n_rho;
  const int L = period_;
  const int top = max_mode();

  // Solution entry j lives at r = R - rho_j; store rings in increasing radius.
  std::vector<Complex> synth(static_cast<std::size_t>(nr) * L, Complex{});
  Reconstruction out;
  for (int n = -top; n <= top; ++n) {
    const Eigen::MatrixXd& P = pinv_[static_cast<std::size_t>(std::abs(n))];
    if (P.size() == 0) {
      out.skipped_modes.push_back(n);
      continue;
    }
    const ModeCoefficients& g = spec.mode(n);
    const Eigen::Map<const Eigen::VectorXcd> rhs(g.values.data(), nr);
    Eigen::VectorXcd F(nr);
    F.real() = P * rhs.real();
    F.imag() = P * rhs.imag();
    const int k = ((n % L) + L) % L;
    for (int j = 0; j < nr; ++j) {
      const int ring = nr - 1 - j;
      synth[static_cast<std::size_t>(ring) * L + k] = F(j);
    }
  }
  dft_rows(synth, nr, L, +1);

  out.polar.n_theta = L;
  out.polar.radii.resize(static_cast<std::size_t>(nr));
  out.polar.values.resize(static_cast<std::size_t>(nr) * L);
  for (int ring = 0; ring < nr; ++ring) {
    out.polar.radii[static_cast<std::size_t>(ring)] = grid_.radius - grid_.rho(nr - 1 - ring);
    for (int t = 0; t < L; ++t) {
      out.polar.at(ring, t) = synth[static_cast<std::size_t>(ring) * L + t].real();
    }
  }
  out.image = polar_to_cartesian(out.polar, cfg_.output_side, grid_.radius);
  for (double& v : out.image.values) v = std::clamp(v, 0.0, 1.0);
  return out;
}

Reconstruction reconstruct(const Sinogram& s, const TsvdConfig& cfg) {
  return TsvdReconstructor(s.grid, cfg).reconstruct(s);
}

}  // namespace circradon
