#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "circradon/image.hpp"
#include "circradon/radon.hpp"
#include "circradon/spectral.hpp"

namespace circradon {

enum class RankRule { HalfRank, Fixed };

struct TsvdConfig {
  RankRule rank_rule = RankRule::HalfRank;
  int fixed_rank = 0;
  int output_side = kImageSide;

  static TsvdConfig half_rank() { return {}; }
  static TsvdConfig fixed(int k) { return {RankRule::Fixed, k, kImageSide}; }

  /// Number of singular values kept for an n_rho x n_rho system.
  int effective_rank(int n_rho) const;
};

/// Parses `half` or a positive integer.
TsvdConfig parse_rank(const std::string& s);

class TsvdError : public std::runtime_error {
 public:
  TsvdError(const std::string& what, int mode) : std::runtime_error(what), mode_(mode) {}
  int mode() const { return mode_; }

 private:
  int mode_;
};

/// V_k diag(1/s_k) U_k^T keeping the `rank` largest singular values.
/// Throws TsvdError (mode = `mode`) when the SVD does not converge.
Eigen::MatrixXd truncated_pseudo_inverse(const Eigen::MatrixXd& A, int rank, int mode = 0);

/// Truncated-SVD solution of A x = b, applied to the real and imaginary
/// parts of b separately.
Eigen::VectorXcd tsvd_solve(const Eigen::MatrixXd& A, const Eigen::VectorXcd& b, int rank,
                            int mode = 0);

/// Samples f(r_j, theta_k) on increasing radii and theta_k = 2 pi k / n_theta.
struct PolarField {
  std::vector<double> radii;
  int n_theta = 0;
  std::vector<double> values;  // radius outer, angle inner

  double& at(int r, int t) { return values[static_cast<std::size_t>(r) * n_theta + t]; }
  double at(int r, int t) const { return values[static_cast<std::size_t>(r) * n_theta + t]; }
};

/// Bilinear interpolation in (r, theta) with periodic wrap in theta. Pixels
/// with radius above R or below the smallest sample radius are zero; radii
/// between the largest sample and R use the outermost ring.
ImageGrid polar_to_cartesian(const PolarField& f, int side, double R = 1.0);

/// Bilinear sampling of a Cartesian image at polar nodes (used for testing
/// resampling round trips and for building radial references).
PolarField cartesian_to_polar(const ImageGrid& img, const std::vector<double>& radii, int n_theta);

struct Reconstruction {
  ImageGrid image;
  PolarField polar;
  std::vector<int> skipped_modes;
};

/// Half-rank (or fixed-rank) TSVD inversion for one measurement grid. The
/// truncated pseudo-inverses depend only on the grid and rank, so they are
/// factored once and reused across sinograms.
class TsvdReconstructor {
 public:
  TsvdReconstructor(const MeasurementGrid& grid, const TsvdConfig& cfg);

  Reconstruction reconstruct(const Sinogram& s) const;

  const MeasurementGrid& grid() const { return grid_; }
  int rank() const { return rank_; }
  /// Highest inverted |n|; the Nyquist mode is dropped.
  int max_mode() const { return static_cast<int>(pinv_.size()) - 1; }
  const VolterraMatrix& matrix(int abs_n) const { return matrices_.at(static_cast<std::size_t>(abs_n)); }

 private:
  MeasurementGrid grid_;
  TsvdConfig cfg_;
  int rank_ = 0;
  int period_ = 0;
  std::vector<VolterraMatrix> matrices_;
  std::vector<Eigen::MatrixXd> pinv_;  // empty when the SVD failed
  std::vector<int> failed_modes_;
};

Reconstruction reconstruct(const Sinogram& s, const TsvdConfig& cfg);

}  // namespace circradon
