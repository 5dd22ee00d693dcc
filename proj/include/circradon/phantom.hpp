#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "circradon/image.hpp"
#include "circradon/random.hpp"

namespace circradon {

/// One constant-intensity ellipse. The semi-axis `a` lies along the x axis
/// before the ellipse is rotated counter-clockwise by `tilt` radians.
struct Ellipse {
  double cx = 0.0;
  double cy = 0.0;
  double a = 0.0;
  double b = 0.0;
  double tilt = 0.0;
  double intensity = 0.0;

  /// Quadratic form of the point in the ellipse frame; <= 1 means inside.
  double level(double x, double y) const;
  bool contains(double x, double y) const { return level(x, y) <= 1.0; }
  double area() const;
  /// Largest distance from the origin over the ellipse boundary (sampled).
  double max_radius(int samples = 720) const;

  friend bool operator==(const Ellipse&, const Ellipse&) = default;
};

struct EllipsePhantom {
  std::vector<Ellipse> ellipses;
  double intensity_scale = 1.0;

  friend bool operator==(const EllipsePhantom&, const EllipsePhantom&) = default;
};

class PhantomError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inner radius of the support annulus (one pixel width at 128^2). Informational
/// only: Shepp-Logan phantoms cover the origin, so it is not enforced.
inline constexpr double kAnnulusDelta = 2.0 / 128.0;

/// Side of the ground-truth raster.
inline constexpr int kImageSide = 128;

/// Side of the probe grid used to compute the intensity normalization.
inline constexpr int kNormalizationProbeSide = 256;

/// The ten-ellipse Shepp-Logan table in the high-contrast (Toft) variant.
EllipsePhantom shepp_logan_base();

/// The six uniform draws on [-0.5, 0.5] applied to one ellipse, in the order
/// (center x, center y, semi-axis a, semi-axis b, tilt, intensity).
using PerturbationDraw = std::array<double, 6>;

/// Applies explicit draws; `draws` must have one entry per ellipse.
/// Throws PhantomError if a semi-axis becomes non-positive.
EllipsePhantom perturb_with(const EllipsePhantom& p, std::span<const PerturbationDraw> draws);

/// Draws sigma ~ U[-0.5, 0.5] for every parameter and perturbs. Pathological
/// draws (non-positive semi-axis) are redrawn up to a bounded number of times.
EllipsePhantom perturb(const EllipsePhantom& p, Rng& rng);

/// Rigid motion of a phantom: rotation by `alpha` radians about the origin,
/// then translation by (shift_x, shift_y) pixels of the 128^2 grid.
struct Augmentation {
  double alpha = 0.0;
  int shift_x = 0;
  int shift_y = 0;

  friend bool operator==(const Augmentation&, const Augmentation&) = default;
};

inline constexpr int kMaxPixelShift = 15;

EllipsePhantom augment_with(const EllipsePhantom& p, const Augmentation& aug);

/// Draws alpha ~ U[-0.5, 0.5] and integer shifts uniform on {-15..15}.
Augmentation draw_augmentation(Rng& rng);

inline EllipsePhantom augment(const EllipsePhantom& p, Rng& rng) {
  return augment_with(p, draw_augmentation(rng));
}

/// Raw weighted sum of covering intensities, no scale, no masking.
double raw_sum(const EllipsePhantom& p, double x, double y);

/// Analytic evaluation of the phantom. Zero outside the open unit disk;
/// negative sums are clamped to zero.
double eval_point(const EllipsePhantom& p, double x, double y);

/// Samples eval_point at pixel centers; values are clamped into [0, 1].
ImageGrid rasterize(const EllipsePhantom& p, int side);

/// Recomputes intensity_scale so that values on the probe grid do not exceed 1.
EllipsePhantom normalize_intensity(EllipsePhantom p, int probe_side = kNormalizationProbeSide);

/// True when every ellipse boundary stays strictly inside the unit disk.
bool supported_in_unit_disk(const EllipsePhantom& p);

/// Text record: a header line `scale <intensity_scale> <count>` followed by one
/// `c d a b tilt intensity` line per ellipse. Locale independent, round-trip exact.
void write_phantom(std::ostream& os, const EllipsePhantom& p);
EllipsePhantom read_phantom(std::istream& is);

}  // namespace circradon
