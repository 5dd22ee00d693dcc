#pragma once

#include <cstddef>
#include <vector>

namespace circradon {

/// Square raster over the Cartesian square [-1,1]^2, row-major.
/// Pixel (i, j) is centered at x = -1 + (2j+1)/side, y = 1 - (2i+1)/side,
/// so row 0 is the top of the image.
struct ImageGrid {
  int side = 0;
  std::vector<double> values;

  ImageGrid() = default;
  explicit ImageGrid(int n) : side(n), values(static_cast<std::size_t>(n) * n, 0.0) {}

  double& at(int i, int j) { return values[static_cast<std::size_t>(i) * side + j]; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * side + j]; }

  std::size_t size() const { return values.size(); }

  static double pixel_x(int j, int side) { return -1.0 + (2.0 * j + 1.0) / side; }
  static double pixel_y(int i, int side) { return 1.0 - (2.0 * i + 1.0) / side; }

  friend bool operator==(const ImageGrid&, const ImageGrid&) = default;
};

}  // namespace circradon
