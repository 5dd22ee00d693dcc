#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "circradon/image.hpp"
#include "circradon/radon.hpp"

namespace circradon {

namespace fs = std::filesystem;

/// On-disk tensor: a 16-byte little-endian header
///   bytes 0-3   magic "CRTF"
///   bytes 4-7   dtype code (1 = float32)
///   bytes 8-11  rows
///   bytes 12-15 cols
/// followed by rows*cols little-endian float32 values, row-major.
inline constexpr std::uint32_t kDtypeFloat32 = 1;
inline constexpr std::size_t kTensorHeaderBytes = 16;

struct Tensor {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<float> data;
};

class TensorFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_tensor(const fs::path& path, std::uint32_t rows, std::uint32_t cols,
                  std::span<const double> values);
Tensor read_tensor(const fs::path& path);

void write_image(const fs::path& path, const ImageGrid& img);
ImageGrid read_image(const fs::path& path);

/// The tensor stores only the values; the grid is rebuilt from the shape and `view`.
void write_sinogram(const fs::path& path, const Sinogram& s);
Sinogram read_sinogram(const fs::path& path, View view);

/// 8-bit grayscale previews; the data min/max map to 0/255.
void write_pgm(const fs::path& path, std::uint32_t rows, std::uint32_t cols,
               std::span<const double> values);
void write_png(const fs::path& path, std::uint32_t rows, std::uint32_t cols,
               std::span<const double> values);

}  // namespace circradon
