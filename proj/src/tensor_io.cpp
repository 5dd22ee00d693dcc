#include "circradon/tensor_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

#include <png.h>

namespace circradon {

namespace {

constexpr std::array<char, 4> kMagic = {'C', 'R', 'T', 'F'};

void put_u32(std::array<char, 4>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out[b] = static_cast<char>((v >> (8 * b)) & 0xff);
}

std::uint32_t get_u32(const char* p) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= std::uint32_t(static_cast<unsigned char>(p[b])) << (8 * b);
  return v;
}

std::vector<std::uint8_t> to_bytes(std::span<const double> values) {
  std::vector<std::uint8_t> out(values.size(), 0);
  if (values.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double span = *hi_it - lo;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double t = span > 0.0 ? (values[i] - lo) / span : 0.0;
    out[i] = static_cast<std::uint8_t>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0));
  }
  return out;
}

}  // namespace

void write_tensor(const fs::path& path, std::uint32_t rows, std::uint32_t cols,
                  std::span<const double> values) {
  if (values.size() != static_cast<std::size_t>(rows) * cols) {
    throw TensorFormatError("write_tensor: value count does not match shape");
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("write_tensor: cannot open " + path.string());
  std::array<char, 4> word{};
  os.write(kMagic.data(), 4);
  put_u32(word, kDtypeFloat32);
  os.write(word.data(), 4);
  put_u32(word, rows);
  os.write(word.data(), 4);
  put_u32(word, cols);
  os.write(word.data(), 4);
  std::vector<char> payload(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(values[i]));
    for (int b = 0; b < 4; ++b) payload[i * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
  }
  os.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!os) throw std::runtime_error("write_tensor: write failed for " + path.string());
}

Tensor read_tensor(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw TensorFormatError("read_tensor: cannot open " + path.string());
  std::array<char, kTensorHeaderBytes> header{};
  if (!is.read(header.data(), header.size())) {
    throw TensorFormatError("read_tensor: truncated header in " + path.string());
  }
  if (!std::equal(kMagic.begin(), kMagic.end(), header.begin())) {
    throw TensorFormatError("read_tensor: bad magic in " + path.string());
  }
  if (get_u32(header.data() + 4) != kDtypeFloat32) {
    throw TensorFormatError("read_tensor: unsupported dtype in " + path.string());
  }
  Tensor t;
  t.rows = get_u32(header.data() + 8);
  t.cols = get_u32(header.data() + 12);
  const std::size_t count = static_cast<std::size_t>(t.rows) * t.cols;
  std::vector<char> payload(count * 4);
  if (!is.read(payload.data(), static_cast<std::streamsize>(payload.size()))) {
    throw TensorFormatError("read_tensor: truncated payload in " + path.string());
  }
  if (is.peek() != std::char_traits<char>::eof()) {
    throw TensorFormatError("read_tensor: trailing bytes in " + path.string());
  }
  t.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits = get_u32(payload.data() + 4 * i);
    t.data[i] = std::bit_cast<float>(bits);
  }
  return t;
}

void write_image(const fs::path& path, const ImageGrid& img) {
  write_tensor(path, static_cast<std::uint32_t>(img.side), static_cast<std::uint32_t>(img.side),
               img.values);
}

ImageGrid read_image(const fs::path& path) {
  Tensor t = read_tensor(path);
  if (t.rows != t.cols) throw TensorFormatError("read_image: image is not square: " + path.string());
  ImageGrid img(static_cast<int>(t.rows));
  std::copy(t.data.begin(), t.data.end(), img.values.begin());
  return img;
}

void write_sinogram(const fs::path& path, const Sinogram& s) {
  write_tensor(path, static_cast<std::uint32_t>(s.grid.n_rho),
               static_cast<std::uint32_t>(s.grid.n_phi), s.values);
}

Sinogram read_sinogram(const fs::path& path, View view) {
  Tensor t = read_tensor(path);
  MeasurementGrid g = view == View::Full ? MeasurementGrid::full(static_cast<int>(t.rows))
                                         : MeasurementGrid::limited(static_cast<int>(t.rows));
  g.n_phi = static_cast<int>(t.cols);
  Sinogram s(g);
  std::copy(t.data.begin(), t.data.end(), s.values.begin());
  return s;
}

void write_pgm(const fs::path& path, std::uint32_t rows, std::uint32_t cols,
               std::span<const double> values) {
  const auto bytes = to_bytes(values);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("write_pgm: cannot open " + path.string());
  os << "P5\n" << cols << ' ' << rows << "\n255\n";
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_png(const fs::path& path, std::uint32_t rows, std::uint32_t cols,
               std::span<const double> values) {
  const auto bytes = to_bytes(values);
  std::unique_ptr<FILE, decltype(&std::fclose)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!fp) throw std::runtime_error("write_png: cannot open " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("write_png: libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("write_png: libpng error writing " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, cols, rows, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::uint32_t r = 0; r < rows; ++r) {
    png_write_row(png, const_cast<png_bytep>(bytes.data() + static_cast<std::size_t>(r) * cols));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace circradon
