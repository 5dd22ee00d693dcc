#include "circradon/phantom.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace circradon {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr int kMaxPerturbRetries = 64;

// Offsets applied per unit draw: center, center, semi-axis, semi-axis, tilt, intensity.
constexpr std::array<double, 6> kPerturbationAmplitude = {0.01, 0.01, 0.01, 0.01, 0.08, 0.001};

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

double parse_double(const std::string& token) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw PhantomError("phantom record: malformed number '" + token + "'");
  }
  return v;
}

}  // namespace

double Ellipse::level(double x, double y) const {
  const double dx = x - cx;
  const double dy = y - cy;
  const double c = std::cos(tilt);
  const double s = std::sin(tilt);
  const double u = (c * dx + s * dy) / a;
  const double v = (-s * dx + c * dy) / b;
  return u * u + v * v;
}

double Ellipse::area() const { return std::numbers::pi * a * b; }

double Ellipse::max_radius(int samples) const {
  const double c = std::cos(tilt);
  const double s = std::sin(tilt);
  double best = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double t = 2.0 * std::numbers::pi * k / samples;
    const double ex = a * std::cos(t);
    const double ey = b * std::sin(t);
    const double x = cx + c * ex - s * ey;
    const double y = cy + s * ex + c * ey;
    best = std::max(best, std::hypot(x, y));
  }
  return best;
}

EllipsePhantom shepp_logan_base() {
  // intensity, a, b, cx, cy, tilt (degrees)
  constexpr double table[10][6] = {
      {1.0, 0.6900, 0.9200, 0.0, 0.0, 0.0},
      {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
      {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},
      {-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
      {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
      {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
      {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
      {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
      {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
      {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
  };
  EllipsePhantom p;
  p.ellipses.reserve(10);
  for (const auto& row : table) {
    p.ellipses.push_back(Ellipse{row[3], row[4], row[1], row[2], row[5] * kDeg, row[0]});
  }
  p.intensity_scale = 1.0;
  return p;
}

EllipsePhantom perturb_with(const EllipsePhantom& p, std::span<const PerturbationDraw> draws) {
  if (draws.size() != p.ellipses.size()) {
    throw PhantomError("perturb: expected one draw per ellipse");
  }
  EllipsePhantom out = p;
  for (std::size_t k = 0; k < out.ellipses.size(); ++k) {
    Ellipse& e = out.ellipses[k];
    const PerturbationDraw& s = draws[k];
    e.cx += kPerturbationAmplitude[0] * s[0];
    e.cy += kPerturbationAmplitude[1] * s[1];
    e.a += kPerturbationAmplitude[2] * s[2];
    e.b += kPerturbationAmplitude[3] * s[3];
    e.tilt += kPerturbationAmplitude[4] * s[4];
    e.intensity += kPerturbationAmplitude[5] * s[5];
    if (!(e.a > 0.0) || !(e.b > 0.0)) {
      throw PhantomError("perturb: non-positive semi-axis for ellipse " + std::to_string(k));
    }
  }
  out.intensity_scale = 1.0;
  return normalize_intensity(std::move(out));
}

EllipsePhantom perturb(const EllipsePhantom& p, Rng& rng) {
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  std::vector<PerturbationDraw> draws(p.ellipses.size());
  for (int attempt = 0; attempt < kMaxPerturbRetries; ++attempt) {
    for (auto& d : draws) {
      for (double& v : d) v = unit(rng);
    }
    try {
      return perturb_with(p, draws);
    } catch (const PhantomError&) {
      // redraw
    }
  }
  throw PhantomError("perturb: exhausted retries on pathological draws");
}

EllipsePhantom augment_with(const EllipsePhantom& p, const Augmentation& aug) {
  const double c = std::cos(aug.alpha);
  const double s = std::sin(aug.alpha);
  const double tx = 2.0 * aug.shift_x / kImageSide;
  const double ty = 2.0 * aug.shift_y / kImageSide;
  EllipsePhantom out = p;
  for (Ellipse& e : out.ellipses) {
    const double x = c * e.cx - s * e.cy;
    const double y = s * e.cx + c * e.cy;
    e.cx = x + tx;
    e.cy = y + ty;
    e.tilt += aug.alpha;
  }
  return out;
}

Augmentation draw_augmentation(Rng& rng) {
  std::uniform_real_distribution<double> angle(-0.5, 0.5);
  std::uniform_int_distribution<int> shift(-kMaxPixelShift, kMaxPixelShift);
  Augmentation aug;
  aug.alpha = angle(rng);
  aug.shift_x = shift(rng);
  aug.shift_y = shift(rng);
  return aug;
}

double raw_sum(const EllipsePhantom& p, double x, double y) {
  double sum = 0.0;
  for (const Ellipse& e : p.ellipses) {
    if (e.contains(x, y)) sum += e.intensity;
  }
  return sum;
}

double eval_point(const EllipsePhantom& p, double x, double y) {
  if (x * x + y * y >= 1.0) return 0.0;
  return std::max(0.0, p.intensity_scale * raw_sum(p, x, y));
}

ImageGrid rasterize(const EllipsePhantom& p, int side) {
  if (side < 2) throw PhantomError("rasterize: side must be at least 2");
  ImageGrid img(side);
  for (int i = 0; i < side; ++i) {
    const double y = ImageGrid::pixel_y(i, side);
    for (int j = 0; j < side; ++j) {
      img.at(i, j) = std::clamp(eval_point(p, ImageGrid::pixel_x(j, side), y), 0.0, 1.0);
    }
  }
  return img;
}

EllipsePhantom normalize_intensity(EllipsePhantom p, int probe_side) {
  p.intensity_scale = 1.0;
  double peak = 0.0;
  for (int i = 0; i < probe_side; ++i) {
    const double y = ImageGrid::pixel_y(i, probe_side);
    for (int j = 0; j < probe_side; ++j) {
      peak = std::max(peak, eval_point(p, ImageGrid::pixel_x(j, probe_side), y));
    }
  }
  if (peak > 1.0) p.intensity_scale = 1.0 / peak;
  return p;
}

bool supported_in_unit_disk(const EllipsePhantom& p) {
  return std::all_of(p.ellipses.begin(), p.ellipses.end(),
                     [](const Ellipse& e) { return e.max_radius() < 1.0; });
}

void write_phantom(std::ostream& os, const EllipsePhantom& p) {
  os << "scale " << format_double(p.intensity_scale) << ' ' << p.ellipses.size() << '\n';
  for (const Ellipse& e : p.ellipses) {
    os << format_double(e.cx) << ' ' << format_double(e.cy) << ' ' << format_double(e.a) << ' '
       << format_double(e.b) << ' ' << format_double(e.tilt) << ' '
       << format_double(e.intensity) << '\n';
  }
}

EllipsePhantom read_phantom(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw PhantomError("phantom record: missing header");
  std::istringstream header(line);
  std::string tag, scale_token;
  std::size_t count = 0;
  if (!(header >> tag >> scale_token >> count) || tag != "scale") {
    throw PhantomError("phantom record: malformed header '" + line + "'");
  }
  EllipsePhantom p;
  p.intensity_scale = parse_double(scale_token);
  p.ellipses.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    if (!std::getline(is, line)) throw PhantomError("phantom record: truncated ellipse list");
    std::istringstream row(line);
    std::array<std::string, 6> tok;
    for (auto& t : tok) {
      if (!(row >> t)) throw PhantomError("phantom record: short ellipse line '" + line + "'");
    }
    Ellipse e{parse_double(tok[0]), parse_double(tok[1]), parse_double(tok[2]),
              parse_double(tok[3]), parse_double(tok[4]), parse_double(tok[5])};
    if (!(e.a > 0.0) || !(e.b > 0.0)) throw PhantomError("phantom record: non-positive semi-axis");
    p.ellipses.push_back(e);
  }
  return p;
}

}  // namespace circradon
