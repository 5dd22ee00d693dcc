#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "circradon/metrics.hpp"
#include "circradon/random.hpp"

using namespace circradon;

namespace {

// Deterministic test image in [0, 1). The reference values below were
// computed from the same generator with scikit-image (gaussian_weights=True,
// sigma=1.5, use_sample_covariance=False, data_range=1).
ImageGrid test_image(std::uint64_t seed, int n = 32) {
  ImageGrid img(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::uint64_t h = mix64(seed * 1000003ULL + static_cast<std::uint64_t>(i) * 131ULL + j);
      img.at(i, j) = static_cast<double>(h >> 11) * 0x1.0p-53;
    }
  }
  return img;
}

ImageGrid degraded(int k) {
  const ImageGrid ref = test_image(k);
  const ImageGrid noise = test_image(k + 100);
  const double amp = 0.1 * k;
  ImageGrid x(ref.side);
  for (std::size_t p = 0; p < x.values.size(); ++p) {
    x.values[p] = std::clamp(ref.values[p] + amp * (noise.values[p] - 0.5), 0.0, 1.0);
  }
  return x;
}

struct Reference {
  int k;
  double ssim;
  double psnr;
};

constexpr std::array<Reference, 10> kReference = {{
    {1, 0.9948764243689117, 31.063181123618378},
    {2, 0.981212869349747, 25.086532330979118},
    {3, 0.9587385400013662, 21.72617112295406},
    {4, 0.9320161641605517, 19.38183213959334},
    {5, 0.8928412180640437, 17.430975646722366},
    {6, 0.8600776991494427, 16.16587520469789},
    {7, 0.8218926056890127, 14.842609561614314},
    {8, 0.7617841855414271, 13.611642430808725},
    {9, 0.7118642661504766, 12.779290760908673},
    {10, 0.649526636874025, 11.795414917350692},
}};

ImageGrid constant(int n, double v) {
  ImageGrid img(n);
  std::fill(img.values.begin(), img.values.end(), v);
  return img;
}

}  // namespace

TEST_CASE("PSNR") {
  const ImageGrid a = test_image(3);
  CHECK(std::isinf(psnr(a, a)));
  CHECK(psnr(a, a) > 0.0);

  const ImageGrid zero = constant(16, 0.0);
  CHECK(psnr(constant(16, 0.1), zero) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(psnr(constant(16, 0.1), zero, 2.0) == doctest::Approx(20.0 + 20.0 * std::log10(2.0)).epsilon(1e-12));

  const ImageGrid b = test_image(4);
  double mse = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) mse += std::pow(a.values[k] - b.values[k], 2);
  mse /= static_cast<double>(a.values.size());
  CHECK(psnr(a, b) == doctest::Approx(-10.0 * std::log10(mse)).epsilon(1e-12));

  CHECK_THROWS_AS(psnr(a, constant(16, 0.0)), MetricError);
  CHECK_THROWS_AS(psnr(a, b, 0.0), MetricError);
}

TEST_CASE("SSIM and PSNR against reference values") {
  for (const Reference& r : kReference) {
    CAPTURE(r.k);
    const ImageGrid ref = test_image(r.k);
    const ImageGrid x = degraded(r.k);
    CHECK(ssim(x, ref) == doctest::Approx(r.ssim).epsilon(1e-6));
    CHECK(psnr(x, ref) == doctest::Approx(r.psnr).epsilon(1e-9));
    CHECK(ssim(ref, x) == doctest::Approx(ssim(x, ref)).epsilon(1e-14));
  }
}

TEST_CASE("SSIM properties") {
  const ImageGrid a = test_image(8);
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ssim(constant(32, 0.4), constant(32, 0.4)) == doctest::Approx(1.0));
  double prev = 1.0;
  for (int k = 1; k <= 10; ++k) {
    const double s = ssim(degraded(k), test_image(k));
    CHECK(s < prev);
    prev = s;
  }
  CHECK_THROWS_AS(ssim(a, test_image(1, 16)), MetricError);
  CHECK_THROWS_AS(ssim(test_image(1, 8), test_image(2, 8)), MetricError);
}

TEST_CASE("evaluate_set") {
  const ImageGrid zero = constant(16, 0.0);
  const std::vector<ImageGrid> recons = {constant(16, std::pow(10.0, -0.5)), constant(16, std::pow(10.0, -1.5))};
  const std::vector<ImageGrid> truths = {zero, zero};
  const MetricReport r = evaluate_set(recons, truths, "pair");
  CHECK(r.name == "pair");
  REQUIRE(r.per_sample.size() == 2);
  CHECK(r.per_sample[0].psnr_db == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(r.per_sample[1].psnr_db == doctest::Approx(30.0).epsilon(1e-12));
  CHECK(r.mean_psnr == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(r.std_psnr == doctest::Approx(10.0).epsilon(1e-12));

  CHECK_THROWS_AS(evaluate_set({}, {}), MetricError);
  CHECK_THROWS_AS(evaluate_set(recons, {zero}), MetricError);
}

TEST_CASE("report round trip") {
  std::vector<ImageGrid> recons, truths;
  for (int k = 1; k <= 5; ++k) {
    recons.push_back(degraded(k));
    truths.push_back(test_image(k));
  }
  recons.push_back(test_image(9));
  truths.push_back(test_image(9));  // identical pair: infinite PSNR
  const MetricReport r = evaluate_set(recons, truths, "Test128n5");
  std::stringstream ss;
  write_report(ss, r);
  const MetricReport back = read_report(ss);
  CHECK(back.name == "Test128n5");
  REQUIRE(back.per_sample.size() == r.per_sample.size());
  for (std::size_t k = 0; k < r.per_sample.size(); ++k) {
    CHECK(back.per_sample[k].psnr_db == r.per_sample[k].psnr_db);
    CHECK(back.per_sample[k].ssim == r.per_sample[k].ssim);
  }
  CHECK(std::isinf(back.per_sample.back().psnr_db));
  CHECK(std::isinf(back.mean_psnr));
  CHECK(back.mean_ssim == r.mean_ssim);
  CHECK(back.std_ssim == r.std_ssim);

  const MetricReport line = parse_machine_line(r.machine_line());
  CHECK(line.name == r.name);
  CHECK(line.mean_ssim == r.mean_ssim);

  std::istringstream empty("# report x\n");
  CHECK_THROWS_AS(read_report(empty), MetricError);
  CHECK_THROWS_AS(parse_machine_line("name 1 2 abc 4"), MetricError);
  CHECK_THROWS_AS(parse_machine_line("name 1 2"), MetricError);
}
