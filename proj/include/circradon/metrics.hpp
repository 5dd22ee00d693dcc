#pragma once

#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "circradon/image.hpp"

namespace circradon {

class MetricError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// 10 log10(peak^2 / MSE); +infinity when the images are identical.
double psnr(const ImageGrid& x, const ImageGrid& ref, double peak = 1.0);

/// Gaussian-window SSIM constants (Wang et al. 2004).
struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

/// Mean of the local SSIM map over window positions fully inside the image.
double ssim(const ImageGrid& x, const ImageGrid& ref, const SsimParams& params = {});

struct SampleMetrics {
  double psnr_db = 0.0;
  double ssim = 0.0;
};

struct MetricReport {
  std::string name;
  std::vector<SampleMetrics> per_sample;
  double mean_psnr = 0.0;
  double std_psnr = 0.0;
  double mean_ssim = 0.0;
  double std_ssim = 0.0;

  /// Recomputes mean and population standard deviation from per_sample.
  void summarize();

  /// `name mean_psnr std_psnr mean_ssim std_ssim`
  std::string machine_line() const;
};

MetricReport evaluate_set(const std::vector<ImageGrid>& recons, const std::vector<ImageGrid>& truths,
                          const std::string& name = "report");

/// Human-readable table followed by the machine line. Values are printed with
/// round-trip precision so read_report recovers them exactly.
void write_report(std::ostream& os, const MetricReport& r);
MetricReport read_report(std::istream& is);

/// Parses a single machine line into a summary-only report.
MetricReport parse_machine_line(const std::string& line);

}  // namespace circradon
