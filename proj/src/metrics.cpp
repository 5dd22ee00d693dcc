#include "circradon/metrics.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace circradon {

namespace {

void require_same_shape(const ImageGrid& x, const ImageGrid& ref) {
  if (x.side != ref.side || x.values.size() != ref.values.size()) {
    throw MetricError("metrics: image shapes differ (" + std::to_string(x.side) + " vs " +
                      std::to_string(ref.side) + ")");
  }
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

double parse(const std::string& token) {
  if (token == "inf") return std::numeric_limits<double>::infinity();
  if (token == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw MetricError("report: malformed number '" + token + "'");
  }
  return v;
}

// Separable convolution, "valid" region only.
std::vector<double> filter_valid(const std::vector<double>& img, int n, const std::vector<double>& w) {
  const int k = static_cast<int>(w.size());
  const int m = n - k + 1;
  std::vector<double> rows(static_cast<std::size_t>(n) * m, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      double acc = 0.0;
      for (int t = 0; t < k; ++t) acc += w[t] * img[static_cast<std::size_t>(i) * n + j + t];
      rows[static_cast<std::size_t>(i) * m + j] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      double acc = 0.0;
      for (int t = 0; t < k; ++t) acc += w[t] * rows[static_cast<std::size_t>(i + t) * m + j];
      out[static_cast<std::size_t>(i) * m + j] = acc;
    }
  }
  return out;
}

}  // namespace

double psnr(const ImageGrid& x, const ImageGrid& ref, double peak) {
  require_same_shape(x, ref);
  if (!(peak > 0.0)) throw MetricError("psnr: peak must be positive");
  if (x.values.empty()) throw MetricError("psnr: empty image");
  double sse = 0.0;
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    const double d = x.values[i] - ref.values[i];
    sse += d * d;
  }
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / static_cast<double>(x.values.size());
  return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const ImageGrid& x, const ImageGrid& ref, const SsimParams& params) {
  require_same_shape(x, ref);
  const int n = x.side;
  if (n < params.window) throw MetricError("ssim: image smaller than the window");

  std::vector<double> w(static_cast<std::size_t>(params.window));
  const int half = params.window / 2;
  double total = 0.0;
  for (int t = 0; t < params.window; ++t) {
    const double d = t - half;
    w[t] = std::exp(-d * d / (2.0 * params.sigma * params.sigma));
    total += w[t];
  }
  for (double& v : w) v /= total;

  const std::vector<double>& a = x.values;
  const std::vector<double>& b = ref.values;
  std::vector<double> aa(a.size()), bb(a.size()), ab(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  const auto mu_a = filter_valid(a, n, w);
  const auto mu_b = filter_valid(b, n, w);
  const auto e_aa = filter_valid(aa, n, w);
  const auto e_bb = filter_valid(bb, n, w);
  const auto e_ab = filter_valid(ab, n, w);

  const double c1 = std::pow(params.k1 * params.dynamic_range, 2);
  const double c2 = std::pow(params.k2 * params.dynamic_range, 2);
  double sum = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i];
    const double mb = mu_b[i];
    const double va = e_aa[i] - ma * ma;
    const double vb = e_bb[i] - mb * mb;
    const double cov = e_ab[i] - ma * mb;
    sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return sum / static_cast<double>(mu_a.size());
}

void MetricReport::summarize() {
  const auto n = static_cast<double>(per_sample.size());
  if (per_sample.empty()) {
    mean_psnr = std_psnr = mean_ssim = std_ssim = 0.0;
    return;
  }
  double sp = 0.0, ss = 0.0;
  for (const auto& m : per_sample) {
    sp += m.psnr_db;
    ss += m.ssim;
  }
  mean_psnr = sp / n;
  mean_ssim = ss / n;
  double vp = 0.0, vs = 0.0;
  for (const auto& m : per_sample) {
    vp += (m.psnr_db - mean_psnr) * (m.psnr_db - mean_psnr);
    vs += (m.ssim - mean_ssim) * (m.ssim - mean_ssim);
  }
  std_psnr = std::isfinite(mean_psnr) ? std::sqrt(vp / n) : 0.0;
  std_ssim = std::sqrt(vs / n);
}

std::string MetricReport::machine_line() const {
  return name + ' ' + fmt(mean_psnr) + ' ' + fmt(std_psnr) + ' ' + fmt(mean_ssim) + ' ' +
         fmt(std_ssim);
}

MetricReport evaluate_set(const std::vector<ImageGrid>& recons, const std::vector<ImageGrid>& truths,
                          const std::string& name) {
  if (recons.empty()) throw MetricError("evaluate_set: empty list");
  if (recons.size() != truths.size()) throw MetricError("evaluate_set: list lengths differ");
  MetricReport r;
  r.name = name;
  r.per_sample.reserve(recons.size());
  for (std::size_t i = 0; i < recons.size(); ++i) {
    r.per_sample.push_back({psnr(recons[i], truths[i]), ssim(recons[i], truths[i])});
  }
  r.summarize();
  return r;
}

void write_report(std::ostream& os, const MetricReport& r) {
  os << "# report " << r.name << '\n';
  os << "# sample psnr_db ssim\n";
  for (std::size_t i = 0; i < r.per_sample.size(); ++i) {
    os << i << ' ' << fmt(r.per_sample[i].psnr_db) << ' ' << fmt(r.per_sample[i].ssim) << '\n';
  }
  os << "# mean_psnr std_psnr mean_ssim std_ssim\n";
  os << r.machine_line() << '\n';
}

MetricReport parse_machine_line(const std::string& line) {
  std::istringstream ls(line);
  MetricReport r;
  std::string a, b, c, d;
  if (!(ls >> r.name >> a >> b >> c >> d)) throw MetricError("report: malformed summary line");
  r.mean_psnr = parse(a);
  r.std_psnr = parse(b);
  r.mean_ssim = parse(c);
  r.std_ssim = parse(d);
  return r;
}

MetricReport read_report(std::istream& is) {
  MetricReport r;
  std::string line;
  std::string summary;
  std::string name;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.rfind("# report ", 0) == 0) {
      name = line.substr(9);
      continue;
    }
    if (line[0] == '#') continue;
    std::istringstream ls(line);
    std::string first, p, s;
    ls >> first >> p >> s;
    std::string extra;
    if (!s.empty() && !(ls >> extra) && first.find_first_not_of("0123456789") == std::string::npos) {
      r.per_sample.push_back({parse(p), parse(s)});
    } else {
      summary = line;
    }
  }
  if (summary.empty()) throw MetricError("report: missing summary line");
  const MetricReport head = parse_machine_line(summary);
  r.name = name.empty() ? head.name : name;
  r.mean_psnr = head.mean_psnr;
  r.std_psnr = head.std_psnr;
  r.mean_ssim = head.mean_ssim;
  r.std_ssim = head.std_ssim;
  return r;
}

}  // namespace circradon
