#include "circradon/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <regex>
#include <thread>

#include <json.hpp>

#include "circradon/tensor_io.hpp"

namespace circradon {

namespace {

using nlohmann::json;

constexpr std::uint64_t kPerturbStream = 1;
constexpr std::uint64_t kAugmentStream = 2;
constexpr std::uint64_t kNoiseStream = 3;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string sample_id(const std::string& split, int index) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s-%06d", split.c_str(), index);
  return buf;
}

void plan_split(DatasetManifest& m, const std::string& split, int count) {
  if (count < 0) throw DatasetError("negative sample count for split " + split);
  const auto levels = static_cast<int>(m.noise_levels_percent.size());
  if (count % levels != 0) {
    throw DatasetError("split '" + split + "' of " + m.name + " needs a multiple of " +
                       std::to_string(levels) + " samples to balance noise levels");
  }
  for (int k = 0; k < count; ++k) {
    SampleRecord r;
    r.split = split;
    r.index = k;
    r.id = sample_id(split, k);
    r.seed = sample_seed(m.master_seed, split, k);
    r.noise_level_percent = m.noise_levels_percent[static_cast<std::size_t>(k % levels)];
    r.x_file = r.id + "_x.f32";
    r.y_file = r.id + "_y.f32";
    m.samples.push_back(std::move(r));
  }
}

json to_json(const DatasetManifest& m) {
  json samples = json::array();
  for (const SampleRecord& r : m.samples) {
    samples.push_back({{"id", r.id},
                       {"split", r.split},
                       {"index", r.index},
                       {"seed", r.seed},
                       {"noise_level_percent", r.noise_level_percent},
                       {"x", r.x_file},
                       {"y", r.y_file},
                       {"augmentation",
                        {{"alpha", r.augmentation.alpha},
                         {"shift_x", r.augmentation.shift_x},
                         {"shift_y", r.augmentation.shift_y}}}});
  }
  return {{"name", m.name},
          {"n_y", m.n_y},
          {"n_x", kImageSide},
          {"view", to_string(m.view)},
          {"noise_levels_percent", m.noise_levels_percent},
          {"counts", {{"train", m.counts.train}, {"validation", m.counts.validation}, {"test", m.counts.test}}},
          {"master_seed", m.master_seed},
          {"tensor_format", "CRTF float32 little-endian, 16-byte header"},
          {"complete", m.complete},
          {"samples", samples}};
}

DatasetManifest from_json(const json& j) {
  DatasetManifest m;
  m.name = j.at("name").get<std::string>();
  m.n_y = j.at("n_y").get<int>();
  m.view = parse_view(j.at("view").get<std::string>());
  m.noise_levels_percent = j.at("noise_levels_percent").get<std::vector<double>>();
  const json& c = j.at("counts");
  m.counts = {c.at("train").get<int>(), c.at("validation").get<int>(), c.at("test").get<int>()};
  m.master_seed = j.at("master_seed").get<std::uint64_t>();
  m.complete = j.at("complete").get<bool>();
  for (const json& s : j.at("samples")) {
    SampleRecord r;
    r.id = s.at("id").get<std::string>();
    r.split = s.at("split").get<std::string>();
    r.index = s.at("index").get<int>();
    r.seed = s.at("seed").get<std::uint64_t>();
    r.noise_level_percent = s.at("noise_level_percent").get<double>();
    r.x_file = s.at("x").get<std::string>();
    r.y_file = s.at("y").get<std::string>();
    const json& a = s.at("augmentation");
    r.augmentation = {a.at("alpha").get<double>(), a.at("shift_x").get<int>(), a.at("shift_y").get<int>()};
    m.samples.push_back(std::move(r));
  }
  return m;
}

}  // namespace

DatasetKind parse_dataset_name(const std::string& name) {
  static const std::regex pattern(R"(^(Train|Test)(64|128)(c|n(\d+)|cn(\d+))$)");
  std::smatch match;
  if (!std::regex_match(name, match, pattern)) {
    throw DatasetError("dataset name '" + name + "' does not follow {Train|Test}{64|128}{c|nX|cnX}");
  }
  DatasetKind kind;
  kind.phase = match[1] == "Train" ? Phase::Train : Phase::Test;
  kind.n_y = std::stoi(match[2]);
  const std::string noise = match[3];
  if (noise == "c") {
    kind.noise_levels_percent = {0.0};
  } else if (noise.rfind("cn", 0) == 0) {
    kind.noise_levels_percent = {0.0, std::stod(match[5])};
  } else {
    kind.noise_levels_percent = {std::stod(match[4])};
  }
  return kind;
}

const std::vector<std::string>& reference_dataset_names() {
  static const std::vector<std::string> names = {"Train128c",  "Train128cn15", "Test128c",
                                                 "Test128n5",  "Test128n15",   "Train64cn15",
                                                 "Test64n5",   "Test64n15"};
  return names;
}

SplitCounts full_scale_counts(Phase phase) {
  return phase == Phase::Train ? SplitCounts{2000, 500, 0} : SplitCounts{0, 0, 500};
}

SplitCounts desk_scale_counts(Phase phase) {
  return phase == Phase::Train ? SplitCounts{200, 50, 0} : SplitCounts{0, 0, 50};
}

std::uint64_t sample_seed(std::uint64_t master_seed, const std::string& split, int index) {
  return combine_seed(combine_seed(master_seed, fnv1a(split)), static_cast<std::uint64_t>(index));
}

MeasurementGrid DatasetManifest::grid() const {
  return view == View::Full ? MeasurementGrid::full(n_y) : MeasurementGrid::limited(n_y);
}

const SampleRecord& DatasetManifest::record(const std::string& id) const {
  auto it = std::find_if(samples.begin(), samples.end(), [&](const SampleRecord& r) { return r.id == id; });
  if (it == samples.end()) throw DatasetError("sample '" + id + "' not in manifest " + name);
  return *it;
}

DatasetManifest make_manifest(const std::string& name, std::optional<SplitCounts> counts,
                              std::uint64_t master_seed) {
  const DatasetKind kind = parse_dataset_name(name);
  DatasetManifest m;
  m.name = name;
  m.n_y = kind.n_y;
  m.view = kind.n_y == 128 ? View::Full : View::Limited;
  m.noise_levels_percent = kind.noise_levels_percent;
  m.counts = counts.value_or(desk_scale_counts(kind.phase));
  m.master_seed = master_seed;
  if (kind.phase == Phase::Train && m.counts.test != 0) {
    throw DatasetError(name + ": training datasets have no test split");
  }
  if (kind.phase == Phase::Test && (m.counts.train != 0 || m.counts.validation != 0)) {
    throw DatasetError(name + ": test datasets have only a test split");
  }
  plan_split(m, "train", m.counts.train);
  plan_split(m, "validation", m.counts.validation);
  plan_split(m, "test", m.counts.test);
  return m;
}

SamplePair generate_sample(const SampleRecord& rec, const MeasurementGrid& grid) {
  SamplePair pair;
  pair.seed = rec.seed;
  Rng perturb_rng(combine_seed(rec.seed, kPerturbStream));
  Rng augment_rng(combine_seed(rec.seed, kAugmentStream));
  Rng noise_rng(combine_seed(rec.seed, kNoiseStream));

  const EllipsePhantom perturbed = perturb(shepp_logan_base(), perturb_rng);
  pair.augmentation = draw_augmentation(augment_rng);
  pair.phantom = augment_with(perturbed, pair.augmentation);
  pair.x = rasterize(pair.phantom, kImageSide);
  pair.y = forward_transform(pair.phantom, grid);
  if (rec.noise_level_percent > 0.0) pair.y = add_noise(pair.y, rec.noise_level_percent, noise_rng);
  return pair;
}

void write_manifest(const fs::path& path, const DatasetManifest& m) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DatasetError("cannot write manifest " + path.string());
  os << to_json(m).dump(2) << '\n';
  if (!os) throw DatasetError("failed writing manifest " + path.string());
}

DatasetManifest read_manifest(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw DatasetError("cannot open manifest " + path.string());
  try {
    return from_json(json::parse(is));
  } catch (const json::exception& e) {
    throw DatasetError("corrupt manifest " + path.string() + ": " + e.what());
  }
}

void generate_dataset(DatasetManifest& manifest, const fs::path& dir, int workers) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DatasetError("cannot create " + dir.string() + ": " + ec.message());

  const MeasurementGrid grid = manifest.grid();
  const auto total = manifest.samples.size();
  std::vector<char> done(total, 0);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::string first_error;

  auto work = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::size_t k = next.fetch_add(1);
      if (k >= total) return;
      SampleRecord& rec = manifest.samples[k];
      try {
        const SamplePair pair = generate_sample(rec, grid);
        rec.augmentation = pair.augmentation;
        write_image(dir / rec.x_file, pair.x);
        write_sinogram(dir / rec.y_file, pair.y);
        done[k] = 1;
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        if (first_error.empty()) first_error = "sample " + rec.id + ": " + e.what();
        failed.store(true);
        return;
      }
    }
  };

  const int n_workers = std::max(1, workers);
  if (n_workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
  }

  if (failed.load()) {
    DatasetManifest partial = manifest;
    partial.complete = false;
    partial.samples.clear();
    std::string last_completed = "none";
    for (std::size_t k = 0; k < total; ++k) {
      if (!done[k]) break;
      last_completed = manifest.samples[k].id;
    }
    for (std::size_t k = 0; k < total; ++k) {
      if (done[k]) partial.samples.push_back(manifest.samples[k]);
    }
    try {
      write_manifest(dir / kManifestFile, partial);
    } catch (const DatasetError&) {
      // the original failure is the one worth reporting
    }
    throw DatasetError("dataset " + manifest.name + " aborted at " + first_error +
                       " (last completed in order: " + last_completed + ")");
  }
  manifest.complete = true;
  write_manifest(dir / kManifestFile, manifest);
}

SamplePair read_sample(const fs::path& dir, const std::string& id, std::optional<int> expected_n_y) {
  const DatasetManifest m = read_manifest(dir / kManifestFile);
  const SampleRecord& rec = m.record(id);
  if (expected_n_y && *expected_n_y != m.n_y) {
    throw DatasetError("sample " + id + ": measurement is " + std::to_string(m.n_y) + "x" +
                       std::to_string(m.n_y) + ", expected " + std::to_string(*expected_n_y));
  }
  SamplePair pair;
  pair.seed = rec.seed;
  pair.augmentation = rec.augmentation;
  try {
    pair.x = read_image(dir / rec.x_file);
    pair.y = read_sinogram(dir / rec.y_file, m.view);
  } catch (const TensorFormatError& e) {
    throw DatasetError("sample " + id + ": corrupt file: " + e.what());
  }
  if (pair.x.side != kImageSide) {
    throw DatasetError("sample " + id + ": image side " + std::to_string(pair.x.side) +
                       " does not match " + std::to_string(kImageSide));
  }
  if (pair.y.grid.n_rho != m.n_y || pair.y.grid.n_phi != m.n_y) {
    throw DatasetError("sample " + id + ": sinogram shape does not match manifest n_y=" +
                       std::to_string(m.n_y));
  }
  pair.y.noise_level_percent = rec.noise_level_percent;
  return pair;
}

}  // namespace circradon
