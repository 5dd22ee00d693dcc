#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "circradon/image.hpp"
#include "circradon/phantom.hpp"
#include "circradon/radon.hpp"

namespace circradon {

namespace fs = std::filesystem;

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Phase { Train, Test };

/// Sample counts per split. Train datasets use train/validation, test
/// datasets use test only.
struct SplitCounts {
  int train = 0;
  int validation = 0;
  int test = 0;

  friend bool operator==(const SplitCounts&, const SplitCounts&) = default;
};

/// What a `{PHASE}{N_Y}{NOISY-TYPE}` name encodes, e.g. Train128cn15 or Test64n5.
struct DatasetKind {
  Phase phase = Phase::Train;
  int n_y = 128;
  std::vector<double> noise_levels_percent;
};

DatasetKind parse_dataset_name(const std::string& name);

/// The eight datasets of the reference study.
const std::vector<std::string>& reference_dataset_names();

SplitCounts full_scale_counts(Phase phase);  // 2000/500 or 500
SplitCounts desk_scale_counts(Phase phase);  // 200/50 or 50

inline constexpr std::uint64_t kDefaultMasterSeed = 20240611;

struct SampleRecord {
  std::string id;
  std::string split;
  int index = 0;
  std::uint64_t seed = 0;
  double noise_level_percent = 0.0;
  std::string x_file;
  std::string y_file;
  Augmentation augmentation;
};

struct DatasetManifest {
  std::string name;
  int n_y = 128;
  View view = View::Full;
  std::vector<double> noise_levels_percent;
  SplitCounts counts;
  std::uint64_t master_seed = kDefaultMasterSeed;
  std::vector<SampleRecord> samples;
  bool complete = false;

  MeasurementGrid grid() const;
  const SampleRecord& record(const std::string& id) const;
};

/// Builds a manifest with every sample record planned (ids, seeds, noise
/// levels, file names). Desk-scale counts are used when `counts` is empty.
/// Mixed clean/noisy datasets require each split count to be a multiple of
/// the number of noise levels.
DatasetManifest make_manifest(const std::string& name, std::optional<SplitCounts> counts = {},
                              std::uint64_t master_seed = kDefaultMasterSeed);

/// Order-independent seed of one sample.
std::uint64_t sample_seed(std::uint64_t master_seed, const std::string& split, int index);

struct SamplePair {
  ImageGrid x;
  Sinogram y;
  EllipsePhantom phantom;
  Augmentation augmentation;
  std::uint64_t seed = 0;
};

/// base -> perturb -> augment -> rasterize / forward (+ noise), from the
/// record's seed alone.
SamplePair generate_sample(const SampleRecord& rec, const MeasurementGrid& grid);

/// Writes every sample plus manifest.json into `dir` using `workers` threads.
/// On failure a manifest with complete=false and the finished records is
/// written, and DatasetError names the failing and last completed sample.
void generate_dataset(DatasetManifest& manifest, const fs::path& dir, int workers = 1);

void write_manifest(const fs::path& path, const DatasetManifest& m);
DatasetManifest read_manifest(const fs::path& path);

inline constexpr const char* kManifestFile = "manifest.json";

/// Reads one pair and validates shapes against the manifest (128^2 images,
/// n_y^2 sinograms) and, when given, against an expected measurement size.
SamplePair read_sample(const fs::path& dir, const std::string& id,
                       std::optional<int> expected_n_y = {});

}  // namespace circradon
