#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "swcnn/image.hpp"
#include "swcnn/watermark.hpp"

namespace swcnn {

struct PatchOffset {
  int row = 0;
  int col = 0;
  friend bool operator==(const PatchOffset&, const PatchOffset&) = default;
};

// `count` uniformly sampled top-left offsets of a patch_size square.
std::vector<PatchOffset> sample_patch_offsets(int height, int width, int patch_size, int count,
                                              std::uint64_t seed);

std::vector<Image> extract_patches(const Image& img, int patch_size, int count,
                                   std::uint64_t seed);

struct PairMeta {
  std::uint64_t input_seed = 0;      // seed ^ 1
  std::uint64_t reference_seed = 0;  // seed ^ 2
  PlacementSpec input_placement;
  PlacementSpec reference_placement;
};

struct TrainingPair {
  Image input;      // watermarked with the first draw
  Image reference;  // independently re-watermarked with the second draw
  std::optional<Image> clean;
  PairMeta meta;
};

// One watermark draw: asset choice, then placement, both from `seed`.
std::pair<Image, PlacementSpec> watermark_once(const Image& clean,
                                               std::span<const WatermarkAsset> assets,
                                               const SamplerConfig& cfg, std::uint64_t seed);

TrainingPair make_pair(const Image& clean_patch, std::span<const WatermarkAsset> assets,
                       const SamplerConfig& cfg, std::uint64_t seed);

enum class DatasetKind { kTrain, kTest };

struct ManifestEntry {
  std::string id;
  std::string clean_path;
  PatchOffset patch;
  int patch_size = 0;  // 0 for whole-image test entries
  std::uint64_t seed = 0;
  PlacementSpec input;
  std::optional<PlacementSpec> reference;  // train entries only
};

struct DatasetManifest {
  static constexpr int kSchemaVersion = 1;

  DatasetKind kind = DatasetKind::kTrain;
  std::uint64_t master_seed = 0;
  std::string watermarks_dir;
  SamplerConfig sampler;
  int patch_size = 0;
  std::vector<std::pair<std::string, int>> counts;  // clean path -> entries
  std::vector<ManifestEntry> entries;

  void save(const std::filesystem::path& path) const;
  static DatasetManifest load(const std::filesystem::path& path);
};

inline constexpr const char* kManifestFile = "manifest.json";

struct TrainSetConfig {
  SamplerConfig sampler = SamplerConfig::training();
  int patch_size = 256;
  int total_patches = 3111;
  std::uint64_t master_seed = 0;
};

// Sorted list of PNG/JPEG files in `dir`; throws when empty.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

// Splits `total` across `n` images as evenly as possible (earlier images get
// the remainder).
std::vector<int> split_counts(int total, int n);

struct RegenerateResult {
  int files_written = 0;
  int files_changed = 0;
};

DatasetManifest build_training_set(const std::filesystem::path& clean_dir,
                                   const std::filesystem::path& assets_dir,
                                   const std::filesystem::path& out,
                                   const TrainSetConfig& cfg,
                                   RegenerateResult* written = nullptr);

DatasetManifest build_test_set(const std::filesystem::path& clean_dir,
                               const std::filesystem::path& assets_dir,
                               const std::filesystem::path& out, double transparency,
                               std::uint64_t master_seed = 0,
                               const SamplerConfig* sampler_override = nullptr,
                               RegenerateResult* written = nullptr);

// Regenerates every file listed in the manifest into `out`. Files whose
// bytes already match are left untouched.
RegenerateResult regenerate_from_manifest(const DatasetManifest& manifest,
                                          const std::filesystem::path& out);

// Generated images of one entry (reference empty for test entries).
struct EntryImages {
  Image input;
  Image reference;
  Image clean;
};
EntryImages render_entry(const ManifestEntry& entry, std::span<const WatermarkAsset> assets);

std::string input_file(const std::string& id);
std::string reference_file(const std::string& id);
std::string clean_file(const std::string& id);

// Reads pairs of a built dataset directory lazily, with per-role access
// counters so callers can verify which images an algorithm touched.
class PairStore {
 public:
  explicit PairStore(std::filesystem::path dir);

  const DatasetManifest& manifest() const noexcept { return manifest_; }
  std::size_t size() const noexcept { return manifest_.entries.size(); }
  const std::string& id(std::size_t i) const { return manifest_.entries.at(i).id; }

  Image input(std::size_t i) const;
  Image reference(std::size_t i) const;
  Image clean(std::size_t i) const;

  std::size_t input_reads() const noexcept { return input_reads_; }
  std::size_t reference_reads() const noexcept { return reference_reads_; }
  std::size_t clean_reads() const noexcept { return clean_reads_; }

 private:
  std::filesystem::path dir_;
  DatasetManifest manifest_;
  mutable std::atomic<std::size_t> input_reads_{0};
  mutable std::atomic<std::size_t> reference_reads_{0};
  mutable std::atomic<std::size_t> clean_reads_{0};
};

struct EstimatorMinimizers {
  double l2_argmin = 0.0;  // mean
  double l1_argmin = 0.0;  // median (midpoint of the two middle values for even n)
};

EstimatorMinimizers estimator_minimizers(std::span<const double> samples);

}  // namespace swcnn
