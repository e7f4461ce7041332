#include "swcnn/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <numeric>

#include <json.hpp>

#include "swcnn/error.hpp"
#include "swcnn/rng.hpp"

namespace swcnn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kPatchStream = 0x5041544348000000ULL;  // "PATCH"

json placement_to_json(const PlacementSpec& p) {
  return {{"watermark_id", p.watermark_id}, {"transparency", p.transparency},
          {"scale", p.scale},               {"row", p.row},
          {"col", p.col},                   {"seed", p.seed}};
}

PlacementSpec placement_from_json(const json& j) {
  PlacementSpec p;
  p.watermark_id = j.at("watermark_id").get<std::string>();
  p.transparency = j.at("transparency").get<double>();
  p.scale = j.at("scale").get<double>();
  p.row = j.at("row").get<int>();
  p.col = j.at("col").get<int>();
  p.seed = j.at("seed").get<std::uint64_t>();
  return p;
}

const WatermarkAsset& find_asset(std::span<const WatermarkAsset> assets, const std::string& id) {
  for (const auto& a : assets) {
    if (a.id == id) return a;
  }
  throw Error("watermark '" + id + "' referenced by the manifest is not in the asset directory");
}

std::vector<unsigned char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Writes `img` unless the file already holds identical bytes.
bool write_if_changed(const Image& img, const fs::path& path) {
  const auto bytes = encode_png(img);
  if (read_bytes(path) == bytes) return false;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  return true;
}

void ensure_dir(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error("cannot create output directory '" + out.string() + "': " + ec.message());
}

}  // namespace

std::vector<PatchOffset> sample_patch_offsets(int height, int width, int patch_size, int count,
                                              std::uint64_t seed) {
  if (patch_size <= 0) throw Error("patch size must be positive");
  if (height < patch_size || width < patch_size) {
    throw Error("image " + std::to_string(height) + "x" + std::to_string(width) +
                " is smaller than the patch size " + std::to_string(patch_size));
  }
  Rng rng(seed);
  std::vector<PatchOffset> offsets(static_cast<std::size_t>(std::max(count, 0)));
  for (auto& o : offsets) {
    o.row = static_cast<int>(rng.between(0, height - patch_size));
    o.col = static_cast<int>(rng.between(0, width - patch_size));
  }
  return offsets;
}

std::vector<Image> extract_patches(const Image& img, int patch_size, int count,
                                   std::uint64_t seed) {
  std::vector<Image> patches;
  for (const auto& o : sample_patch_offsets(img.height(), img.width(), patch_size, count, seed)) {
    patches.push_back(img.crop(o.row, o.col, patch_size, patch_size));
  }
  return patches;
}

std::pair<Image, PlacementSpec> watermark_once(const Image& clean,
                                               std::span<const WatermarkAsset> assets,
                                               const SamplerConfig& cfg, std::uint64_t seed) {
  if (assets.empty()) throw Error("no watermark assets supplied");
  Rng rng(seed);
  const auto& asset = assets[rng.below(assets.size())];
  const std::uint64_t placement_seed = rng.next_u64();
  PlacementSpec spec = sample_placement(placement_seed, clean.height(), clean.width(), asset, cfg);
  return {blend(clean, asset, spec), std::move(spec)};
}

TrainingPair make_pair(const Image& clean_patch, std::span<const WatermarkAsset> assets,
                       const SamplerConfig& cfg, std::uint64_t seed) {
  TrainingPair pair;
  pair.meta.input_seed = seed ^ 1ULL;
  pair.meta.reference_seed = seed ^ 2ULL;
  auto [input, input_spec] = watermark_once(clean_patch, assets, cfg, pair.meta.input_seed);
  auto [reference, ref_spec] = watermark_once(clean_patch, assets, cfg, pair.meta.reference_seed);
  pair.input = std::move(input);
  pair.reference = std::move(reference);
  pair.meta.input_placement = std::move(input_spec);
  pair.meta.reference_placement = std::move(ref_spec);
  pair.clean = clean_patch;
  return pair;
}

// ---------------------------------------------------------------------------
// Manifest

void DatasetManifest::save(const fs::path& path) const {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = kind == DatasetKind::kTrain ? "train" : "test";
  j["master_seed"] = master_seed;
  j["watermarks_dir"] = watermarks_dir;
  j["patch_size"] = patch_size;
  j["sampler"] = {{"transparencies", sampler.transparencies},
                  {"scale_min", sampler.scale_min},
                  {"scale_max", sampler.scale_max},
                  {"max_coverage", sampler.max_coverage},
                  {"retry_budget", sampler.retry_budget}};
  json counts_json = json::array();
  for (const auto& [clean, n] : counts) counts_json.push_back({{"clean_path", clean}, {"count", n}});
  j["counts"] = std::move(counts_json);
  json list = json::array();
  for (const auto& e : entries) {
    json r = {{"id", e.id},
              {"clean_path", e.clean_path},
              {"patch", {{"row", e.patch.row}, {"col", e.patch.col}, {"size", e.patch_size}}},
              {"seed", e.seed},
              {"input", placement_to_json(e.input)}};
    r["reference"] = e.reference ? placement_to_json(*e.reference) : json(nullptr);
    list.push_back(std::move(r));
  }
  j["entries"] = std::move(list);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write manifest '" + path.string() + "'");
  out << j.dump(1) << '\n';
}

DatasetManifest DatasetManifest::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest '" + path.string() + "'");
  DatasetManifest m;
  try {
    const json j = json::parse(in);
    const int version = j.at("schema_version").get<int>();
    if (version != kSchemaVersion) {
      throw Error("unsupported manifest schema version " + std::to_string(version));
    }
    const auto kind = j.at("kind").get<std::string>();
    if (kind != "train" && kind != "test") throw Error("unknown manifest kind '" + kind + "'");
    m.kind = kind == "train" ? DatasetKind::kTrain : DatasetKind::kTest;
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.watermarks_dir = j.at("watermarks_dir").get<std::string>();
    m.patch_size = j.at("patch_size").get<int>();
    const auto& s = j.at("sampler");
    m.sampler.transparencies = s.at("transparencies").get<std::vector<double>>();
    m.sampler.scale_min = s.at("scale_min").get<double>();
    m.sampler.scale_max = s.at("scale_max").get<double>();
    m.sampler.max_coverage = s.at("max_coverage").get<double>();
    m.sampler.retry_budget = s.at("retry_budget").get<int>();
    for (const auto& c : j.at("counts")) {
      m.counts.emplace_back(c.at("clean_path").get<std::string>(), c.at("count").get<int>());
    }
    for (const auto& r : j.at("entries")) {
      ManifestEntry e;
      e.id = r.at("id").get<std::string>();
      e.clean_path = r.at("clean_path").get<std::string>();
      e.patch.row = r.at("patch").at("row").get<int>();
      e.patch.col = r.at("patch").at("col").get<int>();
      e.patch_size = r.at("patch").at("size").get<int>();
      e.seed = r.at("seed").get<std::uint64_t>();
      e.input = placement_from_json(r.at("input"));
      if (!r.at("reference").is_null()) e.reference = placement_from_json(r.at("reference"));
      m.entries.push_back(std::move(e));
    }
  } catch (const json::exception& ex) {
    throw Error("malformed manifest '" + path.string() + "': " + ex.what());
  }
  return m;
}

std::string input_file(const std::string& id) { return id + "_input.png"; }
std::string reference_file(const std::string& id) { return id + "_ref.png"; }
std::string clean_file(const std::string& id) { return id + "_clean.png"; }

std::vector<fs::path> list_images(const fs::path& dir) {
  std::vector<fs::path> files;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") files.push_back(entry.path());
  }
  if (ec) throw Error("cannot read image directory '" + dir.string() + "': " + ec.message());
  if (files.empty()) throw Error("no PNG/JPEG images in '" + dir.string() + "'");
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<int> split_counts(int total, int n) {
  if (n <= 0) throw Error("cannot split patches across zero images");
  if (total < 0) throw Error("total patch count must be non-negative");
  std::vector<int> counts(static_cast<std::size_t>(n), total / n);
  for (int i = 0; i < total % n; ++i) ++counts[static_cast<std::size_t>(i)];
  return counts;
}

EntryImages render_entry(const ManifestEntry& entry, std::span<const WatermarkAsset> assets) {
  const Image full = to_rgb(load_image(entry.clean_path));
  EntryImages out;
  out.clean = entry.patch_size > 0
                  ? full.crop(entry.patch.row, entry.patch.col, entry.patch_size, entry.patch_size)
                  : full;
  out.input = blend(out.clean, find_asset(assets, entry.input.watermark_id), entry.input);
  if (entry.reference) {
    out.reference = blend(out.clean, find_asset(assets, entry.reference->watermark_id),
                          *entry.reference);
  }
  return out;
}

RegenerateResult regenerate_from_manifest(const DatasetManifest& manifest, const fs::path& out) {
  ensure_dir(out);
  const auto assets = load_watermark_dir(manifest.watermarks_dir);
  RegenerateResult result;
  auto emit = [&](const Image& img, const fs::path& path) {
    ++result.files_written;
    if (write_if_changed(img, path)) ++result.files_changed;
  };
  for (const auto& entry : manifest.entries) {
    const EntryImages images = render_entry(entry, assets);
    emit(images.input, out / input_file(entry.id));
    if (entry.reference) emit(images.reference, out / reference_file(entry.id));
    emit(images.clean, out / clean_file(entry.id));
  }
  return result;
}

DatasetManifest build_training_set(const fs::path& clean_dir, const fs::path& assets_dir,
                                   const fs::path& out, const TrainSetConfig& cfg,
                                   RegenerateResult* written) {
  const auto files = list_images(clean_dir);
  const auto assets = load_watermark_dir(assets_dir);
  const auto per_image = split_counts(cfg.total_patches, static_cast<int>(files.size()));

  DatasetManifest manifest;
  manifest.kind = DatasetKind::kTrain;
  manifest.master_seed = cfg.master_seed;
  manifest.watermarks_dir = assets_dir.string();
  manifest.sampler = cfg.sampler;
  manifest.patch_size = cfg.patch_size;

  std::uint64_t index = 0;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const Image clean = to_rgb(load_image(files[i]));
    const int count = per_image[i];
    manifest.counts.emplace_back(files[i].string(), count);
    const auto offsets =
        sample_patch_offsets(clean.height(), clean.width(), cfg.patch_size, count,
                             derive_seed(cfg.master_seed ^ kPatchStream, i));
    for (const auto& offset : offsets) {
      const Image patch = clean.crop(offset.row, offset.col, cfg.patch_size, cfg.patch_size);
      const std::uint64_t seed = derive_seed(cfg.master_seed, index);
      TrainingPair pair = make_pair(patch, assets, cfg.sampler, seed);
      ManifestEntry e;
      char id[16];
      std::snprintf(id, sizeof id, "%06llu", static_cast<unsigned long long>(index));
      e.id = id;
      e.clean_path = files[i].string();
      e.patch = offset;
      e.patch_size = cfg.patch_size;
      e.seed = seed;
      e.input = pair.meta.input_placement;
      e.reference = pair.meta.reference_placement;
      manifest.entries.push_back(std::move(e));
      ++index;
    }
  }
  const RegenerateResult r = regenerate_from_manifest(manifest, out);
  if (written) *written = r;
  manifest.save(out / kManifestFile);
  return manifest;
}

DatasetManifest build_test_set(const fs::path& clean_dir, const fs::path& assets_dir,
                               const fs::path& out, double transparency,
                               std::uint64_t master_seed, const SamplerConfig* sampler_override,
                               RegenerateResult* written) {
  if (transparency < 0.0 || transparency > 1.0) throw Error("transparency must lie in [0,1]");
  const auto files = list_images(clean_dir);
  const auto assets = load_watermark_dir(assets_dir);
  SamplerConfig sampler = sampler_override ? *sampler_override : SamplerConfig::test(transparency);
  sampler.transparencies = {transparency};

  DatasetManifest manifest;
  manifest.kind = DatasetKind::kTest;
  manifest.master_seed = master_seed;
  manifest.watermarks_dir = assets_dir.string();
  manifest.sampler = sampler;

  std::uint64_t index = 0;
  for (const auto& file : files) {
    const Image clean = to_rgb(load_image(file));
    manifest.counts.emplace_back(file.string(), static_cast<int>(assets.size()));
    for (const auto& asset : assets) {
      ManifestEntry e;
      e.id = file.stem().string() + "__" + asset.id;
      e.clean_path = file.string();
      e.seed = derive_seed(master_seed, index++);
      e.input = sample_placement(e.seed, clean.height(), clean.width(), asset, sampler);
      manifest.entries.push_back(std::move(e));
    }
  }
  const RegenerateResult r = regenerate_from_manifest(manifest, out);
  if (written) *written = r;
  manifest.save(out / kManifestFile);
  return manifest;
}

// ---------------------------------------------------------------------------
// PairStore

PairStore::PairStore(fs::path dir)
    : dir_(std::move(dir)), manifest_(DatasetManifest::load(dir_ / kManifestFile)) {}

Image PairStore::input(std::size_t i) const {
  ++input_reads_;
  return load_image(dir_ / input_file(id(i)));
}

Image PairStore::reference(std::size_t i) const {
  if (!manifest_.entries.at(i).reference) {
    throw Error("entry '" + id(i) + "' has no reference image (test set?)");
  }
  ++reference_reads_;
  return load_image(dir_ / reference_file(id(i)));
}

Image PairStore::clean(std::size_t i) const {
  ++clean_reads_;
  const auto path = dir_ / clean_file(id(i));
  if (!fs::exists(path)) throw Error("missing clean reference '" + path.string() + "'");
  return load_image(path);
}

EstimatorMinimizers estimator_minimizers(std::span<const double> samples) {
  if (samples.empty()) throw Error("estimator_minimizers needs at least one sample");
  EstimatorMinimizers r;
  r.l2_argmin = std::accumulate(samples.begin(), samples.end(), 0.0) /
                static_cast<double>(samples.size());
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  r.l1_argmin = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return r;
}

}  // namespace swcnn
