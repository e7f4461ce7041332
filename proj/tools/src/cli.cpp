#include "swcnn_cli/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "swcnn/checkpoint.hpp"
#include "swcnn/dataset.hpp"
#include "swcnn/error.hpp"
#include "swcnn/evaluation.hpp"
#include "swcnn/hn_model.hpp"
#include "swcnn/image.hpp"
#include "swcnn/losses.hpp"
#include "swcnn/metrics.hpp"
#include "swcnn/pn_features.hpp"
#include "swcnn/rng.hpp"
#include "swcnn/trainer.hpp"
#include "swcnn/watermark.hpp"

namespace swcnn::cli {
namespace {

namespace fs = std::filesystem;

// Flag combinations CLI11 cannot express; reported like parse errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr std::uint64_t kModelSeedStream = 0x4D4F44454CULL;  // "MODEL"
constexpr std::uint64_t kPnSeedStream = 0x504EULL;            // "PN"

std::string absolute(const std::string& s) {
  return fs::absolute(fs::path(s)).lexically_normal().string();
}

// Snapshots store absolute paths so a replay works from any directory.
const CLI::Validator kAbsPath(
    [](std::string& s) {
      if (!s.empty()) s = absolute(s);
      return std::string();
    },
    "PATH", "absolute_path");

// Same, but leaves a reserved keyword (e.g. "random", "identity") alone.
CLI::Validator abs_path_or(std::string keyword) {
  return CLI::Validator(
      [keyword](std::string& s) {
        if (!s.empty() && s != keyword) s = absolute(s);
        return std::string();
      },
      "PATH|" + keyword, "absolute_path_or_" + keyword);
}

// Snapshots record unset optional paths as "", which must pass on replay.
CLI::Validator optional(const CLI::Validator& check) {
  return CLI::Validator(
      [check](std::string& s) { return s.empty() ? std::string() : check(s); },
      check.get_description(), "optional_" + check.get_name());
}

void write_snapshot(const CLI::App& app, const std::string& command, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error("cannot write config snapshot '" + path.string() + "'");
  f << "# swcnn " << command << "; replay with: swcnn " << command << " --config "
    << path.string() << '\n';
  f << app.config_to_str(true, false);
  if (!f) throw Error("failed writing config snapshot '" + path.string() + "'");
}

fs::path file_snapshot(const std::string& output) { return fs::path(output + ".config"); }

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      values.push_back(v);
    } catch (const std::exception&) {
      throw UsageError(flag + ": '" + item + "' is not a number");
    }
  }
  if (values.empty()) throw UsageError(flag + " needs at least one value");
  return values;
}

// "a:b" or a single value "a".
std::pair<double, double> parse_range(const std::string& text, const std::string& flag) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    const double v = parse_list(text, flag).at(0);
    return {v, v};
  }
  const double lo = parse_list(text.substr(0, colon), flag).at(0);
  const double hi = parse_list(text.substr(colon + 1), flag).at(0);
  if (!(lo > 0.0) || hi < lo) throw UsageError(flag + " must be 'lo:hi' with 0 < lo <= hi");
  return {lo, hi};
}

// Width divisor from the first kernel, so reduced models load without a flag.
// Falls back to full width and lets HNModel::load name any mismatch.
HNModel load_model(const fs::path& path) {
  const auto tensors = read_checkpoint(path);
  int divisor = 1;
  if (!tensors.empty() && !tensors.front().dims.empty()) {
    const auto width = tensors.front().dims.front();
    if (width > 0 && width <= 48 && 48 % width == 0) divisor = static_cast<int>(48 / width);
  }
  return HNModel::load(path, divisor);
}

void print_report_summary(std::ostream& out, const EvalResult& r) {
  out << "images " << r.restored.rows.size() << '\n';
  out << "restored    mean psnr " << r.restored.mean_psnr() << " dB, mean ssim "
      << r.restored.mean_ssim() << '\n';
  out << "watermarked mean psnr " << r.watermarked.mean_psnr() << " dB, mean ssim "
      << r.watermarked.mean_ssim() << '\n';
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  std::string clean, watermark, out, pos;
  double alpha = 0.0;
  double scale = 1.0;
  std::uint64_t seed = 0;
};

void setup_synth(CLI::App& app, SynthArgs& a) {
  app.description("Blend one watermark onto one image.");
  app.add_option("--clean", a.clean, "Clean host image (PNG/JPEG)")
      ->required()
      ->check(CLI::ExistingFile)
      ->transform(kAbsPath);
  app.add_option("--watermark", a.watermark, "RGBA watermark PNG")
      ->required()
      ->check(CLI::ExistingFile)
      ->transform(kAbsPath);
  app.add_option("--alpha", a.alpha, "Transparency in [0,1]")->required()->check(CLI::Range(0.0, 1.0));
  app.add_option("--out", a.out, "Output PNG")->required()->transform(kAbsPath);
  app.add_option("--scale", a.scale, "Watermark scale factor")->check(CLI::PositiveNumber);
  app.add_option("--pos", a.pos, "Top-left 'row,col' of the watermark box (sampled if omitted)");
  app.add_option("--seed", a.seed, "Placement seed");
}

int run_synth(const CLI::App& app, const SynthArgs& a, std::ostream& out) {
  write_snapshot(app, "synth", file_snapshot(a.out));
  const Image clean = to_rgb(load_image(a.clean));
  const WatermarkAsset asset = load_watermark(a.watermark);
  PlacementSpec spec;
  if (!a.pos.empty()) {
    const auto rc = parse_list(a.pos, "--pos");
    if (rc.size() != 2 || rc[0] != std::floor(rc[0]) || rc[1] != std::floor(rc[1])) {
      throw UsageError("--pos must be 'row,col' with integer values");
    }
    spec.row = static_cast<int>(rc[0]);
    spec.col = static_cast<int>(rc[1]);
    spec.scale = a.scale;
    spec.transparency = a.alpha;
    spec.watermark_id = asset.id;
    spec.seed = a.seed;
  } else {
    SamplerConfig cfg;
    cfg.transparencies = {a.alpha};
    cfg.scale_min = cfg.scale_max = a.scale;
    cfg.max_coverage = 1.0;
    spec = sample_placement(a.seed, clean.height(), clean.width(), asset, cfg);
  }
  const Image marked = blend(clean, asset, spec);
  save_image(marked, a.out);
  out << "placement row " << spec.row << " col " << spec.col << " scale " << spec.scale
      << " watermark " << spec.watermark_id << '\n';
  out << "coverage " << coverage(asset, spec, clean.height(), clean.width()).covered_fraction
      << '\n';
  out << "psnr_vs_clean " << psnr(marked, clean) << " dB\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// build-dataset

struct BuildArgs {
  std::string clean_dir, watermarks, out, mode, alphas = "0.3,0.5,0.7,1.0", scale, from_manifest;
  std::optional<double> alpha;
  double coverage_max = 0.4;
  int patch = 256;
  int total = 3111;
  std::uint64_t seed = 0;
};

void setup_build(CLI::App& app, BuildArgs& a) {
  app.description("Build a self-supervised training set or a fixed-transparency test set.");
  app.add_option("--clean-dir", a.clean_dir, "Directory of clean images")
      ->check(optional(CLI::ExistingDirectory))
      ->transform(kAbsPath);
  app.add_option("--watermarks", a.watermarks, "Directory of RGBA watermark PNGs")
      ->check(optional(CLI::ExistingDirectory))
      ->transform(kAbsPath);
  app.add_option("--out", a.out, "Output dataset directory")->required()->transform(kAbsPath);
  app.add_option("--mode", a.mode, "train or test")->check(CLI::IsMember({"train", "test"}));
  app.add_option("--alphas", a.alphas, "Training transparency levels, comma separated");
  app.add_option("--alpha", a.alpha, "Test transparency (test mode)")
      ->check(optional(CLI::Range(0.0, 1.0)));
  app.add_option("--coverage-max", a.coverage_max, "Largest covered fraction")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--scale", a.scale, "Scale range 'lo:hi' (train, default 0.5:1.0) or value (test, default 1.5)");
  app.add_option("--patch", a.patch, "Training patch side")->check(CLI::PositiveNumber);
  app.add_option("--total", a.total, "Training patches in total")->check(CLI::PositiveNumber);
  app.add_option("--seed", a.seed, "Master seed");
  app.add_option("--from-manifest", a.from_manifest, "Regenerate from an existing manifest.json")
      ->check(optional(CLI::ExistingFile))
      ->transform(kAbsPath);
}

void print_dataset_summary(std::ostream& out, const DatasetManifest& m, const RegenerateResult& r) {
  std::map<double, int> histogram;
  for (const auto& e : m.entries) ++histogram[e.input.transparency];
  out << "pairs " << m.entries.size() << " (" << (m.kind == DatasetKind::kTrain ? "train" : "test")
      << ")\n";
  for (const auto& [alpha, n] : histogram) out << "alpha " << alpha << ": " << n << '\n';
  out << r.files_changed << " files changed (" << r.files_written << " checked)\n";
}

int run_build(const CLI::App& app, const BuildArgs& a, std::ostream& out) {
  if (!a.from_manifest.empty()) {
    if (!a.mode.empty() || !a.clean_dir.empty() || !a.watermarks.empty()) {
      throw UsageError("--from-manifest replaces --mode, --clean-dir and --watermarks");
    }
    write_snapshot(app, "build-dataset", fs::path(a.out) / "build-dataset.config");
    const DatasetManifest m = DatasetManifest::load(a.from_manifest);
    const RegenerateResult r = regenerate_from_manifest(m, a.out);
    m.save(fs::path(a.out) / kManifestFile);
    print_dataset_summary(out, m, r);
    return kOk;
  }
  if (a.mode.empty()) throw UsageError("--mode is required (or --from-manifest)");
  if (a.clean_dir.empty() || a.watermarks.empty()) {
    throw UsageError("--clean-dir and --watermarks are required");
  }
  SamplerConfig sampler;
  if (a.mode == "train") {
    if (a.alpha) throw UsageError("--alpha is for test mode; use --alphas for training levels");
    sampler = SamplerConfig::training();
    sampler.transparencies = parse_list(a.alphas, "--alphas");
    for (double t : sampler.transparencies) {
      if (t < 0.0 || t > 1.0) throw UsageError("--alphas values must lie in [0,1]");
    }
    if (!a.scale.empty()) std::tie(sampler.scale_min, sampler.scale_max) = parse_range(a.scale, "--scale");
  } else {
    if (!a.alpha) throw UsageError("test mode needs --alpha");
    sampler = SamplerConfig::test(*a.alpha);
    if (!a.scale.empty()) std::tie(sampler.scale_min, sampler.scale_max) = parse_range(a.scale, "--scale");
  }
  sampler.max_coverage = a.coverage_max;

  write_snapshot(app, "build-dataset", fs::path(a.out) / "build-dataset.config");
  RegenerateResult r;
  DatasetManifest m;
  if (a.mode == "train") {
    TrainSetConfig cfg;
    cfg.sampler = sampler;
    cfg.patch_size = a.patch;
    cfg.total_patches = a.total;
    cfg.master_seed = a.seed;
    m = build_training_set(a.clean_dir, a.watermarks, a.out, cfg, &r);
  } else {
    m = build_test_set(a.clean_dir, a.watermarks, a.out, *a.alpha, a.seed, &sampler, &r);
  }
  print_dataset_summary(out, m, r);
  return kOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string dataset, out, probe, norm = "l1", mode = "selfsup", pn_weights = "random";
  int epochs = 100;
  int batch = 8;
  double lr = 1e-3;
  double lambda = 1.0;
  int lr_decay_epoch = 30;
  double lr_decay_factor = 0.1;
  bool lr_decay_periodic = false;
  std::int64_t max_steps = 0;
  std::size_t probe_limit = 0;
  double leaky_slope = 0.1;
  int width_divisor = 1;
  std::uint64_t seed = 0;
};

void setup_train(CLI::App& app, TrainArgs& a) {
  app.description("Train the restoration network.");
  app.add_option("--dataset", a.dataset, "Training dataset directory (with manifest.json)")
      ->required()
      ->check(CLI::ExistingDirectory)
      ->transform(kAbsPath);
  app.add_option("--out", a.out, "Output directory for checkpoints and train_log.csv")
      ->required()
      ->transform(kAbsPath);
  app.add_option("--epochs", a.epochs, "Epochs")->check(CLI::PositiveNumber);
  app.add_option("--batch", a.batch, "Batch size")->check(CLI::PositiveNumber);
  app.add_option("--lr", a.lr, "Initial learning rate")->check(CLI::PositiveNumber);
  app.add_option("--lambda", a.lambda, "Texture loss weight")->check(CLI::NonNegativeNumber);
  app.add_option("--norm", a.norm, "l1 or l2")->check(CLI::IsMember({"l1", "l2"}));
  app.add_option("--mode", a.mode, "selfsup (re-watermarked targets) or supervised (clean targets)")
      ->check(CLI::IsMember({"selfsup", "supervised"}));
  app.add_option("--pn-weights", a.pn_weights, "Perceptual network weights file, or 'random'")
      ->transform(abs_path_or("random"));
  app.add_option("--lr-decay-epoch", a.lr_decay_epoch, "0-based epoch where the rate drops")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--lr-decay-factor", a.lr_decay_factor, "Rate multiplier at the drop")
      ->check(CLI::PositiveNumber);
  app.add_flag("--lr-decay-periodic", a.lr_decay_periodic, "Repeat the drop every --lr-decay-epoch epochs");
  app.add_option("--max-steps", a.max_steps, "Stop after this many steps (0 = no limit)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--probe", a.probe, "Test-set directory scored after every epoch")
      ->check(optional(CLI::ExistingDirectory))
      ->transform(kAbsPath);
  app.add_option("--probe-limit", a.probe_limit, "Score only the first N probe images (0 = all)");
  app.add_option("--leaky-slope", a.leaky_slope, "Negative slope of the output LeakyReLU")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--width-divisor", a.width_divisor, "Shrink hidden widths (testing aid)")
      ->check(CLI::IsMember({1, 2, 4, 8, 16}));
  app.add_option("--seed", a.seed, "Master seed (shuffling, initialization, random PN)");
}

int run_train(const CLI::App& app, const TrainArgs& a, std::ostream& out) {
  write_snapshot(app, "train", fs::path(a.out) / "train.config");
  const PairStore data(a.dataset);
  std::optional<PairStore> probe;
  if (!a.probe.empty()) probe.emplace(a.probe);

  const std::optional<fs::path> pn_path =
      a.pn_weights == "random" ? std::nullopt : std::optional<fs::path>(a.pn_weights);
  const PNFeatureExtractor pn = PNFeatureExtractor::load(pn_path, derive_seed(a.seed, kPnSeedStream));
  MixedLossConfig loss_cfg;
  loss_cfg.lambda = a.lambda;
  loss_cfg.norm = a.norm == "l2" ? Norm::kL2 : Norm::kL1;
  loss_cfg.pn = &pn;

  TrainConfig cfg;
  cfg.batch_size = a.batch;
  cfg.epochs = a.epochs;
  cfg.lr0 = a.lr;
  cfg.lr_decay_epoch = a.lr_decay_epoch;
  cfg.lr_decay_factor = a.lr_decay_factor;
  cfg.lr_decay_periodic = a.lr_decay_periodic;
  cfg.seed = a.seed;
  cfg.mode = a.mode == "supervised" ? TrainMode::kSupervised : TrainMode::kSelfSupervised;
  cfg.max_steps = a.max_steps;
  cfg.out_dir = a.out;
  cfg.probe_limit = a.probe_limit;

  HNModel model = HNModel::build(derive_seed(a.seed, kModelSeedStream),
                                 static_cast<float>(a.leaky_slope), a.width_divisor);
  out << "training " << model.param_count() << " parameters on " << data.size() << " pairs, "
      << a.epochs << " epochs, batch " << a.batch << '\n';
  const TrainResult result =
      train(data, model, cfg, loss_cfg, probe ? &*probe : nullptr, [&out](const TrainLogRecord& r) {
        if (!r.probe_psnr && r.step % 50 != 0) return;
        out << "epoch " << r.epoch << " step " << r.step << " loss " << r.loss << " lr " << r.lr;
        if (r.probe_psnr) out << " probe_psnr " << *r.probe_psnr << " probe_ssim " << *r.probe_ssim;
        out << '\n' << std::flush;
      });
  model.save(fs::path(a.out) / "model.swck");
  out << "steps " << result.log.size() << '\n';
  if (result.best_probe_psnr) out << "best probe psnr " << *result.best_probe_psnr << " dB\n";
  out << "final model " << (fs::path(a.out) / "model.swck").string() << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// remove

struct RemoveArgs {
  std::string model, input, output;
};

void setup_remove(CLI::App& app, RemoveArgs& a) {
  app.description("Remove the watermark from one image with a trained model.");
  app.add_option("--model", a.model, "Checkpoint (.swck)")
      ->required()
      ->check(CLI::ExistingFile)
      ->transform(kAbsPath);
  app.add_option("--input", a.input, "Watermarked image")
      ->required()
      ->check(CLI::ExistingFile)
      ->transform(kAbsPath);
  app.add_option("--output", a.output, "Restored PNG")->required()->transform(kAbsPath);
}

int run_remove(const CLI::App& app, const RemoveArgs& a, std::ostream& out) {
  write_snapshot(app, "remove", file_snapshot(a.output));
  const HNModel model = load_model(a.model);
  const Image input = load_image(a.input);
  const Image restored = model.restore(input);
  save_image(restored, a.output);
  out << "restored " << restored.width() << "x" << restored.height() << " -> " << a.output << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string model, test_dir, report;
  std::size_t limit = 0;
};

void setup_eval(CLI::App& app, EvalArgs& a) {
  app.description("Score a model (or the identity) on a test set.");
  app.add_option("--model", a.model, "Checkpoint (.swck), or 'identity' for the unrestored baseline")
      ->required()
      ->transform(abs_path_or("identity"));
  app.add_option("--test-dir", a.test_dir, "Test-set directory")
      ->required()
      ->check(CLI::ExistingDirectory)
      ->transform(kAbsPath);
  app.add_option("--report", a.report, "Output CSV")->required()->transform(kAbsPath);
  app.add_option("--limit", a.limit, "Score only the first N images (0 = all)");
}

int run_eval(const CLI::App& app, const EvalArgs& a, std::ostream& out) {
  write_snapshot(app, "eval", file_snapshot(a.report));
  const PairStore test(a.test_dir);
  std::optional<HNModel> model;
  if (a.model != "identity") model = load_model(a.model);
  const Restorer restore = model ? Restorer([&model](const Image& img) { return model->restore(img); })
                                 : Restorer([](const Image& img) { return to_rgb(img); });
  const EvalResult result = evaluate(test, restore, a.limit);
  std::ofstream f(a.report, std::ios::trunc);
  if (!f) throw Error("cannot write report '" + a.report + "'");
  write_eval_csv(result, f);
  if (!f) throw Error("failed writing report '" + a.report + "'");
  print_report_summary(out, result);
  return kOk;
}

// ---------------------------------------------------------------------------

const char* kUsage =
    "usage: swcnn <command> [options]\n"
    "\n"
    "commands:\n"
    "  synth          blend one watermark onto one image\n"
    "  build-dataset  build a training or test set with its manifest\n"
    "  train          train the restoration network\n"
    "  remove         restore one image with a trained model\n"
    "  eval           score a model on a test set\n"
    "\n"
    "Run 'swcnn <command> --help' for the options of a command.\n"
    "Every command writes a key=value snapshot of its resolved options next to\n"
    "its outputs; pass it back with --config to replay the run.\n";

template <class Args, class Setup, class Run>
int dispatch(const std::string& name, std::vector<std::string> rest, Setup setup, Run body,
             std::ostream& out, std::ostream& err) {
  CLI::App app("swcnn " + name, "swcnn " + name);
  app.option_defaults()->always_capture_default()->multi_option_policy(
      CLI::MultiOptionPolicy::TakeLast);
  app.set_config("--config", "", "Replay a snapshot written by an earlier run");
  Args args;
  setup(app, args);
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "swcnn " << name << ": " << e.what() << "\nRun 'swcnn " << name
        << " --help' for usage.\n";
    return kUsageError;
  }
  try {
    return body(app, args, out);
  } catch (const UsageError& e) {
    err << "swcnn " << name << ": " << e.what() << "\nRun 'swcnn " << name
        << " --help' for usage.\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "swcnn " << name << ": error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty()) {
    err << kUsage;
    return kUsageError;
  }
  const std::string& cmd = args.front();
  std::vector<std::string> rest(args.begin() + 1, args.end());
  if (cmd == "--help" || cmd == "-h" || cmd == "help") {
    out << kUsage;
    return kOk;
  }
  if (cmd == "synth") return dispatch<SynthArgs>(cmd, rest, setup_synth, run_synth, out, err);
  if (cmd == "build-dataset") return dispatch<BuildArgs>(cmd, rest, setup_build, run_build, out, err);
  if (cmd == "train") return dispatch<TrainArgs>(cmd, rest, setup_train, run_train, out, err);
  if (cmd == "remove") return dispatch<RemoveArgs>(cmd, rest, setup_remove, run_remove, out, err);
  if (cmd == "eval") return dispatch<EvalArgs>(cmd, rest, setup_eval, run_eval, out, err);
  err << "swcnn: unknown command '" << cmd << "'\n\n" << kUsage;
  return kUsageError;
}

}  // namespace swcnn::cli
