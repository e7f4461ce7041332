#include <doctest.h>

#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "swcnn/checkpoint.hpp"
#include "swcnn/dataset.hpp"
#include "swcnn/hn_model.hpp"
#include "swcnn_cli/cli.hpp"
#include "temp_dir.hpp"

using namespace swcnn;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  Result r;
  r.code = swcnn::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

// Clean images, 6x6 marks and a scratch area.
struct Corpus {
  testutil::TempDir tmp{"cli"};
  fs::path clean = tmp / "clean";
  fs::path wm = tmp / "wm";
  explicit Corpus(int n_clean = 3, int n_marks = 3, int side = 40) {
    Rng rng(11);
    fs::create_directories(clean);
    fs::create_directories(wm);
    for (int i = 0; i < n_clean; ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "c%02d.png", i);
      save_image(oracle::structured_image(rng, side, side), clean / name);
    }
    for (int i = 0; i < n_marks; ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "w%02d.png", i);
      save_image(oracle::random_image(rng, 6, 6, 4), wm / name);
    }
  }
  std::string s(const fs::path& p) const { return p.string(); }
};

std::string strip_time(const fs::path& log) {
  std::ifstream in(log);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) out << line.substr(0, line.rfind(',')) << '\n';
  return out.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("cli: top-level usage and exit codes") {
  CHECK(invoke({}).code == swcnn::cli::kUsageError);
  CHECK(invoke({"--help"}).code == swcnn::cli::kOk);
  CHECK(contains(invoke({"--help"}).out, "build-dataset"));
  const auto unknown = invoke({"frobnicate"});
  CHECK(unknown.code == swcnn::cli::kUsageError);
  CHECK(contains(unknown.err, "unknown command 'frobnicate'"));
  for (const char* cmd : {"synth", "build-dataset", "train", "remove", "eval"}) {
    const auto help = invoke({cmd, "--help"});
    CHECK(help.code == swcnn::cli::kOk);
    CHECK(contains(help.out, "--config"));
  }
}

TEST_CASE("cli synth: usage errors exit 2") {
  Corpus c;
  const std::string clean = c.s(c.clean / "c00.png"), mark = c.s(c.wm / "w00.png");
  const std::string out = c.s(c.tmp / "o.png");
  const auto missing = invoke({"synth", "--clean", clean, "--watermark", mark, "--out", out});
  CHECK(missing.code == swcnn::cli::kUsageError);
  CHECK(contains(missing.err, "--alpha"));
  CHECK(!fs::exists(out));
  CHECK(invoke({"synth", "--clean", clean, "--watermark", mark, "--out", out, "--alpha", "1.5"}).code ==
        swcnn::cli::kUsageError);
  CHECK(invoke({"synth", "--clean", c.s(c.tmp / "nope.png"), "--watermark", mark, "--out", out,
             "--alpha", "0.5"})
            .code == swcnn::cli::kUsageError);
  CHECK(invoke({"synth", "--clean", clean, "--watermark", mark, "--out", out, "--alpha", "0.5",
             "--pos", "3"})
            .code == swcnn::cli::kUsageError);
  CHECK(invoke({"synth", "--clean", clean, "--watermark", mark, "--out", out, "--alpha", "0.5",
             "--bogus"})
            .code == swcnn::cli::kUsageError);
}

TEST_CASE("cli synth: runtime failures exit 1 with a message") {
  Corpus c;
  std::ofstream(c.tmp / "junk.png") << "not a png";
  const auto r = invoke({"synth", "--clean", c.s(c.clean / "c00.png"), "--watermark",
                      c.s(c.tmp / "junk.png"), "--out", c.s(c.tmp / "o.png"), "--alpha", "0.5"});
  CHECK(r.code == swcnn::cli::kRuntimeError);
  CHECK(contains(r.err, "junk.png"));
}

TEST_CASE("cli synth: alpha 0 leaves every pixel unchanged") {
  Corpus c;
  const fs::path out = c.tmp / "o.png";
  const auto r = invoke({"synth", "--clean", c.s(c.clean / "c01.png"), "--watermark",
                      c.s(c.wm / "w01.png"), "--alpha", "0", "--out", c.s(out)});
  REQUIRE(r.code == swcnn::cli::kOk);
  CHECK(load_image(out) == load_image(c.clean / "c01.png"));
  CHECK(contains(r.out, "psnr_vs_clean 100 dB"));
  CHECK(contains(r.out, "coverage 0\n"));
}

TEST_CASE("cli synth: same seed gives identical bytes, snapshot replays the run") {
  Corpus c;
  auto run = [&](const std::string& name, const std::string& seed) {
    return invoke({"synth", "--clean", c.s(c.clean / "c00.png"), "--watermark", c.s(c.wm / "w02.png"),
                "--alpha", "0.7", "--out", c.s(c.tmp / name), "--seed", seed, "--scale", "2"});
  };
  REQUIRE(run("a.png", "42").code == swcnn::cli::kOk);
  REQUIRE(run("b.png", "42").code == swcnn::cli::kOk);
  REQUIRE(run("c.png", "43").code == swcnn::cli::kOk);
  CHECK(slurp(c.tmp / "a.png") == slurp(c.tmp / "b.png"));
  CHECK(slurp(c.tmp / "a.png") != slurp(c.tmp / "c.png"));

  const std::string snap = slurp(c.tmp / "a.png.config");
  CHECK(contains(snap, "seed=42"));
  CHECK(contains(snap, "alpha=0.7"));
  CHECK(contains(snap, "clean=\"" + fs::absolute(c.clean / "c00.png").lexically_normal().string()));

  const std::string before = slurp(c.tmp / "a.png");
  fs::remove(c.tmp / "a.png");
  REQUIRE(invoke({"synth", "--config", c.s(c.tmp / "a.png.config")}).code == swcnn::cli::kOk);
  CHECK(slurp(c.tmp / "a.png") == before);
}

TEST_CASE("cli synth: explicit position matches the library blend") {
  Corpus c;
  const fs::path out = c.tmp / "o.png";
  const auto r = invoke({"synth", "--clean", c.s(c.clean / "c02.png"), "--watermark",
                      c.s(c.wm / "w00.png"), "--alpha", "0.5", "--pos", "5,7", "--out", c.s(out)});
  REQUIRE(r.code == swcnn::cli::kOk);
  PlacementSpec spec;
  spec.row = 5;
  spec.col = 7;
  spec.transparency = 0.5;
  spec.watermark_id = "w00";
  const Image expect = blend(to_rgb(load_image(c.clean / "c02.png")),
                             load_watermark(c.wm / "w00.png"), spec);
  CHECK(slurp(out) == slurp([&] {
          save_image(expect, c.tmp / "expect.png");
          return c.tmp / "expect.png";
        }()));
  CHECK(contains(r.out, "coverage " + std::to_string(36.0 / 1600).substr(0, 6)));
}

TEST_CASE("cli build-dataset: test mode over 27 images and 12 marks reports 324 pairs") {
  Corpus c(27, 12, 24);
  const auto r = invoke({"build-dataset", "--clean-dir", c.s(c.clean), "--watermarks", c.s(c.wm),
                      "--out", c.s(c.tmp / "test"), "--mode", "test", "--alpha", "0.3"});
  REQUIRE(r.code == swcnn::cli::kOk);
  CHECK(contains(r.out, "pairs 324 (test)"));
  CHECK(contains(r.out, "alpha 0.3: 324"));
  CHECK(PairStore(c.tmp / "test").size() == 324);
  CHECK(PairStore(c.tmp / "test").manifest().sampler.scale_min == 1.5);
}

TEST_CASE("cli build-dataset: training defaults, rebuild and manifest regeneration") {
  Corpus c;
  const std::vector<std::string> args = {"build-dataset", "--clean-dir", c.s(c.clean),
                                         "--watermarks", c.s(c.wm), "--out", c.s(c.tmp / "train"),
                                         "--mode", "train", "--patch", "32", "--total", "60",
                                         "--seed", "5"};
  const auto first = invoke(args);
  REQUIRE(first.code == swcnn::cli::kOk);
  CHECK(contains(first.out, "pairs 60 (train)"));
  for (const char* level : {"alpha 0.3: ", "alpha 0.5: ", "alpha 0.7: ", "alpha 1: "}) {
    CHECK(contains(first.out, level));
  }
  CHECK(contains(first.out, "180 files changed"));
  const PairStore store(c.tmp / "train");
  const auto& sampler = store.manifest().sampler;
  CHECK(sampler.transparencies == std::vector<double>{0.3, 0.5, 0.7, 1.0});
  CHECK(sampler.scale_min == 0.5);
  CHECK(sampler.scale_max == 1.0);
  CHECK(sampler.max_coverage == 0.4);

  const auto again = invoke(args);
  REQUIRE(again.code == swcnn::cli::kOk);
  CHECK(contains(again.out, "0 files changed (180 checked)"));

  const fs::path manifest = c.tmp / "train" / kManifestFile;
  const auto fresh = invoke({"build-dataset", "--from-manifest", c.s(manifest), "--out",
                          c.s(c.tmp / "regen")});
  REQUIRE(fresh.code == swcnn::cli::kOk);
  CHECK(contains(fresh.out, "180 files changed"));
  for (const auto& e : fs::directory_iterator(c.tmp / "train")) {
    if (e.path().extension() != ".png") continue;
    CHECK(slurp(e.path()) == slurp(c.tmp / "regen" / e.path().filename()));
  }
  CHECK(slurp(manifest) == slurp(c.tmp / "regen" / kManifestFile));
  const auto replay = invoke({"build-dataset", "--from-manifest", c.s(manifest), "--out",
                           c.s(c.tmp / "regen")});
  CHECK(contains(replay.out, "0 files changed"));

  const auto snap = invoke({"build-dataset", "--config", c.s(c.tmp / "train" / "build-dataset.config")});
  REQUIRE(snap.code == swcnn::cli::kOk);
  CHECK(contains(snap.out, "0 files changed"));
}

TEST_CASE("cli build-dataset: custom sampler flags reach the manifest") {
  Corpus c;
  const auto r = invoke({"build-dataset", "--clean-dir", c.s(c.clean), "--watermarks", c.s(c.wm),
                      "--out", c.s(c.tmp / "train"), "--mode", "train", "--patch", "32",
                      "--total", "12", "--alphas", "0.2,0.9", "--scale", "0.75:1.25",
                      "--coverage-max", "0.3"});
  REQUIRE(r.code == swcnn::cli::kOk);
  const PairStore store(c.tmp / "train");
  const auto& sampler = store.manifest().sampler;
  CHECK(sampler.transparencies == std::vector<double>{0.2, 0.9});
  CHECK(sampler.scale_min == 0.75);
  CHECK(sampler.scale_max == 1.25);
  CHECK(sampler.max_coverage == 0.3);
}

TEST_CASE("cli build-dataset: errors") {
  Corpus c;
  fs::create_directories(c.tmp / "empty");
  const std::string out = c.s(c.tmp / "o");
  CHECK(invoke({"build-dataset", "--clean-dir", c.s(c.clean), "--watermarks", c.s(c.wm), "--out", out,
             "--mode", "test"})
            .code == swcnn::cli::kUsageError);
  CHECK(invoke({"build-dataset", "--clean-dir", c.s(c.clean), "--watermarks", c.s(c.wm), "--out", out})
            .code == swcnn::cli::kUsageError);
  CHECK(invoke({"build-dataset", "--clean-dir", c.s(c.clean), "--watermarks", c.s(c.wm), "--out", out,
             "--mode", "train", "--alphas", "0.3,x"})
            .code == swcnn::cli::kUsageError);
  CHECK(invoke({"build-dataset", "--clean-dir", c.s(c.clean), "--watermarks", c.s(c.wm), "--out", out,
             "--mode", "train", "--scale", "1.0:0.5"})
            .code == swcnn::cli::kUsageError);
  CHECK(invoke({"build-dataset", "--clean-dir", c.s(c.clean), "--watermarks", c.s(c.wm), "--out", out,
             "--mode", "sideways"})
            .code == swcnn::cli::kUsageError);
  const auto empty = invoke({"build-dataset", "--clean-dir", c.s(c.tmp / "empty"), "--watermarks",
                          c.s(c.wm), "--out", out, "--mode", "test", "--alpha", "0.5"});
  CHECK(empty.code == swcnn::cli::kRuntimeError);
  CHECK(contains(empty.err, "empty"));
  const auto no_marks = invoke({"build-dataset", "--clean-dir", c.s(c.clean), "--watermarks",
                             c.s(c.tmp / "empty"), "--out", out, "--mode", "test", "--alpha", "0.5"});
  CHECK(no_marks.code == swcnn::cli::kRuntimeError);
}

namespace {

// 8 training pairs of 32x32 and a 3-image probe set.
struct TrainCorpus : Corpus {
  TrainCorpus() : Corpus(2, 3, 40) {
    REQUIRE(invoke({"build-dataset", "--clean-dir", s(clean), "--watermarks", s(wm), "--out",
                 s(tmp / "train"), "--mode", "train", "--patch", "32", "--total", "8"})
                .code == swcnn::cli::kOk);
    REQUIRE(invoke({"build-dataset", "--clean-dir", s(clean), "--watermarks", s(wm), "--out",
                 s(tmp / "probe"), "--mode", "test", "--alpha", "0.5", "--scale", "1"})
                .code == swcnn::cli::kOk);
  }
  Result train(const std::string& out, std::vector<std::string> extra = {}) {
    std::vector<std::string> args = {"train", "--dataset", s(tmp / "train"), "--out", s(tmp / out),
                                     "--width-divisor", "8", "--batch", "4", "--epochs", "2",
                                     "--probe", s(tmp / "probe"), "--seed", "9"};
    args.insert(args.end(), extra.begin(), extra.end());
    return invoke(args);
  }
};

}  // namespace

TEST_CASE("cli train: defaults echo the published schedule in the snapshot") {
  TrainCorpus c;
  const auto r = invoke({"train", "--dataset", c.s(c.tmp / "train"), "--out", c.s(c.tmp / "run"),
                      "--width-divisor", "8", "--max-steps", "1"});
  REQUIRE(r.code == swcnn::cli::kOk);
  const std::string snap = slurp(c.tmp / "run" / "train.config");
  for (const char* kv : {"epochs=100", "batch=8", "lr=0.001", "lambda=1", "norm=\"l1\"",
                         "mode=\"selfsup\"", "pn-weights=\"random\"", "lr-decay-epoch=30",
                         "lr-decay-factor=0.1", "seed=0"}) {
    CHECK_MESSAGE(contains(snap, kv), kv);
  }
  CHECK(fs::exists(c.tmp / "run" / "model.swck"));
  CHECK(fs::exists(c.tmp / "run" / "train_log.csv"));
  CHECK(contains(r.out, "steps 1"));

  const std::string model = slurp(c.tmp / "run" / "model.swck");
  REQUIRE(invoke({"train", "--config", c.s(c.tmp / "run" / "train.config")}).code == swcnn::cli::kOk);
  CHECK(slurp(c.tmp / "run" / "model.swck") == model);
}

TEST_CASE("cli train: runs are reproducible from flags and from the snapshot") {
  TrainCorpus c;
  REQUIRE(c.train("a").code == swcnn::cli::kOk);
  REQUIRE(c.train("b").code == swcnn::cli::kOk);
  CHECK(slurp(c.tmp / "a" / "model.swck") == slurp(c.tmp / "b" / "model.swck"));
  CHECK(slurp(c.tmp / "a" / "ckpt_epoch1.swck") == slurp(c.tmp / "b" / "ckpt_epoch1.swck"));
  CHECK(strip_time(c.tmp / "a" / "train_log.csv") == strip_time(c.tmp / "b" / "train_log.csv"));

  const std::string model = slurp(c.tmp / "a" / "model.swck");
  const std::string log = strip_time(c.tmp / "a" / "train_log.csv");
  fs::remove_all(c.tmp / "a" / "model.swck");
  REQUIRE(invoke({"train", "--config", c.s(c.tmp / "a" / "train.config")}).code == swcnn::cli::kOk);
  CHECK(slurp(c.tmp / "a" / "model.swck") == model);
  CHECK(strip_time(c.tmp / "a" / "train_log.csv") == log);

  REQUIRE(c.train("c", {"--seed", "10"}).code == swcnn::cli::kOk);
  CHECK(slurp(c.tmp / "c" / "model.swck") != model);
}

TEST_CASE("cli train: norm and mode flags change the run") {
  TrainCorpus c;
  REQUIRE(c.train("l1").code == swcnn::cli::kOk);
  REQUIRE(c.train("l2", {"--norm", "l2"}).code == swcnn::cli::kOk);
  REQUIRE(c.train("sup", {"--mode", "supervised"}).code == swcnn::cli::kOk);
  const std::string base = slurp(c.tmp / "l1" / "model.swck");
  CHECK(slurp(c.tmp / "l2" / "model.swck") != base);
  CHECK(slurp(c.tmp / "sup" / "model.swck") != base);
  CHECK(contains(slurp(c.tmp / "l2" / "train.config"), "norm=\"l2\""));
  CHECK(contains(slurp(c.tmp / "sup" / "train.config"), "mode=\"supervised\""));
  CHECK(c.train("bad", {"--norm", "l3"}).code == swcnn::cli::kUsageError);
  CHECK(c.train("bad", {"--mode", "unsupervised"}).code == swcnn::cli::kUsageError);
  CHECK(c.train("bad", {"--lambda", "-1"}).code == swcnn::cli::kUsageError);
}

TEST_CASE("cli train: dataset errors") {
  TrainCorpus c;
  const auto kind = invoke({"train", "--dataset", c.s(c.tmp / "probe"), "--out", c.s(c.tmp / "x"),
                         "--width-divisor", "8", "--max-steps", "1"});
  CHECK(kind.code == swcnn::cli::kRuntimeError);
  CHECK(contains(kind.err, "train-kind"));
  fs::create_directories(c.tmp / "bare");
  const auto bare = invoke({"train", "--dataset", c.s(c.tmp / "bare"), "--out", c.s(c.tmp / "y"),
                         "--width-divisor", "8", "--max-steps", "1"});
  CHECK(bare.code == swcnn::cli::kRuntimeError);
  CHECK(contains(bare.err, "manifest.json"));
  const auto pn = c.train("z", {"--pn-weights", c.s(c.tmp / "missing.swck")});
  CHECK(pn.code == swcnn::cli::kRuntimeError);
  CHECK(contains(pn.err, "missing.swck"));
}

TEST_CASE("cli remove: output keeps the input size") {
  testutil::TempDir tmp("rm");
  HNModel::build(4, 0.1f, 8).save(tmp / "m.swck");
  Rng rng(2);
  for (auto [w, h] : {std::pair{256, 256}, std::pair{500, 333}, std::pair{17, 9}}) {
    const fs::path in = tmp / "in.png", out = tmp / "out.png";
    save_image(oracle::random_image(rng, h, w, 3), in);
    const auto r = invoke({"remove", "--model", (tmp / "m.swck").string(), "--input", in.string(),
                        "--output", out.string()});
    REQUIRE(r.code == swcnn::cli::kOk);
    const Image restored = load_image(out);
    CHECK(restored.width() == w);
    CHECK(restored.height() == h);
    CHECK(restored.channels() == 3);
  }
  CHECK(fs::exists(tmp / "out.png.config"));
}

TEST_CASE("cli remove: matches the library restore on a full-width model") {
  testutil::TempDir tmp("rm");
  const HNModel model = HNModel::build(6);
  model.save(tmp / "m.swck");
  Rng rng(3);
  save_image(oracle::structured_image(rng, 40, 70), tmp / "in.png");
  REQUIRE(invoke({"remove", "--model", (tmp / "m.swck").string(), "--input", (tmp / "in.png").string(),
               "--output", (tmp / "out.png").string()})
              .code == swcnn::cli::kOk);
  save_image(model.restore(load_image(tmp / "in.png")), tmp / "expect.png");
  CHECK(slurp(tmp / "out.png") == slurp(tmp / "expect.png"));
}

TEST_CASE("cli remove: corrupt checkpoints exit 1 and name the tensor") {
  testutil::TempDir tmp("rm");
  HNModel::build(4, 0.1f, 8).save(tmp / "m.swck");
  save_image(Image(32, 32, 3, 0.5f), tmp / "in.png");
  auto remove = [&](const fs::path& model) {
    return invoke({"remove", "--model", model.string(), "--input", (tmp / "in.png").string(),
                "--output", (tmp / "out.png").string()});
  };

  auto tensors = read_checkpoint(tmp / "m.swck");
  for (auto& t : tensors) {
    if (t.name == "hn.l07.up.bias") {
      t.dims = {t.dims[0] + 1};
      t.values.push_back(0.0f);
    }
  }
  write_checkpoint(tmp / "shape.swck", tensors);
  const auto shape = remove(tmp / "shape.swck");
  CHECK(shape.code == swcnn::cli::kRuntimeError);
  CHECK(contains(shape.err, "hn.l07.up.bias"));

  std::string bytes = slurp(tmp / "m.swck");
  bytes[bytes.size() / 2] ^= 0x5A;
  std::ofstream(tmp / "flip.swck", std::ios::binary) << bytes;
  const auto flip = remove(tmp / "flip.swck");
  CHECK(flip.code == swcnn::cli::kRuntimeError);
  CHECK(contains(flip.err, "CRC"));
  CHECK(!fs::exists(tmp / "out.png"));
}

TEST_CASE("cli eval: identity reproduces the watermarked baseline, one row per image") {
  Corpus c(3, 4, 40);
  REQUIRE(invoke({"build-dataset", "--clean-dir", c.s(c.clean), "--watermarks", c.s(c.wm), "--out",
               c.s(c.tmp / "test"), "--mode", "test", "--alpha", "0.7"})
              .code == swcnn::cli::kOk);
  const auto r = invoke({"eval", "--model", "identity", "--test-dir", c.s(c.tmp / "test"), "--report",
                      c.s(c.tmp / "r.csv")});
  REQUIRE(r.code == swcnn::cli::kOk);
  const auto rows = read_csv(c.tmp / "r.csv");
  REQUIRE(rows.size() == 1 + 12 + 2);
  CHECK(rows.front() == std::vector<std::string>{"image_id", "psnr_db", "ssim"});
  const auto& mean = rows[13];
  const auto& baseline = rows[14];
  CHECK(mean[0] == "mean");
  CHECK(baseline[0] == "watermarked_input_mean");
  CHECK(mean[1] == baseline[1]);
  CHECK(mean[2] == baseline[2]);
  CHECK(std::stod(mean[1]) < 100.0);
  CHECK(fs::exists(c.tmp / "r.csv.config"));

  const auto limited = invoke({"eval", "--model", "identity", "--test-dir", c.s(c.tmp / "test"),
                            "--report", c.s(c.tmp / "r2.csv"), "--limit", "5"});
  REQUIRE(limited.code == swcnn::cli::kOk);
  CHECK(read_csv(c.tmp / "r2.csv").size() == 1 + 5 + 2);
}

TEST_CASE("cli eval: trained model and error paths") {
  Corpus c(2, 2, 40);
  REQUIRE(invoke({"build-dataset", "--clean-dir", c.s(c.clean), "--watermarks", c.s(c.wm), "--out",
               c.s(c.tmp / "test"), "--mode", "test", "--alpha", "0.5"})
              .code == swcnn::cli::kOk);
  HNModel::build(1, 0.1f, 8).save(c.tmp / "m.swck");
  const auto ok = invoke({"eval", "--model", c.s(c.tmp / "m.swck"), "--test-dir", c.s(c.tmp / "test"),
                       "--report", c.s(c.tmp / "r.csv")});
  REQUIRE(ok.code == swcnn::cli::kOk);
  CHECK(contains(ok.out, "images 4"));

  const auto missing_model = invoke({"eval", "--model", c.s(c.tmp / "none.swck"), "--test-dir",
                                  c.s(c.tmp / "test"), "--report", c.s(c.tmp / "r.csv")});
  CHECK(missing_model.code == swcnn::cli::kRuntimeError);

  for (const auto& e : fs::directory_iterator(c.tmp / "test")) {
    if (e.path().filename().string().find("clean") != std::string::npos) {
      fs::remove(e.path());
      break;
    }
  }
  const auto no_clean = invoke({"eval", "--model", "identity", "--test-dir", c.s(c.tmp / "test"),
                             "--report", c.s(c.tmp / "r.csv")});
  CHECK(no_clean.code == swcnn::cli::kRuntimeError);
  CHECK(contains(no_clean.err, "clean"));
  CHECK(invoke({"eval", "--model", "identity", "--test-dir", c.s(c.tmp / "test")}).code ==
        swcnn::cli::kUsageError);
}
