#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "swcnn/evaluation.hpp"
#include "temp_dir.hpp"

using namespace swcnn;
namespace fs = std::filesystem;

TEST_CASE("evaluate: identity, oracle outputs and accounting") {
  testutil::TempDir tmp("ev");
  Rng rng(1);
  fs::create_directories(tmp / "clean");
  fs::create_directories(tmp / "wm");
  for (int i = 0; i < 2; ++i)
    save_image(oracle::structured_image(rng, 24, 24), tmp / "clean" / ("c" + std::to_string(i) + ".png"));
  for (int i = 0; i < 3; ++i)
    save_image(oracle::random_image(rng, 5, 5, 4), tmp / "wm" / ("w" + std::to_string(i) + ".png"));
  build_test_set(tmp / "clean", tmp / "wm", tmp / "test", 0.5);
  const PairStore test(tmp / "test");

  const auto identity = evaluate(test, [](const Image& img) { return img; });
  CHECK(identity.restored.rows.size() == 6);
  CHECK(identity.watermarked.rows.size() == 6);
  CHECK(identity.restored.mean_psnr() == identity.watermarked.mean_psnr());
  CHECK(identity.restored.mean_ssim() == identity.watermarked.mean_ssim());
  CHECK(identity.restored.rows[0].image_id == test.id(0));

  std::size_t calls = 0;
  const auto perfect = evaluate(test, [&](const Image&) { return test.clean(calls++); });
  for (const auto& row : perfect.restored.rows) {
    CHECK(row.psnr_db == kPsnrCapDb);
    CHECK(row.ssim == doctest::Approx(1.0));
  }
  CHECK(evaluate(test, [](const Image& img) { return img; }, 4).restored.rows.size() == 4);

  std::ostringstream out;
  write_eval_csv(identity, out);
  const std::string csv = out.str();
  CHECK(csv.rfind("image_id,psnr_db,ssim\n", 0) == 0);
  CHECK(csv.find("\nmean,") != std::string::npos);
  CHECK(csv.find("\nwatermarked_input_mean,") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 6 + 2);
}
