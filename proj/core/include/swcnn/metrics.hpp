#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "swcnn/image.hpp"

namespace swcnn {

inline constexpr double kPsnrCapDb = 100.0;

// 10*log10(1/MSE) with peak 1.0, MSE over every channel. Identical inputs
// return `cap_db`.
double psnr(const Image& a, const Image& b, double cap_db = kPsnrCapDb);

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

// Mean SSIM over every fully contained window of the luma channel.
double ssim(const Image& a, const Image& b, const SsimParams& params = {});

struct MetricRow {
  std::string image_id;
  double psnr_db = 0.0;
  double ssim = 0.0;
};

struct MetricReport {
  std::vector<MetricRow> rows;

  double mean_psnr() const;
  double mean_ssim() const;
  void add(std::string image_id, const Image& restored, const Image& reference);
};

// CSV with header "image_id,psnr_db,ssim", one row per image then a "mean" row.
void write_report_csv(const MetricReport& report, std::ostream& out);

}  // namespace swcnn
