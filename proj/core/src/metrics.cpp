#include "swcnn/metrics.hpp"

#include <cmath>
#include <numeric>
#include <ostream>

#include "swcnn/error.hpp"

namespace swcnn {

namespace {

void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b)) {
    throw Error(std::string(what) + ": shape mismatch (" + std::to_string(a.height()) + "x" +
                std::to_string(a.width()) + "x" + std::to_string(a.channels()) + " vs " +
                std::to_string(b.height()) + "x" + std::to_string(b.width()) + "x" +
                std::to_string(b.channels()) + ")");
  }
}

std::vector<double> gaussian_kernel(int size, double sigma) {
  std::vector<double> k(static_cast<std::size_t>(size));
  const double center = (size - 1) / 2.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - center;
    k[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
  }
  const double sum = std::accumulate(k.begin(), k.end(), 0.0);
  for (double& v : k) v /= sum;
  return k;
}

// Separable "valid" filter of a row-major h x w plane.
std::vector<double> filter_valid(const std::vector<double>& plane, int h, int w,
                                 const std::vector<double>& k) {
  const int n = static_cast<int>(k.size());
  const int ow = w - n + 1;
  const int oh = h - n + 1;
  std::vector<double> tmp(static_cast<std::size_t>(h) * ow, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += k[i] * plane[static_cast<std::size_t>(y) * w + x + i];
      tmp[static_cast<std::size_t>(y) * ow + x] = s;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow, 0.0);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += k[i] * tmp[static_cast<std::size_t>(y + i) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = s;
    }
  }
  return out;
}

}  // namespace

double psnr(const Image& a, const Image& b, double cap_db) {
  require_same_shape(a, b, "psnr");
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  double sum = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const double d = static_cast<double>(pa[i]) - static_cast<double>(pb[i]);
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(pa.size());
  if (mse == 0.0) return cap_db;
  return std::min(cap_db, 10.0 * std::log10(1.0 / mse));
}

double ssim(const Image& a, const Image& b, const SsimParams& params) {
  require_same_shape(a, b, "ssim");
  if (a.height() < params.window || a.width() < params.window) {
    throw Error("ssim: image " + std::to_string(a.height()) + "x" + std::to_string(a.width()) +
                " is smaller than the " + std::to_string(params.window) + "x" +
                std::to_string(params.window) + " window");
  }
  const Image la = to_luma(a);
  const Image lb = to_luma(b);
  const int h = a.height();
  const int w = a.width();
  const std::size_t n = static_cast<std::size_t>(h) * w;
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  const auto pa = la.pixels();
  const auto pb = lb.pixels();
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = pa[i];
    y[i] = pb[i];
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto k = gaussian_kernel(params.window, params.sigma);
  const auto mx = filter_valid(x, h, w, k);
  const auto my = filter_valid(y, h, w, k);
  const auto sxx = filter_valid(xx, h, w, k);
  const auto syy = filter_valid(yy, h, w, k);
  const auto sxy = filter_valid(xy, h, w, k);
  const double c1 = (params.k1) * (params.k1);
  const double c2 = (params.k2) * (params.k2);
  double total = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = sxx[i] - mx[i] * mx[i];
    const double vy = syy[i] - my[i] * my[i];
    const double cov = sxy[i] - mx[i] * my[i];
    total += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mx.size());
}

double MetricReport::mean_psnr() const {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : rows) s += r.psnr_db;
  return s / static_cast<double>(rows.size());
}

double MetricReport::mean_ssim() const {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : rows) s += r.ssim;
  return s / static_cast<double>(rows.size());
}

void MetricReport::add(std::string image_id, const Image& restored, const Image& reference) {
  rows.push_back({std::move(image_id), psnr(restored, reference), ssim(restored, reference)});
}

void write_report_csv(const MetricReport& report, std::ostream& out) {
  const auto old_precision = out.precision(10);
  out << "image_id,psnr_db,ssim\n";
  for (const auto& r : report.rows) out << r.image_id << ',' << r.psnr_db << ',' << r.ssim << '\n';
  out << "mean," << report.mean_psnr() << ',' << report.mean_ssim() << '\n';
  out.precision(old_precision);
}

}  // namespace swcnn
