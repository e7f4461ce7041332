#include "swcnn/evaluation.hpp"

#include <ostream>

#include "swcnn/error.hpp"

namespace swcnn {

EvalResult evaluate(const PairStore& test, const Restorer& restore, std::size_t limit) {
  EvalResult result;
  const std::size_t n = limit > 0 ? std::min(limit, test.size()) : test.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Image input = test.input(i);
    const Image clean = test.clean(i);
    Image restored = restore(input);
    if (restored.channels() != clean.channels()) restored = to_rgb(restored);
    result.restored.add(test.id(i), restored, clean);
    result.watermarked.add(test.id(i), input, clean);
  }
  return result;
}

void write_eval_csv(const EvalResult& result, std::ostream& out) {
  write_report_csv(result.restored, out);
  const auto old = out.precision(10);
  out << "watermarked_input_mean," << result.watermarked.mean_psnr() << ','
      << result.watermarked.mean_ssim() << '\n';
  out.precision(old);
}

}  // namespace swcnn
