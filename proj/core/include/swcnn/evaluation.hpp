#pragma once

#include <functional>
#include <iosfwd>

#include "swcnn/dataset.hpp"
#include "swcnn/metrics.hpp"

namespace swcnn {

using Restorer = std::function<Image(const Image&)>;

struct EvalResult {
  MetricReport restored;     // restore(input) vs clean
  MetricReport watermarked;  // input vs clean
};

// Scores `restore` over every entry of a test set (or the first `limit`).
EvalResult evaluate(const PairStore& test, const Restorer& restore, std::size_t limit = 0);

// Per-image rows, a "mean" row, then "watermarked_input_mean".
void write_eval_csv(const EvalResult& result, std::ostream& out);

}  // namespace swcnn
