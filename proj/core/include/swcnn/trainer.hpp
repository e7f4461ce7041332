#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "swcnn/adam.hpp"
#include "swcnn/dataset.hpp"
#include "swcnn/hn_model.hpp"
#include "swcnn/losses.hpp"

namespace swcnn {

enum class TrainMode { kSelfSupervised, kSupervised };

struct TrainConfig {
  int batch_size = 8;
  int epochs = 100;
  double lr0 = 1e-3;
  int lr_decay_epoch = 30;
  double lr_decay_factor = 0.1;
  bool lr_decay_periodic = false;  // repeat the drop every lr_decay_epoch epochs
  AdamConfig adam;
  std::uint64_t seed = 0;
  TrainMode mode = TrainMode::kSelfSupervised;
  std::int64_t max_steps = 0;  // 0 = no limit
  std::filesystem::path out_dir;  // checkpoints + train_log.csv; empty = in-memory only
  std::size_t probe_limit = 0;    // 0 = whole probe set
};

struct TrainLogRecord {
  int epoch = 0;
  std::int64_t step = 0;
  double loss = 0.0;
  double lr = 0.0;
  std::optional<double> probe_psnr;  // set on the last step of each epoch
  std::optional<double> probe_ssim;
  double wall_seconds = 0.0;
};

// lr0 before lr_decay_epoch, lr0 * factor from then on (or factor^k with
// the periodic policy). Epochs are 0-based.
double lr_schedule(int epoch, const TrainConfig& cfg);

struct TrainResult {
  std::vector<TrainLogRecord> log;
  std::optional<double> best_probe_psnr;
};

using TrainObserver = std::function<void(const TrainLogRecord&)>;

// Mini-batch Adam on the mixed loss. Self-supervised mode targets the
// re-watermarked reference; supervised mode targets the clean image. The
// model is updated in place.
TrainResult train(const PairStore& data, HNModel& model, const TrainConfig& cfg,
                  const MixedLossConfig& loss_cfg, const PairStore* probe = nullptr,
                  const TrainObserver& observer = {});

void write_log_header(std::ostream& out);
void write_log_record(std::ostream& out, const TrainLogRecord& r);

}  // namespace swcnn
