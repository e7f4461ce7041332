#include "swcnn/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>

#include "swcnn/error.hpp"
#include "swcnn/evaluation.hpp"
#include "swcnn/rng.hpp"

namespace swcnn {

namespace {

constexpr std::uint64_t kShuffleStream = 0x53485546ULL;  // "SHUF"

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

}  // namespace

double lr_schedule(int epoch, const TrainConfig& cfg) {
  if (epoch < 0) throw Error("epoch must be non-negative");
  if (cfg.lr_decay_epoch <= 0) return cfg.lr0;
  const int drops = cfg.lr_decay_periodic ? epoch / cfg.lr_decay_epoch
                                          : (epoch >= cfg.lr_decay_epoch ? 1 : 0);
  return cfg.lr0 * std::pow(cfg.lr_decay_factor, drops);
}

void write_log_header(std::ostream& out) {
  out << "epoch,step,loss,lr,probe_psnr,probe_ssim,wall_seconds\n";
}

void write_log_record(std::ostream& out, const TrainLogRecord& r) {
  const auto old = out.precision(17);
  out << r.epoch << ',' << r.step << ',' << r.loss << ',' << r.lr << ',';
  if (r.probe_psnr) out << *r.probe_psnr;
  out << ',';
  if (r.probe_ssim) out << *r.probe_ssim;
  out.precision(6);
  out << ',' << r.wall_seconds << '\n';
  out.precision(old);
}

TrainResult train(const PairStore& data, HNModel& model, const TrainConfig& cfg,
                  const MixedLossConfig& loss_cfg, const PairStore* probe,
                  const TrainObserver& observer) {
  if (cfg.batch_size < 1) throw Error("batch size must be at least 1");
  if (!(cfg.lr0 > 0.0)) throw Error("learning rate must be positive");
  if (data.size() == 0) throw Error("training set is empty");
  if (data.manifest().kind != DatasetKind::kTrain) {
    throw Error("training needs a train-kind dataset (manifest kind is 'test')");
  }
  if (loss_cfg.lambda > 0.0 && loss_cfg.pn == nullptr) {
    throw Error("lambda > 0 requires a PN feature extractor");
  }

  std::ofstream log_file;
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    log_file.open(cfg.out_dir / "train_log.csv", std::ios::trunc);
    if (!log_file) throw Error("cannot write training log in '" + cfg.out_dir.string() + "'");
    write_log_header(log_file);
  }

  auto& params = model.parameters();
  std::vector<AdamState<float>> adam;
  adam.reserve(params.size());
  for (const auto& p : params) adam.emplace_back(p.values.size());

  Rng order_rng(derive_seed(cfg.seed, kShuffleStream));
  std::vector<std::size_t> order(data.size());
  const auto t0 = std::chrono::steady_clock::now();
  TrainResult result;
  std::int64_t step = 0;
  bool stop = false;
  std::filesystem::path last_checkpoint;

  for (int epoch = 0; epoch < cfg.epochs && !stop; ++epoch) {
    const double lr = lr_schedule(epoch, cfg);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order, order_rng);

    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const double weight = 1.0 / static_cast<double>(end - start);
      ParamGrads grads = model.zero_grads();
      double loss = 0.0;
      HNTape tape;
      Tensor grad_pred;
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t idx = order[b];
        const Tensor input = to_tensor(data.input(idx));
        const Tensor target = to_tensor(cfg.mode == TrainMode::kSelfSupervised ? data.reference(idx)
                                                                               : data.clean(idx));
        const Tensor pred = model.forward(input, tape);
        loss += weight * sample_loss(pred, target, loss_cfg, weight, &grad_pred).total;
        model.backward(tape, grad_pred, grads);
      }
      if (!std::isfinite(loss)) {
        throw Error("non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                    std::to_string(step) + "; last good checkpoint: " +
                    (last_checkpoint.empty() ? std::string("none") : last_checkpoint.string()));
      }
      for (std::size_t p = 0; p < params.size(); ++p) {
        for (float g : grads[p]) {
          if (!std::isfinite(g)) {
            throw Error("non-finite gradient for '" + params[p].name + "' at epoch " +
                        std::to_string(epoch) + ", step " + std::to_string(step) +
                        "; last good checkpoint: " +
                        (last_checkpoint.empty() ? std::string("none") : last_checkpoint.string()));
          }
        }
      }
      for (std::size_t p = 0; p < params.size(); ++p) {
        adam_step<float>(params[p].values, grads[p], adam[p], lr, cfg.adam);
      }

      TrainLogRecord rec;
      rec.epoch = epoch;
      rec.step = step++;
      rec.loss = loss;
      rec.lr = lr;
      stop = cfg.max_steps > 0 && step >= cfg.max_steps;
      const bool epoch_end = end == order.size() || stop;
      if (epoch_end && probe != nullptr) {
        const EvalResult eval =
            evaluate(*probe, [&model](const Image& img) { return model.restore(img); }, cfg.probe_limit);
        rec.probe_psnr = eval.restored.mean_psnr();
        rec.probe_ssim = eval.restored.mean_ssim();
      }
      rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (log_file) {
        write_log_record(log_file, rec);
        log_file.flush();
      }
      if (observer) observer(rec);
      result.log.push_back(rec);

      if (epoch_end && !cfg.out_dir.empty()) {
        last_checkpoint = cfg.out_dir / ("ckpt_epoch" + std::to_string(epoch) + ".swck");
        model.save(last_checkpoint);
        const bool better = rec.probe_psnr &&
                            (!result.best_probe_psnr || *rec.probe_psnr > *result.best_probe_psnr);
        if (better || probe == nullptr) model.save(cfg.out_dir / "ckpt_best.swck");
      }
      if (rec.probe_psnr && (!result.best_probe_psnr || *rec.probe_psnr > *result.best_probe_psnr)) {
        result.best_probe_psnr = rec.probe_psnr;
      }
      if (stop) break;
    }
  }
  return result;
}

}  // namespace swcnn
