#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "sragan/common.hpp"
#include "sragan/config.hpp"
#include "sragan/data.hpp"
#include "sragan/discriminator.hpp"
#include "sragan/generator.hpp"
#include "sragan/losses.hpp"
#include "sragan/saliency.hpp"

namespace sragan {

struct AblationSet {
  bool no_siou = false;
  bool smse = false;
  bool no_sanorm = false;
  bool no_saadv = false;

  static AblationSet parse(const std::vector<std::string>& names);
};

struct TrainConfig {
  int64_t epochs = 200;
  double lr = 0.0002;
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.999;
  int64_t decay_start_epoch = 100;
  int64_t batch_size = 1;
  LossWeights weights;
  AblationSet ablation;
  uint64_t seed = 0;
  int64_t pool_size = 50;
  int64_t checkpoint_every = 10;
  double tau = 0.1;
  GeneratorOptions gen;
  std::string saliency_backend = "synthetic";
  std::string saliency_weights_path;
  std::string run_name = "run";

  static TrainConfig from_run_config(const RunConfig& cfg);
};

/// Learning rate for the epoch: flat until decay_start_epoch, then a linear
/// ramp that reaches 0 at the (virtual) final-epoch boundary.
double lr_at(const TrainConfig& cfg, int64_t epoch);

/// History buffer of generated images for discriminator updates. While filling,
/// fakes are stored verbatim and passed through; afterwards each incoming fake
/// replaces a random stored one with probability 0.5 (the replaced image is
/// returned), otherwise it passes through. Capacity 0 disables pooling.
class ImagePool {
 public:
  ImagePool() = default;
  ImagePool(int64_t capacity, uint64_t seed);

  torch::Tensor query(const torch::Tensor& fakes);  // (B, 3, H, W), detached
  int64_t stored() const { return static_cast<int64_t>(images_.size()); }

  void save(torch::serialize::OutputArchive& archive) const;
  void load(torch::serialize::InputArchive& archive);

 private:
  int64_t capacity_ = 0;
  std::vector<torch::Tensor> images_;  // each (3, H, W)
  std::mt19937_64 rng_;
};

struct TrainState {
  GeneratorNet g{nullptr};  // X -> Y
  GeneratorNet f{nullptr};  // Y -> X
  SaliencyAttendedDiscriminator d_x{nullptr};
  SaliencyAttendedDiscriminator d_y{nullptr};
  std::unique_ptr<torch::optim::Adam> opt_g;
  std::unique_ptr<torch::optim::Adam> opt_d;
  ImagePool pool_x;  // fakes in domain X (from F)
  ImagePool pool_y;  // fakes in domain Y (from G)
  SaliencyDetector detector;
  int64_t epoch = 0;
  uint64_t seed = 0;
  std::string sampler_state;  // captured at checkpoint time
};

TrainState init_train_state(const TrainConfig& cfg);

struct GeneratorUpdateResult {
  double adv_g_xy = 0, adv_g_yx = 0, cycle = 0, siou = 0;
  torch::Tensor fake_xy;  // G(x), detached
  torch::Tensor fake_yx;  // F(y), detached
};

/// Runs the generator half of one iteration: translations, cycles (with the
/// original images' saliency maps), the weighted generator objective, and one
/// Adam step on G and F. Discriminator parameters stay bit-identical.
GeneratorUpdateResult generator_update(TrainState& state, const UnpairedBatch& batch,
                                       const TrainConfig& cfg);

/// Runs the discriminator half against pool-sampled fakes; one Adam step on
/// D_X and D_Y. Returns (adv_d_xy, adv_d_yx).
std::pair<double, double> discriminator_update(TrainState& state, const UnpairedBatch& batch,
                                               const torch::Tensor& pooled_fake_y,
                                               const torch::Tensor& pooled_fake_x,
                                               const TrainConfig& cfg);

/// Full iteration: generator update, pool pushes, discriminator update.
LossReport train_step(TrainState& state, const UnpairedBatch& batch, const TrainConfig& cfg);

/// Runs the whole schedule, writing metrics.log, config.snapshot and
/// checkpoints under the run directory. Returns the final checkpoint path.
std::string fit(const RunConfig& cfg, const DomainDataset& ds_x, const DomainDataset& ds_y,
                bool resume = false);

void save_checkpoint(const TrainState& state, const RunConfig& cfg, const std::string& path);
/// Rebuilds the architecture from the embedded config snapshot and restores
/// weights, optimizer state, pools and counters. Optionally returns the
/// snapshot config.
TrainState load_checkpoint(const std::string& path, RunConfig* snapshot_out = nullptr);

/// Runs root: $SRAGAN_RUNS_DIR or ./runs.
std::filesystem::path runs_root();
std::filesystem::path run_dir(const RunConfig& cfg);

}  // namespace sragan
