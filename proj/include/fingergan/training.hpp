#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "fingergan/checkpoint.hpp"
#include "fingergan/dataset.hpp"
#include "fingergan/losses.hpp"
#include "fingergan/nn/network.hpp"

namespace fingergan::training {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adaptive-moment optimizer over a fixed parameter list. Moments are stored
/// in float32 so a checkpoint captures them exactly.
class Adam {
 public:
  Adam() = default;
  Adam(std::vector<nn::Param*> params, AdamConfig cfg);

  void step();
  std::uint64_t steps() const noexcept { return t_; }

  /// Moments as named arrays "<prefix>m/<param>" and "<prefix>v/<param>".
  void save(checkpoint::Checkpoint& ck, const std::string& prefix) const;
  void load(const checkpoint::Checkpoint& ck, const std::string& prefix);

 private:
  std::vector<nn::Param*> params_;
  AdamConfig cfg_;
  std::vector<std::vector<float>> m_, v_;
  std::uint64_t t_ = 0;
};

struct Ablations {
  bool no_discriminator = false;  ///< train on L_r alone
  bool gray_gt = false;           ///< the gray rolled print replaces g
  bool no_weight = false;         ///< w = 1

  /// "full" or the enabled switches joined by '+', e.g. "no-discriminator+no-weight".
  std::string mode() const;
};

struct TrainConfig {
  AdamConfig adam;
  losses::LossConfig loss;
  Ablations ablations;
  nn::GeneratorSpec generator{1, 64, 0.2f, 192};
  nn::DiscriminatorSpec discriminator;
  int batch_size = 16;
  int max_iterations = 50000;
  int checkpoint_every = 1000;
  double init_stddev = 0.02;
  std::uint64_t seed = 0;

  void validate() const;
};

/// A batch of aligned crops. `indices` are dataset positions, for diagnostics.
struct Batch {
  nn::Tensor latent, target, orientation, weight;
  std::vector<int> indices;
};

/// Crop of side `patch` at (x, y) from every grid of `ex`; the target is the
/// skeleton or, with gray_gt, the gray image; w is 1 with no_weight.
void append_crop(Batch& batch, int slot, const dataset::Example& ex, int x, int y, const Ablations& abl);
Batch make_batch(const dataset::Dataset& data, const std::vector<int>& indices, const std::vector<std::pair<int, int>>& offsets,
                 int patch, const Ablations& abl);

struct StepMetrics {
  std::uint64_t iteration = 0;  ///< 1-based
  double d_loss = 0.0;          ///< NaN without a discriminator
  double g_adv = 0.0;
  double l_r = 0.0;             ///< reconstruction loss of the generator output before its update
  double d_acc_real = 0.0;
  double d_acc_fake = 0.0;
};

class NonFiniteLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Metrics TSV: a "# mode=..." comment line, a header, one row per iteration.
class MetricsLog {
 public:
  MetricsLog(const std::filesystem::path& path, const TrainConfig& cfg, bool append);
  void write(const StepMetrics& m);

 private:
  std::filesystem::path path_;
};

std::vector<StepMetrics> read_metrics(const std::filesystem::path& path);
std::string metrics_mode(const std::filesystem::path& path);

class Trainer {
 public:
  Trainer(TrainConfig cfg, const dataset::Dataset& data);

  const TrainConfig& config() const noexcept { return cfg_; }
  std::uint64_t iteration() const noexcept { return iteration_; }
  nn::Generator& generator() noexcept { return gen_; }
  nn::Discriminator& discriminator() noexcept { return disc_; }

  /// Batch of iteration `iter`: shuffled epochs and crop offsets are pure
  /// functions of (seed, iter), so a resumed run sees the same batches.
  Batch batch_for(std::uint64_t iter) const;

  /// One discriminator update on real (g, g_F) against fake (G(l), g_F)
  /// followed by one generator update on g_adv + eta L_r. Without a
  /// discriminator only the L_r update runs.
  StepMetrics train_step(const Batch& batch);
  /// Discriminator update alone; the generator runs in evaluation mode and is
  /// left bit-unchanged.
  StepMetrics d_step(const Batch& batch);
  /// Generator update alone; the discriminator's weights and statistics are
  /// left bit-unchanged.
  StepMetrics g_step(const Batch& batch, bool adversarial);

  /// Runs until `max_iterations`, logging every step and checkpointing every
  /// `checkpoint_every` iterations and at the end when `ckpt_dir` is set.
  void run(MetricsLog* log, const std::filesystem::path& ckpt_dir = {});

  /// Mean L_r of the evaluation-mode generator over centre crops of `data`.
  double evaluate(const dataset::Dataset& data);

  checkpoint::Checkpoint to_checkpoint() const;
  /// Restores weights, statistics, optimizer moments and the iteration
  /// counter; throws on spec hash mismatch.
  void restore(const checkpoint::Checkpoint& ck);

 private:
  StepMetrics update_discriminator(const nn::Tensor& fake, const Batch& b);
  /// Requires the generator's caches from the training forward that produced `fake`.
  StepMetrics update_generator(const nn::Tensor& fake, const Batch& b, bool adversarial);
  nn::Tensor fake_pair(const nn::Tensor& fake, const Batch& b) const;
  void check_finite(double v, const char* what, const Batch& b) const;

  TrainConfig cfg_;
  const dataset::Dataset& data_;
  nn::Generator gen_;
  nn::Discriminator disc_;
  Adam g_opt_, d_opt_;
  std::uint64_t iteration_ = 0;
};

/// Rebuilds the generator described by a checkpoint's metadata and loads its
/// weights and running statistics.
nn::Generator load_generator(const checkpoint::Checkpoint& ck);
/// Checkpoint path for iteration `iter` inside `dir`.
std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::uint64_t iter);

}  // namespace fingergan::training
