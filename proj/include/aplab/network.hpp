#pragma once

#include <cstdint>
#include <vector>

#include "aplab/activation.hpp"
#include "aplab/dataset.hpp"
#include "aplab/matrix.hpp"

namespace aplab {

struct LayerSpec {
  int in_dim = 0;
  int out_dim = 0;
  ActivationKind activation;
};

struct Layer {
  Mat weights;  // in_dim x out_dim
  RowVec bias;  // out_dim
  LayerSpec spec;
};

struct MlpModel {
  std::vector<Layer> layers;

  int input_dim() const { return layers.front().spec.in_dim; }
  int output_dim() const { return layers.back().spec.out_dim; }
  std::size_t layer_count() const { return layers.size(); }
  /// Total weight count; biases are never prunable.
  long long weight_count() const;
  void validate() const;
};

/// Per-layer 0/1 matrices congruent with the weights; 0 marks pruned.
struct PruneMask {
  std::vector<Mat> layers;

  static PruneMask all_ones(const MlpModel& model);
  long long active_count() const;
  long long pruned_count() const;
};

void check_congruent(const MlpModel& model, const PruneMask& mask);

/// He-uniform weights (U[-sqrt(6/fan_in), sqrt(6/fan_in)]), zero biases.
MlpModel make_model(const std::vector<LayerSpec>& specs, std::uint64_t init_seed);

/// 784 -> 392 -> 196 -> 10 with the given hidden activation, identity logits.
MlpModel default_model(ActivationKind hidden, std::uint64_t init_seed);

struct ForwardTrace {
  Mat input;
  std::vector<Mat> z;  // pre-activations per layer
  std::vector<Mat> a;  // activations per layer; a.back() is the logits
};

/// z^l = a^{l-1} (W^l .* mask^l) + b^l, a^l = phi_l(z^l).
std::pair<Mat, ForwardTrace> forward(const MlpModel& model, const PruneMask& mask,
                                     const Mat& batch);

/// Mean softmax cross-entropy and its logits gradient (softmax - onehot)/B.
std::pair<double, Mat> cross_entropy(const Mat& logits, const std::vector<int>& labels);

struct LossConfig {
  float lambda_rl1 = 0.0f;  // L1 penalty weight on hidden activations; 0 disables
};

/// base + lambda * mean over batch of sum_i |a_i| over hidden layers.
double regularized_loss(double base, const ForwardTrace& trace, const LossConfig& cfg);

struct Gradients {
  std::vector<Mat> weights;
  std::vector<RowVec> bias;
};

/// Exact gradients of the regularized loss; masked positions receive 0.
Gradients backward(const MlpModel& model, const PruneMask& mask, const ForwardTrace& trace,
                   const Mat& dlogits, const LossConfig& cfg);

struct AdamState {
  std::vector<Mat> m_w, v_w;
  std::vector<RowVec> m_b, v_b;
  long t = 0;
  float lr = 1e-3f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;

  static AdamState init(const MlpModel& model, float lr);
};

/// Adam with bias correction; masked weights are forced back to exactly 0.
void adam_step(AdamState& state, MlpModel& model, const Gradients& grads, const PruneMask& mask);

struct TrainConfig {
  int epochs = 10;
  float lr = 1e-3f;
  LossConfig loss;
  int batch_size = 64;
  std::uint64_t seed = 0;
  bool verbose = false;
};

/// Mini-batch Adam over seeded shuffles; fresh optimizer state, mask respected.
MlpModel train(MlpModel model, const PruneMask& mask, const MnistSplit& data,
               const TrainConfig& cfg);

/// One epoch at lr 1e-4 with a fresh Adam state (per-iteration retraining).
/// `loss` carries the training objective through, so a model trained with the
/// activation penalty keeps the same objective while it is pruned.
MlpModel fine_tune(MlpModel model, const PruneMask& mask, const MnistSplit& data,
                   std::uint64_t seed, int epochs = 1, float lr = 1e-4f, int batch_size = 64,
                   LossConfig loss = {});

}  // namespace aplab
