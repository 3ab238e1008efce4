#include "aplab/network.hpp"

#include <cmath>
#include <cstdio>
#include <random>

namespace aplab {

long long MlpModel::weight_count() const {
  long long n = 0;
  for (const Layer& l : layers) n += (long long)l.spec.in_dim * l.spec.out_dim;
  return n;
}

void MlpModel::validate() const {
  if (layers.empty()) throw ShapeError("model has no layers");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const Layer& l = layers[k];
    if (l.spec.in_dim <= 0 || l.spec.out_dim <= 0) throw ShapeError("layer dims must be positive");
    if (l.weights.rows() != l.spec.in_dim || l.weights.cols() != l.spec.out_dim)
      throw ShapeError("layer weights do not match spec");
    if (l.bias.cols() != l.spec.out_dim) throw ShapeError("layer bias does not match spec");
    if (k + 1 < layers.size() && l.spec.out_dim != layers[k + 1].spec.in_dim)
      throw ShapeError("layer " + std::to_string(k) + " out_dim does not chain");
  }
}

PruneMask PruneMask::all_ones(const MlpModel& model) {
  PruneMask mask;
  for (const Layer& l : model.layers) mask.layers.push_back(Mat::Ones(l.weights.rows(), l.weights.cols()));
  return mask;
}

long long PruneMask::active_count() const {
  long long n = 0;
  for (const Mat& m : layers) n += (long long)std::llround(m.cast<double>().sum());
  return n;
}

long long PruneMask::pruned_count() const {
  long long total = 0;
  for (const Mat& m : layers) total += (long long)m.size();
  return total - active_count();
}

void check_congruent(const MlpModel& model, const PruneMask& mask) {
  if (model.layers.size() != mask.layers.size())
    throw ShapeError("mask layer count does not match model");
  for (std::size_t k = 0; k < mask.layers.size(); ++k)
    check_same_shape(model.layers[k].weights, mask.layers[k], "mask");
}

MlpModel make_model(const std::vector<LayerSpec>& specs, std::uint64_t init_seed) {
  std::mt19937_64 rng(init_seed);
  MlpModel model;
  for (const LayerSpec& spec : specs) {
    if (spec.in_dim <= 0 || spec.out_dim <= 0) throw ShapeError("layer dims must be positive");
    const float limit = std::sqrt(6.0f / float(spec.in_dim));
    std::uniform_real_distribution<float> dist(-limit, limit);
    Layer layer;
    layer.spec = spec;
    layer.weights.resize(spec.in_dim, spec.out_dim);
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = dist(rng);
    layer.bias = RowVec::Zero(spec.out_dim);
    model.layers.push_back(std::move(layer));
  }
  model.validate();
  return model;
}

MlpModel default_model(ActivationKind hidden, std::uint64_t init_seed) {
  return make_model({{784, 392, hidden}, {392, 196, hidden}, {196, 10, ActivationKind::identity()}},
                    init_seed);
}

std::pair<Mat, ForwardTrace> forward(const MlpModel& model, const PruneMask& mask,
                                     const Mat& batch) {
  model.validate();
  check_congruent(model, mask);
  if (batch.cols() != model.input_dim())
    throw ShapeError("forward: batch has " + std::to_string(batch.cols()) +
                     " features, model expects " + std::to_string(model.input_dim()));
  ForwardTrace trace;
  trace.input = batch;
  const Mat* x = &trace.input;
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    const Layer& l = model.layers[k];
    Mat z = matmul(*x, l.weights.cwiseProduct(mask.layers[k]));
    add_row_vector(z, l.bias);
    trace.a.push_back(activation_apply(l.spec.activation, z));
    trace.z.push_back(std::move(z));
    x = &trace.a.back();
  }
  return {trace.a.back(), std::move(trace)};
}

std::pair<double, Mat> cross_entropy(const Mat& logits, const std::vector<int>& labels) {
  const Eigen::Index n = logits.rows(), c = logits.cols();
  if (Eigen::Index(labels.size()) != n)
    throw ShapeError("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(n) + " rows");
  Mat probs(n, c);
  double loss = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    const int y = labels[std::size_t(r)];
    if (y < 0 || y >= c) throw InputError("cross_entropy: label " + std::to_string(y) +
                                          " outside [0," + std::to_string(c) + ")");
    const Eigen::ArrayXd row = logits.row(r).cast<double>().array();
    const Eigen::ArrayXd shifted = row - row.maxCoeff();
    const Eigen::ArrayXd ex = shifted.exp();
    const double denom = ex.sum();
    probs.row(r) = (ex / denom).cast<float>().transpose();
    loss -= shifted(y) - std::log(denom);
  }
  loss /= double(n);
  for (Eigen::Index r = 0; r < n; ++r) probs(r, labels[std::size_t(r)]) -= 1.0f;
  probs /= float(n);
  return {loss, std::move(probs)};
}

double regularized_loss(double base, const ForwardTrace& trace, const LossConfig& cfg) {
  if (cfg.lambda_rl1 < 0.0f) throw InputError("lambda_rl1 must be >= 0");
  if (cfg.lambda_rl1 == 0.0f || trace.a.empty()) return base;
  double l1 = 0.0;
  for (std::size_t k = 0; k + 1 < trace.a.size(); ++k)  // hidden layers only, not logits
    l1 += trace.a[k].cast<double>().array().abs().sum();
  return base + double(cfg.lambda_rl1) * l1 / double(trace.a.front().rows());
}

Gradients backward(const MlpModel& model, const PruneMask& mask, const ForwardTrace& trace,
                   const Mat& dlogits, const LossConfig& cfg) {
  check_congruent(model, mask);
  const std::size_t n_layers = model.layers.size();
  const float batch = float(trace.input.rows());
  Gradients grads;
  grads.weights.resize(n_layers);
  grads.bias.resize(n_layers);

  Mat da = dlogits;
  for (std::size_t k = n_layers; k-- > 0;) {
    const Layer& l = model.layers[k];
    if (k + 1 < n_layers && cfg.lambda_rl1 > 0.0f)
      da.array() += (cfg.lambda_rl1 / batch) * trace.a[k].array().sign();
    const Mat dz = da.cwiseProduct(activation_grad(l.spec.activation, trace.z[k]));
    const Mat& x = k == 0 ? trace.input : trace.a[k - 1];
    grads.weights[k] =
        (x.cast<double>().transpose() * dz.cast<double>()).cast<float>().cwiseProduct(
            mask.layers[k]);
    grads.bias[k] = dz.cast<double>().colwise().sum().cast<float>();
    if (k > 0) {
      const Mat wm = l.weights.cwiseProduct(mask.layers[k]);
      da = (dz.cast<double>() * wm.cast<double>().transpose()).cast<float>();
    }
  }
  return grads;
}

AdamState AdamState::init(const MlpModel& model, float lr) {
  AdamState s;
  s.lr = lr;
  for (const Layer& l : model.layers) {
    s.m_w.push_back(Mat::Zero(l.weights.rows(), l.weights.cols()));
    s.v_w.push_back(Mat::Zero(l.weights.rows(), l.weights.cols()));
    s.m_b.push_back(RowVec::Zero(l.bias.cols()));
    s.v_b.push_back(RowVec::Zero(l.bias.cols()));
  }
  return s;
}

void adam_step(AdamState& state, MlpModel& model, const Gradients& grads, const PruneMask& mask) {
  if (state.m_w.size() != model.layers.size()) throw ShapeError("adam state does not match model");
  check_congruent(model, mask);
  state.t += 1;
  const float c1 = 1.0f / float(1.0 - std::pow(double(state.beta1), double(state.t)));
  const float c2 = 1.0f / float(1.0 - std::pow(double(state.beta2), double(state.t)));
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
      m = state.beta1 * m + (1.0f - state.beta1) * g;
      v = state.beta2 * v + (1.0f - state.beta2) * g.cwiseProduct(g);
      param.array() -=
          state.lr * (m.array() * c1) / ((v.array() * c2).sqrt() + state.eps);
    };
    update(model.layers[k].weights, state.m_w[k], state.v_w[k], grads.weights[k]);
    update(model.layers[k].bias, state.m_b[k], state.v_b[k], grads.bias[k]);
    // Re-zero masked entries with a literal +0 rather than a product with the
    // mask: 0 * w carries the sign of w, and pruned weights are stored as
    // bit-exact zero.
    model.layers[k].weights = (mask.layers[k].array() != 0.0f)
                                  .select(model.layers[k].weights.array(), 0.0f)
                                  .matrix();
  }
}

MlpModel train(MlpModel model, const PruneMask& mask, const MnistSplit& data,
               const TrainConfig& cfg) {
  model.validate();
  check_congruent(model, mask);
  if (cfg.epochs < 0) throw InputError("epochs must be >= 0");
  if (!(cfg.lr > 0.0f)) throw InputError("lr must be > 0");
  AdamState state = AdamState::init(model, cfg.lr);
  std::mt19937_64 shuffle_rng(cfg.seed);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    long long seen = 0;
    for (const Batch& b : batches(data, cfg.batch_size, shuffle_rng())) {
      auto [logits, trace] = forward(model, mask, b.images);
      auto [base, dlogits] = cross_entropy(logits, b.labels);
      adam_step(state, model, backward(model, mask, trace, dlogits, cfg.loss), mask);
      epoch_loss += regularized_loss(base, trace, cfg.loss) * double(b.images.rows());
      seen += b.images.rows();
    }
    if (cfg.verbose)
      std::fprintf(stderr, "epoch %d/%d  train loss %.4f\n", epoch + 1, cfg.epochs,
                   epoch_loss / double(seen));
  }
  return model;
}

MlpModel fine_tune(MlpModel model, const PruneMask& mask, const MnistSplit& data,
                   std::uint64_t seed, int epochs, float lr, int batch_size, LossConfig loss) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.lr = lr;
  cfg.batch_size = batch_size;
  cfg.seed = seed;
  cfg.loss = loss;
  return train(std::move(model), mask, data, cfg);
}

}  // namespace aplab
