#include "aplab/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <utility>

#include "aplab/errors.hpp"

namespace aplab {

namespace {

using RowArrF = Eigen::Array<float, 1, Eigen::Dynamic>;
using RowArrD = Eigen::Array<double, 1, Eigen::Dynamic>;

struct WelfordState {
  std::vector<Matd> mean, m2;

  explicit WelfordState(const MlpModel& model) {
    mean.reserve(model.layer_count());
    m2.reserve(model.layer_count());
    for (const Layer& layer : model.layers) {
      mean.push_back(Matd::Zero(layer.weights.rows(), layer.weights.cols()));
      m2.push_back(Matd::Zero(layer.weights.rows(), layer.weights.cols()));
    }
  }

  ContributionStats finish(long long n) {
    ContributionStats stats;
    stats.count = n;
    stats.mean = std::move(mean);
    stats.stddev.reserve(m2.size());
    for (Matd& layer_m2 : m2)
      stats.stddev.push_back((layer_m2.array() / double(n)).max(0.0).sqrt().matrix());
    return stats;
  }
};

// Streams one layer's samples through the removed-weight update. For each input
// index i the whole weight row is handled at once:
//   zbar_j = z_j - x_i * w_ij,  sigma_ij = |a_j - phi(zbar_j)| / (|a_j| + eps).
// Two precision rules keep this path bit-comparable to the one-weight-at-a-time
// oracle (which recomputes zbar with a 64-bit matrix product rounded to storage
// precision): pre-activations are carried in 64-bit and rounded to 32-bit
// before the bias add, exactly like the forward pass; and the activation is
// evaluated one sample row at a time into a standalone buffer, because
// vectorized transcendentals can differ from the scalar library by an ulp
// depending on how elements are batched, which would otherwise make the
// statistics depend on the chunk size.
template <class Fn>
void sweep_layer(Fn fn, const Mat& x, const Mat& a, const Mat& weights, const RowVec& bias,
                 Eigen::Index chunk, Matd& mean, Matd& m2) {
  const Eigen::Index n = x.rows();
  const Eigen::Index in_dim = weights.rows();
  const Eigen::Index out_dim = weights.cols();
  const Matd w64 = weights.cast<double>();

  Matd xd, z64;
  RowVec zrow(out_dim), arow(out_dim);
  RowArrF sig(out_dim);
  RowArrD sig_d(out_dim), delta(out_dim);

  for (Eigen::Index c0 = 0; c0 < n; c0 += chunk) {
    const Eigen::Index rows = std::min(chunk, n - c0);
    xd = x.middleRows(c0, rows).cast<double>();
    z64.noalias() = xd * w64;  // pre-activations before bias, 64-bit
    const auto ac = a.middleRows(c0, rows).array();

    for (Eigen::Index i = 0; i < in_dim; ++i) {
      const auto w_row = weights.row(i).array();
      const auto w64_row = w64.row(i).array();
      auto mean_row = mean.row(i).array();
      auto m2_row = m2.row(i).array();
      for (Eigen::Index s = 0; s < rows; ++s) {
        // Removing a weight whose input (or value) is zero leaves the node
        // output unchanged, so sigma is 0 by definition; forcing that here
        // keeps it exact and skips the activation for zero inputs.
        if (xd(s, i) == 0.0) {
          sig.setZero();
        } else {
          zrow = (z64.row(s).array() - xd(s, i) * w64_row).cast<float>().matrix() + bias;
          arow = fn(zrow.array()).matrix();
          sig = (w_row != 0.0f)
                    .select((ac.row(s) - arow.array()).abs() /
                                (ac.row(s).abs() + kContributionEps),
                            0.0f);
        }
        sig_d = sig.cast<double>();
        delta = sig_d - mean_row;
        mean_row += delta / double(c0 + s + 1);
        m2_row += delta * (sig_d - mean_row);
      }
    }
  }
}

void check_scoring_inputs(const MlpModel& model, const PruneMask& mask, const MnistSplit& data) {
  model.validate();
  check_congruent(model, mask);
  if (data.size() == 0) throw InputError("scoring needs a non-empty data subset");
  if (data.images.cols() != model.input_dim())
    throw ShapeError("scoring data width " + std::to_string(data.images.cols()) +
                     " vs model input " + std::to_string(model.input_dim()));
}

void apply_pruned_sentinel(ScoreTensor& scores, const PruneMask& mask) {
  for (std::size_t l = 0; l < scores.size(); ++l) {
    const Matd sentinel = Matd::Constant(scores[l].rows(), scores[l].cols(), kPrunedScore);
    scores[l] = (mask.layers[l].array() != 0.0f).select(scores[l], sentinel);
  }
}

}  // namespace

const char* method_name(PruneMethod method) {
  switch (method) {
    case PruneMethod::Contribution: return "contribution";
    case PruneMethod::Magnitude: return "magnitude";
    case PruneMethod::Wanda: return "wanda";
    case PruneMethod::Random: return "random";
  }
  return "?";
}

PruneMethod parse_method(const std::string& name) {
  if (name == "contribution") return PruneMethod::Contribution;
  if (name == "magnitude") return PruneMethod::Magnitude;
  if (name == "wanda") return PruneMethod::Wanda;
  if (name == "random") return PruneMethod::Random;
  throw InputError("unknown pruning method: " + name);
}

ContributionStats contribution_stats(const MlpModel& model, const PruneMask& mask,
                                     const MnistSplit& data, Eigen::Index chunk) {
  check_scoring_inputs(model, mask, data);
  if (chunk < 1) throw InputError("chunk must be >= 1");

  auto [logits, trace] = forward(model, mask, data.images);
  (void)logits;

  WelfordState acc(model);
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    const Mat& x = (l == 0) ? trace.input : trace.a[l - 1];
    const Mat masked = model.layers[l].weights.cwiseProduct(mask.layers[l]);
    dispatch_activation(model.layers[l].spec.activation, [&](auto fn) {
      sweep_layer(fn, x, trace.a[l], masked, model.layers[l].bias, chunk, acc.mean[l],
                  acc.m2[l]);
    });
  }
  return acc.finish(data.size());
}

ContributionStats contribution_stats_naive(const MlpModel& model, const PruneMask& mask,
                                           const MnistSplit& data) {
  check_scoring_inputs(model, mask, data);

  auto [logits, trace] = forward(model, mask, data.images);
  (void)logits;
  const Eigen::Index n = data.images.rows();

  WelfordState acc(model);
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    const Mat& x = (l == 0) ? trace.input : trace.a[l - 1];
    const Mat& a = trace.a[l];
    const Layer& layer = model.layers[l];
    const Mat masked = layer.weights.cwiseProduct(mask.layers[l]);

    RowVec zrow(masked.cols()), arow(masked.cols());
    for (Eigen::Index i = 0; i < masked.rows(); ++i) {
      for (Eigen::Index j = 0; j < masked.cols(); ++j) {
        Mat dropped = masked;
        dropped(i, j) = 0.0f;
        Mat zbar = matmul(x, dropped);
        add_row_vector(zbar, layer.bias);

        double mean = 0.0, m2 = 0.0;
        for (Eigen::Index s = 0; s < n; ++s) {
          // Dropping a weight that is zero, or whose input is zero, cannot
          // change the node output, so its contribution is zero by definition.
          float sig = 0.0f;
          if (x(s, i) != 0.0f && masked(i, j) != 0.0f) {
            zrow = zbar.row(s);
            dispatch_activation(layer.spec.activation,
                                [&](auto fn) { arow = fn(zrow.array()).matrix(); });
            sig = std::abs(a(s, j) - arow(j)) / (std::abs(a(s, j)) + kContributionEps);
          }
          const double d = double(sig) - mean;
          mean += d / double(s + 1);
          m2 += d * (double(sig) - mean);
        }
        acc.mean[l](i, j) = mean;
        acc.m2[l](i, j) = m2;
      }
    }
  }
  return acc.finish(n);
}

double layer_factor(const ImportanceConfig& cfg, std::size_t layer, std::size_t n_layers) {
  if (!cfg.layer_factor_enabled) return 1.0;
  const std::size_t index = cfg.layer_factor_from_output ? (n_layers - 1 - layer) : layer;
  return std::pow(cfg.layer_factor_base, double(index));
}

ScoreTensor importance(const ContributionStats& stats, const ImportanceConfig& cfg) {
  if (!(cfg.eps > 0.0)) throw ConfigError("importance eps must be > 0");
  ScoreTensor scores;
  scores.reserve(stats.mean.size());
  for (std::size_t l = 0; l < stats.mean.size(); ++l) {
    const double s_l = layer_factor(cfg, l, stats.mean.size());
    scores.push_back(s_l * (cfg.alpha * stats.mean[l].array() +
                            cfg.beta / (cfg.eps + stats.stddev[l].array()))
                              .matrix());
  }
  return scores;
}

ScoreTensor magnitude_scores(const MlpModel& model, const PruneMask& mask) {
  model.validate();
  check_congruent(model, mask);
  ScoreTensor scores;
  scores.reserve(model.layer_count());
  for (const Layer& layer : model.layers)
    scores.push_back(layer.weights.array().abs().cast<double>().matrix());
  apply_pruned_sentinel(scores, mask);
  return scores;
}

ScoreTensor wanda_scores(const MlpModel& model, const PruneMask& mask, const MnistSplit& data) {
  check_scoring_inputs(model, mask, data);
  auto [logits, trace] = forward(model, mask, data.images);
  (void)logits;

  ScoreTensor scores;
  scores.reserve(model.layer_count());
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    const Mat& x = (l == 0) ? trace.input : trace.a[l - 1];
    const Vecd norms = x.cast<double>().colwise().squaredNorm().array().sqrt().matrix().transpose();
    scores.push_back(norms.asDiagonal() *
                     model.layers[l].weights.array().abs().cast<double>().matrix());
  }
  apply_pruned_sentinel(scores, mask);
  return scores;
}

ScoreTensor random_scores(const MlpModel& model, const PruneMask& mask, std::uint64_t seed) {
  model.validate();
  check_congruent(model, mask);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  ScoreTensor scores;
  scores.reserve(model.layer_count());
  for (const Layer& layer : model.layers) {
    Matd draw(layer.weights.rows(), layer.weights.cols());
    for (Eigen::Index r = 0; r < draw.rows(); ++r)
      for (Eigen::Index c = 0; c < draw.cols(); ++c) draw(r, c) = unit(rng);
    scores.push_back(std::move(draw));
  }
  apply_pruned_sentinel(scores, mask);
  return scores;
}

ScoreTensor compute_scores(const MlpModel& model, const PruneMask& mask, const MnistSplit& data,
                           const ScorerConfig& cfg) {
  switch (cfg.method) {
    case PruneMethod::Contribution: {
      ScoreTensor scores = importance(contribution_stats(model, mask, data), cfg.importance);
      apply_pruned_sentinel(scores, mask);
      return scores;
    }
    case PruneMethod::Magnitude:
      return magnitude_scores(model, mask);
    case PruneMethod::Wanda:
      return wanda_scores(model, mask, data);
    case PruneMethod::Random:
      return random_scores(model, mask, cfg.seed);
  }
  throw InputError("unknown pruning method");
}

void dump_stats_csv(const ContributionStats& stats, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot open stats csv for writing: " + path);
  out << "layer,row,col,mean,std,count\n";
  char line[160];
  for (std::size_t l = 0; l < stats.mean.size(); ++l) {
    for (Eigen::Index r = 0; r < stats.mean[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < stats.mean[l].cols(); ++c) {
        std::snprintf(line, sizeof(line), "%zu,%lld,%lld,%.17g,%.17g,%lld\n", l,
                      static_cast<long long>(r), static_cast<long long>(c), stats.mean[l](r, c),
                      stats.stddev[l](r, c), stats.count);
        out << line;
      }
    }
  }
  if (!out) throw InputError("failed writing stats csv: " + path);
}

}  // namespace aplab
