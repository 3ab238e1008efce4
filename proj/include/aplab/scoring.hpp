#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "aplab/dataset.hpp"
#include "aplab/matrix.hpp"
#include "aplab/network.hpp"

namespace aplab {

/// Denominator guard in the relative-change ratio |a - abar| / (|a| + eps).
inline constexpr float kContributionEps = 1e-8f;

/// Already-pruned weights get this score so they can never outrank an active weight.
inline constexpr double kPrunedScore = std::numeric_limits<double>::lowest();

/// Per-weight mean/std of the relative output change caused by removing that weight,
/// accumulated over individual samples (64-bit streaming Welford, population std).
struct ContributionStats {
  std::vector<Matd> mean;    // per layer, in_dim x out_dim
  std::vector<Matd> stddev;  // same shape; >= 0
  long long count = 0;       // samples scored
};

/// score = s_l * (alpha * mean + beta / (eps + std)); s_l = base^l or 1 when disabled.
struct ImportanceConfig {
  double alpha = 1.0;
  double beta = 1e-7;
  double eps = 1e-12;
  bool layer_factor_enabled = true;
  double layer_factor_base = 2.0;
  bool layer_factor_from_output = false;  // default: l counts from the input layer
};

/// Per layer, a matrix congruent with the weights; higher = more important.
using ScoreTensor = std::vector<Matd>;

enum class PruneMethod { Contribution, Magnitude, Wanda, Random };

const char* method_name(PruneMethod method);
PruneMethod parse_method(const std::string& name);

struct ScorerConfig {
  PruneMethod method = PruneMethod::Contribution;
  ImportanceConfig importance;
  SubsetSpec subset;  // scoring data for contribution/wanda; ignored by the rest
  std::uint64_t seed = 0;  // random-method draws
};

/// Vectorized sweep: one forward pass, then per input index i the column update
/// zbar = z - x_i (x) W_i, abar = phi(zbar), sigma_ij = |a_j - abar_j| / (|a_j| + eps).
ContributionStats contribution_stats(const MlpModel& model, const PruneMask& mask,
                                     const MnistSplit& data, Eigen::Index chunk = 512);

/// Reference path: zeroes one weight at a time and reruns that layer's forward pass.
/// Intended for small models; cost grows with weights x samples x layer width.
ContributionStats contribution_stats_naive(const MlpModel& model, const PruneMask& mask,
                                           const MnistSplit& data);

double layer_factor(const ImportanceConfig& cfg, std::size_t layer, std::size_t n_layers);

ScoreTensor importance(const ContributionStats& stats, const ImportanceConfig& cfg);

ScoreTensor magnitude_scores(const MlpModel& model, const PruneMask& mask);

/// score_ij = |w_ij| * ||X_:,i||_2 with X the layer input over the scoring data.
ScoreTensor wanda_scores(const MlpModel& model, const PruneMask& mask, const MnistSplit& data);

/// Uniform [0,1) per weight, deterministic in seed; masked positions get the sentinel.
ScoreTensor random_scores(const MlpModel& model, const PruneMask& mask, std::uint64_t seed);

/// Dispatch on cfg.method. `data` must already be the scoring subset; it may be empty
/// for the data-free methods (magnitude, random).
ScoreTensor compute_scores(const MlpModel& model, const PruneMask& mask, const MnistSplit& data,
                           const ScorerConfig& cfg);

/// Debug dump: columns layer,row,col,mean,std,count.
void dump_stats_csv(const ContributionStats& stats, const std::string& path);

}  // namespace aplab
