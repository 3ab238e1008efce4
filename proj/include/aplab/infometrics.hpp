#pragma once

#include <cstdint>
#include <vector>

#include "aplab/dataset.hpp"
#include "aplab/matrix.hpp"
#include "aplab/network.hpp"

namespace aplab {

struct HistogramEstimator {
  int bin_count = 64;
  bool auto_range = true;  // bin over the sample min/max
  double lo = 0.0;
  double hi = 0.0;  // used when auto_range is false; requires lo < hi

  void validate() const;
};

/// Differential-entropy estimate in nats: -sum_k p_k ln(p_k / width).
/// Out-of-range samples land in the edge bins. A collapsed range (all samples
/// identical under auto range) returns -infinity as the degenerate sentinel.
double histogram_entropy(const std::vector<double>& samples, const HistogramEstimator& est);

struct MiEstimate {
  double value = 0.0;          // nats; h_marginal - h_conditional, clamped at 0
  double h_marginal = 0.0;     // entropy of the pooled activation samples
  double h_conditional = 0.0;  // mean of the present/absent conditional entropies
  long long sample_count = 0;  // samples per condition
  bool degenerate = false;     // pooled histogram collapsed; value forced to 0
};

/// Mutual information between a node's activation and the presence of one
/// weight, treating presence as a fair binary event: the activation samples are
/// collected with the weight at its trained value and with it removed, and
/// I = h(pooled) - 1/2 [h(present) + h(absent)] under one shared binning.
MiEstimate mi_weight_presence(const MlpModel& model, const PruneMask& mask,
                              const MnistSplit& data, std::size_t layer, Eigen::Index i,
                              Eigen::Index j, const HistogramEstimator& est);

struct MiRow {
  Eigen::Index row = 0;
  Eigen::Index col = 0;
  MiEstimate mi;
};

/// MI of every active weight in one layer, over at most sample_cap samples.
/// Diagnostic tool: cost grows with weights x samples, so cap accordingly.
std::vector<MiRow> mi_layer_report(const MlpModel& model, const PruneMask& mask,
                                   const MnistSplit& data, std::size_t layer,
                                   const HistogramEstimator& est, Eigen::Index sample_cap);

/// Same values arranged as a matrix congruent with the layer's weights;
/// pruned positions hold 0.
Matd mi_rank_layer(const MlpModel& model, const PruneMask& mask, const MnistSplit& data,
                   std::size_t layer, const HistogramEstimator& est, Eigen::Index sample_cap);

struct BlindRangeOccupancy {
  std::vector<double> fraction;  // per hidden layer: share of (sample, node)
                                 // pre-activations with |phi'(z)| <= tol
  double overall = 0.0;          // pooled over all hidden-layer entries
};

BlindRangeOccupancy blind_range_occupancy(const MlpModel& model, const PruneMask& mask,
                                          const MnistSplit& data, double tol);

}  // namespace aplab
