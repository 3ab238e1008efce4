#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aplab/dataset.hpp"
#include "aplab/network.hpp"
#include "aplab/scoring.hpp"

namespace aplab {

/// Both ratios are fractions of the ORIGINAL prunable-weight count, so
/// per-iteration amounts accumulate additively toward the target.
struct PruneSchedule {
  double target_ratio = 0.5;     // P_t in (0,1)
  double per_iter_ratio = 0.25;  // P_i in (0,1]

  void validate() const;
};

/// Cumulative pruned-count targets per iteration: entry t-1 is
/// min(round(t*P_i*total), round(P_t*total)); the last entry is the final target.
std::vector<long long> cumulative_targets(const PruneSchedule& schedule, long long total);

struct WeightRef {
  std::size_t layer = 0;
  Eigen::Index row = 0;
  Eigen::Index col = 0;

  bool operator==(const WeightRef&) const = default;
};

/// The k active weights with globally smallest scores; ties broken by
/// (layer, row, col) ascending. Returned in (layer, row, col) order.
std::vector<WeightRef> select_prune_set(const ScoreTensor& scores, const PruneMask& mask,
                                        long long k);

struct PruneIterationRow {
  int iteration = 0;        // 1-based
  double sparsity = 0.0;    // cumulative fraction of prunable weights at 0
  double accuracy = 0.0;    // post-fine-tune accuracy on the full test split
  std::string method;
  double data_fraction = 0.0;  // scoring subset fraction; 0 for data-free scorers
  double per_iter_ratio = 0.0;
  std::uint64_t seed = 0;
  double seconds = 0.0;  // wall clock for the iteration
};

struct PruneReport {
  std::vector<PruneIterationRow> rows;
};

/// CSV: iteration,sparsity,accuracy,method,data_fraction,per_iter_ratio,seed,seconds
void write_report_csv(const PruneReport& report, const std::string& path);

struct PruneOptions {
  int fine_tune_epochs = 1;
  float fine_tune_lr = 1e-4f;
  int batch_size = 64;
  bool resample_each_iteration = false;  // default: one scoring subset per run
  LossConfig loss;                       // objective used while fine-tuning
  bool verbose = false;
};

struct PruneOutcome {
  MlpModel model;
  PruneMask mask;
  PruneReport report;
};

/// The iterative loop: score -> prune the globally least important weights ->
/// fine-tune one epoch -> evaluate, until the cumulative target is reached.
/// Fine-tuning always sees the full training split; only scoring is subset-fed.
PruneOutcome prune_iteratively(MlpModel model, const MnistSplit& train_data,
                               const MnistSplit& test_data, const PruneSchedule& schedule,
                               const ScorerConfig& scorer, std::uint64_t seed,
                               const PruneOptions& opts = {});

/// Fraction of argmax(logits) == label; argmax ties go to the lowest class index.
double evaluate(const MlpModel& model, const PruneMask& mask, const MnistSplit& test_data);

}  // namespace aplab
