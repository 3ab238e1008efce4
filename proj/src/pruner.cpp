#include "aplab/pruner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <utility>

#include "aplab/errors.hpp"

namespace aplab {

void PruneSchedule::validate() const {
  if (!(target_ratio > 0.0 && target_ratio < 1.0))
    throw ConfigError("target_ratio must lie in (0,1)");
  if (!(per_iter_ratio > 0.0 && per_iter_ratio <= 1.0))
    throw ConfigError("per_iter_ratio must lie in (0,1]");
}

std::vector<long long> cumulative_targets(const PruneSchedule& schedule, long long total) {
  schedule.validate();
  if (total <= 0) throw InputError("model has no prunable weights");
  const long long final_target = std::llround(schedule.target_ratio * double(total));
  if (final_target <= 0) throw InputError("schedule prunes zero weights on this model");

  std::vector<long long> targets;
  for (long long t = 1; targets.empty() || targets.back() < final_target; ++t) {
    const long long cum =
        std::min(std::llround(double(t) * schedule.per_iter_ratio * double(total)), final_target);
    if (cum > (targets.empty() ? 0 : targets.back())) targets.push_back(cum);
  }
  return targets;
}

std::vector<WeightRef> select_prune_set(const ScoreTensor& scores, const PruneMask& mask,
                                        long long k) {
  if (scores.size() != mask.layers.size())
    throw ShapeError("score tensor has " + std::to_string(scores.size()) + " layers vs mask " +
                     std::to_string(mask.layers.size()));
  if (k < 0) throw InputError("selection count must be >= 0");

  struct Entry {
    double score;
    std::uint32_t layer, row, col;
  };
  std::vector<Entry> active;
  for (std::size_t l = 0; l < scores.size(); ++l) {
    if (scores[l].rows() != mask.layers[l].rows() || scores[l].cols() != mask.layers[l].cols())
      throw ShapeError("score/mask shape mismatch at layer " + std::to_string(l));
    for (Eigen::Index r = 0; r < scores[l].rows(); ++r)
      for (Eigen::Index c = 0; c < scores[l].cols(); ++c)
        if (mask.layers[l](r, c) != 0.0f)
          active.push_back({scores[l](r, c), static_cast<std::uint32_t>(l),
                            static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c)});
  }
  if (k > static_cast<long long>(active.size()))
    throw InputError("selection count " + std::to_string(k) + " exceeds active weights " +
                     std::to_string(active.size()));

  const auto by_score = [](const Entry& a, const Entry& b) {
    if (a.score != b.score) return a.score < b.score;
    if (a.layer != b.layer) return a.layer < b.layer;
    if (a.row != b.row) return a.row < b.row;
    return a.col < b.col;
  };
  std::nth_element(active.begin(), active.begin() + k, active.end(), by_score);
  active.resize(static_cast<std::size_t>(k));
  std::sort(active.begin(), active.end(), [](const Entry& a, const Entry& b) {
    if (a.layer != b.layer) return a.layer < b.layer;
    if (a.row != b.row) return a.row < b.row;
    return a.col < b.col;
  });

  std::vector<WeightRef> picked;
  picked.reserve(active.size());
  for (const Entry& e : active)
    picked.push_back({e.layer, static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)});
  return picked;
}

double evaluate(const MlpModel& model, const PruneMask& mask, const MnistSplit& test_data) {
  model.validate();
  check_congruent(model, mask);
  const Eigen::Index n = test_data.images.rows();
  if (n == 0) throw InputError("evaluate needs a non-empty split");

  constexpr Eigen::Index kChunk = 8192;
  long long correct = 0;
  for (Eigen::Index c0 = 0; c0 < n; c0 += kChunk) {
    const Eigen::Index rows = std::min(kChunk, n - c0);
    const Mat chunk = test_data.images.middleRows(c0, rows);
    const Mat logits = forward(model, mask, chunk).first;
    for (Eigen::Index s = 0; s < rows; ++s) {
      Eigen::Index best = 0;
      for (Eigen::Index j = 1; j < logits.cols(); ++j)
        if (logits(s, j) > logits(s, best)) best = j;
      if (best == test_data.labels[static_cast<std::size_t>(c0 + s)]) ++correct;
    }
  }
  return double(correct) / double(n);
}

PruneOutcome prune_iteratively(MlpModel model, const MnistSplit& train_data,
                               const MnistSplit& test_data, const PruneSchedule& schedule,
                               const ScorerConfig& scorer, std::uint64_t seed,
                               const PruneOptions& opts) {
  model.validate();
  if (opts.fine_tune_epochs < 0) throw ConfigError("fine_tune_epochs must be >= 0");
  const long long total = model.weight_count();
  const std::vector<long long> targets = cumulative_targets(schedule, total);

  const bool data_driven =
      scorer.method == PruneMethod::Contribution || scorer.method == PruneMethod::Wanda;

  PruneOutcome out;
  PruneMask mask = PruneMask::all_ones(model);

  // Fixed-once scoring subset unless resampling per iteration is requested.
  MnistSplit subset_storage;
  if (data_driven && !opts.resample_each_iteration)
    subset_storage = sample_subset(train_data, scorer.subset);

  long long pruned = 0;
  for (std::size_t t = 1; t <= targets.size(); ++t) {
    const auto tick = std::chrono::steady_clock::now();

    if (data_driven && opts.resample_each_iteration) {
      SubsetSpec spec = scorer.subset;
      spec.seed = scorer.subset.seed + t;
      subset_storage = sample_subset(train_data, spec);
    }

    ScorerConfig iter_cfg = scorer;
    iter_cfg.seed = scorer.seed + t;  // fresh draws per iteration for the random baseline
    const ScoreTensor scores =
        compute_scores(model, mask, data_driven ? subset_storage : train_data, iter_cfg);

    const long long want = targets[t - 1] - pruned;
    for (const WeightRef& w : select_prune_set(scores, mask, want)) {
      mask.layers[w.layer](w.row, w.col) = 0.0f;
      model.layers[w.layer].weights(w.row, w.col) = 0.0f;
    }
    pruned = targets[t - 1];

    if (opts.fine_tune_epochs > 0)
      model = fine_tune(std::move(model), mask, train_data, seed + t, opts.fine_tune_epochs,
                        opts.fine_tune_lr, opts.batch_size, opts.loss);
    const double accuracy = evaluate(model, mask, test_data);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - tick).count();

    PruneIterationRow row;
    row.iteration = static_cast<int>(t);
    row.sparsity = double(mask.pruned_count()) / double(total);
    row.accuracy = accuracy;
    row.method = method_name(scorer.method);
    row.data_fraction = data_driven ? scorer.subset.fraction : 0.0;
    row.per_iter_ratio = schedule.per_iter_ratio;
    row.seed = seed;
    row.seconds = seconds;
    if (opts.verbose)
      std::fprintf(stderr, "prune iter %zu/%zu: sparsity %.4f  accuracy %.4f  (%.1fs)\n", t,
                   targets.size(), row.sparsity, row.accuracy, row.seconds);
    out.report.rows.push_back(std::move(row));
  }

  out.model = std::move(model);
  out.mask = std::move(mask);
  return out;
}

void write_report_csv(const PruneReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot open report csv for writing: " + path);
  out << "iteration,sparsity,accuracy,method,data_fraction,per_iter_ratio,seed,seconds\n";
  char line[256];
  for (const PruneIterationRow& r : report.rows) {
    std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%s,%.17g,%.17g,%llu,%.3f\n", r.iteration,
                  r.sparsity, r.accuracy, r.method.c_str(), r.data_fraction, r.per_iter_ratio,
                  static_cast<unsigned long long>(r.seed), r.seconds);
    out << line;
  }
  if (!out) throw InputError("failed writing report csv: " + path);
}

}  // namespace aplab
