#include "aplab/infometrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aplab/errors.hpp"

namespace aplab {

namespace {

struct Binning {
  double lo = 0.0;
  double hi = 0.0;
  int bins = 0;

  bool collapsed() const { return !(lo < hi); }
  double width() const { return (hi - lo) / bins; }

  int index(double x) const {
    const double pos = (x - lo) / (hi - lo) * bins;
    return std::clamp(static_cast<int>(pos), 0, bins - 1);
  }
};

Binning binning_for(const HistogramEstimator& est, const std::vector<double>& samples) {
  Binning b;
  b.bins = est.bin_count;
  if (est.auto_range) {
    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    b.lo = *lo_it;
    b.hi = *hi_it;
  } else {
    b.lo = est.lo;
    b.hi = est.hi;
  }
  return b;
}

double entropy_under(const Binning& b, const std::vector<double>& samples) {
  std::vector<long long> counts(static_cast<std::size_t>(b.bins), 0);
  for (double x : samples) ++counts[static_cast<std::size_t>(b.index(x))];
  const double n = static_cast<double>(samples.size());
  const double width = b.width();
  double h = 0.0;
  for (long long c : counts) {
    if (c == 0) continue;
    const double p = double(c) / n;
    h -= p * std::log(p / width);
  }
  return h;
}

/// Shared-binning estimate from paired present/absent activation samples.
MiEstimate mi_from_conditions(const std::vector<double>& present,
                              const std::vector<double>& absent,
                              const HistogramEstimator& est) {
  MiEstimate out;
  out.sample_count = static_cast<long long>(present.size());

  std::vector<double> pooled;
  pooled.reserve(present.size() + absent.size());
  pooled.insert(pooled.end(), present.begin(), present.end());
  pooled.insert(pooled.end(), absent.begin(), absent.end());

  const Binning b = binning_for(est, pooled);
  if (b.collapsed()) {
    out.degenerate = true;
    out.h_marginal = -std::numeric_limits<double>::infinity();
    out.h_conditional = -std::numeric_limits<double>::infinity();
    out.value = 0.0;
    return out;
  }

  out.h_marginal = entropy_under(b, pooled);
  out.h_conditional = 0.5 * (entropy_under(b, present) + entropy_under(b, absent));
  out.value = std::max(0.0, out.h_marginal - out.h_conditional);
  return out;
}

std::vector<double> to_vector(const Mat& column) {
  std::vector<double> v(static_cast<std::size_t>(column.rows()));
  for (Eigen::Index s = 0; s < column.rows(); ++s) v[static_cast<std::size_t>(s)] = column(s, 0);
  return v;
}

}  // namespace

void HistogramEstimator::validate() const {
  if (bin_count < 2) throw ConfigError("histogram bin_count must be >= 2");
  if (!auto_range && !(lo < hi)) throw ConfigError("histogram range requires lo < hi");
}

double histogram_entropy(const std::vector<double>& samples, const HistogramEstimator& est) {
  est.validate();
  if (samples.size() < 2) throw InputError("histogram_entropy needs at least 2 samples");
  const Binning b = binning_for(est, samples);
  if (b.collapsed()) return -std::numeric_limits<double>::infinity();
  return entropy_under(b, samples);
}

MiEstimate mi_weight_presence(const MlpModel& model, const PruneMask& mask,
                              const MnistSplit& data, std::size_t layer, Eigen::Index i,
                              Eigen::Index j, const HistogramEstimator& est) {
  est.validate();
  model.validate();
  check_congruent(model, mask);
  if (layer >= model.layer_count()) throw InputError("layer index out of range");
  const Layer& lay = model.layers[layer];
  if (i < 0 || i >= lay.weights.rows() || j < 0 || j >= lay.weights.cols())
    throw InputError("weight index out of range");
  if (mask.layers[layer](i, j) == 0.0f) throw InputError("weight is pruned; MI is defined for active weights");
  if (data.size() < 2) throw InputError("MI estimation needs at least 2 samples");

  auto [logits, trace] = forward(model, mask, data.images);
  (void)logits;
  const Mat& x = (layer == 0) ? trace.input : trace.a[layer - 1];

  // Both conditions go through the same column-shaped computation so that a
  // weight of exactly 0 yields bit-identical sample sets, hence MI == 0.
  const Mat z_col = trace.z[layer].col(j);
  const Mat z_bar = z_col - x.col(i) * lay.weights(i, j);
  const ActivationKind act = lay.spec.activation;
  const std::vector<double> present = to_vector(activation_apply(act, z_col));
  const std::vector<double> absent = to_vector(activation_apply(act, z_bar));

  return mi_from_conditions(present, absent, est);
}

std::vector<MiRow> mi_layer_report(const MlpModel& model, const PruneMask& mask,
                                   const MnistSplit& data, std::size_t layer,
                                   const HistogramEstimator& est, Eigen::Index sample_cap) {
  est.validate();
  model.validate();
  check_congruent(model, mask);
  if (layer >= model.layer_count()) throw InputError("layer index out of range");
  if (sample_cap < 2) throw InputError("sample_cap must be >= 2");
  if (data.size() < 2) throw InputError("MI estimation needs at least 2 samples");

  const Eigen::Index n = std::min<Eigen::Index>(sample_cap, data.images.rows());
  const Mat images = data.images.topRows(n);
  auto [logits, trace] = forward(model, mask, images);
  (void)logits;
  const Mat& x = (layer == 0) ? trace.input : trace.a[layer - 1];
  const Layer& lay = model.layers[layer];
  const ActivationKind act = lay.spec.activation;

  std::vector<MiRow> rows;
  for (Eigen::Index j = 0; j < lay.weights.cols(); ++j) {
    const Mat z_col = trace.z[layer].col(j);
    const std::vector<double> present = to_vector(activation_apply(act, z_col));
    for (Eigen::Index i = 0; i < lay.weights.rows(); ++i) {
      if (mask.layers[layer](i, j) == 0.0f) continue;
      const Mat z_bar = z_col - x.col(i) * lay.weights(i, j);
      const std::vector<double> absent = to_vector(activation_apply(act, z_bar));
      rows.push_back({i, j, mi_from_conditions(present, absent, est)});
    }
  }
  return rows;
}

Matd mi_rank_layer(const MlpModel& model, const PruneMask& mask, const MnistSplit& data,
                   std::size_t layer, const HistogramEstimator& est, Eigen::Index sample_cap) {
  const std::vector<MiRow> rows = mi_layer_report(model, mask, data, layer, est, sample_cap);
  Matd scores = Matd::Zero(model.layers[layer].weights.rows(), model.layers[layer].weights.cols());
  for (const MiRow& r : rows) scores(r.row, r.col) = r.mi.value;
  return scores;
}

BlindRangeOccupancy blind_range_occupancy(const MlpModel& model, const PruneMask& mask,
                                          const MnistSplit& data, double tol) {
  if (tol < 0) throw InputError("occupancy tol must be >= 0");
  model.validate();
  check_congruent(model, mask);
  if (data.size() == 0) throw InputError("occupancy needs a non-empty split");

  auto [logits, trace] = forward(model, mask, data.images);
  (void)logits;

  BlindRangeOccupancy occ;
  long long hits = 0, entries = 0;
  for (std::size_t l = 0; l + 1 < model.layer_count(); ++l) {
    const Mat grad = activation_grad(model.layers[l].spec.activation, trace.z[l]);
    const long long in_range =
        (grad.array().abs() <= static_cast<float>(tol)).count();
    occ.fraction.push_back(double(in_range) / double(grad.size()));
    hits += in_range;
    entries += grad.size();
  }
  occ.overall = entries > 0 ? double(hits) / double(entries) : 0.0;
  return occ;
}

}  // namespace aplab
