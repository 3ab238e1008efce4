// Full-scale acceptance suite for the pruning laboratory.
//
// Checks 1-6 are quantitative reproductions: full training and pruning runs on
// MNIST, averaged over seeds {0,1,2}, compared against the published reference
// values at their stated margins. Checks 7-13 are property checks that must
// hold regardless of training stochasticity (oracle equivalence, gradients,
// mask/checkpoint contracts, estimator closed forms). Every check prints
// exactly one PASS/FAIL line with the measured numbers; the process exits
// nonzero if any check fails.
//
// Dense baselines are cached under acceptance-out/baselines in the working
// directory, so reruns skip the training phase.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "aplab/checkpoint.hpp"
#include "aplab/errors.hpp"
#include "aplab/harness.hpp"
#include "aplab/infometrics.hpp"
#include "aplab/network.hpp"
#include "aplab/pruner.hpp"
#include "aplab/scoring.hpp"

using namespace aplab;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

const std::vector<std::uint64_t> kSeeds = {0, 1, 2};
const std::string kRoot = "acceptance-out";

int g_failures = 0;

std::string fmt(const char* format, ...) {
  char buf[1024];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

void report(const std::string& label, bool pass, const std::string& detail) {
  if (!pass) ++g_failures;
  std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", label.c_str(), detail.c_str());
  std::fflush(stdout);
}

void progress(const std::string& note) {
  std::fprintf(stderr, "[acceptance] %s\n", note.c_str());
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string data_dir() {
  if (const char* env = std::getenv("MNIST_DIR"); env != nullptr && *env != '\0') return env;
  return "data/mnist";
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / double(v.size());
}

// ------------------------------------------------------------ training cells

ExperimentConfig base_config() {
  ExperimentConfig cfg;
  cfg.data_dir = data_dir();
  cfg.baseline_dir = kRoot + "/baselines";
  return cfg;
}

struct CellResult {
  std::vector<double> acc_pct;   // one per seed
  std::vector<double> run_secs;  // one per seed, full pruning run
  double mean = 0.0;
  std::string seed0_checkpoint;
};

CellResult run_cell(ExperimentConfig cfg, const std::string& tag, const MnistSplit& train,
                    const MnistSplit& test) {
  CellResult out;
  for (std::uint64_t seed : kSeeds) {
    cfg.seed = seed;
    cfg.out_dir = kRoot + "/" + tag + "-s" + std::to_string(seed);
    const auto t0 = Clock::now();
    const ExperimentResult r = run_experiment(cfg, train, test);
    out.run_secs.push_back(seconds_since(t0));
    out.acc_pct.push_back(r.row.accuracy * 100.0);
    if (seed == 0) out.seed0_checkpoint = r.checkpoint_path;
    progress(fmt("%s seed %llu: %.2f%% in %.0fs", tag.c_str(),
                 static_cast<unsigned long long>(seed), out.acc_pct.back(),
                 out.run_secs.back()));
  }
  out.mean = mean_of(out.acc_pct);
  return out;
}

// ------------------------------------------------- toy data for the property checks

MnistSplit random_split(Eigen::Index n, Eigen::Index dim, int classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> pix(0.f, 1.f);
  MnistSplit s;
  s.images.resize(n, dim);
  s.labels.resize(std::size_t(n));
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) s.images(r, c) = pix(rng);
    s.labels[std::size_t(r)] = int(rng() % std::uint64_t(classes));
  }
  return s;
}

MlpModel toy_model(const ActivationKind& kind, std::uint64_t seed) {
  return make_model({{6, 4, kind}, {4, 3, ActivationKind::identity()}}, seed);
}

// 64-bit shadow of the training loss for the finite-difference oracle, so the
// comparison is not limited by f32 rounding of the loss value itself.
double apply_f64(const ActivationKind& kind, double z) {
  switch (kind.kind) {
    case Activation::Identity: return z;
    case Activation::ReLU: return z > 0.0 ? z : 0.0;
    case Activation::LeakyReLU: return z > 0.0 ? z : double(kind.leaky_slope) * z;
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Activation::Tanh: return std::tanh(z);
  }
  return 0.0;
}

struct ShadowModel {
  std::vector<Matd> weights;  // mask already applied
  std::vector<Eigen::RowVectorXd> bias;
  std::vector<ActivationKind> kind;
};

ShadowModel shadow_of(const MlpModel& m, const PruneMask& mask) {
  ShadowModel s;
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    s.weights.push_back(
        (m.layers[l].weights.array() * mask.layers[l].array()).matrix().cast<double>());
    s.bias.push_back(m.layers[l].bias.cast<double>());
    s.kind.push_back(m.layers[l].spec.activation);
  }
  return s;
}

double shadow_loss(const ShadowModel& s, const Matd& x, const std::vector<int>& labels,
                   double lambda) {
  Matd a = x;
  double l1 = 0.0;
  for (std::size_t l = 0; l < s.weights.size(); ++l) {
    Matd z = a * s.weights[l];
    z.rowwise() += s.bias[l];
    a.resize(z.rows(), z.cols());
    for (Eigen::Index i = 0; i < z.rows(); ++i)
      for (Eigen::Index j = 0; j < z.cols(); ++j) a(i, j) = apply_f64(s.kind[l], z(i, j));
    if (l + 1 < s.weights.size()) l1 += a.array().abs().sum();
  }
  double ce = 0.0;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    const double m = a.row(r).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index c = 0; c < a.cols(); ++c) sum += std::exp(a(r, c) - m);
    ce += m + std::log(sum) - a(r, labels[std::size_t(r)]);
  }
  const double n = double(a.rows());
  return ce / n + lambda * l1 / n;
}

// --------------------------------------------------------------- check bodies

// 1. Dense ReLU baseline: mean accuracy inside the published band, each
//    training run within the desk-scale budget.
void check_baseline(const MnistSplit& train, const MnistSplit& test,
                    std::vector<double>& acc_out) {
  ExperimentConfig cfg = base_config();
  cfg.out_dir = kRoot + "/c1";
  std::vector<double> accs, fresh_secs;
  int cached = 0;
  for (std::uint64_t seed : kSeeds) {
    cfg.seed = seed;
    const auto t0 = Clock::now();
    const BaselineHandle h = baseline_for(cfg, train, test);
    const double t = seconds_since(t0);
    accs.push_back(h.test_accuracy * 100.0);
    if (h.from_cache)
      ++cached;
    else
      fresh_secs.push_back(t);
    progress(fmt("c1 baseline seed %llu: %.2f%% in %.0fs%s",
                 static_cast<unsigned long long>(seed), accs.back(), t,
                 h.from_cache ? " (cached)" : ""));
  }
  acc_out = accs;
  const double mean = mean_of(accs);
  const bool in_band = std::abs(mean - 97.0) <= 0.7;
  bool time_ok = true;
  double worst_t = 0.0;
  for (double t : fresh_secs) {
    worst_t = std::max(worst_t, t);
    if (t > 300.0) time_ok = false;
  }
  std::string detail =
      fmt("dense ReLU baseline mean %.2f%% (runs %.2f/%.2f/%.2f) vs reference band "
          "97.00+/-0.70",
          mean, accs[0], accs[1], accs[2]);
  if (!fresh_secs.empty()) detail += fmt("; longest training %.0fs (limit 300)", worst_t);
  if (cached > 0) detail += fmt("; %d run(s) served from cache", cached);
  if (!in_band)
    detail +=
        "; protocol is fully pinned (He-uniform init, Adam lr 1e-3, 10 epochs, batch 64) and "
        "trains above the published value -- see README, Known deviations";
  report("criterion 1", in_band && time_ok, detail);
}

void check_oracle_equivalence() {
  const auto t0 = Clock::now();
  const std::vector<ActivationKind> kinds = {ActivationKind::relu(),
                                             ActivationKind::leaky_relu(0.01f),
                                             ActivationKind::sigmoid(), ActivationKind::tanh()};
  const MnistSplit data = random_split(20, 6, 3, 11);
  double worst = 0.0;
  for (const ActivationKind& kind : kinds) {
    const MlpModel model = toy_model(kind, 7);
    const PruneMask mask = PruneMask::all_ones(model);
    const ContributionStats fast = contribution_stats(model, mask, data);
    const ContributionStats slow = contribution_stats_naive(model, mask, data);
    for (std::size_t l = 0; l < fast.mean.size(); ++l) {
      const auto rel = [](const Matd& a, const Matd& b) {
        return ((a - b).array().abs() / b.array().abs().max(1e-9)).maxCoeff();
      };
      worst = std::max(worst, rel(fast.mean[l], slow.mean[l]));
      worst = std::max(worst, rel(fast.stddev[l], slow.stddev[l]));
    }
  }
  const double t = seconds_since(t0);
  report("criterion 7", worst <= 1e-5 && t <= 10.0,
         fmt("vectorized vs naive contribution stats: worst relative difference %.3g "
             "(limit 1e-5) over 4 activations, %.1fs (limit 10)",
             worst, t));
}

void check_gradients() {
  const auto t0 = Clock::now();
  const std::vector<ActivationKind> kinds = {
      ActivationKind::relu(), ActivationKind::leaky_relu(0.01f), ActivationKind::sigmoid(),
      ActivationKind::tanh(), ActivationKind::identity()};
  const MnistSplit data = random_split(5, 6, 3, 20);
  const Matd xd = data.images.cast<double>();
  const double h = 1e-3;
  double worst = 0.0;
  for (const ActivationKind& kind : kinds) {
    for (const float lambda : {0.0f, 1e-4f}) {
      MlpModel model = toy_model(kind, 21);
      PruneMask mask = PruneMask::all_ones(model);
      mask.layers[0](2, 1) = 0.f;  // include a pruned weight in the check
      model.layers[0].weights(2, 1) = 0.f;

      auto [logits, trace] = forward(model, mask, data.images);
      auto [base, dlogits] = cross_entropy(logits, data.labels);
      (void)base;
      const Gradients grads = backward(model, mask, trace, dlogits, LossConfig{lambda});

      ShadowModel sh = shadow_of(model, mask);
      const auto fd_rel = [&](double& param, double analytic) {
        const double p0 = param;
        param = p0 + h;
        const double lp = shadow_loss(sh, xd, data.labels, double(lambda));
        param = p0 - h;
        const double lm = shadow_loss(sh, xd, data.labels, double(lambda));
        param = p0;
        const double fd = (lp - lm) / (2.0 * h);
        return std::abs(fd - analytic) / std::max({std::abs(fd), std::abs(analytic), 1e-4});
      };
      for (std::size_t l = 0; l < model.layer_count(); ++l) {
        for (Eigen::Index i = 0; i < model.layers[l].weights.rows(); ++i)
          for (Eigen::Index j = 0; j < model.layers[l].weights.cols(); ++j) {
            if (mask.layers[l](i, j) == 0.f) continue;  // gradient pinned to 0 by contract
            worst = std::max(worst, fd_rel(sh.weights[l](i, j), double(grads.weights[l](i, j))));
          }
        for (Eigen::Index j = 0; j < model.layers[l].bias.cols(); ++j)
          worst = std::max(worst, fd_rel(sh.bias[l](j), double(grads.bias[l](j))));
      }
    }
  }
  const double t = seconds_since(t0);
  report("criterion 8", worst < 1e-3 && t <= 30.0,
         fmt("backward vs central finite differences (all activations, lambda 0 and 1e-4): "
             "worst relative error %.3g (limit 1e-3), %.1fs (limit 30)",
             worst, t));
}

// Counts masked weights whose stored bits are not exactly +0.0f.
long long nonzero_masked_bits(const MlpModel& model, const PruneMask& mask) {
  long long bad = 0;
  for (std::size_t l = 0; l < model.layer_count(); ++l)
    for (Eigen::Index i = 0; i < model.layers[l].weights.rows(); ++i)
      for (Eigen::Index j = 0; j < model.layers[l].weights.cols(); ++j)
        if (mask.layers[l](i, j) == 0.0f &&
            std::bit_cast<std::uint32_t>(model.layers[l].weights(i, j)) != 0u)
          ++bad;
  return bad;
}

void check_mask_contract(const std::string& half_ckpt, const std::string& deep_ckpt) {
  const long long total = 386120;
  auto [m50, k50] = load_checkpoint(half_ckpt);
  auto [m75, k75] = load_checkpoint(deep_ckpt);
  const long long want50 = std::llround(0.5 * double(total));
  const long long want75 = std::llround(0.75 * double(total));
  const long long bad50 = nonzero_masked_bits(m50, k50);
  const long long bad75 = nonzero_masked_bits(m75, k75);
  const bool pass = k50.pruned_count() == want50 && k75.pruned_count() == want75 &&
                    bad50 == 0 && bad75 == 0;
  report("criterion 9", pass,
         fmt("saved checkpoints: pruned counts %lld/%lld (expected %lld) and %lld/%lld "
             "(expected %lld); masked weights with nonzero bits: %lld and %lld",
             k50.pruned_count(), total, want50, k75.pruned_count(), total, want75, bad50,
             bad75));
}

std::vector<unsigned char> file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void check_checkpoint_roundtrip() {
  const std::string dir = kRoot + "/c10";
  fs::create_directories(dir);
  MlpModel model = default_model(ActivationKind::leaky_relu(0.02f), 3);
  PruneMask mask = PruneMask::all_ones(model);
  mask.layers[0](5, 7) = 0.f;
  model.layers[0].weights(5, 7) = 0.f;
  mask.layers[2](100, 3) = 0.f;
  model.layers[2].weights(100, 3) = 0.f;

  const std::string a = dir + "/a.aplb", b = dir + "/b.aplb", bad = dir + "/bad.aplb";
  save_checkpoint(model, mask, a);
  auto [loaded, loaded_mask] = load_checkpoint(a);
  save_checkpoint(loaded, loaded_mask, b);
  const bool identical = file_bytes(a) == file_bytes(b);

  std::vector<unsigned char> bytes = file_bytes(a);
  bytes[0] ^= 0xFF;
  std::ofstream(bad, std::ios::binary)
      .write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  bool rejected = false;
  try {
    load_checkpoint(bad);
  } catch (const FormatError&) {
    rejected = true;
  }
  report("criterion 10", identical && rejected,
         fmt("save -> load -> save is byte-identical: %s; corrupted magic rejected with a "
             "format error: %s",
             identical ? "yes" : "no", rejected ? "yes" : "no"));
}

void check_entropy_and_mi() {
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> samples(100000);
  for (double& s : samples) s = normal(rng);
  const double h = histogram_entropy(samples, HistogramEstimator{});
  const double target = 0.5 * std::log(2.0 * M_PI * std::exp(1.0));

  MlpModel model = toy_model(ActivationKind::sigmoid(), 9);
  model.layers[0].weights(2, 1) = 0.0f;  // present but exactly zero
  const PruneMask mask = PruneMask::all_ones(model);
  const MnistSplit data = random_split(300, 6, 3, 5);
  const MiEstimate mi = mi_weight_presence(model, mask, data, 0, 2, 1, HistogramEstimator{});

  report("criterion 11", std::abs(h - target) <= 0.05 && mi.value == 0.0,
         fmt("N(0,1) entropy %.4f vs %.4f nats (|diff| %.4f <= 0.05); MI of a zero weight "
             "= %.17g (must be exactly 0)",
             h, target, std::abs(h - target), mi.value));
}

void check_importance_arithmetic() {
  ContributionStats stats;
  stats.mean.push_back((Matd(1, 2) << 0.5, 0.25).finished());
  stats.stddev.push_back((Matd(1, 2) << 0.1, 0.0).finished());
  stats.mean.push_back((Matd(1, 1) << 0.125).finished());
  stats.stddev.push_back((Matd(1, 1) << 0.5).finished());
  stats.count = 10;

  double worst = 0.0;
  const auto check = [&](const ImportanceConfig& cfg) {
    const ScoreTensor got = importance(stats, cfg);
    for (std::size_t l = 0; l < stats.mean.size(); ++l) {
      const double s_l = cfg.layer_factor_enabled ? std::pow(cfg.layer_factor_base, double(l))
                                                  : 1.0;
      for (Eigen::Index i = 0; i < stats.mean[l].rows(); ++i)
        for (Eigen::Index j = 0; j < stats.mean[l].cols(); ++j) {
          const double want = s_l * (cfg.alpha * stats.mean[l](i, j) +
                                     cfg.beta / (cfg.eps + stats.stddev[l](i, j)));
          worst = std::max(worst, std::abs(got[l](i, j) - want));
        }
    }
  };
  ImportanceConfig cfg;  // alpha 1, beta 1e-7, eps 1e-12, factor base 2 on
  check(cfg);
  cfg.layer_factor_enabled = false;
  cfg.alpha = 0.5;
  cfg.beta = 1e-5;
  check(cfg);
  cfg.layer_factor_enabled = true;
  cfg.layer_factor_base = 3.0;
  cfg.beta = 0.0;
  check(cfg);
  report("criterion 12", worst <= 1e-9,
         fmt("importance on hand-built statistics vs closed form: worst absolute error %.3g "
             "(limit 1e-9) across 3 configurations",
             worst));
}

void check_occupancy_ordering(const MnistSplit& train, const MnistSplit& test) {
  ExperimentConfig plain = base_config();
  plain.seed = 0;
  plain.out_dir = kRoot + "/c13";
  ExperimentConfig penalized = plain;
  penalized.lambda_rl1 = 1e-4f;

  const BaselineHandle b0 = baseline_for(plain, train, test);
  const BaselineHandle b1 = baseline_for(penalized, train, test);
  const PruneMask ones0 = PruneMask::all_ones(b0.model);
  const PruneMask ones1 = PruneMask::all_ones(b1.model);
  const double occ0 = blind_range_occupancy(b0.model, ones0, test, 1e-6).overall;
  const double occ1 = blind_range_occupancy(b1.model, ones1, test, 1e-6).overall;
  report("criterion 13", occ1 > occ0,
         fmt("blind-range occupancy at seed 0: lambda=1e-4 model %.4f vs lambda=0 model %.4f "
             "(must be strictly greater)",
             occ1, occ0));
}

}  // namespace

int main() {
  std::printf("acceptance suite: data %s, outputs %s\n", data_dir().c_str(), kRoot.c_str());
  std::fflush(stdout);
  fs::create_directories(kRoot);

  MnistSplit train, test;
  try {
    auto loaded = load_mnist(data_dir());
    train = std::move(loaded.first);
    test = std::move(loaded.second);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cannot load MNIST: %s\n", e.what());
    return 2;
  }

  const auto t_all = Clock::now();

  // --- criterion 1: dense baseline (also populates the shared baseline cache).
  std::vector<double> baseline_accs;
  check_baseline(train, test, baseline_accs);

  // --- criterion 2: 50% target, 25%/iter, 50% scoring data.
  ExperimentConfig c2 = base_config();
  c2.method = PruneMethod::Contribution;
  c2.data_fraction = 0.5;
  c2.target_ratio = 0.5;
  c2.per_iter_ratio = 0.25;
  const CellResult ours2 = run_cell(c2, "c2-ours", train, test);
  c2.method = PruneMethod::Magnitude;
  const CellResult mag2 = run_cell(c2, "c2-mag", train, test);
  c2.method = PruneMethod::Random;
  const CellResult rnd2 = run_cell(c2, "c2-rnd", train, test);
  {
    double worst_t = 0.0;
    for (double t : ours2.run_secs) worst_t = std::max(worst_t, t);
    const bool pass = ours2.mean >= 97.6 && ours2.mean > mag2.mean && worst_t <= 600.0;
    report("criterion 2", pass,
           fmt("contribution scorer at 50%% data: mean %.2f%% (needs >= 97.60) vs magnitude "
               "%.2f%% (needs strictly greater); longest run %.0fs (limit 600)",
               ours2.mean, mag2.mean, worst_t));
  }

  // --- criterion 3: 75% target at 5%/iter, full scoring data.
  ExperimentConfig c3 = base_config();
  c3.target_ratio = 0.75;
  c3.per_iter_ratio = 0.05;
  c3.data_fraction = 1.0;
  c3.method = PruneMethod::Contribution;
  const CellResult ours3 = run_cell(c3, "c3-ours", train, test);
  c3.method = PruneMethod::Wanda;
  const CellResult wanda3 = run_cell(c3, "c3-wanda", train, test);
  c3.method = PruneMethod::Magnitude;
  const CellResult mag3 = run_cell(c3, "c3-mag", train, test);
  report("criterion 3",
         ours3.mean > mag3.mean + 3.0 && ours3.mean > wanda3.mean + 3.0 && ours3.mean >= 96.5,
         fmt("75%% sparsity at 5%%/iter: contribution %.2f%% vs magnitude %.2f%% (gap %.2f, "
             "needs > 3) and wanda %.2f%% (gap %.2f, needs > 3); floor 96.50",
             ours3.mean, mag3.mean, ours3.mean - mag3.mean, wanda3.mean,
             ours3.mean - wanda3.mean));

  // --- criterion 4: stability-term ablation, 0.5% scoring data.
  ExperimentConfig c4 = base_config();
  c4.method = PruneMethod::Contribution;
  c4.data_fraction = 0.005;
  c4.target_ratio = 0.5;
  c4.per_iter_ratio = 0.25;
  c4.importance.beta = 1e-7;
  const CellResult beta7 = run_cell(c4, "c4-beta1e-7", train, test);
  c4.importance.beta = 1e-5;
  const CellResult beta5 = run_cell(c4, "c4-beta1e-5", train, test);
  report("criterion 4", beta7.mean >= beta5.mean + 0.5,
         fmt("beta=1e-7 with layer factor %.2f%% vs beta=1e-5 %.2f%% (margin %.2f, needs "
             ">= 0.5)",
             beta7.mean, beta5.mean, beta7.mean - beta5.mean));

  // --- criterion 5: pruning-aware training, 75% target at 25%/iter.
  ExperimentConfig c5 = base_config();
  c5.lambda_rl1 = 1e-4f;
  c5.target_ratio = 0.75;
  c5.per_iter_ratio = 0.25;
  c5.data_fraction = 1.0;
  c5.method = PruneMethod::Contribution;
  const CellResult ours5 = run_cell(c5, "c5-ours", train, test);
  c5.method = PruneMethod::Magnitude;
  const CellResult mag5 = run_cell(c5, "c5-mag", train, test);
  report("criterion 5", ours5.mean >= 96.5 && ours5.mean >= mag5.mean + 15.0,
         fmt("lambda=1e-4 training, 75%% sparsity: contribution %.2f%% (needs >= 96.50) vs "
             "magnitude %.2f%% (gap %.2f, needs >= 15)",
             ours5.mean, mag5.mean, ours5.mean - mag5.mean));

  // --- criterion 6: sigmoid generality at 25%/iter, full scoring data.
  ExperimentConfig c6 = base_config();
  c6.activation = ActivationKind::sigmoid();
  c6.target_ratio = 0.5;
  c6.per_iter_ratio = 0.25;
  c6.data_fraction = 1.0;
  c6.method = PruneMethod::Contribution;
  const CellResult ours6 = run_cell(c6, "c6-ours", train, test);
  c6.method = PruneMethod::Magnitude;
  const CellResult mag6 = run_cell(c6, "c6-mag", train, test);
  c6.method = PruneMethod::Random;
  const CellResult rnd6 = run_cell(c6, "c6-rnd", train, test);
  report("criterion 6", ours6.mean >= mag6.mean + 3.0,
         fmt("sigmoid net: contribution %.2f%% vs magnitude %.2f%% (gap %.2f, needs >= 3)",
             ours6.mean, mag6.mean, ours6.mean - mag6.mean));

  // Random-pruning cells are checked by ordering only.
  {
    const bool ord = rnd2.mean <= ours2.mean && rnd2.mean <= mag2.mean &&
                     rnd6.mean <= ours6.mean && rnd6.mean <= mag6.mean;
    report("random ordering", ord,
           fmt("random mean <= every other method per cell (ReLU 50%%: %.2f vs %.2f/%.2f; "
               "sigmoid 50%%: %.2f vs %.2f/%.2f)",
               rnd2.mean, ours2.mean, mag2.mean, rnd6.mean, ours6.mean, mag6.mean));
  }

  // --- property checks 7-13.
  check_oracle_equivalence();
  check_gradients();
  check_mask_contract(ours2.seed0_checkpoint, ours3.seed0_checkpoint);
  check_checkpoint_roundtrip();
  check_entropy_and_mi();
  check_importance_arithmetic();
  check_occupancy_ordering(train, test);

  std::printf("acceptance finished in %.0fs: %d check(s) failed\n", seconds_since(t_all),
              g_failures);
  return g_failures == 0 ? 0 : 1;
}
