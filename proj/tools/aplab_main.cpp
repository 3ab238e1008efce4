// Command-line laboratory for training, pruning, and inspecting the MLP.
//
// Subcommands:
//   train      train (or fetch from cache) a dense baseline and report accuracy
//   prune      iteratively prune a trained model to a target sparsity
//   eval       accuracy + sparsity of a saved checkpoint
//   mi-report  per-weight mutual-information diagnostic for one layer
//   occupancy  blind-range occupancy of hidden-layer pre-activations
//   reproduce  run a full results-table grid over several seeds
//
// Every subcommand exits 0 on success and nonzero with a one-line diagnostic
// on stderr otherwise. `--config FILE` reads key=value pairs (the same format
// the tool writes as config.txt); explicit flags override file values.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aplab/checkpoint.hpp"
#include "aplab/errors.hpp"
#include "aplab/harness.hpp"
#include "aplab/infometrics.hpp"
#include "aplab/pruner.hpp"

namespace {

using namespace aplab;

std::string default_data_dir() {
  if (const char* env = std::getenv("MNIST_DIR"); env != nullptr && *env != '\0') return env;
  return "data/mnist";
}

struct CliOptions {
  std::string config_path;
  std::string activation = "relu";
  double leaky_slope = 0.01;
  std::string method = "contribution";
  double target = 0.5;
  double per_iter = 0.25;
  double data_fraction = 1.0;
  double alpha = 1.0;
  double beta = 1e-7;
  double eps = 1e-12;
  std::string layer_factor = "on";
  double layer_factor_base = 2.0;
  std::string layer_factor_order = "input";
  double lambda_rl1 = 0.0;
  int epochs = 10;
  double lr = 1e-3;
  int fine_tune_epochs = 1;
  double fine_tune_lr = 1e-4;
  int batch_size = 64;
  bool resample = false;
  std::uint64_t seed = 0;
  std::string data_dir = default_data_dir();
  std::string out_dir = "out";
  std::string baseline_dir;
  std::string checkpoint;
  std::string split = "test";
  std::string out_file;
  int layer = 0;
  int bins = 64;
  long long sample_cap = 1024;
  double tol = 1e-6;
  int table = 0;
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  std::size_t max_cells = 0;
  bool verbose = false;
};

ExperimentConfig to_config(const CliOptions& o) {
  ExperimentConfig cfg;
  cfg.activation = activation_from_name(o.activation, static_cast<float>(o.leaky_slope));
  cfg.train_epochs = o.epochs;
  cfg.train_lr = static_cast<float>(o.lr);
  cfg.fine_tune_epochs = o.fine_tune_epochs;
  cfg.fine_tune_lr = static_cast<float>(o.fine_tune_lr);
  cfg.lambda_rl1 = static_cast<float>(o.lambda_rl1);
  cfg.method = parse_method(o.method);
  cfg.importance.alpha = o.alpha;
  cfg.importance.beta = o.beta;
  cfg.importance.eps = o.eps;
  cfg.importance.layer_factor_enabled = (o.layer_factor == "on");
  cfg.importance.layer_factor_base = o.layer_factor_base;
  cfg.importance.layer_factor_from_output = (o.layer_factor_order == "output");
  cfg.data_fraction = o.data_fraction;
  cfg.target_ratio = o.target;
  cfg.per_iter_ratio = o.per_iter;
  cfg.batch_size = o.batch_size;
  cfg.resample_each_iteration = o.resample;
  cfg.seed = o.seed;
  cfg.data_dir = o.data_dir;
  cfg.out_dir = o.out_dir;
  cfg.baseline_dir = o.baseline_dir;
  cfg.verbose = o.verbose;
  return cfg;
}

void add_io_flags(CLI::App* sub, CliOptions& o, bool with_out_dir = true) {
  sub->add_option("--data-dir", o.data_dir, "MNIST directory (default: $MNIST_DIR or data/mnist)")
      ->capture_default_str();
  if (with_out_dir)
    sub->add_option("--out-dir", o.out_dir, "directory for artifacts")->capture_default_str();
  sub->add_option("--config", o.config_path, "key=value file; explicit flags override it");
}

// Applies one config-file entry to the option struct. Keys spell the long flag
// without the leading dashes, exactly as config.txt snapshots are written.
// Unknown keys are ignored by the caller (a snapshot may carry keys that the
// replaying subcommand does not take).
void apply_config_value(const std::string& key, const std::string& value, CliOptions& o) {
  const auto num = [&] { return std::stod(value); };
  const auto whole = [&] { return std::stoi(value); };
  const auto truthy = [&] { return value == "true" || value == "on" || value == "1"; };
  if (key == "activation") o.activation = value;
  else if (key == "leaky-slope") o.leaky_slope = num();
  else if (key == "method") o.method = value;
  else if (key == "target") o.target = num();
  else if (key == "per-iter") o.per_iter = num();
  else if (key == "data-fraction") o.data_fraction = num();
  else if (key == "alpha") o.alpha = num();
  else if (key == "beta") o.beta = num();
  else if (key == "eps") o.eps = num();
  else if (key == "layer-factor") o.layer_factor = value;
  else if (key == "layer-factor-base") o.layer_factor_base = num();
  else if (key == "layer-factor-order") o.layer_factor_order = value;
  else if (key == "lambda-rl1") o.lambda_rl1 = num();
  else if (key == "epochs") o.epochs = whole();
  else if (key == "lr") o.lr = num();
  else if (key == "fine-tune-epochs") o.fine_tune_epochs = whole();
  else if (key == "fine-tune-lr") o.fine_tune_lr = num();
  else if (key == "batch-size") o.batch_size = whole();
  else if (key == "resample") o.resample = truthy();
  else if (key == "seed") o.seed = std::stoull(value);
  else if (key == "data-dir") o.data_dir = value;
  else if (key == "out-dir") o.out_dir = value;
  else if (key == "baseline-dir") o.baseline_dir = value;
  else if (key == "checkpoint") o.checkpoint = value;
  else if (key == "split") o.split = value;
  else if (key == "tol") o.tol = num();
  else if (key == "bins") o.bins = whole();
  else if (key == "sample-cap") o.sample_cap = whole();
  else if (key == "layer") o.layer = whole();
}

// Loads `o.config_path` (key=value per line, '#' comments) into `o`, skipping
// keys the parsed subcommand has no option for and keys given explicitly on
// the command line: explicit flags always win over file values.
void apply_config_file(CLI::App* sub, CliOptions& o) {
  if (o.config_path.empty()) return;
  std::ifstream in(o.config_path);
  if (!in) throw InputError("cannot open config file: " + o.config_path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos || eq == 0)
      throw FormatError("config line " + std::to_string(line_no) + " is not key=value: " + line);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (sub->get_option_no_throw("--" + key) == nullptr) continue;
    if (sub->count("--" + key) > 0) continue;
    try {
      apply_config_value(key, value, o);
    } catch (const std::exception&) {
      throw FormatError("bad config value for " + key + ": " + value);
    }
  }
}

void add_train_flags(CLI::App* sub, CliOptions& o) {
  sub->add_option("--activation", o.activation, "hidden activation")
      ->check(CLI::IsMember({"relu", "leaky-relu", "sigmoid", "tanh"}))
      ->capture_default_str();
  sub->add_option("--leaky-slope", o.leaky_slope, "LeakyReLU negative slope")
      ->capture_default_str();
  sub->add_option("--epochs", o.epochs, "training epochs")->capture_default_str();
  sub->add_option("--lr", o.lr, "training learning rate")->capture_default_str();
  sub->add_option("--lambda-rl1", o.lambda_rl1, "relative-L1 activation penalty weight")
      ->capture_default_str();
  sub->add_option("--batch-size", o.batch_size)->capture_default_str();
  sub->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
  sub->add_option("--baseline-dir", o.baseline_dir,
                  "dense-baseline cache (default: <out-dir>/baselines)");
  sub->add_flag("--verbose", o.verbose, "per-epoch progress on stderr");
}

void add_prune_flags(CLI::App* sub, CliOptions& o) {
  sub->add_option("--method", o.method, "weight scorer")
      ->check(CLI::IsMember({"contribution", "magnitude", "wanda", "random"}))
      ->capture_default_str();
  sub->add_option("--target", o.target, "final fraction of weights to prune")
      ->capture_default_str();
  sub->add_option("--per-iter", o.per_iter, "fraction of original weights pruned per iteration")
      ->capture_default_str();
  sub->add_option("--data-fraction", o.data_fraction, "training fraction used for scoring")
      ->capture_default_str();
  sub->add_option("--alpha", o.alpha, "importance weight on the contribution mean")
      ->capture_default_str();
  sub->add_option("--beta", o.beta, "importance weight on inverse contribution stability")
      ->capture_default_str();
  sub->add_option("--eps", o.eps, "stabilizer inside the inverse-std term")
      ->capture_default_str();
  sub->add_option("--layer-factor", o.layer_factor, "depth multiplier on/off")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  sub->add_option("--layer-factor-base", o.layer_factor_base)->capture_default_str();
  sub->add_option("--layer-factor-order", o.layer_factor_order,
                  "count depth from the input or the output")
      ->check(CLI::IsMember({"input", "output"}))
      ->capture_default_str();
  sub->add_option("--fine-tune-epochs", o.fine_tune_epochs)->capture_default_str();
  sub->add_option("--fine-tune-lr", o.fine_tune_lr)->capture_default_str();
  sub->add_flag("--resample", o.resample, "fresh scoring subset each iteration");
  sub->add_option("--checkpoint", o.checkpoint,
                  "start from this dense checkpoint instead of training");
}

int cmd_train(const CliOptions& o) {
  ExperimentConfig cfg = to_config(o);
  cfg.validate();
  auto [train_split, test_split] = load_mnist(cfg.data_dir);
  BaselineHandle handle = baseline_for(cfg, train_split, test_split);
  std::filesystem::create_directories(cfg.out_dir);
  write_config(cfg, (std::filesystem::path(cfg.out_dir) / "config.txt").string());
  if (!o.checkpoint.empty()) {
    std::filesystem::create_directories(
        std::filesystem::path(o.checkpoint).parent_path().string().empty()
            ? "."
            : std::filesystem::path(o.checkpoint).parent_path().string());
    std::filesystem::copy_file(handle.checkpoint_path, o.checkpoint,
                               std::filesystem::copy_options::overwrite_existing);
  }
  std::printf("baseline %s: accuracy %.2f%% on test (%s)\n", cfg.activation.name().c_str(),
              handle.test_accuracy * 100.0, handle.from_cache ? "cached" : "trained");
  std::printf("checkpoint: %s\n", handle.checkpoint_path.c_str());
  return 0;
}

int cmd_prune(const CliOptions& o) {
  ExperimentConfig cfg = to_config(o);
  cfg.init_checkpoint = o.checkpoint;
  ExperimentResult result = run_experiment(cfg);
  std::printf("baseline accuracy %.2f%%; pruned to %.0f%% sparsity: accuracy %.2f%%\n",
              result.baseline_accuracy * 100.0, cfg.target_ratio * 100.0,
              result.row.accuracy * 100.0);
  std::printf("checkpoint: %s\n", result.checkpoint_path.c_str());
  std::printf("artifacts: %s\n", cfg.out_dir.c_str());
  return 0;
}

int cmd_eval(const CliOptions& o) {
  auto [model, mask] = load_checkpoint(o.checkpoint);
  auto [train_split, test_split] = load_mnist(o.data_dir);
  const MnistSplit& split = (o.split == "train") ? train_split : test_split;
  const double acc = evaluate(model, mask, split);
  const long long pruned = mask.pruned_count();
  const long long total = model.weight_count();
  std::printf("accuracy %.4f%% on %s (%lld samples); sparsity %.4f%% (%lld/%lld weights pruned)\n",
              acc * 100.0, o.split.c_str(), static_cast<long long>(split.size()),
              100.0 * double(pruned) / double(total), pruned, total);
  return 0;
}

int cmd_mi_report(const CliOptions& o) {
  auto [model, mask] = load_checkpoint(o.checkpoint);
  auto [train_split, test_split] = load_mnist(o.data_dir);
  const MnistSplit& split = (o.split == "train") ? train_split : test_split;
  HistogramEstimator est;
  est.bin_count = o.bins;
  const auto rows = mi_layer_report(model, mask, split, static_cast<std::size_t>(o.layer), est,
                                    static_cast<Eigen::Index>(o.sample_cap));
  const std::string path = o.out_file.empty() ? "mi-report.csv" : o.out_file;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot open " + path + " for writing");
  out << "layer,row,col,mi_nats,h_marginal,h_conditional\n";
  double mean = 0.0;
  for (const MiRow& r : rows) {
    char line[192];
    std::snprintf(line, sizeof(line), "%d,%lld,%lld,%.17g,%.17g,%.17g\n", o.layer,
                  static_cast<long long>(r.row), static_cast<long long>(r.col), r.mi.value,
                  r.mi.h_marginal, r.mi.h_conditional);
    out << line;
    mean += r.mi.value;
  }
  if (!out) throw InputError("failed writing " + path);
  if (!rows.empty()) mean /= double(rows.size());
  std::printf("wrote %zu weights of layer %d to %s (mean MI %.6f nats over %lld samples)\n",
              rows.size(), o.layer, path.c_str(), mean,
              rows.empty() ? 0 : rows.front().mi.sample_count);
  return 0;
}

int cmd_occupancy(const CliOptions& o) {
  auto [model, mask] = load_checkpoint(o.checkpoint);
  auto [train_split, test_split] = load_mnist(o.data_dir);
  const MnistSplit& split = (o.split == "train") ? train_split : test_split;
  const BlindRangeOccupancy occ = blind_range_occupancy(model, mask, split, o.tol);
  const std::string path = o.out_file.empty() ? "occupancy.csv" : o.out_file;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot open " + path + " for writing");
  out << "layer,fraction\n";
  for (std::size_t l = 0; l < occ.fraction.size(); ++l) {
    char line[64];
    std::snprintf(line, sizeof(line), "%zu,%.17g\n", l, occ.fraction[l]);
    out << line;
  }
  if (!out) throw InputError("failed writing " + path);
  std::printf("overall blind-range occupancy %.6f at tol %g (%s split); per-layer report: %s\n",
              occ.overall, o.tol, o.split.c_str(), path.c_str());
  return 0;
}

int cmd_reproduce(const CliOptions& o) {
  ExperimentConfig base = to_config(o);
  base.validate();
  auto [train_split, test_split] = load_mnist(base.data_dir);
  const TableResult result =
      reproduce_table(o.table, o.seeds, base, train_split, test_split, o.max_cells);
  std::printf("table %d: %zu cells x %zu seeds -> %s/table%d.{md,csv}\n", o.table,
              result.cells.size(), o.seeds.size(), base.out_dir.c_str(), o.table);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MLP pruning laboratory: contribution-statistics weight scoring on MNIST"};
  app.require_subcommand(1);
  CliOptions o;

  CLI::App* train_sub = app.add_subcommand("train", "train a dense baseline (cached)");
  add_train_flags(train_sub, o);
  add_io_flags(train_sub, o);
  train_sub->add_option("--checkpoint", o.checkpoint, "also copy the baseline checkpoint here");

  CLI::App* prune_sub = app.add_subcommand("prune", "iteratively prune to a target sparsity");
  add_train_flags(prune_sub, o);
  add_prune_flags(prune_sub, o);
  add_io_flags(prune_sub, o);

  CLI::App* eval_sub = app.add_subcommand("eval", "evaluate a saved checkpoint");
  eval_sub->add_option("--checkpoint", o.checkpoint, "model to evaluate")->required();
  eval_sub->add_option("--split", o.split)->check(CLI::IsMember({"test", "train"}))
      ->capture_default_str();
  add_io_flags(eval_sub, o, /*with_out_dir=*/false);

  CLI::App* mi_sub = app.add_subcommand("mi-report", "mutual information of weight presence");
  mi_sub->add_option("--checkpoint", o.checkpoint, "model to analyse")->required();
  mi_sub->add_option("--layer", o.layer, "layer index (0-based)")->capture_default_str();
  mi_sub->add_option("--bins", o.bins, "histogram bins")->capture_default_str();
  mi_sub->add_option("--sample-cap", o.sample_cap, "max samples fed to the estimator")
      ->capture_default_str();
  mi_sub->add_option("--split", o.split)->check(CLI::IsMember({"test", "train"}))
      ->capture_default_str();
  mi_sub->add_option("--out", o.out_file, "output CSV (default mi-report.csv)");
  add_io_flags(mi_sub, o, /*with_out_dir=*/false);

  CLI::App* occ_sub = app.add_subcommand("occupancy", "blind-range occupancy per hidden layer");
  occ_sub->add_option("--checkpoint", o.checkpoint, "model to analyse")->required();
  occ_sub->add_option("--tol", o.tol, "|phi'(z)| threshold")->capture_default_str();
  occ_sub->add_option("--split", o.split)->check(CLI::IsMember({"test", "train"}))
      ->capture_default_str();
  occ_sub->add_option("--out", o.out_file, "output CSV (default occupancy.csv)");
  add_io_flags(occ_sub, o, /*with_out_dir=*/false);

  CLI::App* repro_sub = app.add_subcommand("reproduce", "run one results-table grid");
  repro_sub->add_option("--table", o.table, "table id")->required()->check(CLI::Range(1, 5));
  repro_sub->add_option("--seeds", o.seeds, "seeds to average over")
      ->delimiter(',')
      ->capture_default_str();
  repro_sub->add_option("--max-cells", o.max_cells,
                        "run only the first N grid cells (0 = all; partial reproduction)");
  repro_sub->add_option("--epochs", o.epochs, "baseline training epochs")->capture_default_str();
  repro_sub->add_option("--lr", o.lr, "baseline learning rate")->capture_default_str();
  repro_sub->add_option("--fine-tune-epochs", o.fine_tune_epochs)->capture_default_str();
  repro_sub->add_option("--fine-tune-lr", o.fine_tune_lr)->capture_default_str();
  repro_sub->add_option("--batch-size", o.batch_size)->capture_default_str();
  repro_sub->add_option("--baseline-dir", o.baseline_dir,
                        "dense-baseline cache (default: <out-dir>/baselines)");
  repro_sub->add_flag("--verbose", o.verbose, "per-run progress on stderr");
  add_io_flags(repro_sub, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    for (CLI::App* sub : {train_sub, prune_sub, eval_sub, mi_sub, occ_sub, repro_sub})
      if (sub->parsed()) apply_config_file(sub, o);
    if (train_sub->parsed()) return cmd_train(o);
    if (prune_sub->parsed()) return cmd_prune(o);
    if (eval_sub->parsed()) return cmd_eval(o);
    if (mi_sub->parsed()) return cmd_mi_report(o);
    if (occ_sub->parsed()) return cmd_occupancy(o);
    if (repro_sub->parsed()) return cmd_reproduce(o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  std::fprintf(stderr, "error: no subcommand given\n");
  return 1;
}
