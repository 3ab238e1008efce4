#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aplab/dataset.hpp"
#include "aplab/network.hpp"
#include "aplab/pruner.hpp"
#include "aplab/scoring.hpp"

namespace aplab {

struct ExperimentConfig {
  ActivationKind activation = ActivationKind::relu();
  int train_epochs = 10;
  float train_lr = 1e-3f;
  int fine_tune_epochs = 1;
  float fine_tune_lr = 1e-4f;
  float lambda_rl1 = 0.0f;  // applied during training AND fine-tuning when > 0
  PruneMethod method = PruneMethod::Contribution;
  ImportanceConfig importance;
  double data_fraction = 1.0;  // scoring subset for the data-driven methods
  double target_ratio = 0.5;
  double per_iter_ratio = 0.25;
  int batch_size = 64;
  bool resample_each_iteration = false;
  std::uint64_t seed = 0;
  std::string data_dir = "data/mnist";
  std::string out_dir = "out";
  std::string baseline_dir;      // cache of trained dense models; empty -> <out_dir>/baselines
  std::string init_checkpoint;   // start pruning from this dense checkpoint instead of training
  bool verbose = false;

  void validate() const;  // ConfigError naming the offending key
  bool data_driven() const {
    return method == PruneMethod::Contribution || method == PruneMethod::Wanda;
  }
};

/// One final-accuracy record; the per-iteration trail lives in PruneReport.
struct ResultsRow {
  std::string method;      // scorer label
  std::string activation;  // activation name
  double data_fraction = 0.0;  // 0 for data-free scorers
  double per_iter_ratio = 0.0;
  double target_ratio = 0.0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;  // in [0,1]
};

/// Markdown + CSV emitters. The CSV is the machine-readable source of truth:
/// it carries the display percentage and the full-precision accuracy, and
/// parse_results_csv round-trips rows exactly.
// Translate a CLI activation name ("relu", "leaky-relu", "sigmoid", "tanh",
// "identity") into an ActivationKind; throws InputError on unknown names.
ActivationKind activation_from_name(const std::string& name, float leaky_slope = 0.01f);

void emit_tables(const std::vector<ResultsRow>& rows, const std::string& md_path,
                 const std::string& csv_path);
std::vector<ResultsRow> parse_results_csv(const std::string& path);

/// Trains the baseline for cfg (or loads it from `<out_dir>/baselines/`), keyed
/// by activation, lambda, seed and training hyperparameters.
struct BaselineHandle {
  MlpModel model;
  double test_accuracy = 0.0;
  std::string checkpoint_path;
  bool from_cache = false;
};
BaselineHandle baseline_for(const ExperimentConfig& cfg, const MnistSplit& train,
                            const MnistSplit& test);

struct ExperimentResult {
  ResultsRow row;
  PruneReport report;
  double baseline_accuracy = 0.0;
  std::string checkpoint_path;  // pruned model + mask
};

/// Baseline (cached) -> prune_iteratively -> artifacts in cfg.out_dir:
/// config.txt, report.csv, results.csv/.md, final.aplb.
ExperimentResult run_experiment(const ExperimentConfig& cfg);
ExperimentResult run_experiment(const ExperimentConfig& cfg, const MnistSplit& train,
                                const MnistSplit& test);

/// Effective-config snapshot; the same key=value format the CLI accepts as a
/// config file, so every run is reconstructible from its snapshot.
void write_config(const ExperimentConfig& cfg, const std::string& path);

/// One cell of a reproduction grid: display labels, the paper's percentage,
/// and the fully-resolved config (seed filled in per run).
struct TableCell {
  std::string row_label;
  std::string col_label;
  double reference = 0.0;  // percent
  ExperimentConfig cfg;
};

/// The experiment grid behind each published table (1..5).
std::vector<TableCell> table_grid(int id);

struct TableCellResult {
  std::string row_label;
  std::string col_label;
  double reference = 0.0;        // percent
  double mean_accuracy = 0.0;    // fraction
  std::vector<double> per_seed;  // fractions, one per seed
};

struct TableResult {
  int id = 0;
  std::vector<std::string> row_order;
  std::vector<std::string> col_order;
  std::vector<TableCellResult> cells;
};

/// Runs the grid for one results table, one experiment per cell and seed,
/// reusing cached baselines; the mean over seeds is reported per cell.
/// `base` supplies the environment and training budget (directories, epochs,
/// learning rates, batch size); each cell supplies the science axes (method,
/// scoring fraction, activation, penalty, schedule). `max_cells` > 0 limits
/// the run to the first cells of the grid for partial reproductions.
TableResult reproduce_table(int id, const std::vector<std::uint64_t>& seeds,
                            const ExperimentConfig& base, const MnistSplit& train,
                            const MnistSplit& test, std::size_t max_cells = 0);

void write_table_markdown(const TableResult& table, const std::string& path);
void write_table_csv(const TableResult& table, const std::string& path);

}  // namespace aplab
