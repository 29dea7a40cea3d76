#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "lirkamf/problems.hpp"

namespace lirkamf {

/// One convergence experiment: a problem, a method, a stage-solve strategy,
/// and a list of step counts run over the fixed time interval.
struct ExperimentConfig {
  std::string problem;        // "allen-cahn" or "brusselator"
  int case_id = 1;            // brusselator parameter set, ignored otherwise
  int grid_size = 0;          // 0 selects the per-problem preset
  std::string method = "lirk3";
  std::string strategy = "exact";  // exact | amf | amfr1 | amfr2 | amf-calvo
  std::vector<long> steps = {25, 50, 100, 200};
  std::string splitting = "two-way";
  std::string output;         // CSV destination, empty or "-" for stdout
};

/// Throws ContractViolation naming the offending key when the config is
/// malformed (unknown problem, method, strategy, splitting or case, steps
/// not strictly increasing positive, bad grid size).
void validate_config(const ExperimentConfig& cfg);

/// grid_size, or the preset when grid_size is 0.
int resolved_grid_size(const ExperimentConfig& cfg);

struct ExperimentRow {
  std::string problem;
  std::string case_label;  // empty for problems without a case id
  std::string splitting;
  std::string method;
  std::string strategy;
  int grid_size = 0;
  long steps = 0;
  double h = 0.0;
  std::optional<double> error;
  std::optional<double> estimated_order;
  bool diverged = false;
  double cpu_seconds = 0.0;
  std::string error_message;  // config-level failure, commas replaced by ';'
};

/// Thread-safe memo for computed reference solutions, shared across the
/// configs of a sweep so repeated (problem, case, grid, steps) keys reuse
/// one high-accuracy run.
class ReferenceCache {
 public:
  std::shared_ptr<const Vector> get_or_compute(const std::string& key,
                                               const std::function<Vector()>& compute);

 private:
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const Vector>> map_;
};

/// Runs one config: one row per step count in order, errors against the
/// problem reference (analytic when available, otherwise a cached
/// high-accuracy run), and a cumulative least-squares order estimate from
/// the third valid row on. Throws on config-level errors; mid-run
/// divergence only flags rows.
std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg,
                                          ReferenceCache* cache = nullptr);

/// Runs each config, serially or with one task per config, sharing one
/// reference cache. Results keep input order; a config that throws
/// contributes a single row carrying its error_message instead of
/// aborting the sweep.
std::vector<ExperimentRow> run_sweep(const std::vector<ExperimentConfig>& configs,
                                     bool parallel = false);

/// Parses experiment blocks from config text: key=value lines using the
/// CLI flag names without dashes, '#' comments, blank lines separating
/// blocks. Throws ContractViolation on unknown keys or bad values.
std::vector<ExperimentConfig> parse_config_text(const std::string& text);

std::string csv_header();
/// Header plus one line per row; floating-point fields carry 17 significant
/// digits so they round-trip.
std::string format_csv(const std::vector<ExperimentRow>& rows);
/// Human-readable per-experiment table with a fitted order per block.
std::string summary_table(const std::vector<ExperimentRow>& rows);
bool has_error_rows(const std::vector<ExperimentRow>& rows);

}  // namespace lirkamf
