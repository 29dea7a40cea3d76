#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lirkamf/experiment.hpp"

namespace {

struct Flags {
  std::string problem;
  int case_id = 0;
  int grid_size = -1;
  std::string method;
  std::string strategy;
  std::string steps;
  std::string splitting;
  std::string output;
  std::string config_path;
  bool parallel = false;
};

std::vector<long> parse_steps_list(const std::string& value) {
  std::vector<long> steps;
  std::istringstream items(value);
  std::string item;
  while (std::getline(items, item, ',')) {
    steps.push_back(std::stol(item));
  }
  return steps;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

/// Applies only the flags the user actually passed on top of `cfg`.
void apply_flags(lirkamf::ExperimentConfig& cfg, const CLI::App* cmd, const Flags& flags) {
  if (cmd->count("--problem") > 0) cfg.problem = flags.problem;
  if (cmd->count("--case") > 0) cfg.case_id = flags.case_id;
  if (cmd->count("--grid-size") > 0) cfg.grid_size = flags.grid_size;
  if (cmd->count("--method") > 0) cfg.method = flags.method;
  if (cmd->count("--strategy") > 0) cfg.strategy = flags.strategy;
  if (cmd->count("--steps") > 0) cfg.steps = parse_steps_list(flags.steps);
  if (cmd->count("--splitting") > 0) cfg.splitting = flags.splitting;
  if (cmd->count("--output") > 0) cfg.output = flags.output;
}

/// Writes the CSV to `path` ("-" or empty means stdout) and the summary table
/// to whichever of stdout/stderr keeps a piped CSV clean.
void emit(const std::vector<lirkamf::ExperimentRow>& rows, const std::string& path) {
  const std::string csv = lirkamf::format_csv(rows);
  const std::string summary = lirkamf::summary_table(rows);
  if (path.empty() || path == "-") {
    std::cout << csv;
    std::cerr << summary;
  } else {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
    out << csv;
    std::cout << summary;
  }
}

void add_experiment_flags(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--problem", flags.problem, "Problem name: allen-cahn or brusselator");
  cmd->add_option("--case", flags.case_id, "Brusselator case: 1 or 2");
  cmd->add_option("--grid-size", flags.grid_size,
                  "Interior grid points per direction (0 picks the problem preset)");
  cmd->add_option("--method", flags.method, "Time integrator: lirk3 or lirk4");
  cmd->add_option("--strategy", flags.strategy,
                  "Stage solver: exact, amf, amfr1, amfr2, or amf-calvo");
  cmd->add_option("--steps", flags.steps, "Comma-separated step counts, increasing");
  cmd->add_option("--splitting", flags.splitting, "Operator splitting: two-way or three-way");
  cmd->add_option("--output", flags.output, "CSV destination ('-' or empty for stdout)");
}

int run_command(const CLI::App* cmd, const Flags& flags) {
  lirkamf::ExperimentConfig cfg;
  if (!flags.config_path.empty()) {
    auto configs = lirkamf::parse_config_text(read_file(flags.config_path));
    if (configs.size() != 1) {
      throw lirkamf::ContractViolation("run expects exactly one config block, got " +
                                       std::to_string(configs.size()));
    }
    cfg = configs[0];
  }
  apply_flags(cfg, cmd, flags);
  const auto rows = lirkamf::run_experiment(cfg);
  emit(rows, cfg.output);
  return 0;
}

int sweep_command(const CLI::App* cmd, const Flags& flags) {
  auto configs = lirkamf::parse_config_text(read_file(flags.config_path));
  for (auto& cfg : configs) apply_flags(cfg, cmd, flags);
  const auto rows = lirkamf::run_sweep(configs, flags.parallel);
  std::string output;
  if (cmd->count("--output") > 0) {
    output = flags.output;
  } else {
    // With no sweep-level destination, a shared per-block one is honored.
    for (const auto& cfg : configs) {
      if (!cfg.output.empty()) output = cfg.output;
    }
  }
  emit(rows, output);
  return lirkamf::has_error_rows(rows) ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-linear IMEX time integration experiments"};
  app.require_subcommand(1);

  Flags run_flags;
  CLI::App* run = app.add_subcommand("run", "Run one experiment and emit its CSV rows");
  add_experiment_flags(run, run_flags);
  run->add_option("--config", run_flags.config_path, "Config file with one block");

  Flags sweep_flags;
  CLI::App* sweep =
      app.add_subcommand("sweep", "Run every block of a config file and emit combined CSV");
  add_experiment_flags(sweep, sweep_flags);
  sweep->add_option("--config", sweep_flags.config_path, "Config file with one block per experiment");
  sweep->add_option("config_file", sweep_flags.config_path, "Config file (positional)");
  sweep->add_flag("--parallel", sweep_flags.parallel, "Run the blocks concurrently");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_command(run, run_flags);
    return sweep_command(sweep, sweep_flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
