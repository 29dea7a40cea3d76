#include "lirkamf/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <future>
#include <sstream>
#include <stdexcept>

#include "lirkamf/analysis.hpp"

namespace lirkamf {

namespace {

SolverStrategy parse_strategy(const std::string& name) {
  if (name == "exact") return SolverStrategy::exact();
  if (name == "amf") return SolverStrategy::amf(0);
  if (name == "amfr1") return SolverStrategy::amf(1);
  if (name == "amfr2") return SolverStrategy::amf(2);
  if (name == "amf-calvo") return SolverStrategy::amf_calvo();
  throw ContractViolation("strategy: unknown value '" + name + "'");
}

ImexTableau tableau_for(const std::string& method) {
  if (method == "lirk3") return lirk3();
  if (method == "lirk4") return lirk4();
  throw ContractViolation("method: unknown value '" + method + "'");
}

struct BrusselatorParams {
  double alpha = 0.0;
  double b = 0.0;
};

BrusselatorParams brusselator_params(int case_id) {
  return case_id == 1 ? BrusselatorParams{0.001, 3.0} : BrusselatorParams{0.1, 3.4};
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sanitize_message(std::string message) {
  for (char& c : message) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return message;
}

std::string trim(const std::string& s) {
  std::size_t begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  std::size_t end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

long parse_long(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long v = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ContractViolation(key + ": invalid integer '" + value + "'");
  }
}

}  // namespace

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.problem != "allen-cahn" && cfg.problem != "brusselator") {
    throw ContractViolation("problem: unknown value '" + cfg.problem + "'");
  }
  if (cfg.problem == "brusselator" && cfg.case_id != 1 && cfg.case_id != 2) {
    throw ContractViolation("case: must be 1 or 2");
  }
  tableau_for(cfg.method);
  parse_strategy(cfg.strategy);
  if (cfg.splitting != "two-way" && cfg.splitting != "three-way") {
    throw ContractViolation("splitting: unknown value '" + cfg.splitting + "'");
  }
  if (cfg.problem == "allen-cahn" && cfg.splitting != "two-way") {
    throw ContractViolation("splitting: allen-cahn supports two-way only");
  }
  if (cfg.grid_size != 0 && cfg.grid_size < 2) {
    throw ContractViolation("grid-size: must be 0 (preset) or at least 2");
  }
  if (cfg.steps.empty()) throw ContractViolation("steps: must be nonempty");
  for (std::size_t i = 0; i < cfg.steps.size(); ++i) {
    if (cfg.steps[i] < 1) throw ContractViolation("steps: counts must be at least 1");
    if (i > 0 && cfg.steps[i] <= cfg.steps[i - 1]) {
      throw ContractViolation("steps: counts must be strictly increasing");
    }
  }
}

int resolved_grid_size(const ExperimentConfig& cfg) {
  if (cfg.grid_size != 0) return cfg.grid_size;
  if (cfg.problem == "allen-cahn") return 59;
  if (cfg.case_id == 1) return 39;
  return cfg.splitting == "three-way" ? 127 : 199;
}

std::shared_ptr<const Vector> ReferenceCache::get_or_compute(
    const std::string& key, const std::function<Vector()>& compute) {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = map_.find(key);
  if (it != map_.end()) return it->second;
  auto value = std::make_shared<const Vector>(compute());
  map_.emplace(key, value);
  return value;
}

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg,
                                          ReferenceCache* cache) {
  validate_config(cfg);
  const int m = resolved_grid_size(cfg);
  const ImexTableau tableau = tableau_for(cfg.method);
  const SolverStrategy strategy = parse_strategy(cfg.strategy);

  ProblemBuild build;
  if (cfg.problem == "allen-cahn") {
    build = build_allen_cahn(m);
  } else {
    const BrusselatorParams params = brusselator_params(cfg.case_id);
    const Splitting splitting =
        cfg.splitting == "three-way" ? Splitting::three_way : Splitting::two_way;
    build = build_brusselator(m, params.alpha, params.b, cfg.case_id, splitting);
  }
  SemiLinearProblem& problem = build.problem;

  if (!problem.reference) {
    // Self-reference: a high-order run with exact solves at 16x the finest
    // step count of this experiment, shared through the cache so every
    // strategy and splitting of the same study reuses it. The reference is
    // generated from the two-way build, which has the identical right-hand
    // side.
    const long ref_steps = 16 * cfg.steps.back();
    const BrusselatorParams params = brusselator_params(cfg.case_id);
    const int case_id = cfg.case_id;
    auto compute = [m, params, case_id, ref_steps]() {
      ProblemBuild ref_build =
          build_brusselator(m, params.alpha, params.b, case_id, Splitting::two_way);
      IntegrationResult res =
          integrate(ref_build.problem, lirk4(), SolverStrategy::exact(), ref_steps);
      if (res.report.diverged) {
        throw std::runtime_error("reference integration diverged");
      }
      return res.state;
    };
    const std::string key = cfg.problem + "/case" + std::to_string(cfg.case_id) + "/m" +
                            std::to_string(m) + "/steps" + std::to_string(ref_steps);
    std::shared_ptr<const Vector> reference =
        cache ? cache->get_or_compute(key, compute)
              : std::make_shared<const Vector>(compute());
    // The time loop only evaluates the reference at the terminal time.
    problem.reference = [reference](double) { return *reference; };
  }

  std::vector<ExperimentRow> rows;
  std::vector<double> hs, errors;
  for (long steps : cfg.steps) {
    IntegrationResult res = integrate(problem, tableau, strategy, steps);
    ExperimentRow row;
    row.problem = cfg.problem;
    row.case_label = cfg.problem == "brusselator" ? std::to_string(cfg.case_id) : "";
    row.splitting = cfg.splitting;
    row.method = cfg.method;
    row.strategy = cfg.strategy;
    row.grid_size = m;
    row.steps = steps;
    row.h = res.report.h;
    row.error = res.report.error;
    row.diverged = res.report.diverged;
    row.cpu_seconds = res.report.cpu_seconds;
    if (!row.diverged && row.error && *row.error > 0.0) {
      hs.push_back(row.h);
      errors.push_back(*row.error);
      if (hs.size() >= 3) row.estimated_order = estimate_order(hs, errors);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

ExperimentRow error_row(const ExperimentConfig& cfg, const std::string& message) {
  ExperimentRow row;
  row.problem = cfg.problem;
  row.case_label = cfg.problem == "brusselator" ? std::to_string(cfg.case_id) : "";
  row.splitting = cfg.splitting;
  row.method = cfg.method;
  row.strategy = cfg.strategy;
  row.grid_size = cfg.grid_size;
  row.error_message = sanitize_message(message);
  return row;
}

}  // namespace

std::vector<ExperimentRow> run_sweep(const std::vector<ExperimentConfig>& configs,
                                     bool parallel) {
  if (configs.empty()) throw ContractViolation("sweep needs at least one config");
  ReferenceCache cache;
  auto run_one = [&cache](const ExperimentConfig& cfg) -> std::vector<ExperimentRow> {
    try {
      return run_experiment(cfg, &cache);
    } catch (const std::exception& e) {
      return {error_row(cfg, e.what())};
    }
  };

  std::vector<std::vector<ExperimentRow>> partial(configs.size());
  if (parallel) {
    std::vector<std::future<std::vector<ExperimentRow>>> futures;
    futures.reserve(configs.size());
    for (const auto& cfg : configs) {
      futures.push_back(std::async(std::launch::async, run_one, cfg));
    }
    for (std::size_t i = 0; i < futures.size(); ++i) partial[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < configs.size(); ++i) partial[i] = run_one(configs[i]);
  }

  std::vector<ExperimentRow> rows;
  for (auto& chunk : partial) {
    for (auto& row : chunk) rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ExperimentConfig> parse_config_text(const std::string& text) {
  std::vector<ExperimentConfig> configs;
  ExperimentConfig current;
  bool block_open = false;

  auto flush = [&]() {
    if (block_open) {
      configs.push_back(current);
      current = ExperimentConfig{};
      block_open = false;
    }
  };

  std::istringstream stream(text);
  std::string raw;
  while (std::getline(stream, raw)) {
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) {
      flush();
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ContractViolation("config line is not key=value: '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "problem") {
      current.problem = value;
    } else if (key == "case") {
      current.case_id = static_cast<int>(parse_long(key, value));
    } else if (key == "grid-size") {
      current.grid_size = static_cast<int>(parse_long(key, value));
    } else if (key == "method") {
      current.method = value;
    } else if (key == "strategy") {
      current.strategy = value;
    } else if (key == "steps") {
      std::vector<long> steps;
      std::istringstream items(value);
      std::string item;
      while (std::getline(items, item, ',')) {
        steps.push_back(parse_long(key, trim(item)));
      }
      current.steps = std::move(steps);
    } else if (key == "splitting") {
      current.splitting = value;
    } else if (key == "output") {
      current.output = value;
    } else {
      throw ContractViolation("unknown config key '" + key + "'");
    }
    block_open = true;
  }
  flush();
  return configs;
}

std::string csv_header() {
  return "problem,case,splitting,M,method,strategy,steps,h,error,estimated_order,"
         "diverged,cpu_seconds,error_message";
}

namespace {

std::string to_csv_row(const ExperimentRow& row) {
  std::ostringstream out;
  out << row.problem << ',' << row.case_label << ',' << row.splitting << ','
      << row.grid_size << ',' << row.method << ',' << row.strategy << ',' << row.steps
      << ',' << format_double(row.h) << ',';
  if (row.error) out << format_double(*row.error);
  out << ',';
  if (row.estimated_order) out << format_double(*row.estimated_order);
  out << ',' << (row.diverged ? "true" : "false") << ',' << format_double(row.cpu_seconds)
      << ',' << row.error_message;
  return out.str();
}

}  // namespace

std::string format_csv(const std::vector<ExperimentRow>& rows) {
  std::string out = csv_header();
  out += '\n';
  for (const auto& row : rows) {
    out += to_csv_row(row);
    out += '\n';
  }
  return out;
}

std::string summary_table(const std::vector<ExperimentRow>& rows) {
  std::ostringstream out;
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i;
    auto same_block = [&](const ExperimentRow& a, const ExperimentRow& b) {
      return a.problem == b.problem && a.case_label == b.case_label &&
             a.splitting == b.splitting && a.grid_size == b.grid_size &&
             a.method == b.method && a.strategy == b.strategy;
    };
    while (j + 1 < rows.size() && same_block(rows[i], rows[j + 1])) ++j;

    const ExperimentRow& head = rows[i];
    out << head.problem;
    if (!head.case_label.empty()) out << " case " << head.case_label;
    out << "  M=" << head.grid_size << "  " << head.method << "+" << head.strategy << "  "
        << head.splitting << '\n';
    if (!head.error_message.empty()) {
      out << "  error: " << head.error_message << '\n';
      i = j + 1;
      continue;
    }
    std::optional<double> fitted;
    for (std::size_t r = i; r <= j; ++r) {
      const ExperimentRow& row = rows[r];
      std::string error_text = row.diverged ? "diverged" : "-";
      if (row.error) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6e", *row.error);
        error_text = buf;
      }
      std::string order_text = "-";
      if (row.estimated_order) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", *row.estimated_order);
        order_text = buf;
        fitted = row.estimated_order;
      }
      out << "  steps=" << row.steps << "  h=" << format_double(row.h)
          << "  error=" << error_text << "  order=" << order_text << '\n';
    }
    if (fitted) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", *fitted);
      out << "  fitted order: " << buf << '\n';
    }
    i = j + 1;
  }
  return out.str();
}

bool has_error_rows(const std::vector<ExperimentRow>& rows) {
  for (const auto& row : rows) {
    if (!row.error_message.empty()) return true;
  }
  return false;
}

}  // namespace lirkamf
