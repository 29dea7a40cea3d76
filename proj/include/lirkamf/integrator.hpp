#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "lirkamf/operators.hpp"
#include "lirkamf/tableaus.hpp"

namespace lirkamf {

/// Raised internally when a step produces a non-finite value; integrate()
/// converts it into a diverged report.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A refreshed linearization produced along a trajectory: the same total
/// right-hand side L y + f(y, t), re-split around the current state.
struct Relinearization {
  std::vector<std::shared_ptr<const StructuredOperator>> linear_parts;
  std::function<void(const Vector&, double, Vector&)> nonlinear;
};

/// y' = L y + f(y, t) with L given as an ordered sum of structured parts.
struct SemiLinearProblem {
  int dim = 0;
  std::vector<std::shared_ptr<const StructuredOperator>> linear_parts;
  /// out = f(y, t); out is pre-sized to dim.
  std::function<void(const Vector&, double, Vector&)> nonlinear;
  Vector initial;
  double t_begin = 0.0;
  double t_end = 1.0;
  /// Reference solution at a time, empty when none is known.
  std::function<Vector(double)> reference;
  /// When true, relinearize is called at the start of every step and the
  /// returned parts replace linear_parts for that step.
  bool linear_parts_time_dependent = false;
  std::function<Relinearization(const Vector&, double)> relinearize;
};

/// How the implicit stage equations are solved.
struct SolverStrategy {
  enum class Kind { exact, amf, amf_calvo };
  Kind kind = Kind::exact;
  int refinements = 0;

  static SolverStrategy exact();
  /// refinements outside [0, 8] throws ContractViolation.
  static SolverStrategy amf(int refinements = 0);
  static SolverStrategy amf_calvo();
};

struct RunReport {
  long steps = 0;
  double h = 0.0;
  std::optional<double> error;            // absent when diverged or no reference
  std::optional<double> estimated_order;  // filled by sweep drivers, not here
  bool diverged = false;
  double cpu_seconds = 0.0;
};

struct IntegrationResult {
  Vector state;
  RunReport report;
  SolveStats stats;
};

/// One step with every implicit stage solved against the full operator.
Vector step_exact(const SemiLinearProblem& p, const ImexTableau& t, const Vector& y,
                  double time, double h);

/// One step with implicit stages solved through the factored product,
/// followed by `refinements` refinement sweeps per stage. Stage right-hand
/// sides and the update always use the exact operator.
Vector step_amf(const SemiLinearProblem& p, const ImexTableau& t, const Vector& y,
                double time, double h, int refinements);

/// One step of the perturbed-operator variant: the scheme is run with the
/// product-induced operator throughout and a single correction solve maps
/// the result back toward the unperturbed solution.
Vector step_amf_calvo(const SemiLinearProblem& p, const ImexTableau& t, const Vector& y,
                      double time, double h);

/// Fixed-step integration over [t_begin, t_end]. Divergence (non-finite
/// values, runaway norm growth, or a singular stage matrix after setup)
/// flags the report instead of throwing; contract violations during setup
/// still throw. cpu_seconds covers the step loop only.
IntegrationResult integrate(const SemiLinearProblem& p, const ImexTableau& t,
                            const SolverStrategy& strategy, long steps);

/// ||u - u_ref||_2 / ||u_ref||_2; a zero reference norm throws
/// ContractViolation.
double relative_error(const Vector& u, const Vector& u_ref);

}  // namespace lirkamf
