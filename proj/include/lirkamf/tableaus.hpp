#pragma once

#include <string>
#include <vector>

#include "lirkamf/operators.hpp"

namespace lirkamf {

/// Coefficients of an implicit-explicit Runge-Kutta pair for semi-linear
/// problems y' = L y + f(y, t): the implicit matrix ahat treats L, the
/// explicit matrix a treats f. Stage 1 is fully explicit; every later stage
/// carries the same implicit diagonal gamma. b and bhat coincide for the
/// shipped methods, and bhat equals the last row of ahat (stiff accuracy).
struct ImexTableau {
  int s = 0;
  std::vector<Vector> a;     // explicit, strictly lower triangular, s x s
  std::vector<Vector> ahat;  // implicit, lower triangular, s x s
  Vector b;
  Vector bhat;
  Vector c;
  Vector chat;
  double gamma = 0.0;
};

/// Four-stage pair of classical order 3.
ImexTableau lirk3();

/// Six-stage pair of classical order 4.
ImexTableau lirk4();

struct TableauCheck {
  std::string name;
  bool passed = false;
  double residual = 0.0;
};

struct TableauValidation {
  std::vector<TableauCheck> checks;
  bool all_passed() const;
  const TableauCheck* find(const std::string& name) const;
};

/// Verifies the structural invariants of a tableau to tolerance 1e-12:
/// triangularity of both matrices, the implicit diagonal (0, gamma, ...,
/// gamma), b = bhat, stiff accuracy, row sums matching c and chat, and
/// first-order consistency.
TableauValidation validate(const ImexTableau& t);

}  // namespace lirkamf
