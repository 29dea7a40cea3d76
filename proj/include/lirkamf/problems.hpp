#pragma once

#include "lirkamf/integrator.hpp"

namespace lirkamf {

enum class BoundaryCondition { dirichlet, neumann };

/// Uniform grid on the unit square with m interior points per direction and
/// spacing 1/(m+1) (the Neumann problems place m cell nodes with spacing
/// 1/(m+1) as well, so spacing is uniform across problems).
struct GridSpec {
  int m = 0;
  double spacing = 0.0;
  BoundaryCondition bc = BoundaryCondition::dirichlet;
};

enum class Splitting { two_way, three_way };

/// A ready-to-integrate problem together with its construction metadata.
struct ProblemBuild {
  SemiLinearProblem problem;
  GridSpec grid;
  Splitting splitting = Splitting::two_way;
  double alpha = 0.0;
  double b_param = 0.0;
  int case_id = 0;
};

/// Allen-Cahn equation u_t = lap u + u - u^3 + F(t,x,y) on the unit square
/// with homogeneous Dirichlet data, second-order finite differences on an
/// m x m interior grid (row-major index i*m + j), and a forcing chosen so
/// the exact semi-discrete solution is exp(t) sin(pi x) sin(pi y) on the
/// grid. The linear parts are the directional diffusion operators, x first.
ProblemBuild build_allen_cahn(int grid_size);

/// Brusselator reaction-diffusion system on the unit square with no-flux
/// boundaries, both species stacked (u block then v block, each m*m,
/// row-major i*m + j). case_id 1 and 2 select the standard parameter and
/// initial-data sets; alpha and b_param override the diffusion and feed
/// parameters. two_way splits diffusion by direction with the reaction kept
/// explicit; three_way adds the pointwise reaction Jacobian, refreshed at
/// the current state every step.
ProblemBuild build_brusselator(int grid_size, double alpha, double b_param, int case_id,
                               Splitting splitting);

struct EigenvalueEstimate {
  double value = 0.0;
  bool converged = false;
  long iterations = 0;
};

/// Power iteration for the dominant eigenvalue magnitude of op, with a
/// deterministic starting vector, relative tolerance 1e-6 on successive
/// estimates, and the convergence flag reporting whether the tolerance was
/// met within max_iterations.
EigenvalueEstimate dominant_eigenvalue(const StructuredOperator& op, long max_iterations);

}  // namespace lirkamf
