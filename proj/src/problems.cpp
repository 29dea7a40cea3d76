#include "lirkamf/problems.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace lirkamf {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Interior-node second-difference stencil with homogeneous Dirichlet data.
StructuredOperator dirichlet_stencil(int m) {
  Vector sub(m - 1, 1.0), diag(m, -2.0), super(m - 1, 1.0);
  return StructuredOperator::tridiagonal(std::move(sub), std::move(diag), std::move(super));
}

// No-flux stencil: the ghost node mirrors the second interior node, which
// doubles the off-diagonal entry in the first and last rows and keeps
// constants in the kernel.
StructuredOperator neumann_stencil(int m) {
  Vector sub(m - 1, 1.0), diag(m, -2.0), super(m - 1, 1.0);
  super[0] = 2.0;
  sub[m - 2] = 2.0;
  return StructuredOperator::tridiagonal(std::move(sub), std::move(diag), std::move(super));
}

double norm2(const Vector& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

}  // namespace

ProblemBuild build_allen_cahn(int grid_size) {
  const int m = grid_size;
  if (m < 2) throw ContractViolation("allen-cahn grid size must be at least 2");
  const double dx = 1.0 / (m + 1);
  const double inv_dx2 = static_cast<double>(m + 1) * (m + 1);
  const int dim = m * m;

  // Row-major layout: flat = i*m + j for node (x_{i+1}, y_{j+1}); the x
  // index strides by m, the y index is contiguous.
  auto lx = std::make_shared<const StructuredOperator>(
      StructuredOperator::kronecker_left(dirichlet_stencil(m), m, inv_dx2));
  auto ly = std::make_shared<const StructuredOperator>(
      StructuredOperator::kronecker_right(dirichlet_stencil(m), m, inv_dx2));

  // Spatial profile of the manufactured solution u = exp(t) sin(pi x)
  // sin(pi y); it is an exact eigenvector of the discrete Laplacian.
  Vector profile(dim);
  for (int i = 0; i < m; ++i) {
    const double sx = std::sin(kPi * (i + 1) * dx);
    for (int j = 0; j < m; ++j) {
      profile[static_cast<std::size_t>(i) * m + j] = sx * std::sin(kPi * (j + 1) * dx);
    }
  }
  const double sh = std::sin(kPi / (2.0 * (m + 1)));
  const double lambda_h = -8.0 * inv_dx2 * sh * sh;

  // Build-time forcing verification: the discrete eigenvalue must be the
  // O(dx^2) neighbor of the continuous -2 pi^2, and the profile must
  // satisfy the eigen relation to roundoff.
  if (std::abs(lambda_h + 2.0 * kPi * kPi) > kPi * kPi * kPi * kPi * dx * dx) {
    throw std::logic_error("allen-cahn discrete eigenvalue deviates from -2 pi^2");
  }
  {
    Vector lsx = lx->apply(profile);
    Vector lsy = ly->apply(profile);
    double residual = 0.0, scale = 0.0;
    for (int n = 0; n < dim; ++n) {
      residual = std::max(residual,
                          std::abs(lsx[n] + lsy[n] - lambda_h * profile[n]));
      scale = std::max(scale, std::abs(profile[n]));
    }
    if (residual > 1e-10 * inv_dx2 * scale) {
      throw std::logic_error("allen-cahn profile fails the discrete eigen relation");
    }
  }

  auto shared_profile = std::make_shared<const Vector>(std::move(profile));

  ProblemBuild build;
  build.grid = GridSpec{m, dx, BoundaryCondition::dirichlet};
  build.splitting = Splitting::two_way;
  build.case_id = 0;
  build.problem.dim = dim;
  build.problem.linear_parts = {lx, ly};
  // f(y, t) = y - y^3 + forcing; the forcing cancels the discrete diffusion
  // and the reaction on the manufactured solution, so exp(t) * profile
  // solves the semi-discrete system exactly. The Dirichlet boundary data of
  // the manufactured solution vanishes, so no boundary term is added.
  build.problem.nonlinear = [shared_profile, lambda_h](const Vector& y, double t,
                                                       Vector& out) {
    const auto& s = *shared_profile;
    const double et = std::exp(t);
    const double e3t = std::exp(3.0 * t);
    for (std::size_t n = 0; n < s.size(); ++n) {
      const double sn = s[n];
      out[n] = y[n] - y[n] * y[n] * y[n] - lambda_h * et * sn + e3t * sn * sn * sn;
    }
  };
  build.problem.initial = *shared_profile;
  build.problem.t_begin = 0.0;
  build.problem.t_end = 1.0;
  build.problem.reference = [shared_profile](double t) {
    Vector out = *shared_profile;
    const double et = std::exp(t);
    for (double& x : out) x *= et;
    return out;
  };
  return build;
}

namespace {

std::shared_ptr<const StructuredOperator> reaction_blocks(const Vector& y, int q,
                                                          double b_param) {
  std::vector<double> blocks(static_cast<std::size_t>(q) * 4);
  for (int p = 0; p < q; ++p) {
    const double u = y[p];
    const double v = y[static_cast<std::size_t>(q) + p];
    blocks[static_cast<std::size_t>(p) * 4 + 0] = 2.0 * u * v - (b_param + 1.0);
    blocks[static_cast<std::size_t>(p) * 4 + 1] = u * u;
    blocks[static_cast<std::size_t>(p) * 4 + 2] = b_param - 2.0 * u * v;
    blocks[static_cast<std::size_t>(p) * 4 + 3] = -u * u;
  }
  return std::make_shared<const StructuredOperator>(
      StructuredOperator::pointwise_blocks(2, q, std::move(blocks)));
}

}  // namespace

ProblemBuild build_brusselator(int grid_size, double alpha, double b_param, int case_id,
                               Splitting splitting) {
  const int m = grid_size;
  if (m < 2) throw ContractViolation("brusselator grid size must be at least 2");
  if (!(alpha > 0.0)) throw ContractViolation("brusselator alpha must be positive");
  if (case_id != 1 && case_id != 2) {
    throw ContractViolation("brusselator case must be 1 or 2");
  }
  const double dx = 1.0 / (m + 1);
  const double diff_scale = alpha * static_cast<double>(m + 1) * (m + 1);
  const int q = m * m;
  const int dim = 2 * q;

  // Both species stacked: u occupies [0, q), v occupies [q, 2q), each block
  // row-major i*m + j as in the Allen-Cahn layout. The x-direction operator
  // therefore strides by m within each species; stacking two copies of the
  // 1D stencil with a zero seam makes it a single Kronecker factor of
  // dimension 2m.
  Vector sub(2 * m - 1, 1.0), diag(2 * m, -2.0), super(2 * m - 1, 1.0);
  super[0] = 2.0;
  sub[m - 2] = 2.0;
  super[m - 1] = 0.0;
  sub[m - 1] = 0.0;
  super[m] = 2.0;
  sub[2 * m - 2] = 2.0;
  auto stacked_x =
      StructuredOperator::tridiagonal(std::move(sub), std::move(diag), std::move(super));
  auto lx = std::make_shared<const StructuredOperator>(
      StructuredOperator::kronecker_left(std::move(stacked_x), m, diff_scale));
  auto ly = std::make_shared<const StructuredOperator>(
      StructuredOperator::kronecker_right(neumann_stencil(m), 2 * m, diff_scale));

  Vector initial(dim);
  for (int i = 0; i < m; ++i) {
    const double x = (i + 1) * dx;
    for (int j = 0; j < m; ++j) {
      const double y = (j + 1) * dx;
      const std::size_t p = static_cast<std::size_t>(i) * m + j;
      if (case_id == 1) {
        initial[p] = 0.5 + y;
        initial[static_cast<std::size_t>(q) + p] = 1.0 + 5.0 * x;
      } else {
        initial[p] = 22.0 * y * std::pow(1.0 - y, 1.5);
        initial[static_cast<std::size_t>(q) + p] = 22.0 * x * std::pow(1.0 - x, 1.5);
      }
    }
  }

  auto reaction = [q, b_param](const Vector& y, double, Vector& out) {
    for (int p = 0; p < q; ++p) {
      const double u = y[p];
      const double v = y[static_cast<std::size_t>(q) + p];
      const double uuv = u * u * v;
      out[p] = 1.0 + uuv - (b_param + 1.0) * u;
      out[static_cast<std::size_t>(q) + p] = b_param * u - uuv;
    }
  };

  ProblemBuild build;
  build.grid = GridSpec{m, dx, BoundaryCondition::neumann};
  build.splitting = splitting;
  build.alpha = alpha;
  build.b_param = b_param;
  build.case_id = case_id;
  build.problem.dim = dim;
  build.problem.initial = std::move(initial);
  build.problem.t_begin = 0.0;
  build.problem.t_end = 1.0;

  if (splitting == Splitting::two_way) {
    build.problem.linear_parts = {lx, ly};
    build.problem.nonlinear = reaction;
  } else {
    // Three-way: the pointwise reaction Jacobian joins the splitting and is
    // refreshed at the current state each step; the nonlinear remainder
    // keeps the total right-hand side identical to the two-way build.
    auto relinearize = [lx, ly, q, b_param, reaction](const Vector& y,
                                                      double) -> Relinearization {
      auto lrea = reaction_blocks(y, q, b_param);
      Relinearization r;
      r.linear_parts = {lx, ly, lrea};
      r.nonlinear = [lrea, reaction](const Vector& state, double t, Vector& out) {
        reaction(state, t, out);
        Vector lin = lrea->apply(state);
        for (std::size_t n = 0; n < out.size(); ++n) out[n] -= lin[n];
      };
      return r;
    };
    Relinearization first = relinearize(build.problem.initial, build.problem.t_begin);
    build.problem.linear_parts = first.linear_parts;
    build.problem.nonlinear = first.nonlinear;
    build.problem.linear_parts_time_dependent = true;
    build.problem.relinearize = relinearize;
  }
  return build;
}

EigenvalueEstimate dominant_eigenvalue(const StructuredOperator& op, long max_iterations) {
  if (max_iterations < 1) throw ContractViolation("dominant_eigenvalue needs iterations >= 1");
  const int n = op.dim();
  Vector v(n);
  std::uint64_t state = 0x853c49e6748fea9bull;
  for (double& x : v) {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    x = 2.0 * (static_cast<double>(state >> 11) * 0x1.0p-53) - 1.0;
  }
  const double initial_norm = norm2(v);
  for (double& x : v) x /= initial_norm;

  EigenvalueEstimate result;
  double previous = 0.0;
  Vector w(n);
  for (long it = 1; it <= max_iterations; ++it) {
    op.apply_to(v, w);
    const double grown = norm2(w);
    result.value = grown;
    result.iterations = it;
    if (grown == 0.0) {
      result.converged = true;
      return result;
    }
    if (it > 1 && std::abs(grown - previous) <= 1e-6 * std::abs(grown)) {
      result.converged = true;
      return result;
    }
    previous = grown;
    for (int i = 0; i < n; ++i) v[i] = w[i] / grown;
  }
  result.converged = false;
  return result;
}

}  // namespace lirkamf
