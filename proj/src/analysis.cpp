#include "lirkamf/analysis.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace lirkamf {

double amplification_2d(double z1, double z2, double gamma) {
  if (z1 < 0.0 || z2 < 0.0) throw ContractViolation("amplification arguments must be >= 0");
  if (!(gamma > 0.0)) throw ContractViolation("amplification gamma must be positive");
  const double a = gamma * z1;
  const double b = gamma * z2;
  return (a * b) / ((1.0 + a) * (1.0 + b));
}

double amplification_3d(double z1, double z2, double z3, double gamma) {
  if (z1 < 0.0 || z2 < 0.0 || z3 < 0.0) {
    throw ContractViolation("amplification arguments must be >= 0");
  }
  if (!(gamma > 0.0)) throw ContractViolation("amplification gamma must be positive");
  const double a = gamma * z1;
  const double b = gamma * z2;
  const double c = gamma * z3;
  return (a * b + a * c + b * c + a * b * c) / ((1.0 + a) * (1.0 + b) * (1.0 + c));
}

namespace {

using Complex = std::complex<double>;

// Shared evaluation core: solves (diag(d) - z*Ahat - i*w*A) Y = 1 and
// returns 1 + (i*w*b + z*bhat)^T Y. d carries the per-stage diagonal
// replacement for the implicit identity block; the first stage is explicit,
// so d[0] = 1 always.
Complex evaluate_stability(const ImexTableau& t, Complex z, double w, const std::vector<Complex>& d) {
  const int s = t.s;
  Eigen::MatrixXcd m(s, s);
  const Complex iw(0.0, w);
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) {
      m(i, j) = -z * t.ahat[i][j] - iw * t.a[i][j];
      if (i == j) m(i, j) += d[i];
    }
  }
  // Row scales span ~17 orders of magnitude in the stiff limit, so
  // equilibrate before factoring; otherwise the rank test discards the
  // explicit first stage as noise.
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Ones(s);
  for (int i = 0; i < s; ++i) {
    const double row_max = m.row(i).cwiseAbs().maxCoeff();
    if (row_max == 0.0) throw SingularMatrixError("stability stage system is singular");
    m.row(i) /= row_max;
    rhs(i) /= row_max;
  }
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(m);
  if (!lu.isInvertible()) {
    throw SingularMatrixError("stability stage system is singular");
  }
  Eigen::VectorXcd y = lu.solve(rhs);
  Complex acc(1.0, 0.0);
  for (int j = 0; j < s; ++j) acc += (iw * t.b[j] + z * t.bhat[j]) * y(j);
  return acc;
}

}  // namespace

Complex stability_exact(const ImexTableau& t, Complex z, double w) {
  std::vector<Complex> d(t.s, Complex(1.0, 0.0));
  return evaluate_stability(t, z, w, d);
}

Complex stability_amf(const ImexTableau& t, Complex z1, Complex z2, double w,
                      int refinements) {
  if (refinements != 0 && refinements != 1) {
    throw ContractViolation("stability_amf supports refinements 0 or 1");
  }
  const Complex z = z1 + z2;
  const double g = t.gamma;
  const Complex q = g * g * z1 * z2;
  std::vector<Complex> d(t.s, Complex(1.0, 0.0));
  if (refinements == 0) {
    // Implicit stage matrix (1 - g z) is replaced by the factored product
    // (1 - g z1)(1 - g z2) = 1 - g z + q, i.e. diagonal entry 1 + q.
    for (int i = 1; i < t.s; ++i) d[i] = 1.0 + q;
  } else {
    // One refinement maps the stage multiplier 1/P to (2P - E)/P^2 with
    // P = 1 - g z + q and E = 1 - g z; the effective diagonal entry solves
    // d - g z = P^2 / (2P - E), which simplifies to the closed form below.
    const Complex u = g * z;
    for (int i = 1; i < t.s; ++i) {
      d[i] = (1.0 - u + 2.0 * q + q * q) / (1.0 - u + 2.0 * q);
    }
  }
  return evaluate_stability(t, z, w, d);
}

double estimate_order(const std::vector<double>& hs, const std::vector<double>& errors) {
  if (hs.size() != errors.size()) {
    throw ContractViolation("estimate_order needs matching hs and errors lengths");
  }
  if (hs.size() < 3) throw ContractViolation("estimate_order needs at least 3 points");
  for (std::size_t i = 0; i < hs.size(); ++i) {
    if (!(hs[i] > 0.0)) throw ContractViolation("estimate_order step sizes must be positive");
    if (!(errors[i] > 0.0)) throw ContractViolation("estimate_order errors must be positive");
    if (i > 0 && !(hs[i] < hs[i - 1])) {
      throw ContractViolation("estimate_order step sizes must be strictly decreasing");
    }
  }
  const std::size_t n = hs.size();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(hs[i]);
    const double y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  return (n * sxy - sx * sy) / denom;
}

}  // namespace lirkamf
