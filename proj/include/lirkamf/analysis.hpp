#pragma once

#include <complex>
#include <vector>

#include "lirkamf/tableaus.hpp"

namespace lirkamf {

/// Per-mode contraction rate of one refinement sweep for a two-factor
/// diffusion splitting, as a function of the nonnegative mode stiffness
/// magnitudes z1 = h*|lambda1|, z2 = h*|lambda2|:
///   (gamma*z1)(gamma*z2) / ((1 + gamma*z1)(1 + gamma*z2)).
/// Always in [0, 1). Negative z or gamma <= 0 throws ContractViolation.
double amplification_2d(double z1, double z2, double gamma);

/// Three-factor analogue:
///   ((g z1)(g z2) + (g z1)(g z3) + (g z2)(g z3) + (g z1)(g z2)(g z3))
///     / ((1 + g z1)(1 + g z2)(1 + g z3))   with g = gamma.
/// Reduces to amplification_2d when one argument is zero.
double amplification_3d(double z1, double z2, double z3, double gamma);

/// One-step amplification of the scalar test problem y' = lambda*y with the
/// stiff term resolved implicitly (z = h*lambda) and a frequency i*w treated
/// explicitly:
///   R = 1 + (i*w*b + z*bhat)^T (I - z*Ahat - i*w*A)^{-1} 1,
/// with stage 1 kept fully explicit. Throws SingularMatrixError when the
/// stage system is singular at (z, w).
std::complex<double> stability_exact(const ImexTableau& t, std::complex<double> z, double w);

/// Stability function when implicit stages are solved through the
/// two-factor product, z = z1 + z2. refinements selects the plain product
/// solve (0) or one refinement sweep per stage (1); any other value throws
/// ContractViolation.
std::complex<double> stability_amf(const ImexTableau& t, std::complex<double> z1,
                                   std::complex<double> z2, double w, int refinements);

/// Least-squares slope of log(error) against log(h). Requires at least 3
/// points, strictly decreasing positive hs, and positive errors; throws
/// ContractViolation otherwise.
double estimate_order(const std::vector<double>& hs, const std::vector<double>& errors);

}  // namespace lirkamf
