#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <memory>
#include <random>

#include "doctest.h"
#include "lirkamf/analysis.hpp"
#include "lirkamf/integrator.hpp"
#include "lirkamf/tableaus.hpp"

using namespace lirkamf;

TEST_CASE("two-factor amplification known values") {
  CHECK(amplification_2d(1.0, 1.0, 0.25) == doctest::Approx(0.04).epsilon(1e-14));
  CHECK(amplification_3d(1.0, 1.0, 1.0, 0.25) == doctest::Approx(0.104).epsilon(1e-14));
  CHECK(amplification_2d(0.0, 123.4, 0.25) == 0.0);
  CHECK(amplification_2d(55.0, 0.0, 0.9) == 0.0);
  CHECK(amplification_3d(0.0, 3.0, 4.0, 0.5) ==
        doctest::Approx(amplification_2d(3.0, 4.0, 0.5)).epsilon(1e-14));
  const double stiff = amplification_2d(1e9, 1e9, 0.25);
  CHECK(stiff >= 0.999);
  CHECK(stiff < 1.0);
  CHECK(amplification_2d(2.0, 5.0, 0.3) == amplification_2d(5.0, 2.0, 0.3));
}

TEST_CASE("amplification rejects bad arguments") {
  CHECK_THROWS_AS(amplification_2d(-1.0, 1.0, 0.25), ContractViolation);
  CHECK_THROWS_AS(amplification_2d(1.0, -1.0, 0.25), ContractViolation);
  CHECK_THROWS_AS(amplification_2d(1.0, 1.0, 0.0), ContractViolation);
  CHECK_THROWS_AS(amplification_2d(1.0, 1.0, -0.5), ContractViolation);
  CHECK_THROWS_AS(amplification_3d(1.0, 1.0, -2.0, 0.25), ContractViolation);
  CHECK_THROWS_AS(amplification_3d(1.0, 1.0, 2.0, 0.0), ContractViolation);
}

TEST_CASE("amplification stays inside the unit interval and grows with stiffness") {
  std::mt19937 rng(53);
  std::uniform_real_distribution<double> uz(0.0, 6.0);
  std::uniform_real_distribution<double> ug(0.05, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double z1 = std::pow(10.0, uz(rng)), z2 = std::pow(10.0, uz(rng));
    const double g = ug(rng);
    const double r = amplification_2d(z1, z2, g);
    CHECK(r >= 0.0);
    CHECK(r < 1.0);
    CHECK(amplification_2d(2.0 * z1, z2, g) >= r);
    const double r3 = amplification_3d(z1, z2, 0.5 * z1, g);
    CHECK(r3 >= 0.0);
    CHECK(r3 < 1.0);
  }
}

TEST_CASE("exact stability at the origin and in the stiff limit") {
  for (const ImexTableau& t : {lirk3(), lirk4()}) {
    CHECK(std::abs(stability_exact(t, 0.0, 0.0) - 1.0) <= 1e-13);
    CHECK(std::abs(stability_exact(t, -1e9, 0.0)) <= 1e-6);
  }
}

TEST_CASE("factored stability degenerates when one factor is trivial") {
  std::mt19937 rng(59);
  std::uniform_real_distribution<double> uz(-8.0, -0.1), uw(-2.0, 2.0);
  for (const ImexTableau& t : {lirk3(), lirk4()}) {
    for (int i = 0; i < 10; ++i) {
      const double z = uz(rng), w = uw(rng);
      const std::complex<double> exact = stability_exact(t, z, w);
      for (int r = 0; r <= 1; ++r) {
        CHECK(std::abs(stability_amf(t, z, 0.0, w, r) - exact) <= 1e-13);
        CHECK(std::abs(stability_amf(t, 0.0, z, w, r) - exact) <= 1e-13);
      }
    }
  }
}

TEST_CASE("factored stability rejects other refinement counts") {
  const ImexTableau t = lirk3();
  CHECK_THROWS_AS(stability_amf(t, -1.0, -1.0, 0.0, -1), ContractViolation);
  CHECK_THROWS_AS(stability_amf(t, -1.0, -1.0, 0.0, 2), ContractViolation);
}

namespace {

/// One time step on the rotation realization of the scalar test problem:
/// L = (z/h) I and f = (w/h) J y with J the 90-degree rotation, started at
/// (1, 0), lands on (Re R, Im R) for the matching stability function.
Vector rotation_step(const ImexTableau& t, double z1, double z2, double w,
                     const SolverStrategy& strategy) {
  const double h = 0.25;
  auto scaled_identity = [](double value) {
    return std::make_shared<const StructuredOperator>(
        StructuredOperator::dense({value, 0.0, 0.0, value}, 2));
  };

  SemiLinearProblem p;
  p.dim = 2;
  if (strategy.kind == SolverStrategy::Kind::exact) {
    p.linear_parts = {scaled_identity((z1 + z2) / h)};
  } else {
    p.linear_parts = {scaled_identity(z1 / h), scaled_identity(z2 / h)};
  }
  p.nonlinear = [w, h](const Vector& y, double, Vector& out) {
    out[0] = -(w / h) * y[1];
    out[1] = (w / h) * y[0];
  };
  p.initial = {1.0, 0.0};

  switch (strategy.kind) {
    case SolverStrategy::Kind::exact:
      return step_exact(p, t, p.initial, 0.0, h);
    case SolverStrategy::Kind::amf:
      return step_amf(p, t, p.initial, 0.0, h, strategy.refinements);
    default:
      return step_amf_calvo(p, t, p.initial, 0.0, h);
  }
}

}  // namespace

TEST_CASE("stability functions match a two-dimensional realization") {
  std::mt19937 rng(61);
  std::uniform_real_distribution<double> uz(-5.0, -0.1), uw(-2.0, 2.0);
  for (const ImexTableau& t : {lirk3(), lirk4()}) {
    for (int i = 0; i < 20; ++i) {
      const double z = uz(rng), w = uw(rng);
      const double z1 = 0.6 * z, z2 = 0.4 * z;

      const std::complex<double> r_exact = stability_exact(t, z, w);
      const Vector y_exact = rotation_step(t, z, 0.0, w, SolverStrategy::exact());
      CHECK(std::abs(y_exact[0] - r_exact.real()) <= 1e-12);
      CHECK(std::abs(y_exact[1] - r_exact.imag()) <= 1e-12);

      for (int r = 0; r <= 1; ++r) {
        const std::complex<double> r_amf = stability_amf(t, z1, z2, w, r);
        const Vector y_amf = rotation_step(t, z1, z2, w, SolverStrategy::amf(r));
        CHECK(std::abs(y_amf[0] - r_amf.real()) <= 1e-12);
        CHECK(std::abs(y_amf[1] - r_amf.imag()) <= 1e-12);
      }
    }
  }
}

TEST_CASE("order estimation recovers synthetic slopes") {
  const std::vector<double> hs = {0.1, 0.05, 0.025, 0.0125};
  std::vector<double> linear, cubic;
  for (double h : hs) {
    linear.push_back(7.0 * h);
    cubic.push_back(0.3 * h * h * h);
  }
  CHECK(estimate_order(hs, linear) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(estimate_order(hs, cubic) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("order estimation rejects bad input") {
  CHECK_THROWS_AS(estimate_order({0.1, 0.05}, {1.0, 0.5}), ContractViolation);
  CHECK_THROWS_AS(estimate_order({0.1, 0.05, 0.025}, {1.0, 0.0, 0.1}), ContractViolation);
  CHECK_THROWS_AS(estimate_order({0.1, 0.05, 0.025}, {1.0, -0.5, 0.1}), ContractViolation);
  CHECK_THROWS_AS(estimate_order({0.1, 0.2, 0.025}, {1.0, 0.5, 0.1}), ContractViolation);
  CHECK_THROWS_AS(estimate_order({0.1, 0.05, 0.025}, {1.0, 0.5}), ContractViolation);
}
