#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "lirkamf/operators.hpp"

using namespace lirkamf;

namespace {

Eigen::MatrixXd materialize(const StructuredOperator& op) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(op.dim(), op.dim());
  op.for_each_entry([&](int r, int c, double v) { m(r, c) += v; });
  return m;
}

Vector random_vector(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector x(n);
  for (double& v : x) v = u(rng);
  return x;
}

StructuredOperator random_tridiagonal(std::mt19937& rng, int n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector sub(n - 1), diag(n), super(n - 1);
  for (double& v : sub) v = u(rng);
  for (double& v : diag) v = u(rng);
  for (double& v : super) v = u(rng);
  return StructuredOperator::tridiagonal(std::move(sub), std::move(diag), std::move(super),
                                         scale);
}

double rel_diff(const Vector& a, const Vector& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

Vector to_std(const Eigen::VectorXd& v) { return Vector(v.data(), v.data() + v.size()); }

Eigen::VectorXd to_eigen(const Vector& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<long>(v.size()));
}

std::shared_ptr<const StructuredOperator> shared(StructuredOperator op) {
  return std::make_shared<const StructuredOperator>(std::move(op));
}

}  // namespace

TEST_CASE("tridiagonal stencil maps the first basis vector") {
  auto d = StructuredOperator::tridiagonal({1.0, 1.0}, {-2.0, -2.0, -2.0}, {1.0, 1.0});
  Vector e0 = {1.0, 0.0, 0.0};
  Vector out = d.apply(e0);
  CHECK(out[0] == -2.0);
  CHECK(out[1] == 1.0);
  CHECK(out[2] == 0.0);
}

TEST_CASE("structured applies match their dense forms") {
  std::mt19937 rng(7);
  auto check_apply = [&](const StructuredOperator& op) {
    const Vector x = random_vector(rng, op.dim());
    const Vector got = op.apply(x);
    const Vector want = to_std(materialize(op) * to_eigen(x));
    CHECK(rel_diff(got, want) < 1e-13);
  };

  check_apply(random_tridiagonal(rng, 7, 1.7));
  check_apply(StructuredOperator::kronecker_left(random_tridiagonal(rng, 4), 3, 0.9));
  check_apply(StructuredOperator::kronecker_right(random_tridiagonal(rng, 4), 3, -1.2));
  {
    std::vector<double> blocks;
    for (int i = 0; i < 3 * 4; ++i) blocks.push_back(0.1 * (i + 1));
    check_apply(StructuredOperator::pointwise_blocks(2, 3, std::move(blocks), 1.3));
  }
  {
    std::vector<double> entries(25);
    for (double& v : entries) v = std::uniform_real_distribution<double>(-1, 1)(rng);
    check_apply(StructuredOperator::dense(entries, 5, 0.7));
  }
}

TEST_CASE("kronecker factors act on the expected index") {
  // Left form: blocks of size `block_count` move together; right form acts
  // within each contiguous slice.
  auto d = StructuredOperator::tridiagonal({0.0}, {2.0, 3.0}, {0.0});
  auto left = StructuredOperator::kronecker_left(d, 2);
  auto right = StructuredOperator::kronecker_right(d, 2);
  Vector x = {1.0, 10.0, 100.0, 1000.0};
  Vector xl = left.apply(x);
  CHECK(xl[0] == 2.0);
  CHECK(xl[1] == 20.0);
  CHECK(xl[2] == 300.0);
  CHECK(xl[3] == 3000.0);
  Vector xr = right.apply(x);
  CHECK(xr[0] == 2.0);
  CHECK(xr[1] == 30.0);
  CHECK(xr[2] == 200.0);
  CHECK(xr[3] == 3000.0);
}

TEST_CASE("zero and dense factories") {
  auto z = StructuredOperator::zero(3);
  Vector x = {1.0, 2.0, 3.0};
  Vector out = z.apply(x);
  CHECK(out == Vector{0.0, 0.0, 0.0});

  // Structural zeros are dropped by the dense factory.
  auto d = StructuredOperator::dense({1.0, 0.0, 0.0, 2.0}, 2);
  int entries = 0;
  d.for_each_entry([&](int, int, double) { ++entries; });
  CHECK(entries == 2);
}

TEST_CASE("rescaling and linearity") {
  std::mt19937 rng(11);
  auto op = random_tridiagonal(rng, 6, 0.5);
  const Vector x = random_vector(rng, 6);
  const Vector y = random_vector(rng, 6);

  Vector doubled = op.rescaled(2.0).apply(x);
  Vector once = op.apply(x);
  for (int i = 0; i < 6; ++i) CHECK(doubled[i] == doctest::Approx(2.0 * once[i]).epsilon(1e-14));

  Vector combo(6);
  for (int i = 0; i < 6; ++i) combo[i] = 2.0 * x[i] - 3.0 * y[i];
  Vector lhs = op.apply(combo);
  Vector ax = op.apply(x), ay = op.apply(y);
  Vector rhs(6);
  for (int i = 0; i < 6; ++i) rhs[i] = 2.0 * ax[i] - 3.0 * ay[i];
  CHECK(rel_diff(lhs, rhs) < 1e-13);
}

TEST_CASE("assembled sums add the part actions") {
  std::mt19937 rng(13);
  auto d = random_tridiagonal(rng, 3);
  auto p1 = shared(StructuredOperator::kronecker_left(d, 3, 2.0));
  auto p2 = shared(StructuredOperator::kronecker_right(d, 3, -0.5));
  auto sum = assemble_sum({p1, p2});

  const Vector x = random_vector(rng, 9);
  Vector want = p1->apply(x);
  Vector other = p2->apply(x);
  for (int i = 0; i < 9; ++i) want[i] += other[i];
  CHECK(rel_diff(sum.apply(x), want) < 1e-13);

  Eigen::MatrixXd dense_sum = materialize(*p1) + materialize(*p2);
  CHECK((materialize(sum) - dense_sum).norm() < 1e-13 * dense_sum.norm());
}

TEST_CASE("resolvent solves match a dense direct solve") {
  std::mt19937 rng(17);
  const double h = 0.05, gamma = 0.3;

  auto check_solve = [&](const StructuredOperator& op) {
    auto sp = shared(op);
    Resolvent res(sp, h, gamma);
    const Vector rhs = random_vector(rng, op.dim());
    const Vector x = res.solve(rhs);

    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(op.dim(), op.dim()) -
                        h * gamma * materialize(op);
    Eigen::VectorXd want = Eigen::PartialPivLU<Eigen::MatrixXd>(m).solve(to_eigen(rhs));
    CHECK(rel_diff(x, to_std(want)) < 1e-11);
  };

  check_solve(random_tridiagonal(rng, 8, 1.4));
  check_solve(StructuredOperator::kronecker_left(random_tridiagonal(rng, 4), 3, 0.8));
  check_solve(StructuredOperator::kronecker_right(random_tridiagonal(rng, 4), 3, 1.1));
  {
    std::vector<double> blocks;
    for (int i = 0; i < 5 * 4; ++i)
      blocks.push_back(std::uniform_real_distribution<double>(-1, 1)(rng));
    check_solve(StructuredOperator::pointwise_blocks(2, 5, std::move(blocks), 0.9));
  }
  {
    std::vector<double> entries(36);
    for (double& v : entries) v = std::uniform_real_distribution<double>(-1, 1)(rng);
    check_solve(StructuredOperator::dense(entries, 6, 0.6));
  }
}

TEST_CASE("resolvent degenerates to the identity") {
  std::mt19937 rng(19);
  auto op = shared(random_tridiagonal(rng, 5));
  const Vector rhs = random_vector(rng, 5);

  Resolvent zero_h(op, 0.0, 0.4);
  CHECK(zero_h.solve(rhs) == rhs);

  auto zop = shared(StructuredOperator::zero(5));
  Resolvent zero_op(zop, 0.1, 0.4);
  CHECK(zero_op.solve(rhs) == rhs);

  // Forward action and solve are mutual inverses.
  Resolvent r(op, 0.05, 0.4);
  CHECK(rel_diff(r.apply_resolvent(r.solve(rhs)), rhs) < 1e-13);
}

TEST_CASE("singular matrices raise a solver error") {
  // I - D with D the 2x2 exchange matrix is singular but weakly dominant.
  auto d = shared(StructuredOperator::tridiagonal({1.0}, {0.0, 0.0}, {1.0}));
  CHECK_THROWS_AS(Resolvent(d, 1.0, 1.0), SingularMatrixError);

  // I - I vanishes entirely on the sparse path.
  auto eye = shared(StructuredOperator::dense({1.0, 0.0, 0.0, 1.0}, 2));
  CHECK_THROWS_AS(Resolvent(eye, 1.0, 1.0), SingularMatrixError);

  // A resolvent row with off-diagonal mass exceeding the pivot is rejected
  // before elimination starts.
  auto wild = shared(StructuredOperator::tridiagonal({10.0}, {0.0, 0.0}, {10.0}));
  CHECK_THROWS_AS(Resolvent(wild, 1.0, 1.0), ContractViolation);
}

TEST_CASE("a failing product factor reports its index") {
  auto ok = shared(StructuredOperator::tridiagonal({0.1}, {-1.0, -1.0}, {0.1}));
  auto bad = shared(StructuredOperator::dense({1.0, 0.0, 0.0, 1.0}, 2, 2.0));
  try {
    AmfResolvent product({ok, bad}, 1.0, 0.5);
    FAIL("expected SingularMatrixError");
  } catch (const SingularMatrixError& e) {
    CHECK(e.factor_index() == 1);
  }
}

TEST_CASE("product solve with commuting diagonal factors") {
  const int n = 6;
  const double h = 0.1, gamma = 0.4;
  std::mt19937 rng(23);
  Vector d1 = random_vector(rng, n), d2 = random_vector(rng, n);

  auto diag_op = [n](const Vector& d) {
    std::vector<double> entries(n * n, 0.0);
    for (int i = 0; i < n; ++i) entries[i * n + i] = d[i];
    return shared(StructuredOperator::dense(entries, n));
  };

  AmfResolvent forward({diag_op(d1), diag_op(d2)}, h, gamma);
  AmfResolvent swapped({diag_op(d2), diag_op(d1)}, h, gamma);
  const Vector rhs = random_vector(rng, n);
  Vector x = forward.solve(rhs);
  Vector y = swapped.solve(rhs);
  for (int i = 0; i < n; ++i) {
    const double want = rhs[i] / ((1.0 - h * gamma * d1[i]) * (1.0 - h * gamma * d2[i]));
    CHECK(x[i] == doctest::Approx(want).epsilon(1e-13));
    CHECK(y[i] == doctest::Approx(want).epsilon(1e-13));
  }
}

TEST_CASE("product solve matches the dense factor product") {
  std::mt19937 rng(29);
  const int n = 6;
  const double h = 0.05, gamma = 0.35;
  auto l0 = shared(random_tridiagonal(rng, n));
  std::vector<double> entries(n * n);
  for (double& v : entries) v = std::uniform_real_distribution<double>(-1, 1)(rng);
  auto l1 = shared(StructuredOperator::dense(entries, n));

  AmfResolvent product({l0, l1}, h, gamma);
  const Vector rhs = random_vector(rng, n);
  const Vector x = product.solve(rhs);

  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd pm =
      (eye - h * gamma * materialize(*l0)) * (eye - h * gamma * materialize(*l1));
  Eigen::VectorXd want = Eigen::PartialPivLU<Eigen::MatrixXd>(pm).solve(to_eigen(rhs));
  CHECK(rel_diff(x, to_std(want)) < 1e-11);

  // The product map and the solve are mutual inverses.
  CHECK(rel_diff(product.apply_product(x), rhs) < 1e-11);
}

TEST_CASE("induced operator equals the cross-term expansion for two factors") {
  const int m = 4;
  const double scale = (m + 1.0) * (m + 1.0);
  auto stencil = StructuredOperator::tridiagonal({1.0, 1.0, 1.0}, {-2.0, -2.0, -2.0, -2.0},
                                                 {1.0, 1.0, 1.0});
  auto lx = shared(StructuredOperator::kronecker_left(stencil, m, scale));
  auto ly = shared(StructuredOperator::kronecker_right(stencil, m, scale));
  const double h = 0.01, gamma = 0.25;
  AmfResolvent product({lx, ly}, h, gamma);

  std::mt19937 rng(31);
  const Vector x = random_vector(rng, m * m);
  const Vector lt = product.apply_ltilde(x);

  Vector want = product.apply_full(x);
  Vector cross = lx->apply(ly->apply(x));
  for (int i = 0; i < m * m; ++i) want[i] -= h * gamma * cross[i];
  CHECK(rel_diff(lt, want) < 1e-11);
}

TEST_CASE("refinement contracts toward the exact solve") {
  std::mt19937 rng(37);
  const int n = 6;
  const double h = 0.2, gamma = 0.5;
  auto l0 = shared(random_tridiagonal(rng, n));
  auto l1 = shared(random_tridiagonal(rng, n));
  AmfResolvent product({l0, l1}, h, gamma);

  Eigen::MatrixXd full = materialize(*l0) + materialize(*l1);
  Eigen::MatrixXd shifted = Eigen::MatrixXd::Identity(n, n) - h * gamma * full;
  const Vector rhs = random_vector(rng, n);
  const Vector exact = to_std(Eigen::PartialPivLU<Eigen::MatrixXd>(shifted).solve(to_eigen(rhs)));

  Vector y0 = product.solve(rhs);
  Vector y1 = product.refine(y0, rhs);
  Vector y2 = product.refine(y1, rhs);
  const double e0 = rel_diff(y0, exact);
  const double e1 = rel_diff(y1, exact);
  const double e2 = rel_diff(y2, exact);
  CHECK(e1 < 0.5 * e0);
  CHECK(e2 < 0.5 * e1);

  // The exact solution is a fixed point of the sweep.
  Vector fix = product.refine(exact, rhs);
  CHECK(rel_diff(fix, exact) < 1e-12);
}

TEST_CASE("product defect shrinks quadratically with the step size") {
  std::mt19937 rng(41);
  const int n = 8;
  const double gamma = 0.435;
  auto l0 = shared(random_tridiagonal(rng, n));
  auto l1 = shared(random_tridiagonal(rng, n));
  const Vector rhs = random_vector(rng, n);

  auto defect = [&](double h) {
    AmfResolvent product({l0, l1}, h, gamma);
    Eigen::MatrixXd full = materialize(*l0) + materialize(*l1);
    Eigen::MatrixXd shifted = Eigen::MatrixXd::Identity(n, n) - h * gamma * full;
    Vector exact = to_std(Eigen::PartialPivLU<Eigen::MatrixXd>(shifted).solve(to_eigen(rhs)));
    Vector approx = product.solve(rhs);
    double num = 0.0;
    for (int i = 0; i < n; ++i) num += (approx[i] - exact[i]) * (approx[i] - exact[i]);
    return std::sqrt(num);
  };

  const double ratio = defect(0.1) / defect(0.05);
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.0);
}

TEST_CASE("statistics count factorizations, solves, and applies") {
  std::mt19937 rng(43);

  SUBCASE("per-kind factorization counters") {
    SolveStats stats;
    auto tri = shared(random_tridiagonal(rng, 5));
    Resolvent r1(tri, 0.1, 0.4, &stats);
    CHECK(stats.tridiagonal_factorizations == 1);

    auto kron = shared(StructuredOperator::kronecker_left(random_tridiagonal(rng, 3), 4));
    Resolvent r2(kron, 0.1, 0.4, &stats);
    CHECK(stats.tridiagonal_factorizations == 2);

    std::vector<double> blocks(3 * 4, 0.25);
    auto pw = shared(StructuredOperator::pointwise_blocks(2, 3, std::move(blocks)));
    Resolvent r3(pw, 0.1, 0.4, &stats);
    CHECK(stats.pointwise_block_factorizations == 3);

    auto sp = shared(StructuredOperator::dense({-1.0, 0.2, 0.2, -1.0}, 2));
    Resolvent r4(sp, 0.1, 0.4, &stats);
    CHECK(stats.sparse_factorizations == 1);

    const Vector rhs = random_vector(rng, 5);
    r1.solve(rhs);
    r1.solve(rhs);
    CHECK(stats.resolvent_solves == 2);
  }

  SUBCASE("product counters separate stage solves from exact applies") {
    SolveStats stats;
    auto l0 = shared(random_tridiagonal(rng, 4));
    auto l1 = shared(random_tridiagonal(rng, 4));
    AmfResolvent product({l0, l1}, 0.1, 0.4, &stats);
    CHECK(stats.tridiagonal_factorizations == 2);

    const Vector rhs = random_vector(rng, 4);
    product.solve(rhs);
    CHECK(stats.amf_solves == 1);
    CHECK(stats.resolvent_solves == 0);

    product.apply_full(rhs);
    CHECK(stats.exact_applies == 1);

    product.refine(rhs, rhs);
    CHECK(stats.amf_solves == 2);
    CHECK(stats.exact_applies == 2);
  }

  SUBCASE("rebuilding reuses unchanged factors") {
    SolveStats stats;
    auto l0 = shared(random_tridiagonal(rng, 4));
    auto l1 = shared(random_tridiagonal(rng, 4));
    AmfResolvent first({l0, l1}, 0.1, 0.4, &stats);
    CHECK(stats.tridiagonal_factorizations == 2);

    AmfResolvent same(first, {l0, l1});
    CHECK(stats.tridiagonal_factorizations == 2);

    auto l2 = shared(random_tridiagonal(rng, 4));
    AmfResolvent changed(first, {l0, l2});
    CHECK(stats.tridiagonal_factorizations == 3);
  }
}

TEST_CASE("dimension mismatches are rejected") {
  std::mt19937 rng(47);
  auto op = random_tridiagonal(rng, 4);
  Vector small = {1.0, 2.0};
  CHECK_THROWS_AS(op.apply(small), ContractViolation);

  auto sp = shared(std::move(op));
  Resolvent r(sp, 0.1, 0.3);
  CHECK_THROWS_AS(r.solve(small), ContractViolation);

  auto other = shared(random_tridiagonal(rng, 5));
  CHECK_THROWS_AS(AmfResolvent({sp, other}, 0.1, 0.3), ContractViolation);
  CHECK_THROWS_AS(AmfResolvent({}, 0.1, 0.3), ContractViolation);
}
