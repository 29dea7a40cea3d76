#include "lirkamf/tableaus.hpp"

#include <cmath>

namespace lirkamf {

namespace {

std::vector<Vector> square(int s) { return std::vector<Vector>(s, Vector(s, 0.0)); }

}  // namespace

ImexTableau lirk3() {
  // Four stages, classical order 3 for both the implicit and explicit parts
  // and their couplings. gamma is the real root of x^3 - 3x^2 + 3x/2 - 1/6
  // that makes the implicit part L-stable; a32 is a free parameter and the
  // remaining entries follow from the order conditions.
  const double g = 0.435866521508459;
  const double a32 = 0.35;
  const double c3 = (1.0 + g) / 2.0;
  // b2, b3 solve the quadrature conditions b.c = 1/2 and b.c^2 = 1/3 with
  // b = (0, b2, b3, g) and c = (0, g, (1+g)/2, 1).
  const double b2 = -1.5 * g * g + 4.0 * g - 0.25;
  const double b3 = 1.5 * g * g - 5.0 * g + 1.25;
  // a43 sets the coupling condition b.A.c = 1/6 on the explicit matrix.
  const double a43 = (1.0 / 6.0 - g * g - g * a32 * b3) / (g * (1.0 - g) / 2.0);

  ImexTableau t;
  t.s = 4;
  t.gamma = g;
  t.a = square(4);
  t.ahat = square(4);
  t.a[1][0] = g;
  t.a[2][0] = c3 - a32;
  t.a[2][1] = a32;
  t.a[3][1] = 1.0 - a43;
  t.a[3][2] = a43;
  t.ahat[1][1] = g;
  t.ahat[2][1] = (1.0 - g) / 2.0;
  t.ahat[2][2] = g;
  t.ahat[3][1] = b2;
  t.ahat[3][2] = b3;
  t.ahat[3][3] = g;
  t.b = {0.0, b2, b3, g};
  t.bhat = t.b;
  t.c = {0.0, g, c3, 1.0};
  t.chat = t.c;
  return t;
}

ImexTableau lirk4() {
  // Six stages, classical order 4 for both parts and all couplings; every
  // coefficient is rational.
  ImexTableau t;
  t.s = 6;
  t.gamma = 0.25;
  t.a = square(6);
  t.ahat = square(6);

  t.a[1][0] = 1.0 / 4.0;
  t.a[2][0] = -1.0 / 4.0;
  t.a[2][1] = 1.0;
  t.a[3][0] = -13.0 / 100.0;
  t.a[3][1] = 43.0 / 75.0;
  t.a[3][2] = 8.0 / 75.0;
  t.a[4][0] = -6.0 / 85.0;
  t.a[4][1] = 42.0 / 85.0;
  t.a[4][2] = 179.0 / 1360.0;
  t.a[4][3] = -15.0 / 272.0;
  t.a[5][0] = 0.0;
  t.a[5][1] = 79.0 / 24.0;
  t.a[5][2] = -5.0 / 8.0;
  t.a[5][3] = 25.0 / 2.0;
  t.a[5][4] = -85.0 / 6.0;

  t.ahat[1][1] = 1.0 / 4.0;
  t.ahat[2][1] = 1.0 / 2.0;
  t.ahat[2][2] = 1.0 / 4.0;
  t.ahat[3][1] = 17.0 / 50.0;
  t.ahat[3][2] = -1.0 / 25.0;
  t.ahat[3][3] = 1.0 / 4.0;
  t.ahat[4][1] = 371.0 / 1360.0;
  t.ahat[4][2] = -137.0 / 2720.0;
  t.ahat[4][3] = 15.0 / 544.0;
  t.ahat[4][4] = 1.0 / 4.0;
  t.ahat[5][1] = 25.0 / 24.0;
  t.ahat[5][2] = -49.0 / 48.0;
  t.ahat[5][3] = 125.0 / 16.0;
  t.ahat[5][4] = -85.0 / 12.0;
  t.ahat[5][5] = 1.0 / 4.0;

  t.b = {0.0, 25.0 / 24.0, -49.0 / 48.0, 125.0 / 16.0, -85.0 / 12.0, 1.0 / 4.0};
  t.bhat = t.b;
  t.c = {0.0, 1.0 / 4.0, 3.0 / 4.0, 11.0 / 20.0, 1.0 / 2.0, 1.0};
  t.chat = t.c;
  return t;
}

bool TableauValidation::all_passed() const {
  for (const auto& check : checks) {
    if (!check.passed) return false;
  }
  return true;
}

const TableauCheck* TableauValidation::find(const std::string& name) const {
  for (const auto& check : checks) {
    if (check.name == name) return &check;
  }
  return nullptr;
}

TableauValidation validate(const ImexTableau& t) {
  const int s = t.s;
  if (s <= 0 || static_cast<int>(t.a.size()) != s || static_cast<int>(t.ahat.size()) != s ||
      static_cast<int>(t.b.size()) != s || static_cast<int>(t.bhat.size()) != s ||
      static_cast<int>(t.c.size()) != s || static_cast<int>(t.chat.size()) != s) {
    throw ContractViolation("tableau arrays do not match the stage count");
  }
  for (int i = 0; i < s; ++i) {
    if (static_cast<int>(t.a[i].size()) != s || static_cast<int>(t.ahat[i].size()) != s) {
      throw ContractViolation("tableau rows do not match the stage count");
    }
  }
  constexpr double tol = 1e-12;
  TableauValidation v;
  auto add = [&](std::string name, double residual) {
    v.checks.push_back({std::move(name), residual <= tol, residual});
  };

  double r = 0.0;
  for (int i = 0; i < s; ++i) {
    for (int j = i; j < s; ++j) r = std::max(r, std::abs(t.a[i][j]));
  }
  add("explicit matrix strictly lower triangular", r);

  r = 0.0;
  for (int i = 0; i < s; ++i) {
    for (int j = i + 1; j < s; ++j) r = std::max(r, std::abs(t.ahat[i][j]));
  }
  add("implicit matrix lower triangular", r);

  r = std::abs(t.ahat[0][0]);
  for (int i = 1; i < s; ++i) r = std::max(r, std::abs(t.ahat[i][i] - t.gamma));
  add("implicit diagonal equals (0, gamma, ..., gamma)", r);

  r = 0.0;
  for (int i = 0; i < s; ++i) r = std::max(r, std::abs(t.b[i] - t.bhat[i]));
  add("weights b = bhat", r);

  r = 0.0;
  for (int i = 0; i < s; ++i) r = std::max(r, std::abs(t.bhat[i] - t.ahat[s - 1][i]));
  add("stiffly accurate: bhat equals last implicit row", r);

  r = 0.0;
  for (int i = 0; i < s; ++i) {
    double sum = 0.0;
    for (int j = 0; j < s; ++j) sum += t.a[i][j];
    r = std::max(r, std::abs(sum - t.c[i]));
  }
  add("explicit row sums equal c", r);

  r = 0.0;
  for (int i = 0; i < s; ++i) {
    double sum = 0.0;
    for (int j = 0; j < s; ++j) sum += t.ahat[i][j];
    r = std::max(r, std::abs(sum - t.chat[i]));
  }
  add("implicit row sums equal chat", r);

  double bsum = 0.0;
  for (int i = 0; i < s; ++i) bsum += t.b[i];
  add("weights sum to 1", std::abs(bsum - 1.0));

  return v;
}

}  // namespace lirkamf
