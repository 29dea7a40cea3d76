#include "lirkamf/integrator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <utility>

namespace lirkamf {

namespace {

double norm2(const Vector& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

bool all_finite(const Vector& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

// Deterministic probe generator for the split-consistency check.
class ProbeRng {
 public:
  double next_unit() {
    state_ = state_ * 6364136223846793005ull + 1442695040888963407ull;
    const double u = static_cast<double>(state_ >> 11) * 0x1.0p-53;
    return 2.0 * u - 1.0;
  }

 private:
  std::uint64_t state_ = 0x2545f4914f6cdd1dull;
};

void check_strategy(const SolverStrategy& s) {
  if (s.refinements < 0 || s.refinements > 8) {
    throw ContractViolation("refinement count must lie in [0, 8]");
  }
}

// One-step engine shared by the step functions and the time loop. Holds the
// factorizations so a fixed-step run reuses them; time-dependent linear
// parts are refreshed at the start of each step, refactoring only the parts
// whose operators actually changed.
class Stepper {
 public:
  Stepper(const SemiLinearProblem& p, const ImexTableau& t, const SolverStrategy& strategy,
          double h, SolveStats* stats)
      : p_(p), t_(t), strategy_(strategy), h_(h), stats_(stats) {
    check_strategy(strategy_);
    if (p_.dim <= 0) throw ContractViolation("problem dimension must be positive");
    if (!(h_ > 0.0)) throw ContractViolation("step size must be positive");
    if (!p_.nonlinear) throw ContractViolation("problem nonlinear term must be callable");
    if (p_.linear_parts.empty()) {
      throw ContractViolation("problem needs at least one linear part");
    }
    if (p_.linear_parts_time_dependent && !p_.relinearize) {
      throw ContractViolation("time-dependent linear parts require a relinearize callback");
    }
    if (t_.s < 1 || static_cast<int>(t_.b.size()) != t_.s ||
        static_cast<int>(t_.bhat.size()) != t_.s || static_cast<int>(t_.c.size()) != t_.s ||
        static_cast<int>(t_.a.size()) != t_.s || static_cast<int>(t_.ahat.size()) != t_.s) {
      throw ContractViolation("tableau arrays do not match the stage count");
    }
    need_g0_ = std::abs(t_.bhat[0]) > 0.0;
    for (int i = 0; i < t_.s; ++i) {
      if (std::abs(t_.ahat[i][0]) > 0.0) need_g0_ = true;
    }
    adopt(p_.linear_parts, p_.nonlinear);
    check_split_consistency();
  }

  Vector step(const Vector& y, double time) {
    if (static_cast<int>(y.size()) != p_.dim) {
      throw ContractViolation("state length does not match problem dimension");
    }
    if (p_.linear_parts_time_dependent) {
      Relinearization r = p_.relinearize(y, time);
      adopt(r.linear_parts, r.nonlinear);
    }
    return strategy_.kind == SolverStrategy::Kind::amf_calvo ? step_perturbed(y, time)
                                                             : step_plain(y, time);
  }

 private:
  void adopt(const std::vector<std::shared_ptr<const StructuredOperator>>& parts,
             const std::function<void(const Vector&, double, Vector&)>& nonlinear) {
    if (parts.empty()) throw ContractViolation("linear parts must be nonempty");
    for (const auto& part : parts) {
      if (!part) throw ContractViolation("linear part must not be null");
      if (part->dim() != p_.dim) {
        throw ContractViolation("linear part dimension does not match the problem");
      }
    }
    if (!nonlinear) throw ContractViolation("nonlinear term must be callable");
    parts_ = parts;
    nonlinear_ = nonlinear;
    if (strategy_.kind == SolverStrategy::Kind::exact) {
      full_ = std::make_shared<const StructuredOperator>(assemble_sum(parts_));
      exact_res_ = std::make_unique<Resolvent>(full_, h_, t_.gamma, stats_);
    } else if (!amf_) {
      amf_ = std::make_unique<AmfResolvent>(parts_, h_, t_.gamma, stats_);
    } else {
      amf_ = std::make_unique<AmfResolvent>(*amf_, parts_);
    }
  }

  const StructuredOperator& full_operator() const {
    return strategy_.kind == SolverStrategy::Kind::exact ? *full_ : amf_->full_operator();
  }

  // The assembled operator must reproduce the sum of the parts on probe
  // vectors; the tolerance scales with the operator magnitude so pure
  // roundoff passes while a genuinely inconsistent splitting fails.
  void check_split_consistency() {
    const StructuredOperator& full = full_operator();
    double norm_inf = 0.0;
    {
      Vector row_sums(p_.dim, 0.0);
      full.for_each_entry([&](int r, int, double v) { row_sums[r] += std::abs(v); });
      for (double r : row_sums) norm_inf = std::max(norm_inf, r);
    }
    ProbeRng rng;
    Vector x(p_.dim), sum(p_.dim), part_apply(p_.dim), full_apply(p_.dim);
    for (int probe = 0; probe < 10; ++probe) {
      for (double& xi : x) xi = rng.next_unit();
      std::fill(sum.begin(), sum.end(), 0.0);
      for (const auto& part : parts_) {
        part->apply_to(x, part_apply);
        for (int i = 0; i < p_.dim; ++i) sum[i] += part_apply[i];
      }
      full.apply_to(x, full_apply);
      double diff = 0.0;
      for (int i = 0; i < p_.dim; ++i) {
        const double d = sum[i] - full_apply[i];
        diff += d * d;
      }
      if (std::sqrt(diff) > 1e-12 * norm2(x) * std::max(1.0, norm_inf)) {
        throw ContractViolation("linear parts do not sum to the assembled operator");
      }
    }
  }

  Vector apply_linear(const Vector& x) {
    if (strategy_.kind == SolverStrategy::Kind::exact) {
      if (stats_) stats_->exact_applies += 1;
      return full_->apply(x);
    }
    return amf_->apply_full(x);
  }

  Vector eval_f(const Vector& y, double time) {
    Vector out(p_.dim);
    nonlinear_(y, time, out);
    if (static_cast<int>(out.size()) != p_.dim) {
      throw ContractViolation("nonlinear term returned the wrong length");
    }
    return out;
  }

  void require_finite(const Vector& v) const {
    if (!all_finite(v)) throw DivergenceError("non-finite stage value");
  }

  Vector stage_rhs(const Vector& y, int i, const std::vector<Vector>& f,
                   const std::vector<Vector>& g) const {
    Vector ell = y;
    for (int j = 0; j < i; ++j) {
      const double ca = h_ * t_.a[i][j];
      if (ca != 0.0) {
        for (int n = 0; n < p_.dim; ++n) ell[n] += ca * f[j][n];
      }
      const double ch = h_ * t_.ahat[i][j];
      if (ch != 0.0) {
        for (int n = 0; n < p_.dim; ++n) ell[n] += ch * g[j][n];
      }
    }
    return ell;
  }

  Vector combine_update(const Vector& y, const std::vector<Vector>& f,
                        const std::vector<Vector>& g) const {
    Vector out = y;
    for (int j = 0; j < t_.s; ++j) {
      const double cb = h_ * t_.b[j];
      if (cb != 0.0) {
        for (int n = 0; n < p_.dim; ++n) out[n] += cb * f[j][n];
      }
      const double ch = h_ * t_.bhat[j];
      if (ch != 0.0) {
        for (int n = 0; n < p_.dim; ++n) out[n] += ch * g[j][n];
      }
    }
    return out;
  }

  // Exact and amf strategies: stage right-hand sides and the update use the
  // exact operator; only the implicit stage solve differs.
  Vector step_plain(const Vector& y, double time) {
    const int s = t_.s;
    std::vector<Vector> f(s), g(s);
    f[0] = eval_f(y, time + t_.c[0] * h_);
    if (need_g0_) g[0] = apply_linear(y);
    Vector yi;
    for (int i = 1; i < s; ++i) {
      Vector ell = stage_rhs(y, i, f, g);
      if (strategy_.kind == SolverStrategy::Kind::exact) {
        yi = exact_res_->solve(ell);
      } else {
        yi = amf_->solve(ell);
        for (int k = 0; k < strategy_.refinements; ++k) yi = amf_->refine(yi, ell);
      }
      require_finite(yi);
      g[i] = apply_linear(yi);
      f[i] = eval_f(yi, time + t_.c[i] * h_);
    }
    return combine_update(y, f, g);
  }

  // Perturbed-operator strategy: the scheme runs with the product-induced
  // operator in the stage right-hand sides and the update, then one extra
  // product solve corrects the step toward the unperturbed operator.
  Vector step_perturbed(const Vector& y, double time) {
    const int s = t_.s;
    std::vector<Vector> f(s), g(s);
    f[0] = eval_f(y, time + t_.c[0] * h_);
    if (need_g0_) g[0] = amf_->apply_ltilde(y);
    for (int i = 1; i < s; ++i) {
      Vector ell = stage_rhs(y, i, f, g);
      Vector yi = amf_->solve(ell);
      require_finite(yi);
      g[i] = amf_->apply_ltilde(yi);
      f[i] = eval_f(yi, time + t_.c[i] * h_);
    }
    Vector ytilde = combine_update(y, f, g);
    require_finite(ytilde);
    Vector exact_l = apply_linear(ytilde);
    Vector tilde_l = amf_->apply_ltilde(ytilde);
    Vector diff(p_.dim);
    for (int n = 0; n < p_.dim; ++n) diff[n] = exact_l[n] - tilde_l[n];
    Vector corr = amf_->solve(diff);
    Vector out(p_.dim);
    for (int n = 0; n < p_.dim; ++n) out[n] = ytilde[n] + h_ * corr[n];
    return out;
  }

  const SemiLinearProblem& p_;
  const ImexTableau& t_;
  SolverStrategy strategy_;
  double h_;
  SolveStats* stats_;
  bool need_g0_ = false;
  std::vector<std::shared_ptr<const StructuredOperator>> parts_;
  std::function<void(const Vector&, double, Vector&)> nonlinear_;
  std::shared_ptr<const StructuredOperator> full_;
  std::unique_ptr<Resolvent> exact_res_;
  std::unique_ptr<AmfResolvent> amf_;
};

}  // namespace

SolverStrategy SolverStrategy::exact() { return SolverStrategy{Kind::exact, 0}; }

SolverStrategy SolverStrategy::amf(int refinements) {
  SolverStrategy s{Kind::amf, refinements};
  check_strategy(s);
  return s;
}

SolverStrategy SolverStrategy::amf_calvo() { return SolverStrategy{Kind::amf_calvo, 0}; }

Vector step_exact(const SemiLinearProblem& p, const ImexTableau& t, const Vector& y,
                  double time, double h) {
  Stepper stepper(p, t, SolverStrategy::exact(), h, nullptr);
  return stepper.step(y, time);
}

Vector step_amf(const SemiLinearProblem& p, const ImexTableau& t, const Vector& y,
                double time, double h, int refinements) {
  Stepper stepper(p, t, SolverStrategy::amf(refinements), h, nullptr);
  return stepper.step(y, time);
}

Vector step_amf_calvo(const SemiLinearProblem& p, const ImexTableau& t, const Vector& y,
                      double time, double h) {
  Stepper stepper(p, t, SolverStrategy::amf_calvo(), h, nullptr);
  return stepper.step(y, time);
}

IntegrationResult integrate(const SemiLinearProblem& p, const ImexTableau& t,
                            const SolverStrategy& strategy, long steps) {
  if (steps < 1) throw ContractViolation("integrate needs at least one step");
  IntegrationResult result;
  result.report.steps = steps;
  const double h = (p.t_end - p.t_begin) / static_cast<double>(steps);
  result.report.h = h;
  if (static_cast<int>(p.initial.size()) != p.dim) {
    throw ContractViolation("initial state length does not match problem dimension");
  }
  Stepper stepper(p, t, strategy, h, &result.stats);

  Vector y = p.initial;
  const double y0_norm = norm2(y);
  const double limit = 1e8 * (y0_norm > 0.0 ? y0_norm : 1.0);
  bool diverged = false;
  const auto clock_begin = std::chrono::steady_clock::now();
  for (long n = 0; n < steps; ++n) {
    const double tn = p.t_begin + static_cast<double>(n) * h;
    try {
      y = stepper.step(y, tn);
    } catch (const DivergenceError&) {
      diverged = true;
      break;
    } catch (const SingularMatrixError&) {
      diverged = true;
      break;
    }
    if (!all_finite(y) || norm2(y) > limit) {
      diverged = true;
      break;
    }
  }
  const auto clock_end = std::chrono::steady_clock::now();
  result.report.cpu_seconds =
      std::chrono::duration<double>(clock_end - clock_begin).count();
  result.report.diverged = diverged;
  result.state = std::move(y);
  if (!diverged && p.reference) {
    result.report.error = relative_error(result.state, p.reference(p.t_end));
  }
  return result;
}

double relative_error(const Vector& u, const Vector& u_ref) {
  if (u.size() != u_ref.size()) {
    throw ContractViolation("relative_error needs vectors of equal length");
  }
  const double ref_norm = norm2(u_ref);
  if (!(ref_norm > 0.0)) {
    throw ContractViolation("relative_error reference norm must be positive");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - u_ref[i];
    acc += d * d;
  }
  return std::sqrt(acc) / ref_norm;
}

}  // namespace lirkamf
