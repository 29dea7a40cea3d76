#include "lirkamf/operators.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <tuple>
#include <utility>

namespace lirkamf {

namespace {

void check_dim(int dim, const Vector& x, const char* what) {
  if (static_cast<int>(x.size()) != dim) {
    throw ContractViolation(std::string(what) + ": vector length " +
                            std::to_string(x.size()) + " does not match operator dimension " +
                            std::to_string(dim));
  }
}

}  // namespace

StructuredOperator::StructuredOperator(int dim, Structure structure, double scale)
    : dim_(dim), scale_(scale), structure_(std::move(structure)) {
  if (dim_ <= 0) throw ContractViolation("operator dimension must be positive");
  if (const auto* t = std::get_if<Tridiagonal>(&structure_)) {
    if (static_cast<int>(t->diag.size()) != dim_ ||
        static_cast<int>(t->sub.size()) != dim_ - 1 ||
        static_cast<int>(t->super.size()) != dim_ - 1) {
      throw ContractViolation("tridiagonal bands do not match dimension");
    }
  } else if (const auto* k = std::get_if<KroneckerLeft>(&structure_)) {
    if (!k->factor) throw ContractViolation("kronecker factor must not be null");
    if (k->block_count <= 0) throw ContractViolation("kronecker block count must be positive");
    if (dim_ != k->factor->dim() * k->block_count) {
      throw ContractViolation("kronecker dimension must equal factor dim times block count");
    }
  } else if (const auto* k2 = std::get_if<KroneckerRight>(&structure_)) {
    if (!k2->factor) throw ContractViolation("kronecker factor must not be null");
    if (k2->block_count <= 0) throw ContractViolation("kronecker block count must be positive");
    if (dim_ != k2->factor->dim() * k2->block_count) {
      throw ContractViolation("kronecker dimension must equal factor dim times block count");
    }
  } else if (const auto* p = std::get_if<PointwiseBlocks>(&structure_)) {
    if (p->block_dim <= 0 || p->point_count <= 0) {
      throw ContractViolation("pointwise block sizes must be positive");
    }
    if (dim_ != p->block_dim * p->point_count) {
      throw ContractViolation("pointwise dimension must equal block_dim times point_count");
    }
    if (p->blocks.size() !=
        static_cast<std::size_t>(p->point_count) * p->block_dim * p->block_dim) {
      throw ContractViolation("pointwise block storage has the wrong length");
    }
  } else if (const auto* g = std::get_if<GeneralSparse>(&structure_)) {
    if (static_cast<int>(g->row_ptr.size()) != dim_ + 1 || g->row_ptr.front() != 0 ||
        g->row_ptr.back() != static_cast<int>(g->col.size()) ||
        g->col.size() != g->val.size()) {
      throw ContractViolation("sparse row structure is inconsistent");
    }
    for (int i = 0; i < dim_; ++i) {
      if (g->row_ptr[i] > g->row_ptr[i + 1]) {
        throw ContractViolation("sparse row pointers must be nondecreasing");
      }
    }
    for (int c : g->col) {
      if (c < 0 || c >= dim_) throw ContractViolation("sparse column index out of range");
    }
  }
}

StructuredOperator StructuredOperator::tridiagonal(Vector sub, Vector diag, Vector super,
                                                   double scale) {
  const int n = static_cast<int>(diag.size());
  return StructuredOperator(
      n, Tridiagonal{std::move(sub), std::move(diag), std::move(super)}, scale);
}

StructuredOperator StructuredOperator::kronecker_left(StructuredOperator factor,
                                                      int block_count, double scale) {
  const int n = factor.dim() * block_count;
  return StructuredOperator(
      n,
      KroneckerLeft{std::make_shared<const StructuredOperator>(std::move(factor)),
                    block_count},
      scale);
}

StructuredOperator StructuredOperator::kronecker_right(StructuredOperator factor,
                                                       int block_count, double scale) {
  const int n = factor.dim() * block_count;
  return StructuredOperator(
      n,
      KroneckerRight{std::make_shared<const StructuredOperator>(std::move(factor)),
                     block_count},
      scale);
}

StructuredOperator StructuredOperator::pointwise_blocks(int block_dim, int point_count,
                                                        std::vector<double> blocks,
                                                        double scale) {
  const int n = block_dim * point_count;
  return StructuredOperator(
      n, PointwiseBlocks{block_dim, point_count, std::move(blocks)}, scale);
}

StructuredOperator StructuredOperator::general_sparse(int dim, std::vector<int> row_ptr,
                                                      std::vector<int> col, Vector val,
                                                      double scale) {
  return StructuredOperator(
      dim, GeneralSparse{std::move(row_ptr), std::move(col), std::move(val)}, scale);
}

StructuredOperator StructuredOperator::dense(const std::vector<double>& entries, int dim,
                                             double scale) {
  if (entries.size() != static_cast<std::size_t>(dim) * dim) {
    throw ContractViolation("dense entry count does not match dimension");
  }
  std::vector<int> row_ptr(dim + 1, 0);
  std::vector<int> col;
  Vector val;
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      const double v = entries[static_cast<std::size_t>(i) * dim + j];
      if (v != 0.0) {
        col.push_back(j);
        val.push_back(v);
      }
    }
    row_ptr[i + 1] = static_cast<int>(col.size());
  }
  return general_sparse(dim, std::move(row_ptr), std::move(col), std::move(val), scale);
}

StructuredOperator StructuredOperator::zero(int dim) {
  return general_sparse(dim, std::vector<int>(dim + 1, 0), {}, {});
}

StructuredOperator StructuredOperator::rescaled(double factor) const {
  StructuredOperator out = *this;
  out.scale_ *= factor;
  return out;
}

void StructuredOperator::apply_to(const double* x, double* out) const {
  const double s = scale_;
  if (const auto* t = std::get_if<Tridiagonal>(&structure_)) {
    const int n = dim_;
    for (int i = 0; i < n; ++i) {
      double acc = t->diag[i] * x[i];
      if (i > 0) acc += t->sub[i - 1] * x[i - 1];
      if (i + 1 < n) acc += t->super[i] * x[i + 1];
      out[i] = s * acc;
    }
  } else if (const auto* k = std::get_if<KroneckerLeft>(&structure_)) {
    const int d = k->factor->dim();
    const int b = k->block_count;
    Vector tx(d), ty(d);
    for (int j = 0; j < b; ++j) {
      for (int r = 0; r < d; ++r) tx[r] = x[static_cast<std::size_t>(r) * b + j];
      k->factor->apply_to(tx.data(), ty.data());
      for (int r = 0; r < d; ++r) out[static_cast<std::size_t>(r) * b + j] = s * ty[r];
    }
  } else if (const auto* k2 = std::get_if<KroneckerRight>(&structure_)) {
    const int d = k2->factor->dim();
    const int b = k2->block_count;
    for (int q = 0; q < b; ++q) {
      k2->factor->apply_to(x + static_cast<std::size_t>(q) * d,
                           out + static_cast<std::size_t>(q) * d);
    }
    if (s != 1.0) {
      for (int i = 0; i < dim_; ++i) out[i] *= s;
    }
  } else if (const auto* p = std::get_if<PointwiseBlocks>(&structure_)) {
    const int kk = p->block_dim;
    const int q = p->point_count;
    for (int pt = 0; pt < q; ++pt) {
      const double* block = p->blocks.data() + static_cast<std::size_t>(pt) * kk * kk;
      for (int r = 0; r < kk; ++r) {
        double acc = 0.0;
        for (int c = 0; c < kk; ++c) acc += block[r * kk + c] * x[static_cast<std::size_t>(c) * q + pt];
        out[static_cast<std::size_t>(r) * q + pt] = s * acc;
      }
    }
  } else {
    const auto& g = std::get<GeneralSparse>(structure_);
    for (int i = 0; i < dim_; ++i) {
      double acc = 0.0;
      for (int idx = g.row_ptr[i]; idx < g.row_ptr[i + 1]; ++idx) {
        acc += g.val[idx] * x[g.col[idx]];
      }
      out[i] = s * acc;
    }
  }
}

void StructuredOperator::apply_to(const Vector& x, Vector& out) const {
  check_dim(dim_, x, "apply");
  out.resize(dim_);
  apply_to(x.data(), out.data());
}

Vector StructuredOperator::apply(const Vector& x) const {
  Vector out;
  apply_to(x, out);
  return out;
}

void StructuredOperator::for_each_entry(
    const std::function<void(int, int, double)>& visit) const {
  const double s = scale_;
  if (const auto* t = std::get_if<Tridiagonal>(&structure_)) {
    for (int i = 0; i < dim_; ++i) {
      if (i > 0) visit(i, i - 1, s * t->sub[i - 1]);
      visit(i, i, s * t->diag[i]);
      if (i + 1 < dim_) visit(i, i + 1, s * t->super[i]);
    }
  } else if (const auto* k = std::get_if<KroneckerLeft>(&structure_)) {
    const int b = k->block_count;
    k->factor->for_each_entry([&](int r, int rc, double v) {
      for (int j = 0; j < b; ++j) visit(r * b + j, rc * b + j, s * v);
    });
  } else if (const auto* k2 = std::get_if<KroneckerRight>(&structure_)) {
    const int d = k2->factor->dim();
    for (int q = 0; q < k2->block_count; ++q) {
      k2->factor->for_each_entry(
          [&](int r, int rc, double v) { visit(q * d + r, q * d + rc, s * v); });
    }
  } else if (const auto* p = std::get_if<PointwiseBlocks>(&structure_)) {
    const int kk = p->block_dim;
    const int q = p->point_count;
    for (int pt = 0; pt < q; ++pt) {
      const double* block = p->blocks.data() + static_cast<std::size_t>(pt) * kk * kk;
      for (int r = 0; r < kk; ++r) {
        for (int c = 0; c < kk; ++c) visit(r * q + pt, c * q + pt, s * block[r * kk + c]);
      }
    }
  } else {
    const auto& g = std::get<GeneralSparse>(structure_);
    for (int i = 0; i < dim_; ++i) {
      for (int idx = g.row_ptr[i]; idx < g.row_ptr[i + 1]; ++idx) {
        visit(i, g.col[idx], s * g.val[idx]);
      }
    }
  }
}

Vector apply(const StructuredOperator& op, const Vector& x) { return op.apply(x); }

StructuredOperator assemble_sum(
    const std::vector<std::shared_ptr<const StructuredOperator>>& parts) {
  if (parts.empty()) throw ContractViolation("assemble_sum requires at least one part");
  const int n = parts.front()->dim();
  std::vector<std::tuple<int, int, double>> triplets;
  for (const auto& part : parts) {
    if (!part) throw ContractViolation("assemble_sum part must not be null");
    if (part->dim() != n) throw ContractViolation("assemble_sum parts must share a dimension");
    part->for_each_entry(
        [&](int r, int c, double v) { triplets.emplace_back(r, c, v); });
  }
  std::sort(triplets.begin(), triplets.end(),
            [](const auto& a, const auto& b) {
              return std::tie(std::get<0>(a), std::get<1>(a)) <
                     std::tie(std::get<0>(b), std::get<1>(b));
            });
  std::vector<int> row_ptr(n + 1, 0);
  std::vector<int> col;
  Vector val;
  col.reserve(triplets.size());
  val.reserve(triplets.size());
  for (std::size_t i = 0; i < triplets.size();) {
    const int r = std::get<0>(triplets[i]);
    const int c = std::get<1>(triplets[i]);
    double v = 0.0;
    while (i < triplets.size() && std::get<0>(triplets[i]) == r &&
           std::get<1>(triplets[i]) == c) {
      v += std::get<2>(triplets[i]);
      ++i;
    }
    col.push_back(c);
    val.push_back(v);
    row_ptr[r + 1] = static_cast<int>(col.size());
  }
  for (int i = 0; i < n; ++i) row_ptr[i + 1] = std::max(row_ptr[i + 1], row_ptr[i]);
  return StructuredOperator::general_sparse(n, std::move(row_ptr), std::move(col),
                                            std::move(val));
}

struct SparseLuImpl {
  Eigen::SparseMatrix<double> matrix;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
};

namespace {

// Relative thresholds: a pivot this small against the matrix magnitude is
// treated as singular, and tridiagonal dominance is checked with the same
// slack so exact ties pass.
constexpr double kPivotRel = 1e-14;

void factor_small_block(double* a, int k, int* perm, double norm_inf, int factor_index) {
  const double tol = kPivotRel * norm_inf;
  for (int j = 0; j < k; ++j) {
    int pr = j;
    double best = std::abs(a[j * k + j]);
    for (int r = j + 1; r < k; ++r) {
      const double cand = std::abs(a[r * k + j]);
      if (cand > best) {
        best = cand;
        pr = r;
      }
    }
    if (!(best > tol)) {
      throw SingularMatrixError("pointwise block is numerically singular", factor_index);
    }
    perm[j] = pr;
    if (pr != j) {
      for (int c = 0; c < k; ++c) std::swap(a[j * k + c], a[pr * k + c]);
    }
    const double piv = a[j * k + j];
    for (int r = j + 1; r < k; ++r) {
      const double m = a[r * k + j] / piv;
      a[r * k + j] = m;
      for (int c = j + 1; c < k; ++c) a[r * k + c] -= m * a[j * k + c];
    }
  }
}

void solve_small_block(const double* a, int k, const int* perm, double* x) {
  for (int j = 0; j < k; ++j) {
    if (perm[j] != j) std::swap(x[j], x[perm[j]]);
  }
  for (int r = 1; r < k; ++r) {
    double acc = x[r];
    for (int c = 0; c < r; ++c) acc -= a[r * k + c] * x[c];
    x[r] = acc;
  }
  for (int r = k - 1; r >= 0; --r) {
    double acc = x[r];
    for (int c = r + 1; c < k; ++c) acc -= a[r * k + c] * x[c];
    x[r] = acc / a[r * k + r];
  }
}

}  // namespace

Resolvent::Resolvent(std::shared_ptr<const StructuredOperator> op, double h, double gamma,
                     SolveStats* stats, int factor_index)
    : op_(std::move(op)), h_(h), gamma_(gamma), stats_(stats) {
  if (!op_) throw ContractViolation("resolvent operator must not be null");
  const double eff = h_ * gamma_ * op_->scale();
  if (eff == 0.0) {
    fact_ = IdentityFact{};
    return;
  }
  const auto& structure = op_->structure();
  if (const auto* t = std::get_if<Tridiagonal>(&structure)) {
    const int n = op_->dim();
    TridiagFact f;
    f.pivot.resize(n);
    f.mult.resize(n > 0 ? n - 1 : 0);
    f.super.resize(n > 0 ? n - 1 : 0);
    Vector sub(n > 0 ? n - 1 : 0);
    for (int i = 0; i < n; ++i) f.pivot[i] = 1.0 - eff * t->diag[i];
    for (int i = 0; i + 1 < n; ++i) {
      sub[i] = -eff * t->sub[i];
      f.super[i] = -eff * t->super[i];
    }
    double norm_inf = 0.0;
    for (int i = 0; i < n; ++i) {
      const double row = std::abs(f.pivot[i]) + (i > 0 ? std::abs(sub[i - 1]) : 0.0) +
                         (i + 1 < n ? std::abs(f.super[i]) : 0.0);
      norm_inf = std::max(norm_inf, row);
    }
    const double slack = kPivotRel * norm_inf;
    for (int i = 0; i < n; ++i) {
      const double off = (i > 0 ? std::abs(sub[i - 1]) : 0.0) +
                         (i + 1 < n ? std::abs(f.super[i]) : 0.0);
      if (std::abs(f.pivot[i]) + slack < off) {
        throw ContractViolation(
            "tridiagonal resolvent row " + std::to_string(i) +
            " is not diagonally dominant; the non-pivoting solve would be unstable");
      }
    }
    const double tol = kPivotRel * norm_inf;
    for (int i = 0; i < n; ++i) {
      if (i > 0) {
        f.mult[i - 1] = sub[i - 1] / f.pivot[i - 1];
        f.pivot[i] -= f.mult[i - 1] * f.super[i - 1];
      }
      if (!(std::abs(f.pivot[i]) > tol)) {
        throw SingularMatrixError("tridiagonal resolvent is numerically singular",
                                  factor_index);
      }
    }
    if (stats_) stats_->tridiagonal_factorizations += 1;
    fact_ = std::move(f);
  } else if (const auto* k = std::get_if<KroneckerLeft>(&structure)) {
    KronFact f;
    f.inner = std::make_shared<Resolvent>(
        std::make_shared<const StructuredOperator>(k->factor->rescaled(op_->scale())), h_,
        gamma_, stats_, factor_index);
    f.block_count = k->block_count;
    f.left = true;
    fact_ = std::move(f);
  } else if (const auto* k2 = std::get_if<KroneckerRight>(&structure)) {
    KronFact f;
    f.inner = std::make_shared<Resolvent>(
        std::make_shared<const StructuredOperator>(k2->factor->rescaled(op_->scale())), h_,
        gamma_, stats_, factor_index);
    f.block_count = k2->block_count;
    f.left = false;
    fact_ = std::move(f);
  } else if (const auto* p = std::get_if<PointwiseBlocks>(&structure)) {
    PointwiseFact f;
    f.k = p->block_dim;
    f.q = p->point_count;
    f.lu.assign(p->blocks.size(), 0.0);
    f.perm.assign(static_cast<std::size_t>(f.q) * f.k, 0);
    for (int pt = 0; pt < f.q; ++pt) {
      double* a = f.lu.data() + static_cast<std::size_t>(pt) * f.k * f.k;
      const double* b = p->blocks.data() + static_cast<std::size_t>(pt) * f.k * f.k;
      double norm_inf = 0.0;
      for (int r = 0; r < f.k; ++r) {
        double row = 0.0;
        for (int c = 0; c < f.k; ++c) {
          const int e = r * f.k + c;
          a[e] = (r == c ? 1.0 : 0.0) - eff * b[e];
          row += std::abs(a[e]);
        }
        norm_inf = std::max(norm_inf, row);
      }
      factor_small_block(a, f.k, f.perm.data() + static_cast<std::size_t>(pt) * f.k,
                         norm_inf, factor_index);
    }
    if (stats_) stats_->pointwise_block_factorizations += f.q;
    fact_ = std::move(f);
  } else {
    const int n = op_->dim();
    auto impl = std::make_shared<SparseLuImpl>();
    std::vector<Eigen::Triplet<double>> triplets;
    op_->for_each_entry([&](int r, int c, double v) {
      triplets.emplace_back(r, c, -h_ * gamma_ * v);
    });
    for (int i = 0; i < n; ++i) triplets.emplace_back(i, i, 1.0);
    impl->matrix.resize(n, n);
    impl->matrix.setFromTriplets(triplets.begin(), triplets.end());
    impl->lu.compute(impl->matrix);
    if (impl->lu.info() != Eigen::Success) {
      throw SingularMatrixError("sparse resolvent factorization failed", factor_index);
    }
    if (stats_) stats_->sparse_factorizations += 1;
    fact_ = SparseFact{std::move(impl)};
  }
}

void Resolvent::solve_raw(double* x) const {
  if (std::holds_alternative<IdentityFact>(fact_)) return;
  if (const auto* f = std::get_if<TridiagFact>(&fact_)) {
    const int n = op_->dim();
    for (int i = 1; i < n; ++i) x[i] -= f->mult[i - 1] * x[i - 1];
    x[n - 1] /= f->pivot[n - 1];
    for (int i = n - 2; i >= 0; --i) x[i] = (x[i] - f->super[i] * x[i + 1]) / f->pivot[i];
  } else if (const auto* kf = std::get_if<KronFact>(&fact_)) {
    const int d = kf->inner->dim();
    const int b = kf->block_count;
    if (kf->left) {
      Vector buf(d);
      for (int j = 0; j < b; ++j) {
        for (int r = 0; r < d; ++r) buf[r] = x[static_cast<std::size_t>(r) * b + j];
        kf->inner->solve_raw(buf.data());
        for (int r = 0; r < d; ++r) x[static_cast<std::size_t>(r) * b + j] = buf[r];
      }
    } else {
      for (int q = 0; q < b; ++q) kf->inner->solve_raw(x + static_cast<std::size_t>(q) * d);
    }
  } else if (const auto* pf = std::get_if<PointwiseFact>(&fact_)) {
    Vector buf(pf->k);
    for (int pt = 0; pt < pf->q; ++pt) {
      for (int r = 0; r < pf->k; ++r) buf[r] = x[static_cast<std::size_t>(r) * pf->q + pt];
      solve_small_block(pf->lu.data() + static_cast<std::size_t>(pt) * pf->k * pf->k, pf->k,
                        pf->perm.data() + static_cast<std::size_t>(pt) * pf->k, buf.data());
      for (int r = 0; r < pf->k; ++r) x[static_cast<std::size_t>(r) * pf->q + pt] = buf[r];
    }
  } else {
    const auto& sf = std::get<SparseFact>(fact_);
    const int n = op_->dim();
    Eigen::Map<Eigen::VectorXd> xv(x, n);
    Eigen::VectorXd sol = sf.impl->lu.solve(xv);
    xv = sol;
  }
}

void Resolvent::solve_in_place(Vector& x) const {
  check_dim(op_->dim(), x, "solve");
  if (stats_) stats_->resolvent_solves += 1;
  solve_raw(x.data());
}

Vector Resolvent::solve(const Vector& rhs) const {
  Vector x = rhs;
  solve_in_place(x);
  return x;
}

Vector Resolvent::apply_resolvent(const Vector& x) const {
  check_dim(op_->dim(), x, "apply_resolvent");
  Vector lx = op_->apply(x);
  const double eff = h_ * gamma_;
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - eff * lx[i];
  return out;
}

AmfResolvent::AmfResolvent(std::vector<std::shared_ptr<const StructuredOperator>> parts,
                           double h, double gamma, SolveStats* stats)
    : h_(h), gamma_(gamma), stats_(stats), parts_(std::move(parts)) {
  if (parts_.empty()) throw ContractViolation("amf product requires at least one part");
  for (const auto& part : parts_) {
    if (!part) throw ContractViolation("amf part must not be null");
    if (part->dim() != parts_.front()->dim()) {
      throw ContractViolation("amf parts must share a dimension");
    }
  }
  factors_.reserve(parts_.size());
  for (std::size_t r = 0; r < parts_.size(); ++r) {
    factors_.push_back(
        std::make_shared<Resolvent>(parts_[r], h_, gamma_, stats_, static_cast<int>(r)));
  }
  full_ = std::make_shared<const StructuredOperator>(assemble_sum(parts_));
}

AmfResolvent::AmfResolvent(const AmfResolvent& previous,
                           std::vector<std::shared_ptr<const StructuredOperator>> parts)
    : h_(previous.h_), gamma_(previous.gamma_), stats_(previous.stats_),
      parts_(std::move(parts)) {
  if (parts_.empty()) throw ContractViolation("amf product requires at least one part");
  factors_.reserve(parts_.size());
  for (std::size_t r = 0; r < parts_.size(); ++r) {
    if (!parts_[r]) throw ContractViolation("amf part must not be null");
    if (parts_[r]->dim() != parts_.front()->dim()) {
      throw ContractViolation("amf parts must share a dimension");
    }
    if (r < previous.parts_.size() && parts_[r] == previous.parts_[r]) {
      factors_.push_back(previous.factors_[r]);
    } else {
      factors_.push_back(
          std::make_shared<Resolvent>(parts_[r], h_, gamma_, stats_, static_cast<int>(r)));
    }
  }
  full_ = std::make_shared<const StructuredOperator>(assemble_sum(parts_));
}

int AmfResolvent::dim() const noexcept { return parts_.front()->dim(); }

Vector AmfResolvent::solve(const Vector& rhs) const {
  check_dim(dim(), rhs, "solve_amf");
  if (stats_) stats_->amf_solves += 1;
  Vector x = rhs;
  for (const auto& factor : factors_) factor->solve_raw(x.data());
  return x;
}

Vector AmfResolvent::apply_full(const Vector& x) const {
  check_dim(dim(), x, "apply_full");
  if (stats_) stats_->exact_applies += 1;
  return full_->apply(x);
}

Vector AmfResolvent::apply_product(const Vector& x) const {
  check_dim(dim(), x, "apply_product");
  Vector y = x;
  for (std::size_t r = factors_.size(); r-- > 0;) {
    y = factors_[r]->apply_resolvent(y);
  }
  return y;
}

Vector AmfResolvent::apply_ltilde(const Vector& x) const {
  if (factors_.size() == 1 || h_ * gamma_ == 0.0) return apply_full(x);
  Vector prod = apply_product(x);
  const double inv = 1.0 / (h_ * gamma_);
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - prod[i]) * inv;
  return out;
}

Vector AmfResolvent::refine(const Vector& y_prev, const Vector& rhs) const {
  check_dim(dim(), y_prev, "refine");
  check_dim(dim(), rhs, "refine");
  Vector ly = apply_full(y_prev);
  const double eff = h_ * gamma_;
  Vector residual(y_prev.size());
  for (std::size_t i = 0; i < y_prev.size(); ++i) {
    residual[i] = y_prev[i] - eff * ly[i] - rhs[i];
  }
  Vector correction = solve(residual);
  Vector out(y_prev.size());
  for (std::size_t i = 0; i < y_prev.size(); ++i) out[i] = y_prev[i] - correction[i];
  return out;
}

Vector solve_resolvent(const Resolvent& r, const Vector& rhs) { return r.solve(rhs); }

Vector solve_amf(const AmfResolvent& a, const Vector& rhs) { return a.solve(rhs); }

Vector refine(const AmfResolvent& a, const Vector& y_prev, const Vector& rhs) {
  return a.refine(y_prev, rhs);
}

}  // namespace lirkamf
