#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace lirkamf {

using Vector = std::vector<double>;

/// Raised when a caller violates an interface precondition (dimension
/// mismatch, invalid argument range, malformed structure).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a factorization encounters a numerically singular matrix.
/// factor_index() identifies the offending factor inside an AMF product
/// (-1 when the resolvent does not belong to a product).
class SingularMatrixError : public std::runtime_error {
 public:
  explicit SingularMatrixError(const std::string& what, int factor_index = -1)
      : std::runtime_error(what), factor_index_(factor_index) {}
  int factor_index() const noexcept { return factor_index_; }

 private:
  int factor_index_;
};

/// Operation counters threaded through resolvent construction and solves.
/// Factorization counters increment once per factorization event; solve and
/// apply counters once per whole-vector operation.
struct SolveStats {
  long long tridiagonal_factorizations = 0;
  long long pointwise_block_factorizations = 0;
  long long sparse_factorizations = 0;
  long long resolvent_solves = 0;
  long long amf_solves = 0;
  long long exact_applies = 0;
};

class StructuredOperator;

/// Tridiagonal matrix; sub/super have size dim-1.
struct Tridiagonal {
  Vector sub;
  Vector diag;
  Vector super;
};

/// factor (x) I_block_count. The flat index is r*block_count + j where r
/// indexes the factor dimension and j the block dimension.
struct KroneckerLeft {
  std::shared_ptr<const StructuredOperator> factor;
  int block_count = 0;
};

/// I_block_count (x) factor. The flat index is q*dim(factor) + r.
struct KroneckerRight {
  std::shared_ptr<const StructuredOperator> factor;
  int block_count = 0;
};

/// point_count small dense blocks of size block_dim, coupling the interleaved
/// indices {p, point_count + p, 2*point_count + p, ...} for each point p.
/// blocks is point-major: blocks[p*k*k + r*k + c] with k = block_dim.
struct PointwiseBlocks {
  int block_dim = 0;
  int point_count = 0;
  std::vector<double> blocks;
};

/// Compressed sparse rows; row_ptr has size dim+1.
struct GeneralSparse {
  std::vector<int> row_ptr;
  std::vector<int> col;
  Vector val;
};

/// A square linear operator with a structure tag that resolvent solves can
/// exploit. The action is scale * S * x where S is the stored structure.
class StructuredOperator {
 public:
  using Structure =
      std::variant<Tridiagonal, KroneckerLeft, KroneckerRight, PointwiseBlocks, GeneralSparse>;

  StructuredOperator(int dim, Structure structure, double scale = 1.0);

  static StructuredOperator tridiagonal(Vector sub, Vector diag, Vector super,
                                        double scale = 1.0);
  static StructuredOperator kronecker_left(StructuredOperator factor, int block_count,
                                           double scale = 1.0);
  static StructuredOperator kronecker_right(StructuredOperator factor, int block_count,
                                            double scale = 1.0);
  static StructuredOperator pointwise_blocks(int block_dim, int point_count,
                                             std::vector<double> blocks, double scale = 1.0);
  static StructuredOperator general_sparse(int dim, std::vector<int> row_ptr,
                                           std::vector<int> col, Vector val, double scale = 1.0);
  /// Row-major dense entries stored as GeneralSparse (zeros dropped).
  static StructuredOperator dense(const std::vector<double>& entries, int dim,
                                  double scale = 1.0);
  static StructuredOperator zero(int dim);

  int dim() const noexcept { return dim_; }
  double scale() const noexcept { return scale_; }
  const Structure& structure() const noexcept { return structure_; }

  /// Same operator with the scale multiplied by factor.
  StructuredOperator rescaled(double factor) const;

  /// out = scale * S * x. No dense materialization for structured variants.
  void apply_to(const Vector& x, Vector& out) const;
  Vector apply(const Vector& x) const;
  /// Low-level overload on raw storage of length dim(); used by the
  /// Kronecker paths to act on vector slices.
  void apply_to(const double* x, double* out) const;

  /// Visits every structurally nonzero entry as (row, col, value) with the
  /// scale folded in.
  void for_each_entry(const std::function<void(int, int, double)>& visit) const;

 private:
  int dim_;
  double scale_;
  Structure structure_;
};

/// Spec surface: op as a matrix times x.
Vector apply(const StructuredOperator& op, const Vector& x);

/// Sum of the given operators assembled as one GeneralSparse operator.
StructuredOperator assemble_sum(
    const std::vector<std::shared_ptr<const StructuredOperator>>& parts);

/// Factorization of (I - h*gamma*op), built once, solved many times.
/// Immutable after construction and safe to share across threads.
class Resolvent {
 public:
  /// Factorizes per structure: tridiagonal uses non-pivoting banded
  /// elimination (rows must be diagonally dominant), Kronecker variants
  /// factorize the small factor once and reuse it for every block,
  /// pointwise blocks factorize each small block, GeneralSparse uses a
  /// sparse direct factorization. A pivot below 1e-14 times the matrix
  /// infinity norm is treated as singular.
  Resolvent(std::shared_ptr<const StructuredOperator> op, double h, double gamma,
            SolveStats* stats = nullptr, int factor_index = -1);

  const StructuredOperator& op() const noexcept { return *op_; }
  const std::shared_ptr<const StructuredOperator>& op_ptr() const noexcept { return op_; }
  double h() const noexcept { return h_; }
  double gamma() const noexcept { return gamma_; }
  int dim() const noexcept { return op_->dim(); }

  Vector solve(const Vector& rhs) const;
  void solve_in_place(Vector& x) const;
  /// (I - h*gamma*op) x, the forward action of the factored matrix.
  Vector apply_resolvent(const Vector& x) const;

 private:
  struct IdentityFact {};
  struct TridiagFact {
    Vector mult;   // forward elimination multipliers, size n-1
    Vector pivot;  // eliminated diagonal, size n
    Vector super;  // unchanged superdiagonal of the resolvent, size n-1
  };
  struct KronFact {
    std::shared_ptr<const Resolvent> inner;
    int block_count = 0;
    bool left = false;  // true: factor (x) I, strided slices
  };
  struct PointwiseFact {
    int k = 0;
    int q = 0;
    std::vector<double> lu;   // per-block LU, point-major
    std::vector<int> perm;    // per-block row permutations
  };
  struct SparseFact {
    std::shared_ptr<struct SparseLuImpl> impl;
  };
  using Factorization =
      std::variant<IdentityFact, TridiagFact, KronFact, PointwiseFact, SparseFact>;

  void solve_raw(double* x) const;

  std::shared_ptr<const StructuredOperator> op_;
  double h_;
  double gamma_;
  SolveStats* stats_;
  Factorization fact_;

  friend class AmfResolvent;
};

/// The factored product prod_r (I - h*gamma*L_r) over an ordered splitting
/// L = sum_r L_r, together with the unfactored full operator for exact
/// residuals and applies. Factor order is fixed as given at construction.
class AmfResolvent {
 public:
  AmfResolvent(std::vector<std::shared_ptr<const StructuredOperator>> parts, double h,
               double gamma, SolveStats* stats = nullptr);

  /// Rebuilds from previous, refactorizing only the parts whose operator
  /// pointer changed; the full-operator sum is reassembled.
  AmfResolvent(const AmfResolvent& previous,
               std::vector<std::shared_ptr<const StructuredOperator>> parts);

  int dim() const noexcept;
  double h() const noexcept { return h_; }
  double gamma() const noexcept { return gamma_; }
  std::size_t factor_count() const noexcept { return factors_.size(); }
  const Resolvent& factor(std::size_t r) const { return *factors_.at(r); }
  const StructuredOperator& full_operator() const noexcept { return *full_; }

  /// (I - h*gamma*Ltilde)^{-1} rhs via sequential back-substitution through
  /// the factors in stored order.
  Vector solve(const Vector& rhs) const;
  /// Full-operator action L x (exact, not the product).
  Vector apply_full(const Vector& x) const;
  /// Product action (I - h*gamma*Ltilde) x, rightmost factor applied first.
  Vector apply_product(const Vector& x) const;
  /// Action of the product-induced operator Ltilde, recovered from the
  /// product as (x - apply_product(x)) / (h*gamma). With a single factor
  /// this is the exact operator and is applied directly.
  Vector apply_ltilde(const Vector& x) const;
  /// One simplified Newton sweep: y_prev - solve((I - h*gamma*L) y_prev - rhs)
  /// with the residual built from the exact operator.
  Vector refine(const Vector& y_prev, const Vector& rhs) const;

 private:
  double h_;
  double gamma_;
  SolveStats* stats_;
  std::vector<std::shared_ptr<const StructuredOperator>> parts_;
  std::vector<std::shared_ptr<const Resolvent>> factors_;
  std::shared_ptr<const StructuredOperator> full_;
};

/// Spec surfaces.
Vector solve_resolvent(const Resolvent& r, const Vector& rhs);
Vector solve_amf(const AmfResolvent& a, const Vector& rhs);
Vector refine(const AmfResolvent& a, const Vector& y_prev, const Vector& rhs);

}  // namespace lirkamf
