#pragma once

#include <memory>
#include <span>
#include <vector>

#include "gperot/common.hpp"

namespace gperot {

/// CSR sparsity structure with sorted column indices in every row.
struct SparsityPattern {
  Index rows = 0;
  Index cols = 0;
  std::vector<Index> row_ptr;
  std::vector<Index> col_idx;

  Index nnz() const { return static_cast<Index>(col_idx.size()); }
  /// Position of (r, c) in the value array, or -1 when the entry is structurally zero.
  Index find(Index r, Index c) const;
  /// Builds a pattern from unsorted, possibly repeated column lists per row.
  static SparsityPattern from_rows(Index cols, std::vector<std::vector<Index>> rows);
};

/// CSR matrix over a shared, immutable pattern. Matrices assembled on the same
/// finite element mesh share one pattern object, so sums are plain value loops.
template <class T>
class CsrMatrix {
 public:
  using value_type = T;

  CsrMatrix() = default;
  explicit CsrMatrix(std::shared_ptr<const SparsityPattern> pattern)
      : pattern_(std::move(pattern)), values_(pattern_->nnz(), T{}) {}
  CsrMatrix(std::shared_ptr<const SparsityPattern> pattern, std::vector<T> values);

  Index rows() const { return pattern_ ? pattern_->rows : 0; }
  Index cols() const { return pattern_ ? pattern_->cols : 0; }
  Index nnz() const { return static_cast<Index>(values_.size()); }

  const SparsityPattern& pattern() const { return *pattern_; }
  const std::shared_ptr<const SparsityPattern>& shared_pattern() const { return pattern_; }
  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }

  T coeff(Index r, Index c) const;

  /// y = A x
  template <class U>
  void apply(std::span<const U> x, std::span<U> y) const;

  Eigen::VectorXcd operator*(const Eigen::VectorXcd& x) const;
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> to_dense() const;
  double max_abs() const;

 private:
  std::shared_ptr<const SparsityPattern> pattern_;
  std::vector<T> values_;
};

using RealSparse = CsrMatrix<double>;
using SparseHermitian = CsrMatrix<cplx>;

/// max |A - A^H| / max |A|; zero for an exactly Hermitian (or symmetric) matrix.
double hermitian_defect(const SparseHermitian& a);
double symmetric_defect(const RealSparse& a);
/// max |A + A^T| / max |A|.
double skew_defect(const RealSparse& a);

// ---------------------------------------------------------------------------

template <class T>
template <class U>
void CsrMatrix<T>::apply(std::span<const U> x, std::span<U> y) const {
  const auto& pat = *pattern_;
  if (static_cast<Index>(x.size()) != pat.cols || static_cast<Index>(y.size()) != pat.rows) {
    throw DimensionError("CsrMatrix::apply: vector length mismatch");
  }
  const Index* rp = pat.row_ptr.data();
  const Index* ci = pat.col_idx.data();
  const T* v = values_.data();
  for (Index r = 0; r < pat.rows; ++r) {
    U acc{};
    for (Index k = rp[r]; k < rp[r + 1]; ++k) acc += v[k] * x[ci[k]];
    y[r] = acc;
  }
}

}  // namespace gperot
