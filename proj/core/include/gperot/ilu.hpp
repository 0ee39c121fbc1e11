#pragma once

#include <span>
#include <vector>

#include "gperot/sparse.hpp"

namespace gperot {

struct IluOptions {
  /// Throw FactorizationError on a vanishing pivot instead of shifting it.
  bool strict = false;
  /// Replacement pivot is shift * max |diag(A)|.
  double shift = 1e-12;
};

/// Zero-fill incomplete LU factorization without pivoting. L (unit lower) and
/// U share the sparsity pattern of A.
class Ilu0 {
 public:
  explicit Ilu0(const SparseHermitian& a, IluOptions opt = {});

  Index n() const { return n_; }
  /// z = U^{-1} L^{-1} r
  void apply(std::span<const cplx> r, std::span<cplx> z) const;
  Eigen::VectorXcd apply(const Eigen::VectorXcd& r) const;
  Index shifted_pivots() const { return shifted_; }

 private:
  Index n_ = 0;
  std::shared_ptr<const SparsityPattern> pattern_;
  std::vector<cplx> lu_;
  std::vector<Index> diag_;
  std::vector<cplx> inv_diag_;
  Index shifted_ = 0;
};

}  // namespace gperot
