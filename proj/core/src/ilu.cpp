#include "gperot/ilu.hpp"

#include <algorithm>
#include <cmath>

namespace gperot {

Ilu0::Ilu0(const SparseHermitian& a, IluOptions opt)
    : n_(a.rows()), pattern_(a.shared_pattern()), lu_(a.values().begin(), a.values().end()) {
  if (a.rows() != a.cols()) throw DimensionError("ilu0: matrix must be square");
  const auto& pat = *pattern_;
  diag_.assign(n_, -1);
  double max_diag = 0.0;
  for (Index i = 0; i < n_; ++i) {
    diag_[i] = pat.find(i, i);
    if (diag_[i] < 0 || lu_[diag_[i]] == cplx{}) {
      throw FactorizationError("ilu0: zero diagonal in row " + std::to_string(i), i);
    }
    max_diag = std::max(max_diag, std::abs(lu_[diag_[i]]));
  }
  const double tiny = 1e-300;
  std::vector<Index> pos(n_, -1);
  for (Index i = 0; i < n_; ++i) {
    const Index b = pat.row_ptr[i], e = pat.row_ptr[i + 1];
    for (Index k = b; k < e; ++k) pos[pat.col_idx[k]] = k;
    for (Index k = b; k < e; ++k) {
      const Index c = pat.col_idx[k];
      if (c >= i) break;
      const cplx lik = lu_[k] / lu_[diag_[c]];
      lu_[k] = lik;
      for (Index kk = diag_[c] + 1; kk < pat.row_ptr[c + 1]; ++kk) {
        const Index t = pos[pat.col_idx[kk]];
        if (t >= 0) lu_[t] -= lik * lu_[kk];
      }
    }
    if (std::abs(lu_[diag_[i]]) <= tiny) {
      if (opt.strict) throw FactorizationError("ilu0: zero pivot in row " + std::to_string(i), i);
      lu_[diag_[i]] = opt.shift * max_diag;
      ++shifted_;
    }
    for (Index k = b; k < e; ++k) pos[pat.col_idx[k]] = -1;
  }
  inv_diag_.resize(n_);
  for (Index i = 0; i < n_; ++i) inv_diag_[i] = 1.0 / lu_[diag_[i]];
}

void Ilu0::apply(std::span<const cplx> r, std::span<cplx> z) const {
  if (static_cast<Index>(r.size()) != n_ || static_cast<Index>(z.size()) != n_) {
    throw DimensionError("ilu0: vector length mismatch");
  }
  const auto& pat = *pattern_;
  for (Index i = 0; i < n_; ++i) {
    cplx s = r[i];
    for (Index k = pat.row_ptr[i]; k < diag_[i]; ++k) s -= lu_[k] * z[pat.col_idx[k]];
    z[i] = s;
  }
  for (Index i = n_ - 1; i >= 0; --i) {
    cplx s = z[i];
    for (Index k = diag_[i] + 1; k < pat.row_ptr[i + 1]; ++k) s -= lu_[k] * z[pat.col_idx[k]];
    z[i] = s * inv_diag_[i];
  }
}

Eigen::VectorXcd Ilu0::apply(const Eigen::VectorXcd& r) const {
  Eigen::VectorXcd z(r.size());
  apply(std::span<const cplx>(r.data(), r.size()), std::span<cplx>(z.data(), z.size()));
  return z;
}

}  // namespace gperot
