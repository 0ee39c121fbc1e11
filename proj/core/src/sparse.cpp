#include "gperot/sparse.hpp"

#include <algorithm>
#include <cmath>

namespace gperot {

Index SparsityPattern::find(Index r, Index c) const {
  const auto first = col_idx.begin() + row_ptr[r];
  const auto last = col_idx.begin() + row_ptr[r + 1];
  const auto it = std::lower_bound(first, last, c);
  if (it == last || *it != c) return -1;
  return static_cast<Index>(it - col_idx.begin());
}

SparsityPattern SparsityPattern::from_rows(Index cols, std::vector<std::vector<Index>> rows) {
  SparsityPattern pat;
  pat.rows = static_cast<Index>(rows.size());
  pat.cols = cols;
  pat.row_ptr.assign(pat.rows + 1, 0);
  for (Index r = 0; r < pat.rows; ++r) {
    auto& row = rows[r];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    pat.row_ptr[r + 1] = pat.row_ptr[r] + static_cast<Index>(row.size());
  }
  pat.col_idx.reserve(pat.row_ptr.back());
  for (const auto& row : rows) pat.col_idx.insert(pat.col_idx.end(), row.begin(), row.end());
  return pat;
}

template <class T>
CsrMatrix<T>::CsrMatrix(std::shared_ptr<const SparsityPattern> pattern, std::vector<T> values)
    : pattern_(std::move(pattern)), values_(std::move(values)) {
  if (static_cast<Index>(values_.size()) != pattern_->nnz()) {
    throw DimensionError("CsrMatrix: value count does not match pattern");
  }
}

template <class T>
T CsrMatrix<T>::coeff(Index r, Index c) const {
  const Index k = pattern_->find(r, c);
  return k < 0 ? T{} : values_[k];
}

template <class T>
Eigen::VectorXcd CsrMatrix<T>::operator*(const Eigen::VectorXcd& x) const {
  Eigen::VectorXcd y(rows());
  apply<cplx>(std::span<const cplx>(x.data(), x.size()), std::span<cplx>(y.data(), y.size()));
  return y;
}

template <class T>
Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> CsrMatrix<T>::to_dense() const {
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> d =
      Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>::Zero(rows(), cols());
  const auto& pat = *pattern_;
  for (Index r = 0; r < pat.rows; ++r) {
    for (Index k = pat.row_ptr[r]; k < pat.row_ptr[r + 1]; ++k) d(r, pat.col_idx[k]) = values_[k];
  }
  return d;
}

template <class T>
double CsrMatrix<T>::max_abs() const {
  double m = 0.0;
  for (const auto& v : values_) m = std::max(m, std::abs(v));
  return m;
}

template class CsrMatrix<double>;
template class CsrMatrix<cplx>;

namespace {

template <class T, class F>
double transpose_defect(const CsrMatrix<T>& a, F&& partner) {
  const auto& pat = a.pattern();
  const double scale = a.max_abs();
  if (scale == 0.0) return 0.0;
  double worst = 0.0;
  for (Index r = 0; r < pat.rows; ++r) {
    for (Index k = pat.row_ptr[r]; k < pat.row_ptr[r + 1]; ++k) {
      const Index c = pat.col_idx[k];
      worst = std::max(worst, std::abs(partner(a.values()[k], a.coeff(c, r))));
    }
  }
  return worst / scale;
}

}  // namespace

double hermitian_defect(const SparseHermitian& a) {
  return transpose_defect(a, [](cplx v, cplx t) { return v - std::conj(t); });
}

double symmetric_defect(const RealSparse& a) {
  return transpose_defect(a, [](double v, double t) { return v - t; });
}

double skew_defect(const RealSparse& a) {
  return transpose_defect(a, [](double v, double t) { return v + t; });
}

}  // namespace gperot
