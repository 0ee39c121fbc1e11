#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace gperot {

using cplx = std::complex<double>;
using Index = std::ptrdiff_t;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid model or run configuration (assumption checks, malformed files).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Shape or size mismatch between arguments.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Zero pivot during incomplete factorization.
class FactorizationError : public Error {
 public:
  FactorizationError(const std::string& what, Index row) : Error(what), row_(row) {}
  Index row() const { return row_; }

 private:
  Index row_;
};

/// The metric operator G of some component lost positive definiteness.
class IndefiniteMetric : public Error {
 public:
  IndefiniteMetric(const std::string& what, int component)
      : Error(what), component_(component) {}
  int component() const { return component_; }

 private:
  int component_;
};

/// Normalization of a zero column.
class RetractionError : public Error {
 public:
  using Error::Error;
};

/// Phase alignment against a reference with vanishing overlap.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

/// Vanishing Gram denominator while forming a Riemannian gradient.
class DegenerateState : public Error {
 public:
  using Error::Error;
};

/// An iterative eigensolver or linear solver ran out of budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace gperot
