#pragma once

#include <functional>

#include "gperot/pcg.hpp"

namespace gperot {

/// Applies an operator to every column of a block.
using BlockOp = std::function<Eigen::MatrixXcd(const Eigen::MatrixXcd&)>;

struct LobpcgOptions {
  int nev = 1;
  int block = 0;  // 0 -> max(nev, 4)
  double tol = 1e-8;
  int max_iter = 1000;
  /// Real mode works in the real 2n embedding: all inner products are
  /// Re(x^H y) and Ritz coefficients stay real.
  Linearity mode = Linearity::Complex;
  bool largest = false;
  unsigned seed = 12345;
};

struct LobpcgResult {
  Eigen::VectorXd values;     // ascending (descending when largest)
  Eigen::MatrixXcd vectors;   // B-orthonormal
  Eigen::VectorXd residuals;  // |A x - theta B x| / (|theta| |B x|) after constraint deflation
  int iterations = 0;
  bool converged = false;
};

/// Locally optimal block preconditioned conjugate gradients for the pencil
/// (A, B) with B symmetric positive definite, restricted to the subspace
/// {x : Y^H C x = 0}. Converged columns are soft-locked.
class Lobpcg {
 public:
  Lobpcg(Index dim, BlockOp a, BlockOp b);

  void set_preconditioner(BlockOp t) { t_ = std::move(t); }
  /// Constraint vectors Y and the operator C of the constraint inner product.
  void set_constraints(Eigen::MatrixXcd y, const BlockOp& c);
  void set_initial(Eigen::MatrixXcd x0) { x0_ = std::move(x0); }

  LobpcgResult solve(const LobpcgOptions& opt) const;

 private:
  Eigen::MatrixXcd project(const Eigen::MatrixXcd& x, Linearity mode) const;
  Eigen::MatrixXcd project_dual(const Eigen::MatrixXcd& r, Linearity mode) const;

  Index dim_;
  BlockOp a_, b_, t_;
  Eigen::MatrixXcd y_, cy_, x0_;
};

}  // namespace gperot
