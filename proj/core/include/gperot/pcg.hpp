#pragma once

#include <functional>

#include "gperot/common.hpp"

namespace gperot {

/// Complex maps are linear over C; Real maps are only linear over R and are
/// handled in the real 2n embedding, where <x, y> = Re(x^H y).
enum class Linearity { Complex, Real };

struct LinearMap {
  Index dim = 0;
  Linearity linearity = Linearity::Complex;
  std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)> apply;

  Eigen::VectorXcd operator()(const Eigen::VectorXcd& x) const {
    Eigen::VectorXcd y(dim);
    apply(x, y);
    return y;
  }
};

/// Complex-linear preconditioner z = P r. An empty function means identity.
using Preconditioner = std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>;

enum class Breakdown { None, Indefinite, Stagnation };

const char* to_string(Breakdown b);

struct SolveReport {
  int iterations = 0;
  double rel_residual = 0.0;       // the quantity tested against rel_tol
  double true_rel_residual = 0.0;  // |b - A x| / |b|
  Breakdown breakdown = Breakdown::None;
};

struct PcgOptions {
  double rel_tol = 1e-8;
  int max_iter = 1000;
  /// Iterations taken even when the start already meets rel_tol.
  int min_iter = 0;
  /// Stop on |b - A x| / |b| instead of the preconditioned residual
  /// sqrt(r^H P r) / sqrt(b^H P b).
  bool true_residual = false;
};

struct PcgResult {
  Eigen::VectorXcd x;
  SolveReport report;
};

/// Preconditioned conjugate gradients for a self-adjoint map. A non-positive
/// curvature p^H A p <= 0 stops the iteration with Breakdown::Indefinite and
/// returns the current iterate.
PcgResult solve_pcg(const LinearMap& a, const Eigen::VectorXcd& b, const Preconditioner& pre,
                    const PcgOptions& opt, const Eigen::VectorXcd* x0 = nullptr);

/// Inner product matching the map's linearity (complex or real embedding).
cplx inner(Linearity lin, const Eigen::VectorXcd& x, const Eigen::VectorXcd& y);

}  // namespace gperot
