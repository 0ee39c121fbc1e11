#pragma once

#include <vector>

#include "gperot/lobpcg.hpp"
#include "gperot/manifold.hpp"

namespace gperot {

struct EigReport {
  Eigen::VectorXd values;     // sorted ascending (descending for Extreme::Largest)
  Eigen::MatrixXcd vectors;   // columns normalized in the pencil's B-product
  Eigen::VectorXd residuals;  // relative residuals of the constrained pencil
  int iterations = 0;
};

struct SpectralOptions {
  double tol = 1e-9;
  int max_iter = 3000;
  int block = 0;
  unsigned seed = 7;
  /// Throw ConvergenceError when the budget runs out (otherwise return the
  /// best approximation).
  bool require_convergence = true;
};

/// k smallest eigenpairs of the Hermitian pencil (A_j, M).
EigReport eigs_component_A(const Linearization& lin, int j, int k, const SpectralOptions& opt = {});

/// k smallest eigenpairs of F_j v = A_j v + B_jj(v, phi_j) against M on the
/// tangent space {Re(phi_j^H M v) = 0}.
EigReport eigs_projected_hessian(const Linearization& lin, int j, int k, const SpectralOptions& opt = {});

enum class Extreme { Smallest, Largest };

/// Extreme eigenvalues of (D^2 L, G) on the horizontal space
/// {phi_j^H M v_j = 0 for all j}. Vectors are stacked column-major (n*p rows).
EigReport eigs_horizontal_pencil(const Linearization& lin, const MetricSelector& sel, Extreme which,
                                 int k, const SpectralOptions& opt = {});

struct RatePrediction {
  double tau = 0.0;
  double eta_inf = 0.0;
  double eta_sup = 0.0;
  double rho = 0.0;
  double tau_limit = 0.0;  // admissible iff 0 < tau < tau_limit = 2 / eta_sup
  bool admissible = false;
};

RatePrediction predicted_rate(double tau, double eta_inf, double eta_sup);

struct ConditionEntry {
  double omega = 0.0;
  std::vector<double> kappa;       // per component, NaN when indefinite
  std::vector<double> lambda_min;  // of (G, M)
  std::vector<double> lambda_max;
  std::vector<bool> indefinite;
};

/// Condition numbers kappa_M(G_{w,j}) = lambda_max / lambda_min of the real-linear
/// pencil (G_{w,j}, M) for each omega in the list.
std::vector<ConditionEntry> condition_sweep(const Linearization& lin, const std::vector<double>& omegas,
                                            const SpectralOptions& opt = {});

}  // namespace gperot
