#pragma once

#include "gperot/gpe.hpp"

namespace gperot {

/// Diagonal of the complex Gram matrix g_j = b_j^H M a_j (the L2 pairing
/// <a_j, b_j>_C) and its real part.
struct GramDiag {
  Eigen::VectorXcd complex;
  Eigen::VectorXd real() const { return complex.real(); }
};

GramDiag gram(const Discretization& disc, const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

using PhaseDiag = Eigen::VectorXcd;

/// Columnwise normalization of phi + z to the prescribed masses. Throws
/// RetractionError on a zero column.
PFrame retract(const PFrame& phi, const Eigen::MatrixXcd& z);

/// v_j - phi_j Re(phi_j^H M v_j) / N_j
Eigen::MatrixXcd project_tangent(const PFrame& phi, const Eigen::MatrixXcd& v);
/// v_j - phi_j (phi_j^H M v_j) / N_j
Eigen::MatrixXcd project_horizontal(const PFrame& phi, const Eigen::MatrixXcd& v);

struct Gradient {
  Eigen::MatrixXcd grad;
  MultiplierDiag sigma;
  Eigen::MatrixXcd u;  // G^{-1} M phi
  Eigen::MatrixXcd y;  // G^{-1} A phi (phi itself for the energy-adaptive metric)
  int cg_iters = 0;
};

/// Riemannian gradient for the metric of `metric`: Y = G^{-1} A phi,
/// U = G^{-1} M phi, sigma_j = Re(phi_j^H M y_j) / Re(phi_j^H M u_j),
/// grad = Y - U sigma. For the energy-adaptive metric Y = phi exactly.
/// Inner solves start from phi_j / lambda_j (energy-adaptive) or from the
/// solutions stored in `previous` (Lagrangian) when given.
Gradient riemannian_grad(const Linearization& lin, const MetricOperator& metric, double rel_tol,
                         int max_iter = 5000, const Gradient* previous = nullptr);
Gradient riemannian_grad(const GpeProblem& prob, const PFrame& phi, const MetricSelector& sel,
                         double rel_tol);

struct Alignment {
  Eigen::MatrixXcd aligned;
  PhaseDiag theta;
};

/// theta_j = conj(g_j) / |g_j| with g_j = ref_j^H M v_j. Throws AlignmentError
/// if some g_j vanishes.
Alignment phase_align(const Eigen::MatrixXcd& v, const PFrame& ref);

enum class NormKind {
  L,  // M
  H,  // M + S
  R,  // covariant form, S + Vmass_j + i W_j R per component
};

double frame_norm(const Discretization& disc, const Eigen::MatrixXcd& v, NormKind kind);
/// sqrt(sum_j Re(v_j^H A_j v_j)) at the linearization.
double a_norm(const Linearization& lin, const Eigen::MatrixXcd& v);
double aligned_distance(const PFrame& phi, const PFrame& ref, NormKind kind);

}  // namespace gperot
