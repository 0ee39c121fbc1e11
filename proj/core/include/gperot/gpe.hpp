#pragma once

#include <memory>
#include <variant>
#include <vector>

#include "gperot/fem.hpp"
#include "gperot/ilu.hpp"
#include "gperot/pcg.hpp"

namespace gperot {

/// Discrete p-frame: n x p free-dof coefficients, column j = component j.
class PFrame {
 public:
  PFrame() = default;
  PFrame(DiscretizationPtr disc, Eigen::MatrixXcd coeffs);

  const Discretization& disc() const { return *disc_; }
  const DiscretizationPtr& disc_ptr() const { return disc_; }
  Index n() const { return coeffs_.rows(); }
  int p() const { return static_cast<int>(coeffs_.cols()); }
  const Eigen::MatrixXcd& coeffs() const { return coeffs_; }
  Eigen::MatrixXcd& coeffs() { return coeffs_; }
  auto col(int j) const { return coeffs_.col(j); }

  /// Re(phi_j^H M phi_j) for every component.
  Eigen::VectorXd masses() const;
  /// Mass constraint holds to `rel_tol` for every component.
  bool feasible(double rel_tol = 1e-10) const;

 private:
  DiscretizationPtr disc_;
  Eigen::MatrixXcd coeffs_;
};

struct EnergyAdaptive {};
struct Lagrangian {
  double omega = 0.9;
};
using MetricSelector = std::variant<EnergyAdaptive, Lagrangian>;

/// Throws ConfigError unless omega lies in [0, 1).
void validate(const MetricSelector& sel);
std::string describe(const MetricSelector& sel);

using MultiplierDiag = Eigen::VectorXd;

enum class PreconditionerSource {
  LinearPart,    // ILU0 of S + Vmass_j + i W_j R
  InitialState,  // ILU0 of A_j at a given frame
};

/// Constant per-problem data: the linear component operators, masses,
/// interaction matrix and the ILU0 preconditioners.
class GpeProblem {
 public:
  explicit GpeProblem(DiscretizationPtr disc);

  const Discretization& disc() const { return *disc_; }
  const DiscretizationPtr& disc_ptr() const { return disc_; }
  Index n() const { return disc_->n(); }
  int p() const { return disc_->p(); }
  double mass(int j) const { return disc_->spec.components[j].mass; }
  Eigen::VectorXd masses() const;
  double kappa(int i, int j) const { return disc_->spec.interaction(i, j); }
  const RealSparse& M() const { return disc_->mass; }

  /// S + Vmass_j + i W_j R
  const SparseHermitian& linear_part(int j) const { return linear_[j]; }
  const Ilu0& ilu(int j) const { return *ilu_[j]; }
  Preconditioner preconditioner(int j) const;
  PreconditionerSource preconditioner_source() const { return source_; }
  /// Refactor the preconditioners from A_j at `at`.
  void rebuild_preconditioners(const PFrame& at);

  /// Columnwise M products.
  Eigen::MatrixXcd apply_mass(const Eigen::MatrixXcd& v) const;
  PFrame frame(Eigen::MatrixXcd coeffs) const { return PFrame(disc_, std::move(coeffs)); }

 private:
  DiscretizationPtr disc_;
  std::vector<SparseHermitian> linear_;
  std::vector<std::unique_ptr<Ilu0>> ilu_;
  PreconditionerSource source_ = PreconditionerSource::LinearPart;
};

/// State-dependent quantities at a frame: quadrature values, densities, the
/// assembled component operators A_j, A_j phi_j, multipliers and energy.
struct Linearization {
  const GpeProblem* problem = nullptr;
  Eigen::MatrixXcd phi;
  std::vector<QuadField> phi_q;
  std::vector<DensityField> density;  // |phi_j|^2
  std::vector<DensityField> rho;      // sum_i kappa_ij |phi_i|^2
  Eigen::MatrixXd quartic;            // Q_ij
  std::vector<SparseHermitian> A;
  Eigen::MatrixXcd A_phi;
  Eigen::MatrixXcd M_phi;
  MultiplierDiag lambda;
  double energy = 0.0;

  const Discretization& disc() const { return problem->disc(); }
  int p() const { return static_cast<int>(phi.cols()); }
};

Linearization linearize(const GpeProblem& prob, const PFrame& phi);

double energy(const GpeProblem& prob, const PFrame& phi);
std::vector<SparseHermitian> assemble_A(const GpeProblem& prob, const PFrame& phi);
MultiplierDiag lagrange_multipliers(const GpeProblem& prob, const PFrame& phi);

struct Residual {
  double r = 0.0;
  Eigen::MatrixXcd components;  // R_j = (A_j - lambda_j M) phi_j
};
Residual residual(const GpeProblem& prob, const PFrame& phi);
Residual residual(const Linearization& lin);

/// Dual vector of B_ij(v_j, u_i): load of 2 kappa_ij Re(phi_j conj(v_j)) u_i.
Eigen::VectorXcd apply_B(const Linearization& lin, int i, int j, const Eigen::VectorXcd& v_j,
                         const Eigen::VectorXcd& u_i);

/// (D^2 L V)_i = A_i v_i + sum_j B_ij(v_j, phi_i) - lambda_i M v_i, matrix-free in the
/// coupling terms.
Eigen::MatrixXcd apply_hess_lagrangian(const Linearization& lin, const MultiplierDiag& lambda,
                                       const Eigen::MatrixXcd& v);

/// Real pairing <f, w> = Re(w^H f), summed over columns.
double pairing(const Eigen::MatrixXcd& f, const Eigen::MatrixXcd& w);

struct MetricSolve {
  Eigen::MatrixXcd x;
  int cg_iters = 0;
};

/// Component metric operators G_j at a linearization. For the Lagrangian metric
/// the real-linear map v -> A_j v + B_jj(v, phi_j) - w lambda_j M v is stored as
/// two complex matrices on the FEM pattern acting on Re v and Im v.
class MetricOperator {
 public:
  MetricOperator(const Linearization& lin, const MetricSelector& sel);

  bool complex_linear() const { return std::holds_alternative<EnergyAdaptive>(sel_); }
  const MetricSelector& selector() const { return sel_; }
  LinearMap map(int j) const;
  Eigen::VectorXcd apply(int j, const Eigen::VectorXcd& v) const;
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& v) const;
  /// Componentwise G_j^{-1} rhs_j by PCG with the ILU0 preconditioner. Throws
  /// IndefiniteMetric when CG meets non-positive curvature.
  /// `x0` is an optional starting guess (same shape as rhs).
  MetricSolve solve(const Eigen::MatrixXcd& rhs, double rel_tol, int max_iter = 5000,
                    const Eigen::MatrixXcd* x0 = nullptr) const;
  Eigen::VectorXcd solve(int j, const Eigen::VectorXcd& rhs, double rel_tol, int* iters, int max_iter = 5000,
                         const Eigen::VectorXcd* x0 = nullptr) const;

 private:
  const Linearization* lin_;
  MetricSelector sel_;
  std::vector<SparseHermitian> re_part_;  // acts on Re v
  std::vector<SparseHermitian> im_part_;  // acts on Im v
};

Eigen::MatrixXcd apply_metric(const Linearization& lin, const MetricSelector& sel,
                              const Eigen::MatrixXcd& v);
MetricSolve solve_metric(const Linearization& lin, const MetricSelector& sel,
                         const Eigen::MatrixXcd& rhs, double rel_tol);

}  // namespace gperot
