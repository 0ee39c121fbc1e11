#include "gperot/spectral.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace gperot {

namespace {

BlockOp columnwise(std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)> f) {
  return [f = std::move(f)](const Eigen::MatrixXcd& x) {
    Eigen::MatrixXcd y(x.rows(), x.cols());
    for (Index c = 0; c < x.cols(); ++c) y.col(c) = f(x.col(c));
    return y;
  };
}

BlockOp ilu_block(const GpeProblem& prob, int j) {
  const Ilu0* f = &prob.ilu(j);
  return columnwise([f](const Eigen::VectorXcd& r) { return f->apply(r); });
}

// Operators on n*p stacked vectors built from per-component maps.
BlockOp stacked(Index n, int p, std::function<Eigen::MatrixXcd(const Eigen::MatrixXcd&)> frame_op) {
  return [n, p, op = std::move(frame_op)](const Eigen::MatrixXcd& x) {
    Eigen::MatrixXcd y(x.rows(), x.cols());
    for (Index c = 0; c < x.cols(); ++c) {
      const Eigen::Map<const Eigen::MatrixXcd> v(x.col(c).data(), n, p);
      const Eigen::MatrixXcd out = op(v);
      y.col(c) = Eigen::Map<const Eigen::VectorXcd>(out.data(), n * p);
    }
    return y;
  };
}

EigReport finish(const LobpcgResult& r, const SpectralOptions& opt, const std::string& what) {
  if (!r.converged && opt.require_convergence) {
    std::ostringstream os;
    os << what << ": no convergence after " << r.iterations << " iterations (worst residual "
       << r.residuals.maxCoeff() << ")";
    throw ConvergenceError(os.str());
  }
  return EigReport{r.values, r.vectors, r.residuals, r.iterations};
}

LobpcgOptions lobpcg_options(const SpectralOptions& opt, int k, Linearity mode) {
  LobpcgOptions lo;
  lo.nev = k;
  lo.block = opt.block;
  lo.tol = opt.tol;
  lo.max_iter = opt.max_iter;
  lo.mode = mode;
  lo.seed = opt.seed;
  return lo;
}

}  // namespace

EigReport eigs_component_A(const Linearization& lin, int j, int k, const SpectralOptions& opt) {
  const auto& prob = *lin.problem;
  const SparseHermitian* a = &lin.A.at(j);
  const RealSparse* m = &prob.M();
  Lobpcg solver(prob.n(), columnwise([a](const Eigen::VectorXcd& v) { return (*a) * v; }),
                columnwise([m](const Eigen::VectorXcd& v) { return (*m) * v; }));
  solver.set_preconditioner(ilu_block(prob, j));
  return finish(solver.solve(lobpcg_options(opt, k, Linearity::Complex)), opt, "eigs_component_A");
}

EigReport eigs_projected_hessian(const Linearization& lin, int j, int k, const SpectralOptions& opt) {
  const auto& prob = *lin.problem;
  auto f = std::make_shared<MetricOperator>(lin, Lagrangian{0.0});
  const RealSparse* m = &prob.M();
  const BlockOp mass = columnwise([m](const Eigen::VectorXcd& v) { return (*m) * v; });
  Lobpcg solver(prob.n(), columnwise([f, j](const Eigen::VectorXcd& v) { return f->apply(j, v); }), mass);
  solver.set_preconditioner(ilu_block(prob, j));
  solver.set_constraints(lin.phi.col(j), mass);
  return finish(solver.solve(lobpcg_options(opt, k, Linearity::Real)), opt, "eigs_projected_hessian");
}

EigReport eigs_horizontal_pencil(const Linearization& lin, const MetricSelector& sel, Extreme which,
                                 int k, const SpectralOptions& opt) {
  const auto& prob = *lin.problem;
  const Index n = prob.n();
  const int p = prob.p();
  auto g = std::make_shared<MetricOperator>(lin, sel);
  const MultiplierDiag lambda = lin.lambda;
  const Linearization* lp = &lin;
  BlockOp hess = stacked(n, p, [lp, lambda](const Eigen::MatrixXcd& v) {
    return apply_hess_lagrangian(*lp, lambda, v);
  });
  BlockOp metric = stacked(n, p, [g](const Eigen::MatrixXcd& v) { return g->apply(v); });
  BlockOp mass = stacked(n, p, [&prob](const Eigen::MatrixXcd& v) { return prob.apply_mass(v); });
  std::vector<const Ilu0*> ilus;
  for (int j = 0; j < p; ++j) ilus.push_back(&prob.ilu(j));
  BlockOp pre = stacked(n, p, [ilus](const Eigen::MatrixXcd& v) {
    Eigen::MatrixXcd out(v.rows(), v.cols());
    for (Index j = 0; j < v.cols(); ++j) out.col(j) = ilus[j]->apply(Eigen::VectorXcd(v.col(j)));
    return out;
  });

  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n * p, 2 * p);
  for (int j = 0; j < p; ++j) {
    y.block(j * n, 2 * j, n, 1) = lin.phi.col(j);
    y.block(j * n, 2 * j + 1, n, 1) = cplx(0.0, 1.0) * lin.phi.col(j);
  }
  Lobpcg solver(n * p, hess, metric);
  solver.set_preconditioner(pre);
  solver.set_constraints(y, mass);
  LobpcgOptions lo = lobpcg_options(opt, k, Linearity::Real);
  lo.largest = which == Extreme::Largest;
  return finish(solver.solve(lo), opt, "eigs_horizontal_pencil");
}

RatePrediction predicted_rate(double tau, double eta_inf, double eta_sup) {
  if (!(eta_inf > 0.0) || !(eta_sup >= eta_inf)) {
    throw Error("predicted_rate: need 0 < eta_inf <= eta_sup");
  }
  if (!(tau > 0.0)) throw Error("predicted_rate: tau must be positive");
  RatePrediction r;
  r.tau = tau;
  r.eta_inf = eta_inf;
  r.eta_sup = eta_sup;
  r.rho = std::max(1.0 - tau * eta_inf, tau * eta_sup - 1.0);
  r.tau_limit = 2.0 / eta_sup;
  r.admissible = tau < r.tau_limit;
  return r;
}

std::vector<ConditionEntry> condition_sweep(const Linearization& lin, const std::vector<double>& omegas,
                                            const SpectralOptions& opt) {
  const auto& prob = *lin.problem;
  const RealSparse* m = &prob.M();
  const BlockOp mass = columnwise([m](const Eigen::VectorXcd& v) { return (*m) * v; });
  Eigen::VectorXd mdiag(prob.n());
  for (Index i = 0; i < prob.n(); ++i) mdiag[i] = m->coeff(i, i);
  const BlockOp jacobi = [mdiag](const Eigen::MatrixXcd& x) -> Eigen::MatrixXcd {
    return mdiag.cwiseInverse().cast<cplx>().asDiagonal() * x;
  };
  LobpcgOptions lo = lobpcg_options(opt, 1, Linearity::Real);

  // continuation: each solve starts from the previous omega's eigenvector
  std::vector<Eigen::MatrixXcd> seed_low(prob.p()), seed_high(prob.p());
  std::vector<ConditionEntry> out;
  for (double om : omegas) {
    ConditionEntry e;
    e.omega = om;
    auto g = std::make_shared<MetricOperator>(lin, Lagrangian{om});
    for (int j = 0; j < prob.p(); ++j) {
      const BlockOp gop = columnwise([g, j](const Eigen::VectorXcd& v) { return g->apply(j, v); });
      Lobpcg low(prob.n(), gop, mass);
      low.set_preconditioner(ilu_block(prob, j));
      if (seed_low[j].size() > 0) low.set_initial(seed_low[j]);
      const EigReport lmin = finish(low.solve(lo), opt, "condition_sweep(lambda_min)");
      seed_low[j] = lmin.vectors;
      const double lo_val = lmin.values[0];
      e.lambda_min.push_back(lo_val);
      if (!(lo_val > 0.0)) {
        e.indefinite.push_back(true);
        e.lambda_max.push_back(std::numeric_limits<double>::quiet_NaN());
        e.kappa.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      Lobpcg high(prob.n(), mass, gop);
      high.set_preconditioner(jacobi);
      if (seed_high[j].size() > 0) high.set_initial(seed_high[j]);
      const EigReport inv = finish(high.solve(lo), opt, "condition_sweep(lambda_max)");
      seed_high[j] = inv.vectors;
      const double hi_val = 1.0 / inv.values[0];
      e.indefinite.push_back(false);
      e.lambda_max.push_back(hi_val);
      e.kappa.push_back(hi_val / lo_val);
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace gperot
