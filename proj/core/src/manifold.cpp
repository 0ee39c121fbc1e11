#include "gperot/manifold.hpp"

#include <cmath>

namespace gperot {

GramDiag gram(const Discretization& disc, const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("gram: shape mismatch");
  GramDiag g;
  g.complex.resize(a.cols());
  for (Index j = 0; j < a.cols(); ++j) {
    const Eigen::VectorXcd aj = a.col(j);
    g.complex[j] = b.col(j).dot(disc.mass * aj);
  }
  return g;
}

PFrame retract(const PFrame& phi, const Eigen::MatrixXcd& z) {
  const auto& d = phi.disc();
  if (z.rows() != phi.n() || z.cols() != phi.p()) throw DimensionError("retract: shape mismatch");
  Eigen::MatrixXcd w = phi.coeffs() + z;
  for (int j = 0; j < phi.p(); ++j) {
    const Eigen::VectorXcd c = w.col(j);
    const double m = c.dot(d.mass * c).real();
    if (!(m > 0.0) || !std::isfinite(m)) {
      throw RetractionError("retract: column " + std::to_string(j + 1) + " has zero norm");
    }
    w.col(j) *= std::sqrt(d.spec.components[j].mass / m);
  }
  return PFrame(phi.disc_ptr(), std::move(w));
}

Eigen::MatrixXcd project_tangent(const PFrame& phi, const Eigen::MatrixXcd& v) {
  const auto& d = phi.disc();
  const GramDiag g = gram(d, v, phi.coeffs());
  Eigen::MatrixXcd out = v;
  for (int j = 0; j < phi.p(); ++j) {
    out.col(j) -= phi.col(j) * (g.complex[j].real() / d.spec.components[j].mass);
  }
  return out;
}

Eigen::MatrixXcd project_horizontal(const PFrame& phi, const Eigen::MatrixXcd& v) {
  const auto& d = phi.disc();
  const GramDiag g = gram(d, v, phi.coeffs());
  Eigen::MatrixXcd out = v;
  for (int j = 0; j < phi.p(); ++j) {
    out.col(j) -= phi.col(j) * (g.complex[j] / d.spec.components[j].mass);
  }
  return out;
}

Gradient riemannian_grad(const Linearization& lin, const MetricOperator& metric, double rel_tol, int max_iter,
                         const Gradient* previous) {
  Gradient g;
  const int p = lin.p();
  const bool reuse = previous && previous->u.rows() == lin.phi.rows() && previous->u.cols() == p &&
                     previous->y.rows() == lin.phi.rows() && previous->y.cols() == p;
  if (metric.complex_linear()) {
    // A phi ~ lambda M phi near a critical point, so phi / lambda is close to A^{-1} M phi.
    Eigen::MatrixXcd guess = lin.phi;
    for (int j = 0; j < p; ++j) {
      if (lin.lambda[j] > 0.0) guess.col(j) /= lin.lambda[j];
    }
    const MetricSolve us = metric.solve(lin.M_phi, rel_tol, max_iter, &guess);
    g.u = us.x;
    g.cg_iters = us.cg_iters;
    g.y = lin.phi;
  } else {
    const MetricSolve us = metric.solve(lin.M_phi, rel_tol, max_iter, reuse ? &previous->u : nullptr);
    const MetricSolve ys = metric.solve(lin.A_phi, rel_tol, max_iter, reuse ? &previous->y : nullptr);
    g.u = us.x;
    g.y = ys.x;
    g.cg_iters = us.cg_iters + ys.cg_iters;
  }
  const Eigen::MatrixXcd& y = g.y;
  g.sigma.resize(p);
  g.grad.resize(lin.phi.rows(), p);
  for (int j = 0; j < p; ++j) {
    const double num = lin.M_phi.col(j).dot(y.col(j)).real();
    const double den = lin.M_phi.col(j).dot(g.u.col(j)).real();
    const double scale = lin.problem->mass(j);
    if (!(std::abs(den) > 1e-30 * scale)) {
      throw DegenerateState("riemannian_grad: vanishing Gram denominator for component " +
                            std::to_string(j + 1));
    }
    g.sigma[j] = num / den;
    g.grad.col(j) = y.col(j) - g.u.col(j) * g.sigma[j];
  }
  return g;
}

Gradient riemannian_grad(const GpeProblem& prob, const PFrame& phi, const MetricSelector& sel,
                         double rel_tol) {
  const Linearization lin = linearize(prob, phi);
  const MetricOperator metric(lin, sel);
  return riemannian_grad(lin, metric, rel_tol);
}

Alignment phase_align(const Eigen::MatrixXcd& v, const PFrame& ref) {
  const GramDiag g = gram(ref.disc(), v, ref.coeffs());
  Alignment a;
  a.theta.resize(ref.p());
  a.aligned = v;
  for (int j = 0; j < ref.p(); ++j) {
    const double mag = std::abs(g.complex[j]);
    if (!(mag > 0.0)) {
      throw AlignmentError("phase_align: zero overlap with the reference in component " +
                           std::to_string(j + 1));
    }
    a.theta[j] = std::conj(g.complex[j]) / mag;
    a.aligned.col(j) *= a.theta[j];
  }
  return a;
}

double frame_norm(const Discretization& d, const Eigen::MatrixXcd& v, NormKind kind) {
  double s = 0.0;
  for (Index j = 0; j < v.cols(); ++j) {
    const Eigen::VectorXcd c = v.col(j);
    const double mm = c.dot(d.mass * c).real();
    switch (kind) {
      case NormKind::L: s += mm; break;
      case NormKind::H: s += mm + c.dot(d.stiffness * c).real(); break;
      case NormKind::R: {
        const double om = d.spec.components[j].omega;
        const cplx rot = c.dot(d.rotation * c);
        // Re(c^H (i W R) c) = -W Im(c^H R c)
        s += c.dot(d.stiffness * c).real() + c.dot(d.potential_mass[j] * c).real() - om * rot.imag();
        break;
      }
    }
  }
  return std::sqrt(std::max(s, 0.0));
}

double a_norm(const Linearization& lin, const Eigen::MatrixXcd& v) {
  double s = 0.0;
  for (Index j = 0; j < v.cols(); ++j) {
    const Eigen::VectorXcd c = v.col(j);
    s += c.dot(lin.A[j] * c).real();
  }
  return std::sqrt(std::max(s, 0.0));
}

double aligned_distance(const PFrame& phi, const PFrame& ref, NormKind kind) {
  const Alignment a = phase_align(phi.coeffs(), ref);
  return frame_norm(ref.disc(), a.aligned - ref.coeffs(), kind);
}

}  // namespace gperot
