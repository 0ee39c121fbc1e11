#include "gperot/pcg.hpp"

#include <cmath>

namespace gperot {

const char* to_string(Breakdown b) {
  switch (b) {
    case Breakdown::None: return "none";
    case Breakdown::Indefinite: return "indefinite";
    case Breakdown::Stagnation: return "stagnation";
  }
  return "?";
}

cplx inner(Linearity lin, const Eigen::VectorXcd& x, const Eigen::VectorXcd& y) {
  const cplx v = x.dot(y);
  return lin == Linearity::Complex ? v : cplx(v.real(), 0.0);
}

PcgResult solve_pcg(const LinearMap& a, const Eigen::VectorXcd& b, const Preconditioner& pre,
                    const PcgOptions& opt, const Eigen::VectorXcd* x0) {
  const Index n = a.dim;
  if (b.size() != n) throw DimensionError("solve_pcg: right-hand side length mismatch");
  PcgResult res;
  auto& rep = res.report;
  const double bnorm = b.norm();
  res.x = x0 ? *x0 : Eigen::VectorXcd::Zero(n);
  if (res.x.size() != n) throw DimensionError("solve_pcg: initial guess length mismatch");
  if (bnorm == 0.0) {
    res.x.setZero();
    return res;
  }

  Eigen::VectorXcd r = b;
  Eigen::VectorXcd ap(n);
  if (x0) {
    a.apply(res.x, ap);
    r -= ap;
  }
  Eigen::VectorXcd z(n);
  auto precondition = [&](const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
    if (pre) pre(in, out); else out = in;
  };
  precondition(r, z);
  double rz = inner(a.linearity, r, z).real();

  double ref = bnorm;
  if (!opt.true_residual) {
    Eigen::VectorXcd pb(n);
    precondition(b, pb);
    ref = std::sqrt(std::max(b.dot(pb).real(), 0.0));
    if (ref == 0.0) ref = bnorm;
  }
  auto measure = [&]() {
    return opt.true_residual ? r.norm() / ref : std::sqrt(std::max(rz, 0.0)) / ref;
  };

  Eigen::VectorXcd p = z;
  rep.rel_residual = measure();
  int it = 0;
  while (rep.rel_residual > opt.rel_tol || it < opt.min_iter) {
    if (it >= opt.max_iter) {
      rep.breakdown = Breakdown::Stagnation;
      break;
    }
    if (rz == 0.0 && rep.rel_residual <= opt.rel_tol) break;  // exact start, nothing to do
    if (rz <= 0.0) {
      rep.breakdown = Breakdown::Indefinite;
      break;
    }
    a.apply(p, ap);
    const double pap = inner(a.linearity, p, ap).real();
    if (!(pap > 0.0)) {
      rep.breakdown = Breakdown::Indefinite;
      break;
    }
    const double alpha = rz / pap;
    res.x += alpha * p;
    r -= alpha * ap;
    precondition(r, z);
    const double rz_new = inner(a.linearity, r, z).real();
    ++it;
    const double beta = rz_new / rz;
    rz = rz_new;
    rep.rel_residual = measure();
    p = z + beta * p;
  }
  rep.iterations = it;
  a.apply(res.x, ap);
  rep.true_rel_residual = (b - ap).norm() / bnorm;
  return res;
}

}  // namespace gperot
