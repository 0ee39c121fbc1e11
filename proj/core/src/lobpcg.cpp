#include "gperot/lobpcg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace gperot {

namespace {

Eigen::MatrixXcd gram(const Eigen::MatrixXcd& x, const Eigen::MatrixXcd& y, Linearity mode) {
  Eigen::MatrixXcd g = x.adjoint() * y;
  if (mode == Linearity::Real) g = g.real().cast<cplx>();
  return g;
}

struct Eig {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
};

Eig hermitian_eig(const Eigen::MatrixXcd& g, Linearity mode) {
  Eig out;
  if (mode == Linearity::Real) {
    const Eigen::MatrixXd gr = 0.5 * (g.real() + g.real().transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gr);
    out.values = es.eigenvalues();
    out.vectors = es.eigenvectors().cast<cplx>();
  } else {
    const Eigen::MatrixXcd gh = 0.5 * (g + g.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gh);
    out.values = es.eigenvalues();
    out.vectors = es.eigenvectors();
  }
  return out;
}

// Rayleigh-Ritz on span(S): returns coefficients C (B-orthonormal Ritz vectors
// S*C) and Ritz values in ascending order.
Eig rayleigh_ritz(const Eigen::MatrixXcd& s, const Eigen::MatrixXcd& as, const Eigen::MatrixXcd& bs,
                  Linearity mode) {
  Eigen::MatrixXcd gb = gram(s, bs, mode);
  const Index m = gb.rows();
  Eigen::VectorXd dscale(m);
  for (Index i = 0; i < m; ++i) {
    const double v = gb(i, i).real();
    dscale[i] = v > 0.0 ? 1.0 / std::sqrt(v) : 0.0;
  }
  const Eigen::MatrixXcd dm = dscale.cast<cplx>().asDiagonal();
  const Eig eb = hermitian_eig(dm * gb * dm, mode);
  const double top = eb.values.maxCoeff();
  std::vector<Index> keep;
  for (Index i = 0; i < m; ++i) {
    if (eb.values[i] > 1e-13 * top) keep.push_back(i);
  }
  Eigen::MatrixXcd t(m, keep.size());
  for (std::size_t c = 0; c < keep.size(); ++c) {
    t.col(c) = dm * eb.vectors.col(keep[c]) / std::sqrt(eb.values[keep[c]]);
  }
  const Eigen::MatrixXcd ga = gram(s, as, mode);
  const Eig ea = hermitian_eig(t.adjoint() * ga * t, mode);
  Eig out;
  out.values = ea.values;
  out.vectors = t * ea.vectors;
  return out;
}

}  // namespace

Lobpcg::Lobpcg(Index dim, BlockOp a, BlockOp b) : dim_(dim), a_(std::move(a)), b_(std::move(b)) {}

void Lobpcg::set_constraints(Eigen::MatrixXcd y, const BlockOp& c) {
  y_ = std::move(y);
  cy_ = c ? c(y_) : y_;
}

Eigen::MatrixXcd Lobpcg::project(const Eigen::MatrixXcd& x, Linearity mode) const {
  if (y_.cols() == 0) return x;
  const Eigen::MatrixXcd g = gram(y_, cy_, mode);
  const Eigen::MatrixXcd coef = g.ldlt().solve(gram(cy_, x, mode));
  return x - y_ * coef;
}

Eigen::MatrixXcd Lobpcg::project_dual(const Eigen::MatrixXcd& r, Linearity mode) const {
  if (y_.cols() == 0) return r;
  const Eigen::MatrixXcd g = gram(y_, cy_, mode);
  const Eigen::MatrixXcd coef = g.ldlt().solve(gram(y_, r, mode));
  return r - cy_ * coef;
}

LobpcgResult Lobpcg::solve(const LobpcgOptions& opt) const {
  const Linearity mode = opt.mode;
  const int nev = opt.nev;
  const int bs = std::max(opt.block > 0 ? opt.block : std::max(nev, 4), nev);
  if (nev < 1 || bs > dim_) throw DimensionError("lobpcg: block size exceeds dimension");
  const double sign = opt.largest ? -1.0 : 1.0;
  auto apply_a = [&](const Eigen::MatrixXcd& x) -> Eigen::MatrixXcd { return sign * a_(x); };

  Eigen::MatrixXcd x;
  if (x0_.cols() > 0) {
    x = x0_.leftCols(std::min<Index>(x0_.cols(), bs));
  }
  if (x.cols() < bs) {
    std::mt19937 rng(opt.seed);
    std::normal_distribution<double> nd;
    Eigen::MatrixXcd extra(dim_, bs - x.cols());
    for (Index i = 0; i < extra.size(); ++i) {
      extra.data()[i] = cplx(nd(rng), nd(rng));
    }
    Eigen::MatrixXcd all(dim_, bs);
    all << x, extra;
    x = all;
  }
  x = project(x, mode);
  Eigen::MatrixXcd ax = apply_a(x), bx = b_(x);
  {
    const Eig rr = rayleigh_ritz(x, ax, bx, mode);
    const Index k = std::min<Index>(bs, rr.vectors.cols());
    const Eigen::MatrixXcd c = rr.vectors.leftCols(k);
    x = x * c;
    ax = ax * c;
    bx = bx * c;
  }
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(x.cols());
  for (Index i = 0; i < x.cols(); ++i) theta[i] = gram(x.col(i), ax.col(i), mode)(0, 0).real();

  Eigen::MatrixXcd p, ap, bp;
  LobpcgResult res;
  res.residuals = Eigen::VectorXd::Constant(x.cols(), std::numeric_limits<double>::infinity());
  int it = 0;
  for (;; ++it) {
    const Eigen::MatrixXcd r = project_dual(ax - bx * theta.cast<cplx>().asDiagonal(), mode);
    std::vector<Index> active;
    bool all_conv = true;
    for (Index i = 0; i < x.cols(); ++i) {
      const double scale = std::max(std::abs(theta[i]), 1e-300) * bx.col(i).norm();
      res.residuals[i] = r.col(i).norm() / scale;
      const bool ok = res.residuals[i] <= opt.tol;
      if (i < nev && !ok) all_conv = false;
      if (!ok) active.push_back(i);
    }
    if (all_conv || it >= opt.max_iter) {
      res.converged = all_conv;
      break;
    }
    Eigen::MatrixXcd w(dim_, active.size());
    for (std::size_t c = 0; c < active.size(); ++c) w.col(c) = r.col(active[c]);
    if (t_) w = t_(w);
    w = project(w, mode);
    Eigen::MatrixXcd aw = apply_a(w), bw = b_(w);
    // W and P against the B-orthonormal X, twice, then unit B-norm columns;
    // raw Gram matrices stall the residual near sqrt(eps)
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::MatrixXcd cw = gram(bx, w, mode);
      w -= x * cw;
      aw -= ax * cw;
      bw -= bx * cw;
      if (p.cols() > 0) {
        const Eigen::MatrixXcd cp = gram(bx, p, mode);
        p -= x * cp;
        ap -= ax * cp;
        bp -= bx * cp;
      }
    }
    auto unit_columns = [mode](Eigen::MatrixXcd& v, Eigen::MatrixXcd& av, Eigen::MatrixXcd& bv) {
      for (Index c = 0; c < v.cols(); ++c) {
        const double nb = gram(v.col(c), bv.col(c), mode)(0, 0).real();
        if (!(nb > 0.0)) continue;
        const double f = 1.0 / std::sqrt(nb);
        v.col(c) *= f;
        av.col(c) *= f;
        bv.col(c) *= f;
      }
    };
    unit_columns(w, aw, bw);
    unit_columns(p, ap, bp);

    const Index nx = x.cols(), nw = w.cols(), np = p.cols();
    Eigen::MatrixXcd s(dim_, nx + nw + np), as(dim_, nx + nw + np), bsm(dim_, nx + nw + np);
    s << x, w, p;
    as << ax, aw, ap;
    bsm << bx, bw, bp;
    const Eig rr = rayleigh_ritz(s, as, bsm, mode);
    const Index k = std::min<Index>(bs, rr.vectors.cols());
    const Eigen::MatrixXcd c = rr.vectors.leftCols(k);
    const Eigen::MatrixXcd cwp = c.bottomRows(nw + np);
    p = s.rightCols(nw + np) * cwp;
    ap = as.rightCols(nw + np) * cwp;
    bp = bsm.rightCols(nw + np) * cwp;
    x = s * c;
    ax = as * c;
    bx = bsm * c;
    theta = rr.values.head(k);
    if ((it + 1) % 25 == 0) {
      x = project(x, mode);
      ax = apply_a(x);
      bx = b_(x);
    }
  }
  res.iterations = it;
  res.values = sign * theta.head(nev);
  res.vectors = x.leftCols(nev);
  res.residuals = res.residuals.head(nev).eval();
  return res;
}

}  // namespace gperot
