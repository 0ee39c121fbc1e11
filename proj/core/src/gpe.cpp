#include "gperot/gpe.hpp"

#include <cmath>
#include <sstream>

namespace gperot {

namespace {

Eigen::VectorXcd mul(const RealSparse& a, const Eigen::VectorXcd& x) { return a * x; }
Eigen::VectorXcd mul(const SparseHermitian& a, const Eigen::VectorXcd& x) { return a * x; }

void check_frame(const GpeProblem& prob, const PFrame& phi) {
  if (phi.n() != prob.n() || phi.p() != prob.p()) {
    std::ostringstream os;
    os << "frame is " << phi.n() << "x" << phi.p() << ", problem expects " << prob.n() << "x"
       << prob.p();
    throw DimensionError(os.str());
  }
}

SparseHermitian add_density(const SparseHermitian& lin, const RealSparse& w) {
  SparseHermitian out(lin.shared_pattern());
  auto o = out.values();
  auto l = lin.values();
  auto wv = w.values();
  for (std::size_t k = 0; k < o.size(); ++k) o[k] = l[k] + wv[k];
  return out;
}

std::vector<DensityField> coupled_densities(const GpeProblem& prob,
                                            const std::vector<DensityField>& dens) {
  const int p = prob.p();
  std::vector<DensityField> rho(p, DensityField(dens.empty() ? 0 : dens[0].size(), 0.0));
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < p; ++i) {
      const double k = prob.kappa(i, j);
      if (k == 0.0) continue;
      for (std::size_t q = 0; q < rho[j].size(); ++q) rho[j][q] += k * dens[i][q];
    }
  }
  return rho;
}

}  // namespace

PFrame::PFrame(DiscretizationPtr disc, Eigen::MatrixXcd coeffs)
    : disc_(std::move(disc)), coeffs_(std::move(coeffs)) {
  if (disc_ && coeffs_.rows() != disc_->n()) {
    throw DimensionError("PFrame: coefficient rows do not match the discretization");
  }
}

Eigen::VectorXd PFrame::masses() const {
  Eigen::VectorXd m(p());
  for (int j = 0; j < p(); ++j) {
    const Eigen::VectorXcd c = coeffs_.col(j);
    m[j] = c.dot(disc_->mass * c).real();
  }
  return m;
}

bool PFrame::feasible(double rel_tol) const {
  const Eigen::VectorXd m = masses();
  for (int j = 0; j < p(); ++j) {
    const double nj = disc_->spec.components[j].mass;
    if (std::abs(m[j] - nj) > rel_tol * nj) return false;
  }
  return true;
}

void validate(const MetricSelector& sel) {
  if (const auto* l = std::get_if<Lagrangian>(&sel)) {
    if (!(l->omega >= 0.0 && l->omega < 1.0)) {
      throw ConfigError("Lagrangian metric needs omega in [0, 1)");
    }
  }
}

std::string describe(const MetricSelector& sel) {
  if (std::holds_alternative<EnergyAdaptive>(sel)) return "energy-adaptive";
  std::ostringstream os;
  os << "lagrangian(omega=" << std::get<Lagrangian>(sel).omega << ")";
  return os.str();
}

GpeProblem::GpeProblem(DiscretizationPtr disc) : disc_(std::move(disc)) {
  const auto& d = *disc_;
  for (int j = 0; j < d.p(); ++j) {
    const double om = d.spec.components[j].omega;
    SparseHermitian l(d.pattern);
    auto v = l.values();
    auto s = d.stiffness.values();
    auto pm = d.potential_mass[j].values();
    auto r = d.rotation.values();
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = cplx(s[k] + pm[k], om * r[k]);
    linear_.push_back(std::move(l));
    ilu_.push_back(std::make_unique<Ilu0>(linear_.back()));
  }
}

Eigen::VectorXd GpeProblem::masses() const {
  Eigen::VectorXd m(p());
  for (int j = 0; j < p(); ++j) m[j] = mass(j);
  return m;
}

Preconditioner GpeProblem::preconditioner(int j) const {
  const Ilu0* f = ilu_[j].get();
  return [f](const Eigen::VectorXcd& r, Eigen::VectorXcd& z) {
    z.resize(r.size());
    f->apply(std::span<const cplx>(r.data(), r.size()), std::span<cplx>(z.data(), z.size()));
  };
}

void GpeProblem::rebuild_preconditioners(const PFrame& at) {
  const auto a = assemble_A(*this, at);
  for (int j = 0; j < p(); ++j) ilu_[j] = std::make_unique<Ilu0>(a[j]);
  source_ = PreconditionerSource::InitialState;
}

Eigen::MatrixXcd GpeProblem::apply_mass(const Eigen::MatrixXcd& v) const {
  Eigen::MatrixXcd out(v.rows(), v.cols());
  for (Index j = 0; j < v.cols(); ++j) out.col(j) = mul(M(), v.col(j));
  return out;
}

Linearization linearize(const GpeProblem& prob, const PFrame& phi) {
  check_frame(prob, phi);
  const auto& d = prob.disc();
  const int p = prob.p();
  Linearization lin;
  lin.problem = &prob;
  lin.phi = phi.coeffs();
  lin.phi_q.resize(p);
  lin.density.resize(p);
  for (int j = 0; j < p; ++j) {
    lin.phi_q[j] = eval_quadrature(d, lin.phi.col(j));
    lin.density[j].resize(lin.phi_q[j].size());
    for (std::size_t q = 0; q < lin.phi_q[j].size(); ++q) lin.density[j][q] = std::norm(lin.phi_q[j][q]);
  }
  lin.rho = coupled_densities(prob, lin.density);

  const int ppe = d.points_per_element();
  lin.quartic = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = i; j < p; ++j) {
      double s = 0.0;
      for (Index q = 0; q < d.num_quad_points(); ++q) {
        s += d.ref_weight[q % ppe] * lin.density[i][q] * lin.density[j][q];
      }
      lin.quartic(i, j) = lin.quartic(j, i) = s;
    }
  }

  lin.A_phi.resize(prob.n(), p);
  lin.M_phi = prob.apply_mass(lin.phi);
  lin.lambda.resize(p);
  double e = 0.0;
  for (int j = 0; j < p; ++j) {
    const Eigen::VectorXcd c = lin.phi.col(j);
    lin.A.push_back(add_density(prob.linear_part(j), assemble_weighted_mass(d, lin.rho[j])));
    lin.A_phi.col(j) = mul(lin.A[j], c);
    lin.lambda[j] = c.dot(lin.A_phi.col(j)).real() / prob.mass(j);
    e += 0.5 * c.dot(mul(prob.linear_part(j), c)).real();
  }
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) e += 0.25 * prob.kappa(i, j) * lin.quartic(i, j);
  }
  lin.energy = e;
  return lin;
}

double energy(const GpeProblem& prob, const PFrame& phi) {
  check_frame(prob, phi);
  double e = 0.0;
  for (int j = 0; j < prob.p(); ++j) {
    const Eigen::VectorXcd c = phi.col(j);
    e += 0.5 * c.dot(mul(prob.linear_part(j), c)).real();
  }
  const Eigen::MatrixXd q = quartic_interactions(prob.disc(), phi.coeffs());
  for (int i = 0; i < prob.p(); ++i) {
    for (int j = 0; j < prob.p(); ++j) e += 0.25 * prob.kappa(i, j) * q(i, j);
  }
  return e;
}

std::vector<SparseHermitian> assemble_A(const GpeProblem& prob, const PFrame& phi) {
  check_frame(prob, phi);
  const auto rho = coupled_densities(prob, densities(prob.disc(), phi.coeffs()));
  std::vector<SparseHermitian> out;
  for (int j = 0; j < prob.p(); ++j) {
    out.push_back(add_density(prob.linear_part(j), assemble_weighted_mass(prob.disc(), rho[j])));
  }
  return out;
}

MultiplierDiag lagrange_multipliers(const GpeProblem& prob, const PFrame& phi) {
  const auto a = assemble_A(prob, phi);
  MultiplierDiag lam(prob.p());
  for (int j = 0; j < prob.p(); ++j) {
    const Eigen::VectorXcd c = phi.col(j);
    lam[j] = c.dot(mul(a[j], c)).real() / prob.mass(j);
  }
  return lam;
}

Residual residual(const Linearization& lin) {
  const auto& prob = *lin.problem;
  Residual res;
  res.components.resize(prob.n(), lin.p());
  double s = 0.0;
  for (int j = 0; j < lin.p(); ++j) {
    res.components.col(j) = lin.A_phi.col(j) - lin.lambda[j] * lin.M_phi.col(j);
    const Eigen::VectorXcd rj = res.components.col(j);
    s += rj.dot(mul(prob.M(), rj)).real();
  }
  res.r = std::sqrt(std::max(s, 0.0));
  return res;
}

Residual residual(const GpeProblem& prob, const PFrame& phi) { return residual(linearize(prob, phi)); }

Eigen::VectorXcd apply_B(const Linearization& lin, int i, int j, const Eigen::VectorXcd& v_j,
                         const Eigen::VectorXcd& u_i) {
  const auto& d = lin.disc();
  const QuadField vq = eval_quadrature(d, v_j);
  const QuadField uq = eval_quadrature(d, u_i);
  const double k2 = 2.0 * lin.problem->kappa(i, j);
  QuadField f(vq.size());
  for (std::size_t q = 0; q < f.size(); ++q) {
    f[q] = k2 * (lin.phi_q[j][q] * std::conj(vq[q])).real() * uq[q];
  }
  return d.load(f);
}

Eigen::MatrixXcd apply_hess_lagrangian(const Linearization& lin, const MultiplierDiag& lambda,
                                       const Eigen::MatrixXcd& v) {
  const auto& prob = *lin.problem;
  const auto& d = lin.disc();
  const int p = lin.p();
  if (v.rows() != prob.n() || v.cols() != p || lambda.size() != p) {
    throw DimensionError("apply_hess_lagrangian: shape mismatch");
  }
  std::vector<DensityField> g(p);
  for (int j = 0; j < p; ++j) {
    const QuadField vq = eval_quadrature(d, v.col(j));
    g[j].resize(vq.size());
    for (std::size_t q = 0; q < vq.size(); ++q) g[j][q] = (lin.phi_q[j][q] * std::conj(vq[q])).real();
  }
  Eigen::MatrixXcd out(prob.n(), p);
  QuadField f(d.num_quad_points());
  for (int i = 0; i < p; ++i) {
    std::fill(f.begin(), f.end(), cplx{});
    for (int j = 0; j < p; ++j) {
      const double k2 = 2.0 * prob.kappa(i, j);
      if (k2 == 0.0) continue;
      for (std::size_t q = 0; q < f.size(); ++q) f[q] += k2 * g[j][q] * lin.phi_q[i][q];
    }
    const Eigen::VectorXcd vi = v.col(i);
    out.col(i) = mul(lin.A[i], vi) + d.load(f) - lambda[i] * mul(prob.M(), vi);
  }
  return out;
}

double pairing(const Eigen::MatrixXcd& f, const Eigen::MatrixXcd& w) {
  if (f.rows() != w.rows() || f.cols() != w.cols()) throw DimensionError("pairing: shape mismatch");
  double s = 0.0;
  for (Index j = 0; j < f.cols(); ++j) s += w.col(j).dot(f.col(j)).real();
  return s;
}

MetricOperator::MetricOperator(const Linearization& lin, const MetricSelector& sel)
    : lin_(&lin), sel_(sel) {
  validate(sel_);
  const auto* lag = std::get_if<Lagrangian>(&sel_);
  if (!lag) return;
  const auto& prob = *lin.problem;
  const auto& d = lin.disc();
  const auto mv = prob.M().values();
  for (int j = 0; j < lin.p(); ++j) {
    const double k2 = 2.0 * prob.kappa(j, j);
    const auto& pq = lin.phi_q[j];
    DensityField wrr(pq.size()), wri(pq.size()), wii(pq.size());
    for (std::size_t q = 0; q < pq.size(); ++q) {
      wrr[q] = k2 * pq[q].real() * pq[q].real();
      wri[q] = k2 * pq[q].real() * pq[q].imag();
      wii[q] = k2 * pq[q].imag() * pq[q].imag();
    }
    const RealSparse brr = assemble_weighted_mass_signed(d, wrr);
    const RealSparse bri = assemble_weighted_mass_signed(d, wri);
    const RealSparse bii = assemble_weighted_mass_signed(d, wii);
    const double shift = lag->omega * lin.lambda[j];
    SparseHermitian re(d.pattern), im(d.pattern);
    auto rv = re.values();
    auto iv = im.values();
    auto av = lin.A[j].values();
    for (std::size_t k = 0; k < rv.size(); ++k) {
      const cplx c = av[k] - shift * mv[k];
      rv[k] = c + cplx(brr.values()[k], bri.values()[k]);
      iv[k] = cplx(0.0, 1.0) * c + cplx(bri.values()[k], bii.values()[k]);
    }
    re_part_.push_back(std::move(re));
    im_part_.push_back(std::move(im));
  }
}

Eigen::VectorXcd MetricOperator::apply(int j, const Eigen::VectorXcd& v) const {
  if (complex_linear()) return mul(lin_->A[j], v);
  const auto& pat = re_part_[j].pattern();
  const cplx* rv = re_part_[j].values().data();
  const cplx* iv = im_part_[j].values().data();
  Eigen::VectorXcd out(v.size());
  for (Index r = 0; r < pat.rows; ++r) {
    cplx acc{};
    for (Index k = pat.row_ptr[r]; k < pat.row_ptr[r + 1]; ++k) {
      const cplx x = v[pat.col_idx[k]];
      acc += rv[k] * x.real() + iv[k] * x.imag();
    }
    out[r] = acc;
  }
  return out;
}

Eigen::MatrixXcd MetricOperator::apply(const Eigen::MatrixXcd& v) const {
  Eigen::MatrixXcd out(v.rows(), v.cols());
  for (Index j = 0; j < v.cols(); ++j) out.col(j) = apply(static_cast<int>(j), v.col(j));
  return out;
}

LinearMap MetricOperator::map(int j) const {
  LinearMap m;
  m.dim = lin_->problem->n();
  m.linearity = complex_linear() ? Linearity::Complex : Linearity::Real;
  m.apply = [this, j](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { y = apply(j, x); };
  return m;
}

Eigen::VectorXcd MetricOperator::solve(int j, const Eigen::VectorXcd& rhs, double rel_tol, int* iters,
                                       int max_iter, const Eigen::VectorXcd* x0) const {
  PcgOptions opt;
  opt.rel_tol = rel_tol;
  opt.max_iter = max_iter;
  // a start guess such as phi/lambda can already pass a loose tolerance while
  // being exactly the point where the gradient vanishes; always move off it
  if (x0) opt.min_iter = 1;
  PcgResult res = solve_pcg(map(j), rhs, lin_->problem->preconditioner(j), opt, x0);
  if (iters) *iters += res.report.iterations;
  if (res.report.breakdown == Breakdown::Indefinite) {
    throw IndefiniteMetric("metric " + describe(sel_) + " is not positive definite for component " +
                               std::to_string(j + 1),
                           j);
  }
  return std::move(res.x);
}

MetricSolve MetricOperator::solve(const Eigen::MatrixXcd& rhs, double rel_tol, int max_iter,
                                  const Eigen::MatrixXcd* x0) const {
  if (x0 && (x0->rows() != rhs.rows() || x0->cols() != rhs.cols())) {
    throw DimensionError("metric solve: initial guess shape mismatch");
  }
  MetricSolve out;
  out.x.resize(rhs.rows(), rhs.cols());
  for (Index j = 0; j < rhs.cols(); ++j) {
    const Eigen::VectorXcd guess = x0 ? Eigen::VectorXcd(x0->col(j)) : Eigen::VectorXcd();
    out.x.col(j) = solve(static_cast<int>(j), rhs.col(j), rel_tol, &out.cg_iters, max_iter, x0 ? &guess : nullptr);
  }
  return out;
}

Eigen::MatrixXcd apply_metric(const Linearization& lin, const MetricSelector& sel,
                              const Eigen::MatrixXcd& v) {
  return MetricOperator(lin, sel).apply(v);
}

MetricSolve solve_metric(const Linearization& lin, const MetricSelector& sel,
                         const Eigen::MatrixXcd& rhs, double rel_tol) {
  return MetricOperator(lin, sel).solve(rhs, rel_tol);
}

}  // namespace gperot
