#include "gperot/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace gperot {

namespace {

constexpr double kInnerTolCap = 0.1;

double m_norm(const Discretization& d, const Eigen::MatrixXcd& v) {
  return frame_norm(d, v, NormKind::L);
}

MetricSelector selector_for(Method m, double omega) {
  if (m == Method::EaRGD) return EnergyAdaptive{};
  return Lagrangian{omega};
}

}  // namespace

StepRule parse_step_rule(const std::string& text) {
  if (text == "ls" || text == "linesearch") return LineSearchStep{};
  if (text == "adaptive") return AdaptiveStep{};
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const std::string head = text.substr(0, colon);
    const std::string tail = text.substr(colon + 1);
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(tail, &used);
      if (used != tail.size()) throw std::invalid_argument(tail);
    } catch (const std::exception&) {
      throw ConfigError("bad step value in '" + text + "'");
    }
    if (!(v > 0.0)) throw ConfigError("step size must be positive in '" + text + "'");
    if (head == "fixed") return FixedStep{v};
    if (head == "adaptive") return AdaptiveStep{v};
  }
  throw ConfigError("unknown step rule '" + text + "' (expected fixed:F, ls or adaptive)");
}

std::string to_string(const StepRule& rule) {
  std::ostringstream os;
  os.precision(17);
  if (const auto* f = std::get_if<FixedStep>(&rule)) {
    os << "fixed:" << f->tau;
  } else if (std::holds_alternative<LineSearchStep>(rule)) {
    os << "ls";
  } else {
    const double t0 = std::get<AdaptiveStep>(rule).tau0;
    if (t0 == 1.0) os << "adaptive"; else os << "adaptive:" << t0;
  }
  return os.str();
}

const char* to_string(Method m) { return m == Method::EaRGD ? "earg" : "lagr"; }

const char* to_string(FallbackPolicy f) {
  switch (f) {
    case FallbackPolicy::EaStep: return "ea_step";
    case FallbackPolicy::HalveOmega: return "halve_omega";
    case FallbackPolicy::None: return "none";
  }
  return "?";
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::MaxIters: return "max_iters";
    case Termination::MetricIndefinite: return "metric_indefinite";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  if (s == "earg" || s == "eargd" || s == "ea") return Method::EaRGD;
  if (s == "lagr" || s == "lagrrgd") return Method::LagrRGD;
  throw ConfigError("unknown method '" + s + "' (expected earg or lagr)");
}

FallbackPolicy parse_fallback(const std::string& s) {
  if (s == "ea_step") return FallbackPolicy::EaStep;
  if (s == "halve_omega") return FallbackPolicy::HalveOmega;
  if (s == "none") return FallbackPolicy::None;
  throw ConfigError("unknown fallback policy '" + s + "'");
}

PFrame initial_guess(const GpeProblem& prob) {
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Ones(prob.n(), prob.p());
  PFrame ones = prob.frame(c);
  return retract(ones, Eigen::MatrixXcd::Zero(prob.n(), prob.p()));
}

StepResult step(const Linearization& lin, const MetricSelector& sel, double tau, double rel_tol) {
  const MetricOperator metric(lin, sel);
  Gradient g = riemannian_grad(lin, metric, rel_tol);
  PFrame cur(lin.problem->disc_ptr(), lin.phi);
  StepResult out{retract(cur, -tau * g.grad), std::move(g.grad), g.cg_iters};
  return out;
}

PFrame step(const GpeProblem& prob, const PFrame& phi, Method method, double omega, double tau,
            double rel_tol) {
  const Linearization lin = linearize(prob, phi);
  return step(lin, selector_for(method, omega), tau, rel_tol).next;
}

RayEnergy::RayEnergy(const Linearization& lin, const Eigen::MatrixXcd& dir) {
  const auto& prob = *lin.problem;
  const auto& d = prob.disc();
  p_ = lin.p();
  target_ = prob.masses();
  kappa_ = d.spec.interaction;
  mass_.resize(p_, 3);
  linear_.resize(p_, 3);
  std::vector<std::array<DensityField, 3>> e(p_);
  for (int j = 0; j < p_; ++j) {
    const Eigen::VectorXcd f = lin.phi.col(j);
    const Eigen::VectorXcd g = dir.col(j);
    const Eigen::VectorXcd mg = d.mass * g;
    const Eigen::VectorXcd lf = prob.linear_part(j) * f;
    const Eigen::VectorXcd lg = prob.linear_part(j) * g;
    mass_(j, 0) = lin.M_phi.col(j).dot(f).real();
    mass_(j, 1) = -2.0 * mg.dot(f).real();
    mass_(j, 2) = g.dot(mg).real();
    linear_(j, 0) = f.dot(lf).real();
    linear_(j, 1) = -2.0 * g.dot(lf).real();
    linear_(j, 2) = g.dot(lg).real();
    const QuadField gq = eval_quadrature(d, g);
    const QuadField& fq = lin.phi_q[j];
    for (auto& a : e[j]) a.resize(gq.size());
    for (std::size_t q = 0; q < gq.size(); ++q) {
      e[j][0][q] = std::norm(fq[q]);
      e[j][1][q] = -2.0 * (fq[q] * std::conj(gq[q])).real();
      e[j][2][q] = std::norm(gq[q]);
    }
  }
  const int ppe = d.points_per_element();
  quartic_.assign(static_cast<std::size_t>(p_) * p_, {0.0, 0.0, 0.0, 0.0, 0.0});
  for (int i = 0; i < p_; ++i) {
    for (int j = i; j < p_; ++j) {
      std::array<double, 5> c{};
      for (Index q = 0; q < d.num_quad_points(); ++q) {
        const double w = d.ref_weight[q % ppe];
        for (int a = 0; a < 3; ++a) {
          const double wa = w * e[i][a][q];
          for (int b = 0; b < 3; ++b) c[a + b] += wa * e[j][b][q];
        }
      }
      quartic_[i * p_ + j] = c;
      quartic_[j * p_ + i] = c;
    }
  }
}

double RayEnergy::operator()(double tau) const {
  Eigen::VectorXd s2(p_);
  double e = 0.0;
  for (int j = 0; j < p_; ++j) {
    const double m = mass_(j, 0) + tau * (mass_(j, 1) + tau * mass_(j, 2));
    s2[j] = target_[j] / m;
    const double l = linear_(j, 0) + tau * (linear_(j, 1) + tau * linear_(j, 2));
    e += 0.5 * s2[j] * l;
  }
  for (int i = 0; i < p_; ++i) {
    for (int j = 0; j < p_; ++j) {
      const auto& c = quartic_[i * p_ + j];
      const double qv = c[0] + tau * (c[1] + tau * (c[2] + tau * (c[3] + tau * c[4])));
      e += 0.25 * kappa_(i, j) * s2[i] * s2[j] * qv;
    }
  }
  return e;
}

double minimize_on_ray(const RayEnergy& e, const LineSearchStep& ls) {
  if (!(ls.tau_min > 0.0 && ls.tau_min < ls.tau_max) || ls.grid < 2) {
    throw ConfigError("line search needs 0 < tau_min < tau_max and at least two grid points");
  }
  const double ratio = std::log(ls.tau_max / ls.tau_min);
  std::vector<double> t(ls.grid);
  int best = 0;
  double fbest = std::numeric_limits<double>::infinity();
  for (int i = 0; i < ls.grid; ++i) {
    t[i] = i + 1 == ls.grid ? ls.tau_max : ls.tau_min * std::exp(ratio * i / (ls.grid - 1));
    const double f = e(t[i]);
    if (f < fbest) {
      fbest = f;
      best = i;
    }
  }
  double a = t[std::max(best - 1, 0)];
  double b = t[std::min(best + 1, ls.grid - 1)];
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = e(x1), f2 = e(x2);
  while (b - a > ls.rel_tol * 0.5 * (a + b)) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = e(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = e(x2);
    }
  }
  const double xm = 0.5 * (a + b);
  const double fm = e(xm);
  if (fm <= fbest) return xm;
  return t[best];
}

double choose_step(const StepRule& rule, const Linearization& lin, const Eigen::MatrixXcd& grad,
                   const StepHistory& hist) {
  if (const auto* f = std::get_if<FixedStep>(&rule)) return f->tau;
  if (const auto* ls = std::get_if<LineSearchStep>(&rule)) {
    return minimize_on_ray(RayEnergy(lin, grad), *ls);
  }
  const auto& ad = std::get<AdaptiveStep>(rule);
  if (!hist.prev || !hist.prev_grad) return ad.tau0;
  const auto& d = lin.disc();
  const double num = m_norm(d, lin.phi - hist.prev->coeffs());
  const double den = m_norm(d, grad - *hist.prev_grad);
  const double tau = num / den;
  if (!(den > 0.0) || !std::isfinite(tau) || !(tau > 0.0)) return hist.prev_tau;
  return tau;
}

RunResult run(const ModelSpec& spec, const RunOptions& opt, const Observer& observer) {
  GpeProblem prob(build_discretization(spec));
  return run(prob, opt, {}, observer);
}

RunResult run(GpeProblem& prob, const RunOptions& opt, const std::optional<PFrame>& start,
              const Observer& observer) {
  if (!(opt.stop_residual > 0.0) || !(opt.tol_cg > 0.0) || !(opt.cg_floor > 0.0)) {
    throw ConfigError("run: tolerances must be positive");
  }
  if (opt.max_iters < 0 || opt.record_every < 1 || opt.cg_max_iter < 1) throw ConfigError("run: bad iteration limits");
  if (opt.method == Method::LagrRGD) validate(Lagrangian{opt.omega});

  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto elapsed_ms = [&]() {
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };

  PFrame phi = start ? retract(*start, Eigen::MatrixXcd::Zero(prob.n(), prob.p())) : initial_guess(prob);
  if (opt.preconditioner == PreconditionerSource::InitialState) prob.rebuild_preconditioners(phi);

  RunResult out;
  bool warm = opt.warm_start;
  double omega = opt.omega;
  bool halved = false;
  int main_iters = 0;
  int k = 0;
  double pending_tau = 0.0;
  long pending_cg = 0;
  std::optional<PFrame> prev;
  Eigen::MatrixXcd prev_grad;
  double prev_tau = 1.0;
  if (const auto* ad = std::get_if<AdaptiveStep>(&opt.step)) prev_tau = ad->tau0;

  Gradient last_lagr;  // previous Lagrangian solves, reused as CG starting guesses
  Linearization lin = linearize(prob, phi);
  for (;;) {
    const double r = residual(lin).r;
    const bool done = r < opt.stop_residual;
    if (warm && r < opt.warm_start_residual) {
      warm = false;
      prev.reset();
    }
    const bool out_of_budget = warm ? out.warm_iterations >= opt.max_warm_iters : main_iters >= opt.max_iters;
    if (k % opt.record_every == 0 || done || out_of_budget) {
      out.history.push_back({k, lin.energy, r, pending_tau, pending_cg, elapsed_ms(), warm});
    }
    if (observer) observer(k, phi, r);
    out.residual = r;
    if (done) {
      out.termination = Termination::Converged;
      break;
    }
    if (out_of_budget) {
      out.termination = Termination::MaxIters;
      break;
    }

    // far from the minimiser r*tol_cg can exceed 1; CG would then hand back its
    // start guess untouched and the gradient vanishes identically
    const double rel_tol = std::max(std::min(r * opt.tol_cg, kInnerTolCap), opt.cg_floor);
    const bool use_ea = warm || opt.method == Method::EaRGD;
    std::optional<StepResult> st;
    double tau = 1.0;
    int spent = 0;
    while (!st) {
      const MetricSelector sel = use_ea ? MetricSelector{EnergyAdaptive{}} : MetricSelector{Lagrangian{omega}};
      try {
        const MetricOperator metric(lin, sel);
        Gradient g = riemannian_grad(lin, metric, rel_tol, opt.cg_max_iter, use_ea ? nullptr : &last_lagr);
        spent += g.cg_iters;
        if (!use_ea) {
          last_lagr.u = g.u;
          last_lagr.y = g.y;
        }
        StepHistory hist{prev ? &*prev : nullptr, prev ? &prev_grad : nullptr, prev_tau};
        tau = warm ? 1.0 : choose_step(opt.step, lin, g.grad, hist);
        st = StepResult{retract(phi, -tau * g.grad), std::move(g.grad), g.cg_iters};
      } catch (const IndefiniteMetric&) {
        ++out.fallbacks;
        if (opt.fallback == FallbackPolicy::HalveOmega && !halved) {
          omega *= 0.5;
          halved = true;
          continue;
        }
        if (opt.fallback != FallbackPolicy::EaStep) break;
        const MetricOperator metric(lin, EnergyAdaptive{});
        Gradient g = riemannian_grad(lin, metric, rel_tol, opt.cg_max_iter);
        spent += g.cg_iters;
        tau = 1.0;
        st = StepResult{retract(phi, -tau * g.grad), std::move(g.grad), g.cg_iters};
      }
    }
    if (!st) {
      out.termination = Termination::MetricIndefinite;
      break;
    }

    out.cg_iters += spent;
    pending_cg = spent;
    pending_tau = tau;
    prev = phi;
    prev_grad = std::move(st->grad);
    prev_tau = tau;
    phi = std::move(st->next);
    if (warm) ++out.warm_iterations; else ++main_iters;
    ++k;
    lin = linearize(prob, phi);
  }

  out.iterations = k;
  out.energy = lin.energy;
  out.lambda = lin.lambda;
  out.state = std::move(phi);
  return out;
}

}  // namespace gperot
