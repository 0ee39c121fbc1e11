// Acceptance runner: one PASS/FAIL line per criterion.
//   gperot_acceptance --criterion N [--cache DIR]
// Converged ground states are cached in DIR as state files and reused only
// after their residual has been recomputed and found below the requested level.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "checks.hpp"
#include "gperot/config.hpp"
#include "gperot/export.hpp"
#include "gperot/optimizer.hpp"
#include "gperot/spectral.hpp"
#include "gperot/state_file.hpp"

using namespace gperot;
namespace fs = std::filesystem;

namespace {

fs::path g_cache;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& why) {
    if (!ok) {
      pass = false;
      detail << " [violated: " << why << "]";
    }
  }
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::string g(double v) { return fmt8(v); }

void log(const std::string& s) { std::cerr << s << std::endl; }

ModelSpec model_at(const std::string& name, int m) {
  ModelSpec s = preset(name).model;
  s.elements_per_dir = m;
  return s;
}

RunOptions preset_run(const std::string& name) { return preset(name).run; }

struct Solved {
  std::unique_ptr<GpeProblem> prob;
  PFrame state;
  Linearization lin;
  double residual = 0.0;
  bool from_cache = false;
  RunResult run;  // empty when loaded from the cache
};

Observer progress(const std::string& tag) {
  return [tag](int k, const PFrame&, double r) {
    if (k % 500 == 0) log("  " + tag + " k=" + std::to_string(k) + " r=" + g(r));
  };
}

void store(const std::string& key, const ModelSpec& spec, const PFrame& state) {
  if (g_cache.empty()) return;
  fs::create_directories(g_cache);
  write_state(StateFile{static_cast<std::uint64_t>(spec.elements_per_dir), spec.domain, state.coeffs()},
              g_cache / (key + ".bin"));
}

// Cached ground state when its recomputed residual is below `tol`, otherwise a fresh run.
Solved ground_state(const std::string& key, const ModelSpec& spec, RunOptions opt, double tol) {
  Solved s;
  s.prob = std::make_unique<GpeProblem>(build_discretization(spec));
  const fs::path file = g_cache.empty() ? fs::path() : g_cache / (key + ".bin");
  if (!file.empty() && fs::exists(file)) {
    try {
      const StateFile f = read_state(file);
      check_state_matches(f, spec);
      PFrame phi = s.prob->frame(f.coeffs);
      Linearization lin = linearize(*s.prob, phi);
      const double r = residual(lin).r;
      if (r < tol) {
        s.state = std::move(phi);
        s.lin = std::move(lin);
        s.residual = r;
        s.from_cache = true;
        log("  " + key + ": cached state, residual " + g(r));
        return s;
      }
    } catch (const Error& e) {
      log("  " + key + ": ignoring cache (" + e.what() + ")");
    }
  }
  opt.stop_residual = tol;
  s.run = run(*s.prob, opt, {}, progress(key));
  s.state = s.run.state;
  s.lin = linearize(*s.prob, s.state);
  s.residual = residual(s.lin).r;
  if (s.run.converged()) store(key, spec, s.state);
  log("  " + key + ": " + to_string(s.run.termination) + " after " + std::to_string(s.run.iterations) +
      " iterations, residual " + g(s.residual));
  return s;
}

// ---------------------------------------------------------------------------

const double kE1 = 8.4864708, kL1a = 9.6417158, kL1b = 4.5589610;
const double kE2 = 8.6821968, kL2a = 9.6544660, kL2b = 5.0782488;
const double kF1second = 9.6719120;

void check_reference(Verdict& v, const std::string& tag, const RunResult& r, double e, double la, double lb) {
  v.detail << ' ' << tag << ": " << to_string(r.termination) << " it=" << r.iterations << " E=" << g(r.energy)
           << " lambda=(" << g(r.lambda[0]) << ", " << g(r.lambda[1]) << ") r=" << g(r.residual) << ';';
  v.require(rel(r.energy, e) <= 1e-3, tag + " energy");
  v.require(rel(r.lambda[0], la) <= 1e-3, tag + " lambda_1");
  v.require(rel(r.lambda[1], lb) <= 1e-3, tag + " lambda_2");
}

Verdict criterion1() {
  Verdict v;
  const ModelSpec spec = preset("model1").model;
  v.require(spec.elements_per_dir == 64, "mesh");
  for (Method method : {Method::EaRGD, Method::LagrRGD}) {
    RunOptions opt = preset_run("model1");
    opt.method = method;
    opt.omega = 0.95;
    opt.step = FixedStep{1.0};
    opt.stop_residual = 1e-11;
    GpeProblem prob(build_discretization(spec));
    const std::string tag = to_string(method);
    const RunResult r = run(prob, opt, {}, progress("model1/" + tag));
    v.require(r.converged(), tag + " converged");
    if (r.converged()) store(std::string("model1_m64_") + tag, spec, r.state);
    check_reference(v, tag, r, kE1, kL1a, kL1b);
  }
  return v;
}

Verdict criterion2() {
  Verdict v;
  const ModelSpec spec = preset("model1").model;
  RunOptions opt = preset_run("model1");
  opt.method = Method::LagrRGD;
  opt.omega = 0.95;
  const Solved s = ground_state("model1_m64_lagr", spec, opt, 1e-11);
  v.require(s.residual < 1e-11, "converged state");
  v.detail << " state residual " << g(s.residual) << (s.from_cache ? " (cached)" : "") << ';';
  SpectralOptions so;
  so.tol = 1e-10;
  so.max_iter = 20000;
  for (int j = 0; j < 2; ++j) {
    const EigReport f = eigs_projected_hessian(s.lin, j, j == 0 ? 2 : 1, so);
    const double lam = s.lin.lambda[j];
    const Eigen::VectorXcd iphi = cplx(0.0, 1.0) * s.lin.phi.col(j);
    const Eigen::VectorXcd w = f.vectors.col(0);
    const auto& m = s.prob->M();
    const double cosine = std::abs(iphi.dot(m * w).real()) /
                          std::sqrt(iphi.dot(m * iphi).real() * w.dot(m * w).real());
    v.detail << " F_" << j + 1 << ": lambda_1=" << g(f.values[0]) << " lambda_*=" << g(lam)
             << " cos=" << std::setprecision(15) << cosine;
    v.require(rel(f.values[0], lam) <= 1e-6, "lambda_1(F_" + std::to_string(j + 1) + ") = lambda_*");
    v.require(cosine >= 1.0 - 1e-6, "eigenvector alignment " + std::to_string(j + 1));
    if (j == 0) {
      v.detail << " lambda_2=" << g(f.values[1]);
      v.require(rel(f.values[1], kF1second) <= 1e-3, "lambda_2(F_1)");
    }
    v.detail << ';';
  }
  return v;
}

Verdict criterion3() {
  Verdict v;
  const ModelSpec spec = preset("model2").model;
  for (Method method : {Method::EaRGD, Method::LagrRGD}) {
    const std::string tag = to_string(method);
    RunOptions opt = preset_run("model2");
    opt.method = method;
    opt.omega = 0.95;
    opt.stop_residual = 1e-11;
    opt.step = FixedStep{1.0};
    // fixed steps stagnate on this model (tiny spectral gap); bound the first attempt
    opt.max_iters = method == Method::EaRGD ? 4000 : 2000;
    GpeProblem prob(build_discretization(spec));
    RunResult r = run(prob, opt, {}, progress("model2/" + tag + "/fixed"));
    const bool matches = rel(r.energy, kE2) <= 1e-3 && rel(r.lambda[0], kL2a) <= 1e-3 &&
                         rel(r.lambda[1], kL2b) <= 1e-3;
    v.detail << ' ' << tag << "/fixed:1: " << to_string(r.termination) << " it=" << r.iterations
             << " E=" << g(r.energy) << " r=" << g(r.residual) << ';';
    if (!r.converged() || !matches) {
      opt.step = AdaptiveStep{1.0};
      opt.max_iters = 20000;
      r = run(prob, opt, {}, progress("model2/" + tag + "/adaptive"));
      v.detail << " repeated with adaptive step;";
      check_reference(v, tag + "/adaptive", r, kE2, kL2a, kL2b);
    } else {
      check_reference(v, tag + "/fixed:1", r, kE2, kL2a, kL2b);
    }
    if (r.converged()) store("model2_m64_" + tag, spec, r.state);
  }
  return v;
}

Verdict criterion4() {
  Verdict v;
  int steps_checked = 0;
  double worst_decrease = std::numeric_limits<double>::infinity();
  double worst_slack = std::numeric_limits<double>::infinity();
  for (const std::string name : {"model1", "model2", "model3"}) {
    const ModelSpec spec = model_at(name, 16);
    const GpeProblem prob(build_discretization(spec));
    for (double tau : {0.25, 0.5}) {
      PFrame phi = initial_guess(prob);
      Linearization lin = linearize(prob, phi);
      for (int k = 0; k < 300; ++k) {
        if (residual(lin).r < 1e-10) break;
        const Gradient gr = riemannian_grad(lin, MetricOperator(lin, EnergyAdaptive{}), 1e-13, 20000);
        const double ga = a_norm(lin, gr.grad);
        const PFrame next = retract(phi, -tau * gr.grad);
        Linearization nl = linearize(prob, next);
        const double dec = lin.energy - nl.energy;
        worst_decrease = std::min(worst_decrease, dec);
        worst_slack = std::min(worst_slack, dec - 0.5 * tau * ga * ga);
        if (dec < -1e-12) {
          v.require(false, name + " tau=" + g(tau) + " energy increase at k=" + std::to_string(k));
        }
        if (dec < 0.5 * tau * ga * ga - 1e-10) {
          v.require(false, name + " tau=" + g(tau) + " decay bound at k=" + std::to_string(k));
        }
        ++steps_checked;
        phi = next;
        lin = std::move(nl);
      }
      // the production loop records the same monotone history
      RunOptions opt;
      opt.step = FixedStep{tau};
      opt.warm_start = false;
      opt.max_iters = 300;
      opt.stop_residual = 1e-10;
      const RunResult r = run(model_at(name, 16), opt);
      for (std::size_t i = 1; i < r.history.size(); ++i) {
        if (r.history[i].energy > r.history[i - 1].energy + 1e-12) {
          v.require(false, name + " run() history increase at k=" + std::to_string(r.history[i].k));
        }
      }
    }
  }
  v.detail << ' ' << steps_checked << " steps; min decrease " << g(worst_decrease)
           << "; min E_k - E_k+1 - tau/2 |grad|_a^2 = " << g(worst_slack);
  return v;
}

// Tail contraction of the aligned H-distance to `ref` over the last residual decade.
struct Tail {
  double rate = std::nan("");
  int points = 0;
  int iterations = 0;
  bool converged = false;
};

Tail measure_tail(GpeProblem& prob, RunOptions opt, const PFrame& ref, double stop) {
  std::vector<double> res, dist;
  opt.stop_residual = stop;
  const RunResult r = run(prob, opt, {}, [&](int, const PFrame& phi, double rr) {
    res.push_back(rr);
    dist.push_back(aligned_distance(phi, ref, NormKind::H));
  });
  Tail t;
  t.iterations = r.iterations;
  t.converged = r.converged();
  if (!t.converged) return t;
  std::size_t start = res.size();
  for (double decades : {10.0, 100.0}) {
    start = res.size() - 1;
    while (start > 0 && res[start - 1] < decades * stop) --start;
    if (res.size() - start >= 5) break;
  }
  // least squares slope of log(dist) over the window
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const std::size_t n = res.size() - start;
  for (std::size_t i = start; i < res.size(); ++i) {
    const double x = double(i), y = std::log(dist[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  t.points = static_cast<int>(n);
  if (n >= 2) t.rate = std::exp((n * sxy - sx * sy) / (n * sxx - sx * sx));
  return t;
}

Solved coarse_ground_state(const std::string& name) {
  RunOptions opt = preset_run(name);
  opt.method = Method::LagrRGD;
  opt.omega = 0.9;
  opt.step = name == "model1" ? StepRule{FixedStep{1.0}} : StepRule{AdaptiveStep{1.0}};
  opt.max_iters = 50000;
  return ground_state(name + "_m16_ground", model_at(name, 16), opt, 1e-13);
}

Verdict criterion5() {
  Verdict v;
  Solved gs = coarse_ground_state("model1");
  v.require(gs.residual < 1e-13, "reference ground state");
  SpectralOptions so;
  so.tol = 1e-9;
  so.max_iter = 20000;
  struct Case {
    Method method;
    double omega;
  };
  for (const Case c : {Case{Method::EaRGD, 0.0}, Case{Method::LagrRGD, 0.5}, Case{Method::LagrRGD, 0.9}}) {
    const MetricSelector sel = c.method == Method::EaRGD ? MetricSelector{EnergyAdaptive{}}
                                                         : MetricSelector{Lagrangian{c.omega}};
    const double lo = eigs_horizontal_pencil(gs.lin, sel, Extreme::Smallest, 1, so).values[0];
    const double hi = eigs_horizontal_pencil(gs.lin, sel, Extreme::Largest, 1, so).values[0];
    const RatePrediction pred = predicted_rate(1.0, lo, hi);
    RunOptions opt = preset_run("model1");
    opt.method = c.method;
    opt.omega = c.omega;
    opt.step = FixedStep{1.0};
    opt.max_iters = 50000;
    const Tail t = measure_tail(*gs.prob, opt, gs.state, 1e-10);
    const std::string tag = describe(sel);
    v.detail << ' ' << tag << ": predicted " << g(pred.rho) << " measured " << g(t.rate) << " (" << t.points
             << " pts);";
    v.require(t.converged, tag + " converged");
    v.require(std::abs(t.rate - pred.rho) <= 0.05 * pred.rho, tag + " rate within 5%");
  }
  int its[2] = {0, 0};
  for (int i = 0; i < 2; ++i) {
    RunOptions opt = preset_run("model1");
    opt.method = i == 0 ? Method::EaRGD : Method::LagrRGD;
    opt.omega = 0.95;
    opt.step = FixedStep{1.0};
    opt.stop_residual = 1e-10;
    opt.max_iters = 50000;
    const RunResult r = run(*gs.prob, opt);
    v.require(r.converged(), std::string(to_string(opt.method)) + " reaches 1e-10");
    its[i] = r.iterations;
  }
  v.detail << " iterations to 1e-10: earg " << its[0] << ", lagr(0.95) " << its[1];
  v.require(its[1] < its[0], "LagrRGD(0.95) faster than eaRGD");
  return v;
}

Verdict criterion6() {
  Verdict v;
  SpectralOptions so;
  so.tol = 1e-9;
  so.max_iter = 20000;
  {
    Solved gs = coarse_ground_state("model1");
    v.require(gs.residual < 1e-13, "model1 ground state");
    const double hi = eigs_horizontal_pencil(gs.lin, EnergyAdaptive{}, Extreme::Largest, 1, so).values[0];
    const double lo = eigs_horizontal_pencil(gs.lin, EnergyAdaptive{}, Extreme::Smallest, 1, so).values[0];
    v.detail << " model1 energy-adaptive eta in [" << g(lo) << ", " << g(hi) << "];";
    v.require(hi < 3.0, "energy-adaptive eta_sup < 3");
  }
  double worst = -std::numeric_limits<double>::infinity();
  for (const std::string name : {"model1", "model2", "model3"}) {
    const ModelSpec full = model_at(name, 16);
    for (int j = 0; j < full.p(); ++j) {
      const ModelSpec single = full.single_component(j);
      RunOptions opt;
      opt.method = Method::LagrRGD;
      opt.omega = 0.9;
      opt.step = AdaptiveStep{1.0};
      opt.tol_cg = preset_run(name).tol_cg;
      opt.max_iters = 50000;
      const Solved gs = ground_state(name + "_m16_single" + std::to_string(j + 1), single, opt, 1e-12);
      v.require(gs.residual < 1e-12, name + " component " + std::to_string(j + 1) + " ground state");
      for (double om : {0.0, 0.5, 0.9, 0.95}) {
        const double hi = eigs_horizontal_pencil(gs.lin, Lagrangian{om}, Extreme::Largest, 1, so).values[0];
        worst = std::max(worst, hi);
        if (!(hi < 1.0)) {
          v.require(false, name + " component " + std::to_string(j + 1) + " omega " + g(om) + " eta_sup " + g(hi));
        }
      }
    }
  }
  v.detail << " single-component Lagrangian max eta_sup " << g(worst);
  return v;
}

Verdict criterion7() {
  Verdict v;
  Solved gs = coarse_ground_state("model2");
  v.require(gs.residual < 1e-13, "model2 ground state");
  SpectralOptions so;
  so.tol = 1e-10;
  so.max_iter = 50000;
  const std::vector<double> omegas{0.0, 0.9, 0.92, 0.94, 0.96, 0.98, 0.99};
  const auto sweep = condition_sweep(gs.lin, omegas, so);
  const double kh = sweep[0].kappa[0];
  v.detail << " kappa(H_1)=" << g(kh) << ';';
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& e : sweep) {
    const double k = e.kappa[0];
    const double bound = (kh - e.omega) / (1.0 - e.omega);
    v.detail << " w=" << g(e.omega) << " kappa=" << g(k) << " bound=" << g(bound) << ';';
    v.require(!e.indefinite[0], "definite at omega " + g(e.omega));
    v.require(k >= bound - 1e-6 * k, "lower bound at omega " + g(e.omega));
    if (e.omega >= 0.9) {
      const double x = -std::log(1.0 - e.omega), y = std::log(k);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++n;
    }
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  v.detail << " slope " << g(slope);
  v.require(std::abs(slope - 1.0) <= 0.15, "slope 1 +- 0.15");
  return v;
}

Verdict criterion8() {
  Verdict v;
  const auto models = checks::property_models();
  struct Named {
    const char* name;
    std::function<checks::Outcome(const ModelSpec&, unsigned)> f;
  };
  const std::vector<Named> list{
      {"phase invariance", [](const ModelSpec& s, unsigned seed) { return checks::phase_invariance(s, 20, seed); }},
      {"FD gradient", [](const ModelSpec& s, unsigned seed) { return checks::fd_gradient_order(s, seed); }},
      {"FD Hessian", [](const ModelSpec& s, unsigned seed) { return checks::fd_hessian_order(s, seed); }},
      {"retraction bound", [](const ModelSpec& s, unsigned seed) { return checks::retraction_bound(s, 100, seed); }},
      {"normalization", [](const ModelSpec& s, unsigned seed) { return checks::normalization_monotone(s, 100, seed); }},
      {"idempotence", [](const ModelSpec& s, unsigned seed) { return checks::projection_idempotence(s, 20, seed); }},
      {"energy identity", [](const ModelSpec& s, unsigned seed) { return checks::energy_difference(s, 10, seed); }},
      {"m=2 oracle", [](const ModelSpec& s, unsigned seed) { return checks::oracle_equivalence(s, seed); }},
  };
  unsigned seed = 1000;
  for (const auto& item : list) {
    v.detail << ' ' << item.name << ':';
    for (std::size_t i = 0; i < models.size(); ++i) {
      const checks::Outcome o = item.f(models[i], seed++);
      v.detail << ' ' << o.detail;
      v.require(o.pass, std::string(item.name) + " on model #" + std::to_string(i));
    }
    v.detail << ';';
  }
  return v;
}

const std::vector<std::pair<const char*, std::function<Verdict()>>>& criteria() {
  static const std::vector<std::pair<const char*, std::function<Verdict()>>> list{
      {"model 1 reproduction", criterion1},   {"eigenvalue coincidence", criterion2},
      {"model 2 energy", criterion3},         {"monotone energy decay", criterion4},
      {"rate prediction", criterion5},        {"energy-adaptive spectral bound", criterion6},
      {"condition scaling", criterion7},      {"property suite", criterion8},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> which;
  std::string cache;
  app.add_option("--criterion", which, "criterion numbers (default: all)")->check(CLI::Range(1, 8));
  app.add_option("--cache", cache, "directory for cached ground states");
  CLI11_PARSE(app, argc, argv);
  g_cache = cache;
  if (which.empty()) which = {1, 2, 3, 4, 5, 6, 7, 8};

  bool all = true;
  for (int c : which) {
    const auto& [name, fn] = criteria()[c - 1];
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << " error: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "criterion " << c << " (" << name << "): " << (v.pass ? "PASS" : "FAIL") << " -"
              << v.detail.str() << " [" << std::llround(secs) << " s]" << std::endl;
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
