#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "gperot/config.hpp"
#include "gperot/export.hpp"
#include "gperot/spectral.hpp"
#include "gperot/state_file.hpp"

namespace gperot::cli {

namespace {

namespace fs = std::filesystem;

struct Flags {
  std::string config;
  std::string preset;
  std::string method;
  std::optional<double> omega;
  std::string step;
  std::optional<double> tol;
  std::optional<double> tol_cg;
  std::optional<int> max_iters;
  std::optional<int> mesh;
  std::string out;
  unsigned seed = 7;
  std::string state;
  bool verbose = false;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "TOML configuration file");
  sub->add_option("--preset", f.preset, "built-in model: model1, model2, model3");
  sub->add_option("--method", f.method, "earg or lagr");
  sub->add_option("--omega", f.omega, "Lagrangian metric regularization in [0, 1)");
  sub->add_option("--step", f.step, "fixed:F, ls or adaptive");
  sub->add_option("--tol", f.tol, "stop once the residual drops below this (default 1e-14)");
  sub->add_option("--tol-cg", f.tol_cg, "relative inner tolerance factor");
  sub->add_option("--max-iters", f.max_iters, "outer iteration budget after the warm start");
  sub->add_option("--mesh", f.mesh, "elements per direction (overrides the config)");
  sub->add_option("--out", f.out, "output directory (solve) or file");
  sub->add_option("--seed", f.seed, "seed for randomized starting blocks");
}

ConfigFile resolve_config(const Flags& f) {
  if (!f.config.empty() && !f.preset.empty()) throw ConfigError("give either --config or --preset, not both");
  ConfigFile c = f.config.empty() ? preset(f.preset.empty() ? "model1" : f.preset) : load_config(f.config);
  if (!f.method.empty()) c.run.method = parse_method(f.method);
  if (f.omega) c.run.omega = *f.omega;
  if (!f.step.empty()) c.run.step = parse_step_rule(f.step);
  if (f.tol) c.run.stop_residual = *f.tol;
  if (f.tol_cg) c.run.tol_cg = *f.tol_cg;
  if (f.max_iters) c.run.max_iters = *f.max_iters;
  if (f.mesh) c.model.elements_per_dir = *f.mesh;
  c.model.validate();
  if (c.run.method == Method::LagrRGD) validate(Lagrangian{c.run.omega});
  return c;
}

MetricSelector selector(const RunOptions& r) {
  if (r.method == Method::EaRGD) return EnergyAdaptive{};
  return Lagrangian{r.omega};
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ConfigError("not a number list: '" + text + "'");
    }
  }
  if (v.empty()) throw ConfigError("empty number list");
  return v;
}

std::string row(const Eigen::VectorXd& v) {
  std::string s;
  for (Index i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt8(v[i]);
  return s;
}

// Problem and linearization at a stored state.
struct Loaded {
  ConfigFile config;
  std::unique_ptr<GpeProblem> problem;
  std::unique_ptr<Linearization> lin;
  double residual = 0.0;
};

Loaded load_state(const Flags& f) {
  if (f.state.empty()) throw ConfigError("--state is required");
  Loaded l;
  l.config = resolve_config(f);
  const StateFile s = read_state(f.state);
  check_state_matches(s, l.config.model);
  l.problem = std::make_unique<GpeProblem>(build_discretization(l.config.model));
  l.lin = std::make_unique<Linearization>(linearize(*l.problem, l.problem->frame(s.coeffs)));
  l.residual = residual(*l.lin).r;
  return l;
}

// Writes to --out when given, otherwise to the console stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw Error("cannot write " + path);
      os_ = &file_;
    }
  }
  std::ostream& operator*() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_;
};

int cmd_solve(const Flags& f, std::ostream& out, std::ostream& err) {
  const ConfigFile c = resolve_config(f);
  const fs::path dir = f.out.empty() ? fs::path("gperot_out") : fs::path(f.out);
  fs::create_directories(dir);
  save_config(c, dir / "config.toml");

  Observer obs;
  if (f.verbose) {
    obs = [&err](int k, const PFrame&, double r) {
      if (k % 50 == 0) err << "k=" << k << " residual=" << fmt8(r) << '\n';
    };
  }
  const RunResult res = run(c.model, c.run, obs);

  write_history(dir / "history.csv", res.history);
  write_state(StateFile{static_cast<std::uint64_t>(c.model.elements_per_dir), c.model.domain, res.state.coeffs()},
              dir / "state.bin");
  export_density(dir / "density.vtk", c.model, res.state.coeffs(), DensityFormat::Vtk);
  export_density(dir / "density.csv", c.model, res.state.coeffs(), DensityFormat::Csv);

  out << "energy " << fmt8(res.energy) << '\n';
  out << "lambda " << row(res.lambda) << '\n';
  out << "residual " << fmt8(res.residual) << '\n';
  out << "iterations " << res.iterations << " (warm start " << res.warm_iterations << ")\n";
  out << "cg_iterations " << res.cg_iters << '\n';
  out << "status " << to_string(res.termination) << '\n';
  if (!res.converged()) {
    err << "not converged: " << to_string(res.termination) << " (residual " << fmt8(res.residual) << ")\n";
    return 2;
  }
  return 0;
}

int cmd_spectrum(const Flags& f, int k_a, int k_f, std::ostream& out) {
  const Loaded l = load_state(f);
  SpectralOptions so;
  so.seed = f.seed;
  Sink sink(f.out, out);
  *sink << "# state residual " << fmt8(l.residual) << '\n';
  *sink << "lambda " << row(l.lin->lambda) << '\n';
  for (int j = 0; j < l.problem->p(); ++j) {
    *sink << "A_" << j + 1 << ' ' << row(eigs_component_A(*l.lin, j, k_a, so).values) << '\n';
  }
  for (int j = 0; j < l.problem->p(); ++j) {
    *sink << "F_" << j + 1 << ' ' << row(eigs_projected_hessian(*l.lin, j, k_f, so).values) << '\n';
  }
  return 0;
}

int cmd_rate(const Flags& f, const std::string& taus, std::ostream& out) {
  const Loaded l = load_state(f);
  SpectralOptions so;
  so.seed = f.seed;
  const MetricSelector sel = selector(l.config.run);
  const double lo = eigs_horizontal_pencil(*l.lin, sel, Extreme::Smallest, 1, so).values[0];
  const double hi = eigs_horizontal_pencil(*l.lin, sel, Extreme::Largest, 1, so).values[0];
  Sink sink(f.out, out);
  *sink << "# state residual " << fmt8(l.residual) << '\n';
  *sink << "metric " << describe(sel) << '\n';
  *sink << "eta_inf " << fmt8(lo) << '\n' << "eta_sup " << fmt8(hi) << '\n';
  *sink << "tau_limit " << fmt8(2.0 / hi) << '\n';
  *sink << "tau,rho,admissible\n";
  for (double t : parse_list(taus)) {
    const RatePrediction r = predicted_rate(t, lo, hi);
    *sink << fmt8(t) << ',' << fmt8(r.rho) << ',' << (r.admissible ? "yes" : "no") << '\n';
  }
  return 0;
}

int cmd_condition(const Flags& f, const std::string& omegas, std::ostream& out) {
  const Loaded l = load_state(f);
  SpectralOptions so;
  so.seed = f.seed;
  const auto sweep = condition_sweep(*l.lin, parse_list(omegas), so);
  Sink sink(f.out, out);
  *sink << "omega";
  for (int j = 0; j < l.problem->p(); ++j) *sink << ",kappa_" << j + 1;
  *sink << '\n';
  for (const auto& e : sweep) {
    *sink << fmt8(e.omega);
    for (double k : e.kappa) *sink << ',' << (std::isnan(k) ? std::string("indefinite") : fmt8(k));
    *sink << '\n';
  }
  return 0;
}

int cmd_export(const Flags& f, const std::string& format, std::ostream& out) {
  if (f.state.empty()) throw ConfigError("--state is required");
  const ConfigFile c = resolve_config(f);
  const StateFile s = read_state(f.state);
  check_state_matches(s, c.model);
  Sink sink(f.out, out);
  export_density(*sink, c.model, s.coeffs, parse_density_format(format));
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ground states of rotating multicomponent condensates by Riemannian gradient descent", "gperot"};
  app.require_subcommand(1);
  Flags f;

  auto* solve = app.add_subcommand("solve", "run eaRGD or LagrRGD and write artifacts");
  add_common(solve, f);
  solve->add_flag("-v,--verbose", f.verbose, "print the residual every 50 iterations");

  int k_a = 10, k_f = 5;
  auto* spectrum = app.add_subcommand("spectrum", "smallest eigenvalues of A_j and the projected Hessians");
  add_common(spectrum, f);
  spectrum->add_option("--state", f.state, "GPEROT01 state file")->required();
  spectrum->add_option("--k", k_f, "eigenvalues per projected Hessian");
  spectrum->add_option("--k-a", k_a, "eigenvalues per component operator");

  std::string taus = "1";
  auto* rate = app.add_subcommand("rate", "predicted contraction rate at a state");
  add_common(rate, f);
  rate->add_option("--state", f.state, "GPEROT01 state file")->required();
  rate->add_option("--tau", taus, "comma separated step sizes");

  std::string omegas = "0,0.5,0.9,0.95,0.99";
  auto* condition = app.add_subcommand("condition", "condition numbers of the Lagrangian metric over omega");
  add_common(condition, f);
  condition->add_option("--state", f.state, "GPEROT01 state file")->required();
  condition->add_option("--omegas", omegas, "comma separated omega values");

  std::string preset_name;
  auto* pre = app.add_subcommand("preset", "print a built-in configuration as TOML");
  pre->add_option("name", preset_name, "model1, model2 or model3")->required();
  pre->add_option("--out", f.out, "write to this file instead");
  pre->add_option("--mesh", f.mesh, "elements per direction");

  std::string format = "vtk";
  auto* exp = app.add_subcommand("export", "densities of a stored state");
  add_common(exp, f);
  exp->add_option("--state", f.state, "GPEROT01 state file")->required();
  exp->add_option("--format", format, "vtk or csv");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*solve) return cmd_solve(f, out, err);
    if (*spectrum) return cmd_spectrum(f, k_a, k_f, out);
    if (*rate) return cmd_rate(f, taus, out);
    if (*condition) return cmd_condition(f, omegas, out);
    if (*exp) return cmd_export(f, format, out);
    if (*pre) {
      ConfigFile c = preset(preset_name);
      if (f.mesh) c.model.elements_per_dir = *f.mesh;
      Sink sink(f.out, out);
      *sink << emit_config(c);
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace gperot::cli
