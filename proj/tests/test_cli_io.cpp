#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <sys/wait.h>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "gperot/config.hpp"
#include "gperot/export.hpp"
#include "gperot/state_file.hpp"
#include "oracles.hpp"

using namespace gperot;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("gperot_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Cli {
  int code = -1;
  std::string out, err;
};

Cli invoke(const std::vector<std::string>& args) {
  std::ostringstream o, e;
  Cli r;
  r.code = gperot::cli::run(args, o, e);
  r.out = o.str();
  r.err = e.str();
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> v;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> v;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);) v.push_back(item);
  return v;
}

// value after "key " on the first matching line
std::string field(const std::string& text, const std::string& key) {
  for (const auto& l : lines(text)) {
    if (l.rfind(key + " ", 0) == 0) return l.substr(key.size() + 1);
  }
  FAIL("missing line " << key);
  return {};
}

ModelSpec small_model(int p = 2, int m = 4) { return oracle::toy_model(p, m); }

}  // namespace

TEST_SUITE("cli_io") {

TEST_CASE("config round trip through TOML and JSON") {
  for (const auto& name : preset_names()) {
    ConfigFile c = preset(name);
    c.run.method = Method::LagrRGD;
    c.run.omega = 0.93;
    c.run.step = AdaptiveStep{0.4};
    c.run.fallback = FallbackPolicy::HalveOmega;
    c.run.preconditioner = PreconditionerSource::InitialState;
    const ConfigFile back = parse_config(emit_config(c));
    CHECK(equivalent(back, c));
    CHECK(back.model.components == c.model.components);
    CHECK(back.model.interaction == c.model.interaction);
    CHECK(back.run.omega == 0.93);
    CHECK(std::get<AdaptiveStep>(back.run.step).tau0 == 0.4);
    CHECK(equivalent(config_from_json(config_to_json(c)), c));
  }
}

TEST_CASE("config files on disk") {
  TempDir tmp;
  ConfigFile c = preset("model3");
  c.model.elements_per_dir = 8;
  save_config(c, tmp / "c.toml");
  CHECK(equivalent(load_config(tmp / "c.toml"), c));
  CHECK_THROWS_AS(load_config(tmp / "missing.toml"), Error);
  {
    std::ofstream(tmp / "bad.toml") << "[model]\nname = \"x\"\nbogus_key = 3\n";
  }
  try {
    (void)load_config(tmp / "bad.toml");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bad.toml") != std::string::npos);
  }
}

TEST_CASE("presets") {
  CHECK(preset_names() == std::vector<std::string>{"model1", "model2", "model3"});
  const ConfigFile m1 = preset("model1"), m2 = preset("model2"), m3 = preset("model3");
  CHECK(m1.model.p() == 2);
  CHECK(m3.model.p() == 3);
  CHECK(m1.model.elements_per_dir == 64);
  CHECK(m1.model.domain.x_min == -10.0);
  CHECK(m1.model.interaction(0, 1) == 20.0);
  CHECK(m2.model.interaction(0, 1) == 60.0);
  CHECK(m1.model.components[0].mass == 2.0);
  CHECK(m1.model.components[1].omega == -1.2);
  CHECK(m3.model.components[2].potential.sin_x == 1.0);
  CHECK_THROWS_AS(preset("model4"), ConfigError);
}

TEST_CASE("state file round trip is byte exact") {
  std::mt19937 rng(1);
  StateFile s{4, Rect{-2.0, 2.0, -2.0, 2.0}, oracle::random_matrix(49, 2, rng)};
  const std::string bytes = encode_state(s);
  CHECK(bytes.substr(0, 8) == "GPEROT01");
  CHECK(bytes.size() == 8 + 3 * 8 + 4 * 8 + 49 * 2 * 16);
  const StateFile back = decode_state(bytes);
  CHECK(back.m == 4);
  CHECK(back.coeffs == s.coeffs);
  CHECK(encode_state(back) == bytes);

  TempDir tmp;
  write_state(s, tmp / "s.bin");
  CHECK(slurp(tmp / "s.bin") == bytes);
  CHECK(read_state(tmp / "s.bin").coeffs == s.coeffs);
  check_state_matches(back, small_model());
}

TEST_CASE("state file errors") {
  std::mt19937 rng(2);
  StateFile s{4, Rect{-2.0, 2.0, -2.0, 2.0}, oracle::random_matrix(49, 2, rng)};
  const std::string bytes = encode_state(s);
  CHECK_THROWS_AS(decode_state("NOTSTATE" + bytes.substr(8)), Error);
  CHECK_THROWS_AS(decode_state(bytes.substr(0, bytes.size() - 1)), DimensionError);
  CHECK_THROWS_AS(decode_state(bytes + "x"), DimensionError);
  CHECK_THROWS_AS(decode_state(bytes.substr(0, 20)), Error);
  // n must equal (2m - 1)^2
  StateFile wrong{5, s.domain, s.coeffs};
  CHECK_THROWS_AS(decode_state(encode_state(wrong)), DimensionError);
  CHECK_THROWS_AS(check_state_matches(s, small_model(3)), DimensionError);
  ModelSpec other = small_model();
  other.domain.x_max = 3.0;
  CHECK_THROWS_AS(check_state_matches(s, other), DimensionError);
  CHECK_THROWS_AS(check_state_matches(s, small_model(2, 5)), DimensionError);
  CHECK_THROWS_AS(read_state("/nonexistent/state.bin"), Error);
}

TEST_CASE("history CSV") {
  std::vector<IterationRecord> h{{0, 1.5, 0.25, 0.0, 0, 0.5, true}, {1, 1.25, 1.0 / 3.0, 1.0, 17, 2.0, false}};
  std::ostringstream os;
  write_history(os, h);
  const auto l = lines(os.str());
  REQUIRE(l.size() == 3);
  CHECK(l[0] == "k,energy,residual,tau,cg_iters,wall_ms");
  CHECK(l[1] == "0,1.5,0.25,0,0,0.5");
  CHECK(l[2] == "1,1.25,0.33333333,1,17,2");
  CHECK(fmt8(8.48647055012) == "8.4864706");
  CHECK(fmt8(1e-12) == "1e-12");
}

TEST_CASE("density export") {
  const ModelSpec s = small_model();
  std::mt19937 rng(3);
  const Eigen::MatrixXcd c = oracle::random_matrix(49, 2, rng);
  const Eigen::MatrixXd dens = nodal_densities(s, c);
  REQUIRE(dens.rows() == 81);
  const oracle::DenseFem o(s);
  for (Index d = 0; d < 49; d += 7) {
    const auto [ix, iy] = o.dof_node(d);
    for (int j = 0; j < 2; ++j) CHECK(dens(iy * 9 + ix, j) == doctest::Approx(std::norm(c(d, j))).epsilon(1e-14));
  }
  for (int i = 0; i < 9; ++i) {
    CHECK(dens(i, 0) == 0.0);
    CHECK(dens(9 * i, 1) == 0.0);
  }

  SUBCASE("phase invariance is byte exact") {
    const Eigen::VectorXcd th = oracle::random_phases(2, rng);
    for (DensityFormat f : {DensityFormat::Vtk, DensityFormat::Csv}) {
      std::ostringstream a, b;
      export_density(a, s, c, f);
      export_density(b, s, c * th.asDiagonal(), f);
      // |e^{i t} z|^2 can differ from |z|^2 in the last bit, so compare the
      // printed 8-digit values
      CHECK(a.str() == b.str());
    }
  }
  SUBCASE("CSV layout") {
    std::ostringstream os;
    export_density(os, s, c, DensityFormat::Csv);
    const auto l = lines(os.str());
    REQUIRE(l.size() == 82);
    CHECK(l[0] == "x,y,density_1,density_2");
    const auto first = split(l[1], ',');
    CHECK(std::stod(first[0]) == -2.0);
    CHECK(std::stod(first[1]) == -2.0);
    const auto second = split(l[2], ',');
    CHECK(std::stod(second[0]) == -1.5);
    CHECK(std::stod(second[1]) == -2.0);
  }
  SUBCASE("VTK layout") {
    std::ostringstream os;
    export_density(os, s, c, DensityFormat::Vtk);
    const std::string t = os.str();
    CHECK(t.rfind("# vtk DataFile Version", 0) == 0);
    CHECK(t.find("DATASET STRUCTURED_POINTS") != std::string::npos);
    CHECK(t.find("DIMENSIONS 9 9 1") != std::string::npos);
    CHECK(t.find("SPACING 0.5 0.5 1") != std::string::npos);
    CHECK(t.find("POINT_DATA 81") != std::string::npos);
    CHECK(t.find("SCALARS density_2 double 1") != std::string::npos);
  }
  CHECK(parse_density_format("csv") == DensityFormat::Csv);
  CHECK_THROWS_AS(parse_density_format("png"), ConfigError);
}

TEST_CASE("CLI: preset and usage errors") {
  const Cli p = invoke({"preset", "model2"});
  CHECK(p.code == 0);
  CHECK(equivalent(parse_config(p.out), preset("model2")));
  CHECK(invoke({"preset", "model9"}).code == 1);
  CHECK(invoke({}).code == 1);
  CHECK(invoke({"frobnicate"}).code == 1);
  const Cli both = invoke({"solve", "--preset", "model1", "--config", "x.toml"});
  CHECK(both.code == 1);
  CHECK(both.err.find("error") != std::string::npos);
  CHECK(invoke({"solve", "--preset", "model1", "--method", "lagr", "--omega", "1.0", "--max-iters", "0"}).code == 1);
  CHECK(invoke({"spectrum", "--preset", "model1"}).code == 1);
  CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("CLI: solve with a zero budget still writes every artifact") {
  TempDir tmp;
  const Cli r = invoke({"solve", "--preset", "model1", "--mesh", "8", "--max-iters", "0", "--out", tmp / "run"});
  CHECK(r.code == 2);
  CHECK(field(r.out, "status") == "max_iters");
  CHECK(r.err.find("not converged") != std::string::npos);
  for (const char* f : {"config.toml", "history.csv", "state.bin", "density.vtk", "density.csv"}) {
    CHECK(fs::exists(tmp.path / "run" / f));
  }
  const auto h = lines(slurp(tmp / "run/history.csv"));
  const int iters = std::stoi(split(field(r.out, "iterations"), ' ')[0]);
  // one row per recorded iterate, k = 0..iters, plus the header
  CHECK(h.size() == static_cast<std::size_t>(iters) + 2);
  const ConfigFile used = load_config(tmp / "run/config.toml");
  CHECK(used.model.elements_per_dir == 8);
  CHECK(used.run.max_iters == 0);
}

TEST_CASE("CLI: solve, then analyse the stored state") {
  TempDir tmp;
  const std::string cfg = tmp / "toy.toml";
  ConfigFile c;
  c.name = "toy";
  c.model = small_model(2, 6);
  c.run.method = Method::LagrRGD;
  c.run.omega = 0.9;
  c.run.stop_residual = 1e-11;
  save_config(c, cfg);

  const Cli s = invoke({"solve", "--config", cfg, "--out", tmp / "run"});
  REQUIRE(s.code == 0);
  CHECK(field(s.out, "status") == "converged");
  const double e = std::stod(field(s.out, "energy"));
  CHECK(e > 0.0);
  const auto lam = split(field(s.out, "lambda"), ' ');
  CHECK(lam.size() == 2);

  const auto hist = lines(slurp(tmp / "run/history.csv"));
  const int iters = std::stoi(split(field(s.out, "iterations"), ' ')[0]);
  CHECK(hist.size() == static_cast<std::size_t>(iters) + 2);
  CHECK(std::stod(split(hist.back(), ',')[1]) == doctest::Approx(e).epsilon(1e-7));

  // the stored state reproduces the printed numbers
  const StateFile st = read_state(tmp / "run/state.bin");
  const GpeProblem prob(build_discretization(c.model));
  const Linearization lin = linearize(prob, prob.frame(st.coeffs));
  CHECK(fmt8(lin.energy) == field(s.out, "energy"));
  CHECK(residual(lin).r < 1e-11);

  // lumped (Simpson) nodal quadrature of the exported density recovers N_j
  const auto rows = lines(slurp(tmp / "run/density.csv"));
  const int side = 13;
  REQUIRE(rows.size() == side * side + 1u);
  const double h = 4.0 / (side - 1);
  auto w1 = [&](int i) { return (i == 0 || i == side - 1) ? h / 3.0 : (i % 2 ? 4.0 * h / 3.0 : 2.0 * h / 3.0); };
  Eigen::Vector2d total = Eigen::Vector2d::Zero();
  for (int iy = 0; iy < side; ++iy) {
    for (int ix = 0; ix < side; ++ix) {
      const auto v = split(rows[1 + iy * side + ix], ',');
      for (int j = 0; j < 2; ++j) total[j] += w1(ix) * w1(iy) * std::stod(v[2 + j]);
    }
  }
  for (int j = 0; j < 2; ++j) CHECK(std::abs(total[j] - c.model.components[j].mass) <= 0.01 * c.model.components[j].mass);

  const Cli sp = invoke({"spectrum", "--config", cfg, "--state", tmp / "run/state.bin", "--k", "2", "--k-a", "3"});
  REQUIRE(sp.code == 0);
  CHECK(split(field(sp.out, "A_1"), ' ').size() == 3);
  CHECK(split(field(sp.out, "F_2"), ' ').size() == 2);
  // lowest F_j eigenvalue equals lambda_j at a ground state
  CHECK(std::stod(split(field(sp.out, "F_1"), ' ')[0]) == doctest::Approx(std::stod(lam[0])).epsilon(1e-6));

  const Cli rt = invoke({"rate", "--config", cfg, "--state", tmp / "run/state.bin", "--tau", "0.5,1"});
  REQUIRE(rt.code == 0);
  CHECK(field(rt.out, "metric").find("lagrangian") != std::string::npos);
  CHECK(rt.out.find("tau,rho,admissible\n0.5,") != std::string::npos);

  const Cli cd = invoke({"condition", "--config", cfg, "--state", tmp / "run/state.bin", "--omegas", "0,0.9",
                      "--out", tmp / "cond.csv"});
  REQUIRE(cd.code == 0);
  const auto cl = lines(slurp(tmp / "cond.csv"));
  REQUIRE(cl.size() == 3);
  CHECK(cl[0] == "omega,kappa_1,kappa_2");
  CHECK(std::stod(split(cl[2], ',')[1]) > std::stod(split(cl[1], ',')[1]));

  const Cli ex = invoke({"export", "--config", cfg, "--state", tmp / "run/state.bin", "--format", "csv"});
  REQUIRE(ex.code == 0);
  CHECK(ex.out == slurp(tmp / "run/density.csv"));

  // mismatched mesh is an input error
  const Cli bad = invoke({"spectrum", "--config", cfg, "--mesh", "5", "--state", tmp / "run/state.bin"});
  CHECK(bad.code == 1);
}

TEST_CASE("CLI: fixed-step eaRGD decreases the energy on model 1 at m = 16") {
  TempDir tmp;
  const Cli r = invoke({"solve", "--preset", "model1", "--mesh", "16", "--method", "earg", "--step", "fixed:0.5",
                     "--max-iters", "40", "--out", tmp / "run"});
  CHECK(r.code == 2);
  const auto h = lines(slurp(tmp / "run/history.csv"));
  REQUIRE(h.size() > 30);
  double prev = std::stod(split(h[1], ',')[1]);
  for (std::size_t i = 2; i < h.size(); ++i) {
    const double e = std::stod(split(h[i], ',')[1]);
    CHECK(e <= prev * (1.0 + 1e-8));
    prev = e;
  }
}

TEST_CASE("installed binary exit codes") {
  const std::string exe = GPEROT_CLI_PATH;
  TempDir tmp;
  const std::string base = exe + " preset model1 --mesh 4 --out " + (tmp / "m.toml");
  CHECK(std::system(base.c_str()) == 0);
  const std::string no_iter = exe + " solve --config " + (tmp / "m.toml") + " --max-iters 0 --out " + (tmp / "o") +
                              " > /dev/null 2>&1";
  const int status = std::system(no_iter.c_str());
  CHECK(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 2);
  const std::string bad = exe + " solve --preset nope > /dev/null 2>&1";
  const int s2 = std::system(bad.c_str());
  CHECK(WEXITSTATUS(s2) == 1);
}

}  // TEST_SUITE
