#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gperot/manifold.hpp"

namespace gperot {

struct FixedStep {
  double tau = 1.0;
};
struct LineSearchStep {
  double tau_min = 0.1;
  double tau_max = 10.0;
  int grid = 64;
  double rel_tol = 1e-6;
};
struct AdaptiveStep {
  double tau0 = 1.0;
};
using StepRule = std::variant<FixedStep, LineSearchStep, AdaptiveStep>;

/// Parses "fixed:F", "ls" or "adaptive" (optionally "adaptive:T0").
StepRule parse_step_rule(const std::string& text);
std::string to_string(const StepRule& rule);

enum class Method { EaRGD, LagrRGD };
enum class FallbackPolicy {
  EaStep,      // take one eaRGD step, then retry the Lagrangian metric
  HalveOmega,  // halve omega once
  None,        // stop with metric_indefinite
};
enum class Termination { Converged, MaxIters, MetricIndefinite };

const char* to_string(Method m);
const char* to_string(FallbackPolicy f);
const char* to_string(Termination t);
Method parse_method(const std::string& s);
FallbackPolicy parse_fallback(const std::string& s);

struct RunOptions {
  Method method = Method::EaRGD;
  double omega = 0.95;
  StepRule step = FixedStep{1.0};
  double stop_residual = 1e-14;
  int max_iters = 100000;
  double tol_cg = 1e-8;
  /// Lower bound of the inner tolerance r_k * tol_cg.
  double cg_floor = 1e-14;
  int cg_max_iter = 5000;
  bool warm_start = true;
  double warm_start_residual = 1e-2;
  int max_warm_iters = 100000;
  int record_every = 1;
  FallbackPolicy fallback = FallbackPolicy::EaStep;
  PreconditionerSource preconditioner = PreconditionerSource::LinearPart;
};

struct IterationRecord {
  int k = 0;
  double energy = 0.0;
  double residual = 0.0;
  double tau = 0.0;       // step that produced this iterate (0 for k = 0)
  long cg_iters = 0;      // inner iterations spent on that step
  double wall_ms = 0.0;   // cumulative
  bool warm = false;
};

struct RunResult {
  PFrame state;
  MultiplierDiag lambda;
  double energy = 0.0;
  double residual = 0.0;
  std::vector<IterationRecord> history;
  Termination termination = Termination::MaxIters;
  int iterations = 0;       // all steps, warm start included
  int warm_iterations = 0;
  long cg_iters = 0;
  int fallbacks = 0;

  bool converged() const { return termination == Termination::Converged; }
};

/// Called after every accepted iterate with the global index k and the frame.
using Observer = std::function<void(int, const PFrame&, double residual)>;

/// Interior dofs equal to one, each column scaled to mass N_j.
PFrame initial_guess(const GpeProblem& prob);

struct StepResult {
  PFrame next;
  Eigen::MatrixXcd grad;
  int cg_iters = 0;
};

/// One Riemannian gradient step retract(phi, -tau grad) with the metric of
/// `method`. For eaRGD this is the damped inverse-iteration update.
StepResult step(const Linearization& lin, const MetricSelector& sel, double tau, double rel_tol);
PFrame step(const GpeProblem& prob, const PFrame& phi, Method method, double omega, double tau,
            double rel_tol);

/// Energy along the retracted ray tau -> E(retract(phi, -tau dir)) from cached
/// polynomial coefficients; each evaluation costs O(p^2).
class RayEnergy {
 public:
  RayEnergy(const Linearization& lin, const Eigen::MatrixXcd& dir);
  double operator()(double tau) const;

 private:
  int p_ = 0;
  Eigen::VectorXd target_;
  Eigen::MatrixXd mass_;    // [j, power] for power 0..2
  Eigen::MatrixXd linear_;  // [j, power]
  std::vector<std::array<double, 5>> quartic_;  // [i*p + j][power]
  Eigen::MatrixXd kappa_;
};

double minimize_on_ray(const RayEnergy& e, const LineSearchStep& ls);

struct StepHistory {
  const PFrame* prev = nullptr;
  const Eigen::MatrixXcd* prev_grad = nullptr;
  double prev_tau = 1.0;
};

double choose_step(const StepRule& rule, const Linearization& lin, const Eigen::MatrixXcd& grad,
                   const StepHistory& hist);

RunResult run(const ModelSpec& spec, const RunOptions& opt, const Observer& observer = {});
RunResult run(GpeProblem& prob, const RunOptions& opt, const std::optional<PFrame>& start = {},
              const Observer& observer = {});

}  // namespace gperot
