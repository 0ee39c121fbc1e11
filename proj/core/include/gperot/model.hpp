#pragma once

#include <string>
#include <vector>

#include "gperot/common.hpp"

namespace gperot {

/// Axis-aligned rectangle [x_min, x_max] x [y_min, y_max].
struct Rect {
  double x_min = -10.0;
  double x_max = 10.0;
  double y_min = -10.0;
  double y_max = 10.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
};

/// Trapping potential
///   V(x, y) = quad_x x^2 + quad_y y^2 + sin_x sin^2(wave_x x) + sin_y sin^2(wave_y y)
/// with nonnegative amplitudes. Covers harmonic traps and optical-lattice terms.
struct Potential {
  double quad_x = 0.0;
  double quad_y = 0.0;
  double sin_x = 0.0;
  double wave_x = 0.0;
  double sin_y = 0.0;
  double wave_y = 0.0;

  double operator()(double x, double y) const;
  bool operator==(const Potential&) const = default;
};

struct ComponentSpec {
  double mass = 1.0;    // N_j, prescribed particle number
  double omega = 0.0;   // rotation frequency
  Potential potential;
  double margin = 0.05;  // epsilon_j in the rotation/trap dominance check

  bool operator==(const ComponentSpec&) const = default;
};

/// Physical problem: domain, mesh resolution, components and the interaction matrix.
struct ModelSpec {
  Rect domain;
  int elements_per_dir = 64;
  int quad_order = 4;
  std::vector<ComponentSpec> components;
  Eigen::MatrixXd interaction;  // p x p, symmetric, entrywise nonnegative

  int p() const { return static_cast<int>(components.size()); }

  /// Checks everything that can be checked without quadrature points: positive
  /// masses, nonnegative potential coefficients, m >= 2, symmetric nonnegative K.
  /// The trap-dominates-rotation inequality is checked pointwise when the
  /// discretization is built. Throws ConfigError.
  void validate() const;

  /// V_j(x) - (1 + eps_j)/4 * Omega_j^2 |x|^2.
  double dominance_margin(int j, double x, double y) const;

  /// Model restricted to a single component (interaction kappa_jj only).
  ModelSpec single_component(int j) const;
};

}  // namespace gperot
