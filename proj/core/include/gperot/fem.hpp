#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "gperot/common.hpp"
#include "gperot/model.hpp"
#include "gperot/sparse.hpp"

namespace gperot {

/// Values at every quadrature point, element-major, point-minor.
using QuadField = std::vector<cplx>;
using DensityField = std::vector<double>;

inline constexpr int kNodesPerElement = 9;

/// Uniform Q2 (biquadratic Lagrange) discretization of a rectangle with
/// homogeneous Dirichlet data. Nodes are numbered x-fastest on the
/// (2m+1) x (2m+1) lattice; free dofs are the interior nodes in node order.
/// Immutable once built.
struct Discretization {
  ModelSpec spec;
  int m = 0;                 // elements per direction
  int nodes_per_dir = 0;     // 2m + 1
  double hx = 0.0, hy = 0.0; // element sizes
  int q = 0;                 // Gauss points per direction
  std::vector<double> gauss_t;  // Gauss abscissae on [0, 1]

  std::vector<Index> node_to_dof;  // -1 on the boundary
  std::vector<Index> dof_to_node;

  // elements: 9 node ids per element, local index a = 3*ly + lx
  std::vector<std::array<Index, kNodesPerElement>> element_nodes;

  // reference tables at the q*q local points (local point = qy*q + qx)
  std::vector<double> ref_value;   // [point * 9 + a]
  std::vector<double> ref_dx;      // physical x-derivative
  std::vector<double> ref_dy;      // physical y-derivative
  std::vector<double> ref_weight;  // Gauss weight times element area

  // scatter plan into the shared pattern: [element * 81 + a * 9 + b], -1 if either dof is fixed
  std::vector<Index> scatter;

  std::shared_ptr<const SparsityPattern> pattern;
  RealSparse mass;
  RealSparse stiffness;
  RealSparse rotation;  // entries int psi_a (x d_y - y d_x) psi_b
  std::vector<RealSparse> potential_mass;

  Index num_nodes() const { return static_cast<Index>(node_to_dof.size()); }
  Index n() const { return static_cast<Index>(dof_to_node.size()); }
  Index num_elements() const { return static_cast<Index>(element_nodes.size()); }
  int points_per_element() const { return q * q; }
  Index num_quad_points() const { return num_elements() * points_per_element(); }
  int p() const { return spec.p(); }

  double node_x(Index node) const;
  double node_y(Index node) const;
  bool is_boundary(Index node) const { return node_to_dof[node] < 0; }
  /// Physical coordinates of quadrature point `qp` (global index).
  double quad_x(Index qp) const;
  double quad_y(Index qp) const;
  double quad_weight(Index qp) const { return ref_weight[qp % points_per_element()]; }

  /// Free-dof coefficient vector of a function sampled at the nodes.
  Eigen::VectorXcd interpolate(const std::function<cplx(double, double)>& f) const;
  /// Load vector b_a = sum_q w_q f(x_q) psi_a(x_q) over free dofs.
  Eigen::VectorXcd load(const QuadField& f) const;
};

using DiscretizationPtr = std::shared_ptr<const Discretization>;

/// Builds mesh, quadrature tables and the constant matrices. Throws ConfigError
/// if the rotation/trap dominance inequality fails at a quadrature point.
DiscretizationPtr build_discretization(const ModelSpec& spec);

QuadField eval_quadrature(const Discretization& disc, const Eigen::VectorXcd& coeffs);

/// Entry (a,b) = sum_q w_q weight(x_q) psi_a psi_b. Negative weights below
/// -1e-14 are rejected.
RealSparse assemble_weighted_mass(const Discretization& disc, const DensityField& weight);
/// Same as assemble_weighted_mass with no sign check (signed coupling weights).
RealSparse assemble_weighted_mass_signed(const Discretization& disc, const DensityField& weight);

/// Q_ij = int |phi_i|^2 |phi_j|^2 for the columns of `coeffs` (n x p).
Eigen::MatrixXd quartic_interactions(const Discretization& disc, const Eigen::MatrixXcd& coeffs);

/// Quadrature values |phi_j|^2 for every column.
std::vector<DensityField> densities(const Discretization& disc, const Eigen::MatrixXcd& coeffs);

/// Matrices over all (2m+1)^2 nodes with no boundary elimination.
enum class FullMatrix { Mass, Stiffness, Rotation };
RealSparse assemble_unconstrained(const Discretization& disc, FullMatrix which);

/// Covariant-gradient form of component j over free dofs:
///   int (grad psi_b + i W/2 r psi_b) . conj(grad psi_a + i W/2 r psi_a) + V^R psi_a psi_b
/// with r = (y, -x) and V^R = V - W^2 |x|^2 / 4. Algebraically equal to
/// S + Vmass_j + i W R.
SparseHermitian assemble_covariant(const Discretization& disc, int j);

}  // namespace gperot
