#include "gperot/fem.hpp"

#include <cmath>
#include <sstream>

#include "gperot/quadrature.hpp"

namespace gperot {

namespace {

constexpr int kLocal = kNodesPerElement * kNodesPerElement;

double lagrange(int i, double t) {
  switch (i) {
    case 0: return 2.0 * (t - 0.5) * (t - 1.0);
    case 1: return -4.0 * t * (t - 1.0);
    default: return 2.0 * t * (t - 0.5);
  }
}

double lagrange_d(int i, double t) {
  switch (i) {
    case 0: return 4.0 * t - 3.0;
    case 1: return 4.0 - 8.0 * t;
    default: return 4.0 * t - 1.0;
  }
}

struct Plan {
  std::shared_ptr<const SparsityPattern> pattern;
  std::vector<Index> scatter;
};

Plan make_plan(const std::vector<std::array<Index, kNodesPerElement>>& elements,
               const std::vector<Index>& node_to_dof, Index ndof) {
  std::vector<std::vector<Index>> rows(ndof);
  for (const auto& el : elements) {
    for (Index a : el) {
      const Index ra = node_to_dof[a];
      if (ra < 0) continue;
      for (Index b : el) {
        const Index cb = node_to_dof[b];
        if (cb >= 0) rows[ra].push_back(cb);
      }
    }
  }
  Plan plan;
  auto pat = std::make_shared<SparsityPattern>(SparsityPattern::from_rows(ndof, std::move(rows)));
  plan.scatter.assign(elements.size() * kLocal, -1);
  for (std::size_t e = 0; e < elements.size(); ++e) {
    const auto& el = elements[e];
    for (int a = 0; a < kNodesPerElement; ++a) {
      const Index ra = node_to_dof[el[a]];
      if (ra < 0) continue;
      for (int b = 0; b < kNodesPerElement; ++b) {
        const Index cb = node_to_dof[el[b]];
        if (cb >= 0) plan.scatter[e * kLocal + a * kNodesPerElement + b] = pat->find(ra, cb);
      }
    }
  }
  plan.pattern = std::move(pat);
  return plan;
}

// local(e, L) fills the 9x9 element matrix L (row a = test function).
template <class T, class Local>
CsrMatrix<T> assemble(const Discretization& d, const Plan& plan, Local&& local) {
  CsrMatrix<T> out(plan.pattern);
  auto vals = out.values();
  std::array<T, kLocal> el{};
  for (Index e = 0; e < d.num_elements(); ++e) {
    el.fill(T{});
    local(e, el);
    const Index* sc = plan.scatter.data() + e * kLocal;
    for (int k = 0; k < kLocal; ++k) {
      if (sc[k] >= 0) vals[sc[k]] += el[k];
    }
  }
  return out;
}

template <class T, class Local>
CsrMatrix<T> assemble(const Discretization& d, Local&& local) {
  Plan plan{d.pattern, d.scatter};
  return assemble<T>(d, plan, std::forward<Local>(local));
}

double element_x0(const Discretization& d, Index e) {
  return d.spec.domain.x_min + static_cast<double>(e % d.m) * d.hx;
}

double element_y0(const Discretization& d, Index e) {
  return d.spec.domain.y_min + static_cast<double>(e / d.m) * d.hy;
}

template <class Fn>
void for_points(const Discretization& d, Index e, Fn&& fn) {
  const double x0 = element_x0(d, e);
  const double y0 = element_y0(d, e);
  for (int qy = 0; qy < d.q; ++qy) {
    for (int qx = 0; qx < d.q; ++qx) {
      const int l = qy * d.q + qx;
      fn(l, x0 + d.gauss_t[qx] * d.hx, y0 + d.gauss_t[qy] * d.hy);
    }
  }
}

RealSparse weighted_mass(const Discretization& d, const Plan& plan, const std::function<double(double, double)>& w) {
  return assemble<double>(d, plan, [&](Index e, std::array<double, kLocal>& el) {
    for_points(d, e, [&](int l, double x, double y) {
      const double c = d.ref_weight[l] * w(x, y);
      const double* v = &d.ref_value[l * kNodesPerElement];
      for (int a = 0; a < kNodesPerElement; ++a) {
        for (int b = 0; b < kNodesPerElement; ++b) el[a * kNodesPerElement + b] += c * v[a] * v[b];
      }
    });
  });
}

RealSparse stiffness_matrix(const Discretization& d, const Plan& plan) {
  return assemble<double>(d, plan, [&](Index, std::array<double, kLocal>& el) {
    for (int l = 0; l < d.points_per_element(); ++l) {
      const double c = d.ref_weight[l];
      const double* gx = &d.ref_dx[l * kNodesPerElement];
      const double* gy = &d.ref_dy[l * kNodesPerElement];
      for (int a = 0; a < kNodesPerElement; ++a) {
        for (int b = 0; b < kNodesPerElement; ++b) {
          el[a * kNodesPerElement + b] += c * (gx[a] * gx[b] + gy[a] * gy[b]);
        }
      }
    }
  });
}

RealSparse rotation_matrix(const Discretization& d, const Plan& plan) {
  return assemble<double>(d, plan, [&](Index e, std::array<double, kLocal>& el) {
    for_points(d, e, [&](int l, double x, double y) {
      const double c = d.ref_weight[l];
      const double* v = &d.ref_value[l * kNodesPerElement];
      const double* gx = &d.ref_dx[l * kNodesPerElement];
      const double* gy = &d.ref_dy[l * kNodesPerElement];
      for (int a = 0; a < kNodesPerElement; ++a) {
        for (int b = 0; b < kNodesPerElement; ++b) {
          el[a * kNodesPerElement + b] += c * v[a] * (x * gy[b] - y * gx[b]);
        }
      }
    });
  });
}

}  // namespace

double Discretization::node_x(Index node) const {
  return spec.domain.x_min + 0.5 * hx * static_cast<double>(node % nodes_per_dir);
}

double Discretization::node_y(Index node) const {
  return spec.domain.y_min + 0.5 * hy * static_cast<double>(node / nodes_per_dir);
}

double Discretization::quad_x(Index qp) const {
  const Index e = qp / points_per_element();
  const int l = static_cast<int>(qp % points_per_element());
  return element_x0(*this, e) + gauss_t[l % q] * hx;
}

double Discretization::quad_y(Index qp) const {
  const Index e = qp / points_per_element();
  const int l = static_cast<int>(qp % points_per_element());
  return element_y0(*this, e) + gauss_t[l / q] * hy;
}

Eigen::VectorXcd Discretization::interpolate(const std::function<cplx(double, double)>& f) const {
  Eigen::VectorXcd c(n());
  for (Index k = 0; k < n(); ++k) c[k] = f(node_x(dof_to_node[k]), node_y(dof_to_node[k]));
  return c;
}

Eigen::VectorXcd Discretization::load(const QuadField& f) const {
  if (static_cast<Index>(f.size()) != num_quad_points()) {
    throw DimensionError("load: quadrature field has wrong length");
  }
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(n());
  const int ppe = points_per_element();
  for (Index e = 0; e < num_elements(); ++e) {
    std::array<cplx, kNodesPerElement> acc{};
    const cplx* fe = f.data() + e * ppe;
    for (int l = 0; l < ppe; ++l) {
      const cplx c = ref_weight[l] * fe[l];
      const double* v = &ref_value[l * kNodesPerElement];
      for (int a = 0; a < kNodesPerElement; ++a) acc[a] += c * v[a];
    }
    const auto& el = element_nodes[e];
    for (int a = 0; a < kNodesPerElement; ++a) {
      const Index dof = node_to_dof[el[a]];
      if (dof >= 0) b[dof] += acc[a];
    }
  }
  return b;
}

DiscretizationPtr build_discretization(const ModelSpec& spec) {
  spec.validate();
  auto d = std::make_shared<Discretization>();
  d->spec = spec;
  d->m = spec.elements_per_dir;
  d->nodes_per_dir = 2 * d->m + 1;
  d->hx = spec.domain.width() / d->m;
  d->hy = spec.domain.height() / d->m;
  d->q = spec.quad_order;

  const int nd = d->nodes_per_dir;
  d->node_to_dof.assign(static_cast<std::size_t>(nd) * nd, -1);
  for (int iy = 1; iy < nd - 1; ++iy) {
    for (int ix = 1; ix < nd - 1; ++ix) {
      const Index node = static_cast<Index>(iy) * nd + ix;
      d->node_to_dof[node] = static_cast<Index>(d->dof_to_node.size());
      d->dof_to_node.push_back(node);
    }
  }

  d->element_nodes.resize(static_cast<std::size_t>(d->m) * d->m);
  for (int ey = 0; ey < d->m; ++ey) {
    for (int ex = 0; ex < d->m; ++ex) {
      auto& el = d->element_nodes[static_cast<std::size_t>(ey) * d->m + ex];
      for (int ly = 0; ly < 3; ++ly) {
        for (int lx = 0; lx < 3; ++lx) {
          el[ly * 3 + lx] = static_cast<Index>(2 * ey + ly) * nd + (2 * ex + lx);
        }
      }
    }
  }

  const GaussRule rule = gauss_legendre(d->q);
  d->gauss_t = rule.points;
  const int ppe = d->q * d->q;
  d->ref_value.resize(ppe * kNodesPerElement);
  d->ref_dx.resize(ppe * kNodesPerElement);
  d->ref_dy.resize(ppe * kNodesPerElement);
  d->ref_weight.resize(ppe);
  for (int qy = 0; qy < d->q; ++qy) {
    for (int qx = 0; qx < d->q; ++qx) {
      const int l = qy * d->q + qx;
      const double tx = rule.points[qx], ty = rule.points[qy];
      d->ref_weight[l] = rule.weights[qx] * rule.weights[qy] * d->hx * d->hy;
      for (int ly = 0; ly < 3; ++ly) {
        for (int lx = 0; lx < 3; ++lx) {
          const int a = ly * 3 + lx;
          d->ref_value[l * kNodesPerElement + a] = lagrange(lx, tx) * lagrange(ly, ty);
          d->ref_dx[l * kNodesPerElement + a] = lagrange_d(lx, tx) * lagrange(ly, ty) / d->hx;
          d->ref_dy[l * kNodesPerElement + a] = lagrange(lx, tx) * lagrange_d(ly, ty) / d->hy;
        }
      }
    }
  }

  for (int j = 0; j < spec.p(); ++j) {
    for (Index qp = 0; qp < d->num_quad_points(); ++qp) {
      const double x = d->quad_x(qp), y = d->quad_y(qp);
      if (spec.dominance_margin(j, x, y) < 0.0) {
        std::ostringstream os;
        os << "component " << j + 1 << ": trap does not dominate rotation at quadrature point ("
           << x << ", " << y << ")";
        throw ConfigError(os.str());
      }
    }
  }

  Plan plan = make_plan(d->element_nodes, d->node_to_dof, d->n());
  d->pattern = plan.pattern;
  d->scatter = plan.scatter;
  d->mass = weighted_mass(*d, plan, [](double, double) { return 1.0; });
  d->stiffness = stiffness_matrix(*d, plan);
  d->rotation = rotation_matrix(*d, plan);
  for (int j = 0; j < spec.p(); ++j) {
    const Potential v = spec.components[j].potential;
    d->potential_mass.push_back(weighted_mass(*d, plan, [&](double x, double y) { return v(x, y); }));
  }
  return d;
}

QuadField eval_quadrature(const Discretization& d, const Eigen::VectorXcd& coeffs) {
  if (coeffs.size() != d.n()) throw DimensionError("eval_quadrature: coefficient length mismatch");
  const int ppe = d.points_per_element();
  QuadField out(d.num_quad_points());
  for (Index e = 0; e < d.num_elements(); ++e) {
    std::array<cplx, kNodesPerElement> c{};
    const auto& el = d.element_nodes[e];
    for (int a = 0; a < kNodesPerElement; ++a) {
      const Index dof = d.node_to_dof[el[a]];
      c[a] = dof >= 0 ? coeffs[dof] : cplx{};
    }
    cplx* oe = out.data() + e * ppe;
    for (int l = 0; l < ppe; ++l) {
      const double* v = &d.ref_value[l * kNodesPerElement];
      cplx s{};
      for (int a = 0; a < kNodesPerElement; ++a) s += v[a] * c[a];
      oe[l] = s;
    }
  }
  return out;
}

RealSparse assemble_weighted_mass(const Discretization& d, const DensityField& w) {
  if (static_cast<Index>(w.size()) != d.num_quad_points()) {
    throw DimensionError("assemble_weighted_mass: weight field has wrong length");
  }
  for (double v : w) {
    if (v < -1e-14) throw ConfigError("assemble_weighted_mass: negative weight");
  }
  return assemble_weighted_mass_signed(d, w);
}

RealSparse assemble_weighted_mass_signed(const Discretization& d, const DensityField& w) {
  if (static_cast<Index>(w.size()) != d.num_quad_points()) {
    throw DimensionError("assemble_weighted_mass: weight field has wrong length");
  }
  const int ppe = d.points_per_element();
  return assemble<double>(d, [&](Index e, std::array<double, kLocal>& el) {
    const double* we = w.data() + e * ppe;
    for (int l = 0; l < ppe; ++l) {
      const double c = d.ref_weight[l] * we[l];
      if (c == 0.0) continue;
      const double* v = &d.ref_value[l * kNodesPerElement];
      for (int a = 0; a < kNodesPerElement; ++a) {
        const double ca = c * v[a];
        for (int b = a; b < kNodesPerElement; ++b) el[a * kNodesPerElement + b] += ca * v[b];
      }
    }
    for (int a = 0; a < kNodesPerElement; ++a) {
      for (int b = 0; b < a; ++b) el[a * kNodesPerElement + b] = el[b * kNodesPerElement + a];
    }
  });
}

std::vector<DensityField> densities(const Discretization& d, const Eigen::MatrixXcd& coeffs) {
  if (coeffs.rows() != d.n()) throw DimensionError("densities: coefficient rows mismatch");
  std::vector<DensityField> out(coeffs.cols());
  for (Index j = 0; j < coeffs.cols(); ++j) {
    const QuadField f = eval_quadrature(d, coeffs.col(j));
    auto& dj = out[j];
    dj.resize(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) dj[k] = std::norm(f[k]);
  }
  return out;
}

Eigen::MatrixXd quartic_interactions(const Discretization& d, const Eigen::MatrixXcd& coeffs) {
  const auto dens = densities(d, coeffs);
  const Index p = coeffs.cols();
  const int ppe = d.points_per_element();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = i; j < p; ++j) {
      double s = 0.0;
      for (Index k = 0; k < d.num_quad_points(); ++k) {
        s += d.ref_weight[k % ppe] * dens[i][k] * dens[j][k];
      }
      q(i, j) = q(j, i) = s;
    }
  }
  return q;
}

RealSparse assemble_unconstrained(const Discretization& d, FullMatrix which) {
  std::vector<Index> all(d.num_nodes());
  for (Index k = 0; k < d.num_nodes(); ++k) all[k] = k;
  const Plan plan = make_plan(d.element_nodes, all, d.num_nodes());
  switch (which) {
    case FullMatrix::Mass: return weighted_mass(d, plan, [](double, double) { return 1.0; });
    case FullMatrix::Stiffness: return stiffness_matrix(d, plan);
    case FullMatrix::Rotation: return rotation_matrix(d, plan);
  }
  throw Error("assemble_unconstrained: unknown matrix");
}

SparseHermitian assemble_covariant(const Discretization& d, int j) {
  const auto& c = d.spec.components.at(j);
  const double om = c.omega;
  return assemble<cplx>(d, [&](Index e, std::array<cplx, kLocal>& el) {
    for_points(d, e, [&](int l, double x, double y) {
      const double w = d.ref_weight[l];
      const double vr = c.potential(x, y) - 0.25 * om * om * (x * x + y * y);
      const double* v = &d.ref_value[l * kNodesPerElement];
      const double* gx = &d.ref_dx[l * kNodesPerElement];
      const double* gy = &d.ref_dy[l * kNodesPerElement];
      const cplx ih(0.0, 0.5 * om);
      for (int a = 0; a < kNodesPerElement; ++a) {
        const cplx ta_x = std::conj(gx[a] + ih * y * v[a]);
        const cplx ta_y = std::conj(gy[a] - ih * x * v[a]);
        for (int b = 0; b < kNodesPerElement; ++b) {
          const cplx tb_x = gx[b] + ih * y * v[b];
          const cplx tb_y = gy[b] - ih * x * v[b];
          el[a * kNodesPerElement + b] += w * (tb_x * ta_x + tb_y * ta_y + vr * v[a] * v[b]);
        }
      }
    });
  });
}

}  // namespace gperot
