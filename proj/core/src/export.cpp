#include "gperot/export.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include "gperot/common.hpp"

namespace gperot {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace

std::string fmt8(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.8g", v);
  return buf;
}

void write_history(std::ostream& out, const std::vector<IterationRecord>& history) {
  out << "k,energy,residual,tau,cg_iters,wall_ms\n";
  for (const auto& r : history) {
    out << r.k << ',' << fmt8(r.energy) << ',' << fmt8(r.residual) << ',' << fmt8(r.tau) << ',' << r.cg_iters
        << ',' << fmt8(r.wall_ms) << '\n';
  }
}

void write_history(const std::filesystem::path& path, const std::vector<IterationRecord>& history) {
  auto out = open_out(path);
  write_history(out, history);
  if (!out) throw Error("write failed: " + path.string());
}

DensityFormat parse_density_format(const std::string& s) {
  if (s == "vtk") return DensityFormat::Vtk;
  if (s == "csv") return DensityFormat::Csv;
  throw ConfigError("unknown density format '" + s + "' (expected vtk or csv)");
}

Eigen::MatrixXd nodal_densities(const ModelSpec& spec, const Eigen::MatrixXcd& coeffs) {
  const Index m = spec.elements_per_dir;
  const Index side = 2 * m + 1, inner = 2 * m - 1;
  if (coeffs.rows() != inner * inner || coeffs.cols() != spec.p()) {
    throw DimensionError("density export: coefficient array does not match the model");
  }
  Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(side * side, coeffs.cols());
  for (Index iy = 1; iy < side - 1; ++iy) {
    for (Index ix = 1; ix < side - 1; ++ix) {
      const Index dof = (iy - 1) * inner + (ix - 1);
      for (Index j = 0; j < coeffs.cols(); ++j) rho(iy * side + ix, j) = std::norm(coeffs(dof, j));
    }
  }
  return rho;
}

void export_density(std::ostream& out, const ModelSpec& spec, const Eigen::MatrixXcd& coeffs, DensityFormat fmt) {
  const Eigen::MatrixXd rho = nodal_densities(spec, coeffs);
  const Index m = spec.elements_per_dir;
  const Index side = 2 * m + 1;
  const Rect& d = spec.domain;
  const double dx = d.width() / static_cast<double>(2 * m), dy = d.height() / static_cast<double>(2 * m);
  if (fmt == DensityFormat::Vtk) {
    out << "# vtk DataFile Version 3.0\n"
        << "component densities\n"
        << "ASCII\n"
        << "DATASET STRUCTURED_POINTS\n"
        << "DIMENSIONS " << side << ' ' << side << " 1\n"
        << "ORIGIN " << fmt8(d.x_min) << ' ' << fmt8(d.y_min) << " 0\n"
        << "SPACING " << fmt8(dx) << ' ' << fmt8(dy) << " 1\n"
        << "POINT_DATA " << side * side << '\n';
    for (Index j = 0; j < rho.cols(); ++j) {
      out << "SCALARS density_" << j + 1 << " double 1\nLOOKUP_TABLE default\n";
      for (Index i = 0; i < rho.rows(); ++i) out << fmt8(rho(i, j)) << '\n';
    }
  } else {
    out << "x,y";
    for (Index j = 0; j < rho.cols(); ++j) out << ",density_" << j + 1;
    out << '\n';
    for (Index iy = 0; iy < side; ++iy) {
      for (Index ix = 0; ix < side; ++ix) {
        out << fmt8(d.x_min + dx * static_cast<double>(ix)) << ',' << fmt8(d.y_min + dy * static_cast<double>(iy));
        for (Index j = 0; j < rho.cols(); ++j) out << ',' << fmt8(rho(iy * side + ix, j));
        out << '\n';
      }
    }
  }
}

void export_density(const std::filesystem::path& path, const ModelSpec& spec, const Eigen::MatrixXcd& coeffs,
                    DensityFormat fmt) {
  auto out = open_out(path);
  export_density(out, spec, coeffs, fmt);
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace gperot
