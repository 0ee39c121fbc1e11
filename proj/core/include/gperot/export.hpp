#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gperot/model.hpp"
#include "gperot/optimizer.hpp"

namespace gperot {

/// Formats with 8 significant digits, the precision used for all printed output.
std::string fmt8(double v);

void write_history(std::ostream& out, const std::vector<IterationRecord>& history);
void write_history(const std::filesystem::path& path, const std::vector<IterationRecord>& history);

enum class DensityFormat { Vtk, Csv };
DensityFormat parse_density_format(const std::string& s);

/// |phi_j|^2 at every Q2 node (boundary nodes carry zero), node order iy*(2m+1)+ix.
Eigen::MatrixXd nodal_densities(const ModelSpec& spec, const Eigen::MatrixXcd& coeffs);

void export_density(std::ostream& out, const ModelSpec& spec, const Eigen::MatrixXcd& coeffs, DensityFormat fmt);
void export_density(const std::filesystem::path& path, const ModelSpec& spec, const Eigen::MatrixXcd& coeffs,
                    DensityFormat fmt);

}  // namespace gperot
