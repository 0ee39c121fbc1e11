#include "gperot/model.hpp"

#include <cmath>
#include <sstream>

namespace gperot {

double Potential::operator()(double x, double y) const {
  const double sx = std::sin(wave_x * x);
  const double sy = std::sin(wave_y * y);
  return quad_x * x * x + quad_y * y * y + sin_x * sx * sx + sin_y * sy * sy;
}

void ModelSpec::validate() const {
  if (components.empty()) throw ConfigError("model needs at least one component");
  if (elements_per_dir < 2) throw ConfigError("elements_per_dir must be at least 2");
  if (quad_order < 1) throw ConfigError("quad_order must be positive");
  if (!(domain.width() > 0.0) || !(domain.height() > 0.0)) {
    throw ConfigError("domain must have positive extent");
  }
  const int np = p();
  if (interaction.rows() != np || interaction.cols() != np) {
    std::ostringstream os;
    os << "interaction matrix must be " << np << "x" << np << ", got "
       << interaction.rows() << "x" << interaction.cols();
    throw ConfigError(os.str());
  }
  for (int i = 0; i < np; ++i) {
    for (int j = 0; j < np; ++j) {
      const double kij = interaction(i, j);
      if (!std::isfinite(kij) || kij < 0.0) {
        throw ConfigError("interaction matrix must be entrywise nonnegative");
      }
      if (std::abs(kij - interaction(j, i)) > 1e-14 * std::max(1.0, std::abs(kij))) {
        throw ConfigError("interaction matrix must be symmetric");
      }
    }
  }
  for (int j = 0; j < np; ++j) {
    const auto& c = components[j];
    if (!(c.mass > 0.0)) {
      throw ConfigError("component " + std::to_string(j + 1) + ": mass must be positive");
    }
    if (!(c.margin > 0.0)) {
      throw ConfigError("component " + std::to_string(j + 1) + ": margin must be positive");
    }
    const auto& v = c.potential;
    if (v.quad_x < 0.0 || v.quad_y < 0.0 || v.sin_x < 0.0 || v.sin_y < 0.0) {
      throw ConfigError("component " + std::to_string(j + 1) +
                        ": potential coefficients must be nonnegative");
    }
  }
}

double ModelSpec::dominance_margin(int j, double x, double y) const {
  const auto& c = components.at(j);
  return c.potential(x, y) - 0.25 * (1.0 + c.margin) * c.omega * c.omega * (x * x + y * y);
}

ModelSpec ModelSpec::single_component(int j) const {
  ModelSpec out = *this;
  out.components = {components.at(j)};
  out.interaction = Eigen::MatrixXd::Constant(1, 1, interaction(j, j));
  return out;
}

}  // namespace gperot
