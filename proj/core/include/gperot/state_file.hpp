#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <Eigen/Dense>

#include "gperot/model.hpp"

namespace gperot {

/// Binary snapshot of a frame: "GPEROT01", u64 n, p, m, f64 bounds[4], then
/// n*p interleaved (re, im) doubles, column-major. Little endian.
struct StateFile {
  std::uint64_t m = 0;
  Rect domain;
  Eigen::MatrixXcd coeffs;  // n x p

  std::uint64_t n() const { return static_cast<std::uint64_t>(coeffs.rows()); }
  std::uint64_t p() const { return static_cast<std::uint64_t>(coeffs.cols()); }
};

std::string encode_state(const StateFile& s);
StateFile decode_state(const std::string& bytes);
void write_state(const StateFile& s, const std::filesystem::path& path);
StateFile read_state(const std::filesystem::path& path);

/// Throws DimensionError unless the snapshot fits the model's discretization.
void check_state_matches(const StateFile& s, const ModelSpec& spec);

}  // namespace gperot
