#include "gperot/state_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "gperot/common.hpp"

namespace gperot {

namespace {

constexpr char kMagic[8] = {'G', 'P', 'E', 'R', 'O', 'T', '0', '1'};
constexpr std::size_t kHeader = 8 + 3 * 8 + 4 * 8;

static_assert(std::endian::native == std::endian::little, "state files assume a little-endian host");

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T get(const std::string& in, std::size_t& pos) {
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

std::uint64_t free_dofs(std::uint64_t m) { return (2 * m - 1) * (2 * m - 1); }

}  // namespace

std::string encode_state(const StateFile& s) {
  if (s.m < 1 || s.n() != free_dofs(s.m)) {
    throw DimensionError("state: n = " + std::to_string(s.n()) + " does not match m = " + std::to_string(s.m));
  }
  std::string out;
  out.reserve(kHeader + 16 * s.coeffs.size());
  out.append(kMagic, 8);
  put<std::uint64_t>(out, s.n());
  put<std::uint64_t>(out, s.p());
  put<std::uint64_t>(out, s.m);
  for (double b : {s.domain.x_min, s.domain.x_max, s.domain.y_min, s.domain.y_max}) put<double>(out, b);
  for (Index i = 0; i < s.coeffs.size(); ++i) {
    put<double>(out, s.coeffs.data()[i].real());
    put<double>(out, s.coeffs.data()[i].imag());
  }
  return out;
}

StateFile decode_state(const std::string& bytes) {
  if (bytes.size() < kHeader || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw DimensionError("state: missing GPEROT01 header");
  }
  std::size_t pos = 8;
  const auto n = get<std::uint64_t>(bytes, pos);
  const auto p = get<std::uint64_t>(bytes, pos);
  StateFile s;
  s.m = get<std::uint64_t>(bytes, pos);
  s.domain.x_min = get<double>(bytes, pos);
  s.domain.x_max = get<double>(bytes, pos);
  s.domain.y_min = get<double>(bytes, pos);
  s.domain.y_max = get<double>(bytes, pos);
  if (s.m < 1 || n != free_dofs(s.m)) {
    throw DimensionError("state: n = " + std::to_string(n) + " inconsistent with m = " + std::to_string(s.m));
  }
  if (p < 1 || p > 64) throw DimensionError("state: implausible component count " + std::to_string(p));
  if (bytes.size() != kHeader + 16 * n * p) {
    throw DimensionError("state: payload has " + std::to_string(bytes.size() - kHeader) + " bytes, expected " +
                         std::to_string(16 * n * p));
  }
  s.coeffs.resize(static_cast<Index>(n), static_cast<Index>(p));
  for (Index i = 0; i < s.coeffs.size(); ++i) {
    const double re = get<double>(bytes, pos);
    const double im = get<double>(bytes, pos);
    s.coeffs.data()[i] = cplx(re, im);
  }
  return s;
}

void write_state(const StateFile& s, const std::filesystem::path& path) {
  const std::string bytes = encode_state(s);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed: " + path.string());
}

StateFile read_state(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_state(ss.str());
}

void check_state_matches(const StateFile& s, const ModelSpec& spec) {
  const auto want_m = static_cast<std::uint64_t>(spec.elements_per_dir);
  if (s.m != want_m) {
    throw DimensionError("state has m = " + std::to_string(s.m) + " but the config uses m = " + std::to_string(want_m));
  }
  if (s.p() != static_cast<std::uint64_t>(spec.p())) {
    throw DimensionError("state has " + std::to_string(s.p()) + " components, config has " + std::to_string(spec.p()));
  }
  const Rect& d = spec.domain;
  if (s.domain.x_min != d.x_min || s.domain.x_max != d.x_max || s.domain.y_min != d.y_min ||
      s.domain.y_max != d.y_max) {
    throw DimensionError("state domain differs from the config domain");
  }
}

}  // namespace gperot
