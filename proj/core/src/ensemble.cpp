#include "nhlaw/ensemble.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "nhlaw/errors.hpp"

namespace nhlaw {
namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t kNoiseStream = 0x6f75;  // OU / Ginibre noise
constexpr char kMagic[8] = {'N', 'H', 'L', 'A', 'W', 'M', 'A', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int k = 0; k < 4; ++k) b[k] = static_cast<unsigned char>(v >> (8 * k));
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(b[k]) << (8 * k);
  return v;
}

void put_f64(std::ostream& os, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  unsigned char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(v >> (8 * k));
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(b[k]) << (8 * k);
  return std::bit_cast<double>(v);
}

Mat fill(int n, Field field, Distribution dist, const CounterRng& rng) {
  Mat x(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  const double half = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto k = static_cast<std::uint64_t>(i) * n + j;
      if (field == Field::Real) {
        x(i, j) = cd(rng.draw(dist, k) * scale, 0.0);
      } else {
        x(i, j) = cd(rng.draw(dist, 2 * k), rng.draw(dist, 2 * k + 1)) * (half * scale);
      }
    }
  }
  return x;
}

}  // namespace

std::string_view to_string(Field f) { return f == Field::Real ? "real" : "complex"; }

std::string_view to_string(Distribution d) {
  switch (d) {
    case Distribution::Gaussian: return "gaussian";
    case Distribution::Rademacher: return "rademacher";
    case Distribution::Uniform: return "uniform";
  }
  return "gaussian";
}

Field parse_field(std::string_view s) {
  if (s == "real") return Field::Real;
  if (s == "complex") return Field::Complex;
  throw Error(ErrorCode::InvalidConfig, "unknown field '" + std::string(s) + "'");
}

Distribution parse_distribution(std::string_view s) {
  if (s == "gaussian") return Distribution::Gaussian;
  if (s == "rademacher") return Distribution::Rademacher;
  if (s == "uniform") return Distribution::Uniform;
  throw Error(ErrorCode::InvalidConfig, "unknown distribution '" + std::string(s) + "'");
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t trial, std::uint64_t stream)
    : key_(mix(mix(mix(seed) ^ trial) ^ (stream * kGolden))) {}

std::uint64_t CounterRng::bits(std::uint64_t counter) const { return mix(key_ ^ mix(counter)); }

double CounterRng::uniform(std::uint64_t counter) const {
  return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::gaussian(std::uint64_t counter) const {
  const double u1 = uniform(2 * counter);
  const double u2 = uniform(2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

double CounterRng::draw(Distribution d, std::uint64_t counter) const {
  switch (d) {
    case Distribution::Gaussian: return gaussian(counter);
    case Distribution::Rademacher: return (bits(counter) >> 63) ? 1.0 : -1.0;
    case Distribution::Uniform: return std::sqrt(3.0) * (2.0 * uniform(counter) - 1.0);
  }
  return 0.0;
}

IidMatrix sample(const EnsembleSpec& spec, std::uint64_t trial) {
  if (spec.n < 2) throw Error(ErrorCode::InvalidConfig, "n must be at least 2");
  return {spec, fill(spec.n, spec.field, spec.distribution, CounterRng(spec.seed, trial, 0))};
}

Mat hermitize(const Mat& x, cd z) {
  const Eigen::Index n = x.rows();
  Mat h = Mat::Zero(2 * n, 2 * n);
  Mat shifted = x;
  shifted.diagonal().array() -= z;
  h.topRightCorner(n, n) = shifted;
  h.bottomLeftCorner(n, n) = shifted.adjoint();
  return h;
}

Mat ginibre(int n, Field field, std::uint64_t seed, std::uint64_t trial) {
  return fill(n, field, Distribution::Gaussian, CounterRng(seed, trial, kNoiseStream));
}

IidMatrix gaussian_divisible(const IidMatrix& x, double t, std::uint64_t seed, std::uint64_t trial) {
  if (t < 0.0) throw Error(ErrorCode::InvalidConfig, "OU time must be nonnegative");
  if (t == 0.0) return x;
  const int n = static_cast<int>(x.x.rows());
  IidMatrix out = x;
  out.x = std::exp(-0.5 * t) * x.x + std::sqrt(-std::expm1(-t)) * ginibre(n, x.spec.field, seed, trial);
  return out;
}

void write_matrix(const std::string& path, const IidMatrix& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  os.write(kMagic, sizeof kMagic);
  put_u32(os, kVersion);
  put_u32(os, static_cast<std::uint32_t>(m.x.rows()));
  put_u32(os, m.spec.field == Field::Real ? 0u : 1u);
  put_u32(os, 0u);  // row-major
  for (Eigen::Index i = 0; i < m.x.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.x.cols(); ++j) {
      put_f64(os, m.x(i, j).real());
      if (m.spec.field == Field::Complex) put_f64(os, m.x(i, j).imag());
    }
  }
  if (!os) throw Error(ErrorCode::IoFailure, "write failed for " + path);
}

IidMatrix read_matrix(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw Error(ErrorCode::IoFailure, "bad magic in " + path);
  if (get_u32(is) != kVersion) throw Error(ErrorCode::IoFailure, "unsupported version");
  const auto n = static_cast<int>(get_u32(is));
  const auto field = get_u32(is);
  if (get_u32(is) != 0u) throw Error(ErrorCode::IoFailure, "unsupported layout");
  IidMatrix m;
  m.spec.n = n;
  m.spec.field = field == 0u ? Field::Real : Field::Complex;
  m.x.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double re = get_f64(is);
      const double im = m.spec.field == Field::Complex ? get_f64(is) : 0.0;
      m.x(i, j) = cd(re, im);
    }
  }
  if (!is) throw Error(ErrorCode::IoFailure, "truncated payload in " + path);
  return m;
}

}  // namespace nhlaw
