#pragma once

// Seeded i.i.d. matrices, Hermitization and the Ornstein-Uhlenbeck
// interpolation towards Ginibre.

#include <cstdint>
#include <string>
#include <string_view>

#include "nhlaw/block.hpp"

namespace nhlaw {

enum class Field { Real, Complex };
enum class Distribution { Gaussian, Rademacher, Uniform };

std::string_view to_string(Field f);
std::string_view to_string(Distribution d);
Field parse_field(std::string_view s);
Distribution parse_distribution(std::string_view s);

struct EnsembleSpec {
  int n = 2;
  Field field = Field::Complex;
  Distribution distribution = Distribution::Gaussian;
  std::uint64_t seed = 0;
};

struct IidMatrix {
  EnsembleSpec spec;
  Mat x;  // stored complex even for the real class
};

/// Counter-based generator: every draw is a pure function of
/// (seed, trial, stream, counter), so results do not depend on scheduling.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t trial, std::uint64_t stream);

  std::uint64_t bits(std::uint64_t counter) const;
  /// Uniform on the open interval (0, 1).
  double uniform(std::uint64_t counter) const;
  /// Standard normal via Box-Muller on counters 2c and 2c+1.
  double gaussian(std::uint64_t counter) const;
  /// Unit-variance, mean-zero draw of the requested law.
  double draw(Distribution d, std::uint64_t counter) const;

 private:
  std::uint64_t key_;
};

/// Entries chi / sqrt(n) with E chi = 0, E|chi|^2 = 1 and, for the complex
/// class, chi = (a + ib)/sqrt(2). `trial` selects an independent replica.
IidMatrix sample(const EnsembleSpec& spec, std::uint64_t trial = 0);

/// 2n x 2n matrix [[0, X - z], [(X - z)^*, 0]].
Mat hermitize(const Mat& x, cd z);

/// Ginibre matrix of the given symmetry class.
Mat ginibre(int n, Field field, std::uint64_t seed, std::uint64_t trial = 0);

/// e^{-t/2} X + sqrt(1 - e^{-t}) G with G an independent Ginibre of the
/// same class; t = 0 returns X exactly.
IidMatrix gaussian_divisible(const IidMatrix& x, double t, std::uint64_t seed,
                             std::uint64_t trial = 0);

/// Binary container: magic, version, n, field, row-major layout flag,
/// then little-endian f64 payload (real parts only for the real class).
void write_matrix(const std::string& path, const IidMatrix& m);
IidMatrix read_matrix(const std::string& path);

}  // namespace nhlaw
