#pragma once

#include <Eigen/Core>

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace pdmp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Index of a region in a PiecewiseTarget.
struct RegionId {
  std::uint32_t value = 0;

  constexpr RegionId() = default;
  constexpr explicit RegionId(std::uint32_t v) : value(v) {}
  constexpr auto operator<=>(const RegionId&) const = default;
};

/// Which PDMP dynamics drives the process.
enum class Dynamics { Bps, ZigZag, Coordinate };

std::string to_string(Dynamics d);
Dynamics parse_dynamics(const std::string& name);

// ---------------------------------------------------------------------------
// Errors. Every failure mode named by the library derives from pdmp::Error.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define PDMP_DEFINE_ERROR(Name) \
  class Name : public Error {   \
   public:                      \
    using Error::Error;         \
  }

PDMP_DEFINE_ERROR(InvalidArgument);
PDMP_DEFINE_ERROR(BoundaryAmbiguous);
PDMP_DEFINE_ERROR(DegenerateBoundary);
PDMP_DEFINE_ERROR(NotFinite);
PDMP_DEFINE_ERROR(UnsupportedCombination);
PDMP_DEFINE_ERROR(EmptyPositiveCone);
PDMP_DEFINE_ERROR(NoExit);
PDMP_DEFINE_ERROR(BoundViolation);
PDMP_DEFINE_ERROR(ZeroGradient);
PDMP_DEFINE_ERROR(StuckAtBoundary);
PDMP_DEFINE_ERROR(NoEvent);
PDMP_DEFINE_ERROR(NotClosedForm);
PDMP_DEFINE_ERROR(EnvelopeViolation);
PDMP_DEFINE_ERROR(SchemaMismatch);
PDMP_DEFINE_ERROR(ConfigError);

#undef PDMP_DEFINE_ERROR

// ---------------------------------------------------------------------------

/// Random stream handle. One per chain; never shared between threads.
///
/// Uniforms are built from the top 53 bits of the engine output so the
/// derived exponential variates are reproducible across standard libraries.
/// Normal draws go through std::normal_distribution.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for chain `index` of a run seeded with `seed`.
  static Rng stream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      0x5eedu};
    Rng r(0);
    r.engine_.seed(seq);
    return r;
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Exp(1) by inversion.
  double exponential() { return -std::log1p(-uniform()); }

  double normal() { return normal_(engine_); }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
  }

  bool coin() { return (engine_() >> 63) != 0u; }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace pdmp
