#pragma once

#include "pdmp/common.hpp"
#include "pdmp/kernels.hpp"
#include "pdmp/target.hpp"
#include "pdmp/velocity.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace pdmp {

struct SamplerKind {
  Dynamics dynamics = Dynamics::Bps;
  /// Homogeneous refreshment rate. Always 0 for Zig-Zag.
  double refresh_rate = 0.0;

  static SamplerKind bps(double refresh_rate);
  static SamplerKind zigzag() { return {Dynamics::ZigZag, 0.0}; }
  static SamplerKind coordinate(double refresh_rate);
};

struct State {
  RegionId k;
  Vec x;
  Vec v;
  double t = 0.0;
};

enum class EventTag : std::uint8_t { Start, Bounce, Refresh, Boundary, End };
inline constexpr std::size_t kEventTagCount = 5;

std::string to_string(EventTag tag);
EventTag parse_event_tag(const std::string& text);

struct Breakpoint {
  double t = 0.0;
  Vec x;
  /// Velocity on the segment that starts here.
  Vec v;
  EventTag tag = EventTag::Start;
  /// Region of the segment that starts here.
  RegionId region;
};

/// Event breakpoints of a piecewise-linear PDMP path.
struct TrajectorySkeleton {
  std::size_t dim = 0;
  std::size_t num_regions = 0;
  std::vector<Breakpoint> breakpoints;
  std::array<std::size_t, kEventTagCount> event_counts{};

  double total_time() const {
    return breakpoints.empty() ? 0.0 : breakpoints.back().t - breakpoints.front().t;
  }
  std::size_t count(EventTag tag) const { return event_counts[static_cast<std::size_t>(tag)]; }
};

/// Simulation horizon: stop at an absolute process time or after a number
/// of events (start and end markers excluded).
struct StopCondition {
  std::optional<double> max_time;
  std::optional<std::size_t> max_events;

  static StopCondition time(double t) { return {t, std::nullopt}; }
  static StopCondition events(std::size_t n) { return {std::nullopt, n}; }
};

/// First arrival of a Poisson process with intensity (a + b s)_+, by
/// inversion of the integrated rate against one Exp(1) draw. Returns +inf
/// when the process never fires; no draw is made when the rate is
/// identically zero.
double affine_event_time(double a, double b, Rng& rng);

/// Integrated rate of (a + b s)_+ over [0, t].
double affine_integrated_rate(double a, double b, double t);

struct BounceCandidate {
  double t = kInf;
  /// Basis coordinate that fires (Zig-Zag only), -1 otherwise.
  int coordinate = -1;
};

/// Next bounce time within [0, t_max] for the region of `state`.
/// Gaussian regions use exact inversion; generic regions use thinning against
/// the region's rate bound and throw BoundViolation when the bound is too low.
std::optional<BounceCandidate> next_bounce_candidate(const PiecewiseTarget& target,
                                                     const SamplerKind& kind,
                                                     const VelocitySpace& space,
                                                     const State& state, double t_max, Rng& rng);

/// Total bounce rate at (x, v) given the log-density gradient.
double bounce_rate(Dynamics dynamics, const VelocitySpace& space, const Vec& v, const Vec& grad);

/// Velocity after a bounce at a point with log-density gradient `grad`.
/// Throws ZeroGradient for a BPS bounce at a critical point.
Vec apply_bounce(Dynamics dynamics, const VelocitySpace& space, const Vec& v, const Vec& grad,
                 const BounceCandidate& detail, Rng& rng);

/// Runs the event loop from state0 until `stop`.
TrajectorySkeleton simulate(const PiecewiseTarget& target, const SamplerKind& kind,
                            const VelocitySpace& space, const BoundaryKernel& kernel,
                            const State& state0, const StopCondition& stop, Rng& rng);

/// Exact time averages over a skeleton.
struct PathMoments {
  Vec mean;
  Mat second_moment;
  /// Fraction of time per region, indexed by RegionId.
  std::vector<double> occupancy;
  double total_time = 0.0;

  Vec variance() const { return second_moment.diagonal() - mean.cwiseProduct(mean); }
};

PathMoments path_moments(const TrajectorySkeleton& skel);

/// Skeleton invariant check: strictly increasing times, positional continuity
/// within `rel_tol`, boundary breakpoints on a facet. Returns a description
/// of each violation (empty when clean).
std::vector<std::string> validate_skeleton(const TrajectorySkeleton& skel,
                                           const PiecewiseTarget& target, double rel_tol = 1e-9);

}  // namespace pdmp
