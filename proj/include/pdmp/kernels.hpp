#pragma once

#include "pdmp/common.hpp"
#include "pdmp/target.hpp"
#include "pdmp/velocity.hpp"

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace pdmp {

/// Velocity kernel applied when a trajectory hits a discontinuity.
///
/// All kernels keep the position and only replace the velocity. Writing Q for
/// the kernel and Q'(v'|v) = Q(v'|-v) for its flipped version, a kernel is
/// valid when the boundary velocity density l (see l_density) is invariant
/// under Q'.
class BoundaryKernel {
 public:
  struct Flip {};
  struct MetropolisHastings {
    int iters = 1;
  };
  struct Limit {};
  using Policy = std::variant<Flip, MetropolisHastings, Limit>;

  static BoundaryKernel flip() { return BoundaryKernel(Flip{}); }
  static BoundaryKernel metropolis_hastings(int iters);
  static BoundaryKernel limit() { return BoundaryKernel(Limit{}); }
  /// "flip", "limit" or "mh:<iters>".
  static BoundaryKernel parse(const std::string& text);

  const Policy& policy() const { return policy_; }
  bool is_flip() const { return std::holds_alternative<Flip>(policy_); }
  bool is_limit() const { return std::holds_alternative<Limit>(policy_); }
  bool is_mh() const { return std::holds_alternative<MetropolisHastings>(policy_); }
  int mh_iters() const;

  std::string to_string() const;

 private:
  explicit BoundaryKernel(Policy p) : policy_(p) {}
  Policy policy_;
};

/// Unnormalized boundary velocity density
///   l(v) = |<n,v>| p(v) pi2   for <n,v> > 0,
///   l(v) = |<n,v>| p(v) pi1   for <n,v> < 0,
/// and 0 on tangent velocities.
double l_density(const BoundaryPoint& bp, const VelocitySpace& space, const Vec& v);

/// Same formula with an explicit p(v).
double l_weight(const BoundaryPoint& bp, const Vec& v, double p_v);

/// Draws the post-boundary velocity for a trajectory arriving with v_in.
/// Flip returns -v_in. MH{m} runs m Metropolis-Hastings steps targeting l,
/// started from -v_in. Limit dispatches on the dynamics.
/// Throws UnsupportedCombination for Limit on a space without a derived kernel.
Vec apply(const BoundaryKernel& kernel, Dynamics dynamics, const BoundaryPoint& bp,
          const VelocitySpace& space, const Vec& v_in, Rng& rng);

/// One Metropolis-Hastings step targeting l from v. Proposals are uniform on
/// finite spaces and on the sphere, and fresh N(0, I) draws for IsoGaussian
/// (independence proposal, with the proposal density in the ratio).
Vec mh_step(const BoundaryPoint& bp, const VelocitySpace& space, const Vec& v, Rng& rng);

/// Pass / reflect rule. Consumes one Exp(1) draw when <n,v> < 0 and passes
/// iff it reaches log(pi2/pi1), which happens with probability pi1/pi2.
Vec limit_bps(const BoundaryPoint& bp, const Vec& v, Rng& rng);

/// Pass / bounce rule for the coordinate sampler; bounces pick v' in V+ with
/// probability <v',n>/K.
Vec limit_cs(const BoundaryPoint& bp, const VelocitySpace& space, const Vec& v, Rng& rng);

/// Specular reflection v - 2<n,v>n.
Vec reflect(const Vec& v, const Vec& n);

struct ZzBoundaryOutcome {
  enum class Exit { PassThrough, BounceBack };
  /// Exit velocity, in the same coordinates as the inputs.
  Vec v_out;
  Exit exit = Exit::PassThrough;
  double t_star = 0.0;
};

/// Walks h(t) = sum_i v_i n_i (t - 2 max(0, t - tau_i)) through the sorted
/// flip times. Entering with <n,v> < 0 the walk ends at h = -C (pass) or back
/// at h = 0 (bounce); entering with <n,v> > 0 it ends at h = +C. Coordinates
/// with tau_i < t* are flipped. A threshold hit at the same instant as a flip
/// wins over the flip. With C = +inf and <n,v> > 0 the exit is at t* = +inf
/// with every finite tau flipped.
ZzBoundaryOutcome zz_exit_time(std::span<const double> tau, std::span<const double> v,
                               std::span<const double> n, double log_ratio);

/// Zig-Zag boundary kernel on a SignedHypercube space: draws
/// tau_i ~ Exp(max(-n_i v_i, 0)) in basis coordinates and resolves the exit
/// with zz_exit_time.
Vec limit_zz(const BoundaryPoint& bp, const VelocitySpace& space, const Vec& v, Rng& rng);

/// A velocity reachable from a given input and its probability.
struct Branch {
  Vec v;
  double probability = 0.0;
};

/// Closed-form outcomes of limit_bps from v.
std::vector<Branch> limit_bps_branches(const BoundaryPoint& bp, const Vec& v);
/// Closed-form outcomes of limit_cs from v.
std::vector<Branch> limit_cs_branches(const BoundaryPoint& bp, const VelocitySpace& space,
                                      const Vec& v);
/// Acceptance probability of an MH move between states with boundary
/// densities l_from and l_to under a symmetric proposal.
double mh_acceptance(double l_from, double l_to);

}  // namespace pdmp
