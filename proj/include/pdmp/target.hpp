#pragma once

#include "pdmp/common.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pdmp {

/// Isotropic Gaussian piece: alpha * exp(-|x|^2 / (2 sigma)). `sigma` is the
/// per-coordinate variance.
struct GaussianIso {
  double sigma = 1.0;
  double alpha = 1.0;
};

/// Upper bound on the event rate along x + s v for s in [0, valid_for].
struct RateBound {
  double bound = 0.0;
  double valid_for = kInf;
};

/// Caller-supplied thinning bound. Receives the current position, velocity
/// and the remaining horizon.
using RateBoundFn = std::function<RateBound(const Vec& x, const Vec& v, double horizon)>;

/// One smooth piece of a piecewise-smooth density.
struct Region {
  std::string name;
  std::function<double(const Vec&)> log_density;
  std::function<Vec(const Vec&)> grad_log_density;
  std::function<bool(const Vec&)> contains;
  /// Structural tag. When set, event times are drawn by exact inversion.
  std::optional<GaussianIso> gaussian;
  /// Thinning bound for generic regions. Ignored when `gaussian` is set.
  RateBoundFn rate_bound;

  static Region gaussian_iso(std::string name, GaussianIso params,
                             std::function<bool(const Vec&)> contains);
};

/// a . x <= b
struct HalfSpace {
  Vec a;
  double b = 0.0;
};

struct Box {
  Vec lo;
  Vec hi;
};

/// Flat patch of the discontinuity set: {x : <normal, x> = offset} restricted
/// to `box` and `halfspaces`.
struct Facet {
  Vec normal;
  double offset = 0.0;
  std::optional<Box> box;
  std::vector<HalfSpace> halfspaces;
  RegionId negative_side;
  RegionId positive_side;

  /// Patch membership with slack `tol` on every bounding constraint.
  bool patch_contains(const Vec& x, double tol) const;
  /// Smallest slack over the bounding constraints (negative outside).
  double edge_distance(const Vec& x) const;
  RegionId other_side(RegionId k) const { return k == negative_side ? positive_side : negative_side; }

  // Set when `normal` is +-e_axis; dot products then cost O(1).
  int axis = -1;
  double axis_sign = 0.0;
  double dot_normal(const Vec& y) const {
    return axis >= 0 ? axis_sign * y[axis] : normal.dot(y);
  }
};

/// A resolved boundary hit with the region pair ordered so that pi1 <= pi2
/// and `n` pointing into the denser side k2.
struct BoundaryPoint {
  Vec x;
  Vec n;
  RegionId k1;
  RegionId k2;
  double pi1 = 0.0;
  double pi2 = 0.0;
  /// ln(pi2 / pi1); +inf when pi1 = 0.
  double log_ratio = kInf;
  std::size_t facet = 0;

  /// Probability pi1 / pi2 of passing into the lighter side.
  double pass_probability() const { return pi2 > 0.0 ? pi1 / pi2 : 1.0; }

  /// Bare boundary point for kernel work: normal n (normalized), densities
  /// pi1 < pi2 on either side, located at the origin.
  static BoundaryPoint make(const Vec& n, double pi1, double pi2);
};

struct BoundaryHit {
  double t = kInf;
  std::size_t facet = 0;
};

class PiecewiseTarget {
 public:
  PiecewiseTarget(std::size_t dim, std::vector<Region> regions, std::vector<Facet> facets);

  std::size_t dim() const { return dim_; }
  std::size_t num_regions() const { return regions_.size(); }
  const Region& region(RegionId k) const { return regions_.at(k.value); }
  const std::vector<Region>& regions() const { return regions_; }
  const std::vector<Facet>& facets() const { return facets_; }
  const Facet& facet(std::size_t i) const { return facets_.at(i); }

  /// Unique region whose membership holds at x. Throws BoundaryAmbiguous when
  /// x is within 1e-12 of a facet patch or when zero or several regions claim it.
  RegionId region_of(const Vec& x) const;

  /// First facet crossed by x + t v, t > 0, starting inside region k.
  std::optional<BoundaryHit> first_boundary_hit(RegionId k, const Vec& x, const Vec& v) const;

  /// Densities on both sides of facet `facet_index` at x_hit, ordered.
  /// Throws DegenerateBoundary when both sides agree.
  BoundaryPoint classify_hit(std::size_t facet_index, const Vec& x_hit) const;

  double log_density(RegionId k, const Vec& x) const { return region(k).log_density(x); }
  /// Density at an interior point.
  double density(const Vec& x) const;

  /// Spot-checks the membership and facet invariants on random points.
  /// Throws InvalidArgument on the first violation.
  void spot_check(Rng& rng, std::size_t samples) const;

 private:
  std::size_t dim_;
  std::vector<Region> regions_;
  std::vector<Facet> facets_;
};

/// Parameters of the Gaussian-in / Gaussian-out hypercube target.
struct CubeGaussian {
  double sigma_in = 1.0;
  double sigma_out = 1.0;
  double alpha_in = 1.0;
  double alpha_out = 0.0;
};

inline constexpr RegionId kInside{0};
inline constexpr RegionId kOutside{1};

/// alpha_in N(0, sigma_in I) on [-1,1]^d plus alpha_out N(0, sigma_out I)
/// outside, unnormalized. Region 0 is the cube, region 1 its complement;
/// one facet per face with the normal pointing out of the cube.
PiecewiseTarget make_cube_target(std::size_t dim, const CubeGaussian& params);

}  // namespace pdmp
