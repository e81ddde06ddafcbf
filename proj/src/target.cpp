#include "pdmp/target.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace pdmp {

namespace {

constexpr double kOnFacetTol = 1e-12;
constexpr double kPatchTol = 1e-10;
constexpr double kGrazingTol = 1e-14;
constexpr double kSideProbe = 1e-8;

}  // namespace

Region Region::gaussian_iso(std::string name, GaussianIso params,
                            std::function<bool(const Vec&)> contains) {
  if (!(params.sigma > 0.0) || !(params.alpha >= 0.0)) {
    throw InvalidArgument("gaussian_iso: sigma must be positive and alpha nonnegative");
  }
  Region r;
  r.name = std::move(name);
  const double log_alpha = params.alpha > 0.0 ? std::log(params.alpha) : -kInf;
  const double sigma = params.sigma;
  r.log_density = [log_alpha, sigma](const Vec& x) {
    return log_alpha - x.squaredNorm() / (2.0 * sigma);
  };
  r.grad_log_density = [sigma](const Vec& x) -> Vec { return -x / sigma; };
  r.contains = std::move(contains);
  r.gaussian = params;
  return r;
}

bool Facet::patch_contains(const Vec& x, double tol) const {
  if (box) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x[i] < box->lo[i] - tol || x[i] > box->hi[i] + tol) return false;
    }
  }
  for (const auto& h : halfspaces) {
    if (h.a.dot(x) > h.b + tol * h.a.norm()) return false;
  }
  return true;
}

double Facet::edge_distance(const Vec& x) const {
  double best = kInf;
  if (box) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (i == axis) continue;
      best = std::min({best, x[i] - box->lo[i], box->hi[i] - x[i]});
    }
  }
  for (const auto& h : halfspaces) {
    best = std::min(best, (h.b - h.a.dot(x)) / h.a.norm());
  }
  return best;
}

BoundaryPoint BoundaryPoint::make(const Vec& n, double pi1, double pi2) {
  if (!(pi1 >= 0.0) || !(pi2 > pi1)) {
    throw InvalidArgument("BoundaryPoint::make: need 0 <= pi1 < pi2");
  }
  BoundaryPoint bp;
  bp.x = Vec::Zero(n.size());
  bp.n = n.normalized();
  bp.k1 = RegionId(0);
  bp.k2 = RegionId(1);
  bp.pi1 = pi1;
  bp.pi2 = pi2;
  bp.log_ratio = pi1 > 0.0 ? std::log(pi2 / pi1) : kInf;
  return bp;
}

PiecewiseTarget::PiecewiseTarget(std::size_t dim, std::vector<Region> regions,
                                 std::vector<Facet> facets)
    : dim_(dim), regions_(std::move(regions)), facets_(std::move(facets)) {
  if (dim_ == 0) throw InvalidArgument("PiecewiseTarget: dimension must be positive");
  if (regions_.empty()) throw InvalidArgument("PiecewiseTarget: no regions");
  for (const auto& r : regions_) {
    if (!r.log_density || !r.grad_log_density || !r.contains) {
      throw InvalidArgument("PiecewiseTarget: region '" + r.name + "' is missing a closure");
    }
    if (!r.gaussian && !r.rate_bound) {
      throw InvalidArgument("PiecewiseTarget: generic region '" + r.name + "' needs a rate bound");
    }
  }
  for (auto& f : facets_) {
    if (static_cast<std::size_t>(f.normal.size()) != dim_) {
      throw InvalidArgument("Facet: normal has wrong dimension");
    }
    if (std::abs(f.normal.norm() - 1.0) > 1e-12) throw InvalidArgument("Facet: normal is not unit");
    if (!f.box && f.halfspaces.empty()) throw InvalidArgument("Facet: bounds are empty");
    if (f.box && (f.box->lo.array() > f.box->hi.array()).any()) {
      throw InvalidArgument("Facet: box has lo > hi");
    }
    if (f.negative_side == f.positive_side) throw InvalidArgument("Facet: side regions coincide");
    if (f.negative_side.value >= regions_.size() || f.positive_side.value >= regions_.size()) {
      throw InvalidArgument("Facet: side region out of range");
    }
    f.axis = -1;
    Eigen::Index nonzero = 0;
    Eigen::Index where = 0;
    for (Eigen::Index i = 0; i < f.normal.size(); ++i) {
      if (f.normal[i] != 0.0) {
        ++nonzero;
        where = i;
      }
    }
    if (nonzero == 1 && std::abs(f.normal[where]) == 1.0) {
      f.axis = static_cast<int>(where);
      f.axis_sign = f.normal[where];
    }
  }
}

RegionId PiecewiseTarget::region_of(const Vec& x) const {
  for (const auto& f : facets_) {
    if (std::abs(f.dot_normal(x) - f.offset) <= kOnFacetTol && f.patch_contains(x, kOnFacetTol)) {
      throw BoundaryAmbiguous("region_of: point lies on a facet");
    }
  }
  std::optional<RegionId> found;
  for (std::uint32_t k = 0; k < regions_.size(); ++k) {
    if (regions_[k].contains(x)) {
      if (found) throw BoundaryAmbiguous("region_of: several regions claim the point");
      found = RegionId(k);
    }
  }
  if (!found) throw BoundaryAmbiguous("region_of: no region claims the point");
  return *found;
}

std::optional<BoundaryHit> PiecewiseTarget::first_boundary_hit(RegionId k, const Vec& x,
                                                               const Vec& v) const {
  // Candidate crossings sorted by time; the first whose patch contains the
  // crossing point wins.
  std::vector<std::pair<double, std::size_t>> candidates;
  for (std::size_t i = 0; i < facets_.size(); ++i) {
    const Facet& f = facets_[i];
    double toward = 0.0;
    if (f.negative_side == k) {
      toward = 1.0;
    } else if (f.positive_side == k) {
      toward = -1.0;
    } else {
      continue;
    }
    const double speed = f.dot_normal(v);
    if (std::abs(speed) < kGrazingTol || speed * toward <= 0.0) continue;
    const double t = std::max(0.0, (f.offset - f.dot_normal(x)) / speed);
    candidates.emplace_back(t, i);
  }
  std::sort(candidates.begin(), candidates.end());
  for (const auto& [t, i] : candidates) {
    const Vec y = x + t * v;
    if (facets_[i].patch_contains(y, kPatchTol)) return BoundaryHit{t, i};
  }
  return std::nullopt;
}

BoundaryPoint PiecewiseTarget::classify_hit(std::size_t facet_index, const Vec& x_hit) const {
  const Facet& f = facet(facet_index);
  const double log_neg = log_density(f.negative_side, x_hit);
  const double log_pos = log_density(f.positive_side, x_hit);
  if (log_neg == log_pos) throw DegenerateBoundary("classify_hit: no density jump at the facet");
  BoundaryPoint bp;
  bp.x = x_hit;
  bp.facet = facet_index;
  double log1 = 0.0;
  double log2 = 0.0;
  if (log_neg < log_pos) {
    bp.k1 = f.negative_side;
    bp.k2 = f.positive_side;
    bp.n = f.normal;
    log1 = log_neg;
    log2 = log_pos;
  } else {
    bp.k1 = f.positive_side;
    bp.k2 = f.negative_side;
    bp.n = -f.normal;
    log1 = log_pos;
    log2 = log_neg;
  }
  bp.pi1 = std::exp(log1);
  bp.pi2 = std::exp(log2);
  bp.log_ratio = log1 == -kInf ? kInf : log2 - log1;
  return bp;
}

double PiecewiseTarget::density(const Vec& x) const {
  return std::exp(log_density(region_of(x), x));
}

void PiecewiseTarget::spot_check(Rng& rng, std::size_t samples) const {
  const auto fail = [](const std::string& what) { throw InvalidArgument("spot_check: " + what); };
  for (std::size_t s = 0; s < samples; ++s) {
    Vec x(dim_);
    const double scale = 0.5 + 2.5 * rng.uniform();
    for (auto& xi : x) xi = scale * rng.normal();
    int claims = 0;
    for (const auto& r : regions_) claims += r.contains(x) ? 1 : 0;
    if (claims > 1) fail("membership functions overlap");
    for (std::size_t k = 0; k < regions_.size(); ++k) {
      const auto& r = regions_[k];
      if (r.gaussian && r.contains(x)) {
        const Vec expected = -x / r.gaussian->sigma;
        if (!(r.grad_log_density(x) - expected).isZero(0.0)) {
          fail("gaussian region '" + r.name + "' gradient is not -x/sigma");
        }
      }
    }
  }
  for (const auto& f : facets_) {
    if (!f.box) continue;
    for (std::size_t s = 0; s < samples; ++s) {
      Vec p(dim_);
      for (std::size_t i = 0; i < dim_; ++i) {
        const double lo = std::isfinite(f.box->lo[i]) ? f.box->lo[i] : -3.0;
        const double hi = std::isfinite(f.box->hi[i]) ? f.box->hi[i] : 3.0;
        p[i] = lo + (hi - lo) * (0.05 + 0.9 * rng.uniform());
      }
      p += (f.offset - f.normal.dot(p)) * f.normal;
      if (!f.patch_contains(p, kPatchTol) || f.edge_distance(p) < 1e-6) continue;
      if (!region(f.positive_side).contains(p + kSideProbe * f.normal) ||
          !region(f.negative_side).contains(p - kSideProbe * f.normal)) {
        std::ostringstream msg;
        msg << "facet side regions disagree with membership near offset " << f.offset;
        fail(msg.str());
      }
    }
  }
}

PiecewiseTarget make_cube_target(std::size_t dim, const CubeGaussian& params) {
  if (dim == 0) throw InvalidArgument("make_cube_target: dimension must be positive");
  if (!(params.alpha_in + params.alpha_out > 0.0)) {
    throw InvalidArgument("make_cube_target: alpha_in + alpha_out must be positive");
  }
  auto inside = [](const Vec& x) { return x.cwiseAbs().maxCoeff() < 1.0; };
  auto outside = [](const Vec& x) { return x.cwiseAbs().maxCoeff() > 1.0; };
  std::vector<Region> regions;
  regions.push_back(Region::gaussian_iso("inside", {params.sigma_in, params.alpha_in}, inside));
  regions.push_back(Region::gaussian_iso("outside", {params.sigma_out, params.alpha_out}, outside));

  std::vector<Facet> facets;
  const auto d = static_cast<Eigen::Index>(dim);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (const double sign : {1.0, -1.0}) {
      Facet f;
      f.normal = Vec::Zero(d);
      f.normal[i] = sign;
      f.offset = 1.0;
      Box box{Vec::Constant(d, -1.0), Vec::Constant(d, 1.0)};
      box.lo[i] = box.hi[i] = sign;
      f.box = std::move(box);
      f.negative_side = kInside;
      f.positive_side = kOutside;
      facets.push_back(std::move(f));
    }
  }
  return PiecewiseTarget(dim, std::move(regions), std::move(facets));
}

}  // namespace pdmp
