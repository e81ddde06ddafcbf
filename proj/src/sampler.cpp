#include "pdmp/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pdmp {

namespace {

constexpr double kEdgeTol = 1e-10;
constexpr double kGrazingTol = 1e-14;
constexpr std::size_t kMaxStuckBoundaryEvents = 10000;
constexpr double kBoundSlack = 1e-9;

void require_compatible(Dynamics dynamics, const VelocitySpace& space) {
  using K = VelocitySpace::Kind;
  const K kind = space.kind();
  const bool ok = (dynamics == Dynamics::Bps && (kind == K::UnitSphere || kind == K::IsoGaussian)) ||
                  (dynamics == Dynamics::ZigZag && kind == K::SignedHypercube) ||
                  (dynamics == Dynamics::Coordinate && kind == K::CoordinateAxes);
  if (!ok) {
    throw UnsupportedCombination("sampler " + to_string(dynamics) + " cannot run on a " +
                                 to_string(kind) + " velocity space");
  }
}

}  // namespace

SamplerKind SamplerKind::bps(double refresh_rate) {
  if (!(refresh_rate >= 0.0)) throw InvalidArgument("refresh_rate must be nonnegative");
  return {Dynamics::Bps, refresh_rate};
}

SamplerKind SamplerKind::coordinate(double refresh_rate) {
  if (!(refresh_rate >= 0.0)) throw InvalidArgument("refresh_rate must be nonnegative");
  return {Dynamics::Coordinate, refresh_rate};
}

std::string to_string(EventTag tag) {
  switch (tag) {
    case EventTag::Start:
      return "start";
    case EventTag::Bounce:
      return "bounce";
    case EventTag::Refresh:
      return "refresh";
    case EventTag::Boundary:
      return "boundary";
    case EventTag::End:
      return "end";
  }
  return "?";
}

EventTag parse_event_tag(const std::string& text) {
  for (std::size_t i = 0; i < kEventTagCount; ++i) {
    const auto tag = static_cast<EventTag>(i);
    if (to_string(tag) == text) return tag;
  }
  throw InvalidArgument("unknown event tag '" + text + "'");
}

double affine_integrated_rate(double a, double b, double t) {
  if (!(t > 0.0)) return 0.0;
  if (b == 0.0) return a > 0.0 ? a * t : 0.0;
  // (a + b s)_+ is positive on one side of the root s0 = -a / b.
  const double s0 = -a / b;
  if (b > 0.0) {
    const double start = std::max(0.0, s0);
    if (t <= start) return 0.0;
    const double ra = a + b * start;
    const double len = t - start;
    return ra * len + 0.5 * b * len * len;
  }
  if (a <= 0.0) return 0.0;
  const double end = std::min(t, s0);
  return a * end + 0.5 * b * end * end;
}

double affine_event_time(double a, double b, Rng& rng) {
  if (a <= 0.0 && b <= 0.0) return kInf;
  const double e = rng.exponential();
  if (b > 0.0) {
    const double delay = a < 0.0 ? -a / b : 0.0;
    const double a0 = a < 0.0 ? 0.0 : a;
    // a0 T + b T^2 / 2 = e, written to avoid cancellation.
    return delay + 2.0 * e / (a0 + std::sqrt(a0 * a0 + 2.0 * b * e));
  }
  if (b == 0.0) return e / a;
  const double mass = a * a / (-2.0 * b);
  if (e >= mass) return kInf;
  return 2.0 * e / (a + std::sqrt(a * a + 2.0 * b * e));
}

double bounce_rate(Dynamics dynamics, const VelocitySpace& space, const Vec& v, const Vec& grad) {
  if (dynamics == Dynamics::ZigZag) {
    const Vec s = space.hypercube_signs(v);
    const Vec gb = space.basis().to_basis(grad);
    return (-s.cwiseProduct(gb)).cwiseMax(0.0).sum();
  }
  return std::max(0.0, -v.dot(grad));
}

std::optional<BounceCandidate> next_bounce_candidate(const PiecewiseTarget& target,
                                                     const SamplerKind& kind,
                                                     const VelocitySpace& space,
                                                     const State& state, double t_max, Rng& rng) {
  const Region& region = target.region(state.k);
  const Vec& x = state.x;
  const Vec& v = state.v;

  if (region.gaussian) {
    const double sigma = region.gaussian->sigma;
    if (kind.dynamics == Dynamics::ZigZag) {
      // Rate of coordinate i is (s_i y_i + t) / sigma in basis coordinates.
      const Vec y = space.basis().to_basis(x);
      const Vec s = space.hypercube_signs(v);
      BounceCandidate best;
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double ti = affine_event_time(s[i] * y[i] / sigma, 1.0 / sigma, rng);
        if (ti < best.t) {
          best.t = ti;
          best.coordinate = static_cast<int>(i);
        }
      }
      if (best.t > t_max) return std::nullopt;
      return best;
    }
    const double t = affine_event_time(v.dot(x) / sigma, v.squaredNorm() / sigma, rng);
    if (t > t_max) return std::nullopt;
    return BounceCandidate{t, -1};
  }

  // Thinning against the caller's piecewise-constant bound.
  double s = 0.0;
  while (s < t_max) {
    const RateBound rb = region.rate_bound(x + s * v, v, t_max - s);
    const double window_end = std::min(t_max, s + rb.valid_for);
    if (!(rb.bound > 0.0)) {
      if (!std::isfinite(window_end)) return std::nullopt;
      s = window_end;
      continue;
    }
    const double step = rng.exponential() / rb.bound;
    if (s + step > window_end) {
      if (!std::isfinite(window_end)) return std::nullopt;
      s = window_end;
      continue;
    }
    s += step;
    const Vec y = x + s * v;
    const Vec grad = region.grad_log_density(y);
    const double rate = bounce_rate(kind.dynamics, space, v, grad);
    if (rate > rb.bound * (1.0 + kBoundSlack)) {
      std::ostringstream msg;
      msg << "thinning: rate " << rate << " exceeds bound " << rb.bound;
      throw BoundViolation(msg.str());
    }
    if (rng.uniform() * rb.bound < rate) {
      BounceCandidate c{s, -1};
      if (kind.dynamics == Dynamics::ZigZag) {
        const Vec sg = space.hypercube_signs(v);
        const Vec rates = (-sg.cwiseProduct(space.basis().to_basis(grad))).cwiseMax(0.0);
        const double u = rng.uniform() * rates.sum();
        double acc = 0.0;
        c.coordinate = static_cast<int>(rates.size() - 1);
        for (Eigen::Index i = 0; i < rates.size(); ++i) {
          acc += rates[i];
          if (u < acc) {
            c.coordinate = static_cast<int>(i);
            break;
          }
        }
      }
      return c;
    }
  }
  return std::nullopt;
}

Vec apply_bounce(Dynamics dynamics, const VelocitySpace& space, const Vec& v, const Vec& grad,
                 const BounceCandidate& detail, Rng& rng) {
  switch (dynamics) {
    case Dynamics::Bps: {
      const double gg = grad.squaredNorm();
      if (gg == 0.0) throw ZeroGradient("BPS bounce at a critical point");
      Vec w = v - 2.0 * (v.dot(grad) / gg) * grad;
      // Keep sphere velocities on the sphere across many reflections.
      if (space.kind() == VelocitySpace::Kind::UnitSphere) w.normalize();
      return w;
    }
    case Dynamics::ZigZag: {
      if (detail.coordinate < 0 || static_cast<std::size_t>(detail.coordinate) >= space.dim()) {
        throw InvalidArgument("zig-zag bounce needs a coordinate");
      }
      Vec s = space.hypercube_signs(v);
      s[detail.coordinate] = -s[detail.coordinate];
      return space.basis().from_basis(s);
    }
    case Dynamics::Coordinate: {
      // Weight of +-r_i is (+-<r_i, grad>)_+, so at most one sign per axis.
      const Vec gb = space.basis().to_basis(grad);
      std::vector<std::pair<Eigen::Index, double>> candidates;
      double total = 0.0;
      for (Eigen::Index i = 0; i < gb.size(); ++i) {
        if (gb[i] != 0.0) {
          candidates.emplace_back(i, gb[i]);
          total += std::abs(gb[i]);
        }
      }
      if (candidates.empty()) throw ZeroGradient("coordinate sampler bounce at a critical point");
      auto pick = candidates.back();
      if (candidates.size() > 1) {
        const double u = rng.uniform() * total;
        double acc = 0.0;
        for (const auto& c : candidates) {
          acc += std::abs(c.second);
          if (u < acc) {
            pick = c;
            break;
          }
        }
      }
      const double sign = pick.second > 0.0 ? 1.0 : -1.0;
      return sign * space.basis().column(static_cast<std::size_t>(pick.first));
    }
  }
  return v;
}

TrajectorySkeleton simulate(const PiecewiseTarget& target, const SamplerKind& kind,
                            const VelocitySpace& space, const BoundaryKernel& kernel,
                            const State& state0, const StopCondition& stop, Rng& rng) {
  require_compatible(kind.dynamics, space);
  if (space.dim() != target.dim() || static_cast<std::size_t>(state0.x.size()) != target.dim()) {
    throw InvalidArgument("simulate: dimension mismatch");
  }
  if (stop.max_time.has_value() == stop.max_events.has_value()) {
    throw InvalidArgument("simulate: set exactly one of max_time / max_events");
  }
  if (stop.max_time && !(*stop.max_time > state0.t)) {
    throw InvalidArgument("simulate: max_time must exceed the start time");
  }
  if (target.region_of(state0.x) != state0.k) {
    throw InvalidArgument("simulate: start position is not in the start region");
  }
  if (!space.contains(state0.v)) throw InvalidArgument("simulate: start velocity not in support");

  const double refresh_rate = kind.dynamics == Dynamics::ZigZag ? 0.0 : kind.refresh_rate;
  const double t_end = stop.max_time.value_or(kInf);

  TrajectorySkeleton skel;
  skel.dim = target.dim();
  skel.num_regions = target.num_regions();
  RegionId k = state0.k;
  Vec x = state0.x;
  Vec v = space.snap(state0.v);
  double t = state0.t;

  const auto record = [&](EventTag tag) {
    skel.breakpoints.push_back({t, x, v, tag, k});
    ++skel.event_counts[static_cast<std::size_t>(tag)];
  };
  record(EventTag::Start);

  std::size_t events = 0;
  std::size_t stuck = 0;
  for (;;) {
    const auto hit = target.first_boundary_hit(k, x, v);
    const double t_boundary = hit ? hit->t : kInf;
    const double remaining = t_end - t;
    const double t_refresh = refresh_rate > 0.0 ? rng.exponential() / refresh_rate : kInf;
    const auto bounce = next_bounce_candidate(target, kind, space, State{k, x, v, t},
                                              std::min(t_boundary, remaining), rng);
    const double t_bounce = bounce ? bounce->t : kInf;
    const double dt = std::min({t_boundary, remaining, t_refresh, t_bounce});
    if (!std::isfinite(dt)) throw NoEvent("simulate: trajectory escapes with no further events");

    const bool at_end = dt == remaining || (stop.max_events && events >= *stop.max_events);
    x += dt * v;
    t = dt == remaining ? t_end : t + dt;
    if (at_end) {
      record(EventTag::End);
      break;
    }

    if (dt == t_boundary) {
      stuck = dt == 0.0 ? stuck + 1 : 0;
      if (stuck > kMaxStuckBoundaryEvents) {
        throw StuckAtBoundary("simulate: repeated zero-time boundary events");
      }
      const Facet& facet = target.facet(hit->facet);
      if (facet.edge_distance(x) < kEdgeTol) {
        v = -v;
      } else {
        std::optional<BoundaryPoint> bp;
        try {
          bp = target.classify_hit(hit->facet, x);
        } catch (const DegenerateBoundary&) {
          k = facet.other_side(k);
        }
        if (bp) {
          Vec v_new = std::abs(bp->n.dot(v)) < kGrazingTol
                          ? Vec(-v)
                          : apply(kernel, kind.dynamics, *bp, space, v, rng);
          const double side = facet.dot_normal(v_new);
          if (std::abs(side) < kGrazingTol) {
            v_new = -v;
          } else {
            k = side > 0.0 ? facet.positive_side : facet.negative_side;
          }
          v = std::move(v_new);
        }
      }
      record(EventTag::Boundary);
    } else if (dt == t_refresh) {
      stuck = 0;
      v = space.refresh(v, rng);
      record(EventTag::Refresh);
    } else {
      stuck = 0;
      const Vec grad = target.region(k).grad_log_density(x);
      try {
        v = apply_bounce(kind.dynamics, space, v, grad, *bounce, rng);
      } catch (const ZeroGradient&) {
        v = space.refresh(v, rng);
      }
      record(EventTag::Bounce);
    }
    ++events;
  }
  return skel;
}

PathMoments path_moments(const TrajectorySkeleton& skel) {
  const auto d = static_cast<Eigen::Index>(skel.dim);
  PathMoments m;
  m.mean = Vec::Zero(d);
  m.second_moment = Mat::Zero(d, d);
  m.occupancy.assign(skel.num_regions, 0.0);
  m.total_time = skel.total_time();
  if (!(m.total_time > 0.0)) throw InvalidArgument("path_moments: skeleton has zero duration");

  for (std::size_t i = 0; i + 1 < skel.breakpoints.size(); ++i) {
    const Breakpoint& b = skel.breakpoints[i];
    const double dt = skel.breakpoints[i + 1].t - b.t;
    if (dt <= 0.0) continue;
    // x(s) = x + s v on [0, dt].
    m.mean += dt * b.x + (0.5 * dt * dt) * b.v;
    const Mat xv = b.x * b.v.transpose();
    m.second_moment += dt * (b.x * b.x.transpose()) + (0.5 * dt * dt) * (xv + xv.transpose()) +
                       (dt * dt * dt / 3.0) * (b.v * b.v.transpose());
    m.occupancy.at(b.region.value) += dt;
  }
  m.mean /= m.total_time;
  m.second_moment /= m.total_time;
  for (auto& o : m.occupancy) o /= m.total_time;
  return m;
}

std::vector<std::string> validate_skeleton(const TrajectorySkeleton& skel,
                                           const PiecewiseTarget& target, double rel_tol) {
  std::vector<std::string> issues;
  const auto& bps = skel.breakpoints;
  if (bps.size() < 2) issues.emplace_back("fewer than two breakpoints");
  for (std::size_t i = 0; i < bps.size(); ++i) {
    const Breakpoint& b = bps[i];
    if (i > 0) {
      const Breakpoint& prev = bps[i - 1];
      if (!(b.t > prev.t)) {
        issues.push_back("non-increasing time at breakpoint " + std::to_string(i));
      }
      const Vec predicted = prev.x + (b.t - prev.t) * prev.v;
      const double err = (predicted - b.x).cwiseAbs().maxCoeff();
      if (err > rel_tol * (1.0 + b.x.cwiseAbs().maxCoeff())) {
        issues.push_back("position jump of " + std::to_string(err) + " at breakpoint " +
                         std::to_string(i));
      }
    }
    if (b.tag == EventTag::Boundary) {
      bool on_facet = false;
      for (const auto& f : target.facets()) {
        if (std::abs(f.dot_normal(b.x) - f.offset) <= rel_tol * (1.0 + std::abs(f.offset)) &&
            f.patch_contains(b.x, rel_tol)) {
          on_facet = true;
          break;
        }
      }
      if (!on_facet) issues.push_back("boundary breakpoint " + std::to_string(i) + " off facets");
    }
  }
  return issues;
}

std::string to_string(Dynamics d) {
  switch (d) {
    case Dynamics::Bps:
      return "bps";
    case Dynamics::ZigZag:
      return "zigzag";
    case Dynamics::Coordinate:
      return "cs";
  }
  return "?";
}

Dynamics parse_dynamics(const std::string& name) {
  if (name == "bps") return Dynamics::Bps;
  if (name == "zigzag" || name == "zz") return Dynamics::ZigZag;
  if (name == "cs" || name == "coordinate") return Dynamics::Coordinate;
  throw InvalidArgument("unknown sampler '" + name + "' (expected bps, zigzag or cs)");
}

}  // namespace pdmp
