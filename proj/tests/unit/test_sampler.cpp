#include "catch_amalgamated.hpp"

#include "pdmp/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <map>

using namespace pdmp;
using Catch::Approx;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (const double x : xs) v[i++] = x;
  return v;
}

// Kolmogorov-Smirnov distance between draws (inf allowed) and a CDF.
double ks_distance(std::vector<double> draws, const std::function<double(double)>& cdf) {
  std::sort(draws.begin(), draws.end());
  const double n = static_cast<double>(draws.size());
  double d = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    if (!std::isfinite(draws[i])) break;
    const double f = cdf(draws[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(f - (i + 1.0) / n)});
  }
  return d;
}

struct Setup {
  PiecewiseTarget target;
  VelocitySpace space;
  SamplerKind kind;
};

Setup setup(Dynamics dyn, std::size_t d, const CubeGaussian& params, double refresh = 1.0) {
  switch (dyn) {
    case Dynamics::Bps:
      return {make_cube_target(d, params), VelocitySpace::unit_sphere(d), SamplerKind::bps(refresh)};
    case Dynamics::ZigZag:
      return {make_cube_target(d, params), VelocitySpace::signed_hypercube(Basis::canonical(d)),
              SamplerKind::zigzag()};
    case Dynamics::Coordinate:
      return {make_cube_target(d, params), VelocitySpace::coordinate_axes(Basis::canonical(d)),
              SamplerKind::coordinate(refresh)};
  }
  throw std::logic_error("unreachable");
}

// Same cube target without the Gaussian tag, so bounce times come from
// thinning against a windowed linear bound.
PiecewiseTarget generic_cube(std::size_t d, const CubeGaussian& params, double window) {
  const PiecewiseTarget base = make_cube_target(d, params);
  std::vector<Region> regions = base.regions();
  for (auto& r : regions) {
    const double sigma = r.gaussian->sigma;
    r.gaussian.reset();
    r.rate_bound = [sigma, window](const Vec& x, const Vec& v, double) {
      const double a = v.dot(x) / sigma;
      const double b = v.squaredNorm() / sigma;
      return RateBound{std::max({0.0, a, a + b * window}), window};
    };
  }
  return PiecewiseTarget(d, regions, base.facets());
}

}  // namespace

TEST_CASE("affine_event_time closed forms", "[sampler]") {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    Rng copy = rng;
    const double e = copy.exponential();
    CHECK(affine_event_time(0.0, 1.0, rng) == Approx(std::sqrt(2.0 * e)).epsilon(1e-14));
  }
  Rng copy = rng;
  CHECK(affine_event_time(1.0, 0.0, rng) == Approx(copy.exponential()).epsilon(1e-15));

  // No draw when the rate is identically zero.
  Rng a(5);
  Rng b(5);
  CHECK(std::isinf(affine_event_time(-1.0, 0.0, a)));
  CHECK(std::isinf(affine_event_time(0.0, 0.0, a)));
  CHECK(std::isinf(affine_event_time(-2.0, -1.0, a)));
  CHECK(a.uniform() == b.uniform());

  // Integrated rate at the returned time recovers the exponential draw.
  for (const auto& [ra, rb] : std::vector<std::pair<double, double>>{
           {1.0, 0.0}, {0.0, 1.0}, {-1.0, 1.0}, {2.0, -1.0}, {0.5, 3.0}, {-3.0, 0.1}}) {
    for (int i = 0; i < 200; ++i) {
      Rng c = rng;
      const double e = c.exponential();
      const double t = affine_event_time(ra, rb, rng);
      if (std::isinf(t)) {
        CHECK(rb < 0.0);
        CHECK(e >= ra * ra / (-2.0 * rb));
      } else {
        CHECK(affine_integrated_rate(ra, rb, t) == Approx(e).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("affine_event_time matches first-arrival CDFs (KS)", "[sampler]") {
  Rng rng(2);
  const std::size_t n = 100000;
  for (const auto& [a, b] : std::vector<std::pair<double, double>>{
           {1.0, 0.0}, {0.0, 1.0}, {-1.0, 1.0}, {2.0, -1.0}}) {
    std::vector<double> draws(n);
    for (auto& t : draws) t = affine_event_time(a, b, rng);
    const auto cdf = [a = a, b = b](double t) {
      return 1.0 - std::exp(-affine_integrated_rate(a, b, t));
    };
    INFO("a=" << a << " b=" << b);
    CHECK(ks_distance(draws, cdf) < 1.9495 / std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("BPS bounce candidate uses the affine rate", "[sampler]") {
  // sigma = 1, x = (2, 0), v = (-1, 0): rate (<v, x + t v>)_+ = (-2 + t)_+.
  const auto target = make_cube_target(2, {1.0, 1.0, 1.0, 1.0});
  const auto space = VelocitySpace::unit_sphere(2);
  const State s{kOutside, vec({2, 0}), vec({-1, 0}), 0.0};
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    Rng copy = rng;
    const double expected = affine_event_time(-2.0, 1.0, copy);
    const auto c = next_bounce_candidate(target, SamplerKind::bps(0.0), space, s, kInf, rng);
    REQUIRE(c);
    CHECK(c->t == Approx(expected).epsilon(1e-15));
    CHECK(c->t > 2.0);
  }
  // Down-gradient over the whole window: never an event before t_max.
  for (int i = 0; i < 1000; ++i) {
    REQUIRE_FALSE(next_bounce_candidate(target, SamplerKind::bps(0.0), space, s, 1.9, rng));
  }
}

TEST_CASE("Zig-Zag first-coordinate law matches a discretized oracle", "[sampler]") {
  const auto target = make_cube_target(2, {1.0, 1.0, 1.0, 1.0});
  const auto space = VelocitySpace::signed_hypercube(Basis::canonical(2));
  const Vec x = vec({0.3, -0.2});
  const Vec v = vec({1, 1});
  // Rates (s_i x_i + t)_+ / sigma.
  const double a0 = 0.3;
  const double a1 = -0.2;
  double p0 = 0.0;
  double mean_t = 0.0;
  const double dt = 1e-4;
  double survival = 1.0;
  for (double t = 0.5 * dt; t < 12.0; t += dt) {
    const double r0 = std::max(0.0, a0 + t);
    const double r1 = std::max(0.0, a1 + t);
    p0 += survival * r0 * dt;
    mean_t += survival * (r0 + r1) * t * dt;
    survival *= std::exp(-(r0 + r1) * dt);
  }
  Rng rng(4);
  const std::size_t n = 200000;
  std::size_t first = 0;
  double sum_t = 0.0;
  double sum_t2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = next_bounce_candidate(target, SamplerKind::zigzag(), space,
                                         State{kInside, x, v, 0.0}, kInf, rng);
    REQUIRE(c);
    first += c->coordinate == 0 ? 1 : 0;
    sum_t += c->t;
    sum_t2 += c->t * c->t;
  }
  const double freq = static_cast<double>(first) / n;
  CHECK(std::abs(freq - p0) < 4.0 * std::sqrt(p0 * (1 - p0) / n));
  const double m = sum_t / n;
  CHECK(std::abs(m - mean_t) < 4.0 * std::sqrt((sum_t2 / n - m * m) / n));
}

TEST_CASE("apply_bounce examples", "[sampler]") {
  Rng rng(5);
  const auto sphere = VelocitySpace::unit_sphere(2);
  CHECK(apply_bounce(Dynamics::Bps, sphere, vec({1, 0}), vec({1, 1}), {}, rng)
            .isApprox(vec({0, -1})));
  CHECK_THROWS_AS(apply_bounce(Dynamics::Bps, sphere, vec({1, 0}), vec({0, 0}), {}, rng),
                  ZeroGradient);

  const auto cube = VelocitySpace::signed_hypercube(Basis::canonical(2));
  CHECK(apply_bounce(Dynamics::ZigZag, cube, vec({1, 1}), vec({0, -1}), {0.0, 1}, rng) ==
        vec({1, -1}));
  CHECK_THROWS_AS(apply_bounce(Dynamics::ZigZag, cube, vec({1, 1}), vec({0, -1}), {0.0, -1}, rng),
                  InvalidArgument);

  const auto axes = VelocitySpace::coordinate_axes(Basis::canonical(2));
  for (int i = 0; i < 200; ++i) {
    REQUIRE(apply_bounce(Dynamics::Coordinate, axes, vec({1, 0}), vec({-2, 0}), {}, rng) ==
            vec({-1, 0}));
  }
  // Weights (<v', grad>)_+ = (3, 1) over {+e1, -e2} for grad = (3, -1).
  std::size_t first = 0;
  const std::size_t n = 100000;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec out = apply_bounce(Dynamics::Coordinate, axes, vec({0, 1}), vec({3, -1}), {}, rng);
    REQUIRE((out == vec({1, 0}) || out == vec({0, -1})));
    first += out == vec({1, 0}) ? 1 : 0;
  }
  CHECK(std::abs(static_cast<double>(first) / n - 0.75) < 4.0 * std::sqrt(0.75 * 0.25 / n));
}

TEST_CASE("bounce rates", "[sampler]") {
  const auto cube = VelocitySpace::signed_hypercube(Basis::canonical(2));
  CHECK(bounce_rate(Dynamics::ZigZag, cube, vec({1, -1}), vec({-2, -3})) == Approx(2.0));
  CHECK(bounce_rate(Dynamics::Bps, VelocitySpace::unit_sphere(2), vec({1, 0}), vec({-2, 5})) ==
        Approx(2.0));
  CHECK(bounce_rate(Dynamics::Bps, VelocitySpace::unit_sphere(2), vec({1, 0}), vec({2, 5})) == 0.0);
}

TEST_CASE("path_moments by hand", "[sampler]") {
  TrajectorySkeleton s;
  s.dim = 2;
  s.num_regions = 2;
  s.breakpoints.push_back({0.0, vec({0, 0}), vec({1, 0}), EventTag::Start, kInside});
  s.breakpoints.push_back({1.0, vec({1, 0}), vec({1, 0}), EventTag::End, kInside});
  PathMoments m = path_moments(s);
  CHECK(m.mean.isApprox(vec({0.5, 0})));
  CHECK(m.second_moment(0, 0) == Approx(1.0 / 3.0));
  CHECK(m.second_moment(1, 1) == 0.0);
  CHECK(m.occupancy[0] == 1.0);

  // Out and back: 0 -> 2 -> 0 over [0, 4] with a stop in the outer region.
  s.breakpoints.clear();
  s.breakpoints.push_back({0.0, vec({0, 0}), vec({1, 0}), EventTag::Start, kInside});
  s.breakpoints.push_back({1.0, vec({1, 0}), vec({1, 0}), EventTag::Boundary, kOutside});
  s.breakpoints.push_back({2.0, vec({2, 0}), vec({-1, 0}), EventTag::Bounce, kOutside});
  s.breakpoints.push_back({3.0, vec({1, 0}), vec({-1, 0}), EventTag::Boundary, kInside});
  s.breakpoints.push_back({4.0, vec({0, 0}), vec({-1, 0}), EventTag::End, kInside});
  m = path_moments(s);
  CHECK(m.mean[0] == Approx(1.0));
  CHECK(m.second_moment(0, 0) == Approx(4.0 / 3.0));
  CHECK(m.occupancy[0] == Approx(0.5));
  CHECK(m.occupancy[1] == Approx(0.5));
  CHECK(m.variance()[0] == Approx(1.0 / 3.0));

  // Cross moments.
  s.breakpoints.clear();
  s.breakpoints.push_back({0.0, vec({0, 1}), vec({1, -1}), EventTag::Start, kInside});
  s.breakpoints.push_back({2.0, vec({2, -1}), vec({1, -1}), EventTag::End, kInside});
  m = path_moments(s);
  // (1/2) int_0^2 t (1 - t) dt = (1/2)(2 - 8/3) = -1/3.
  CHECK(m.second_moment(0, 1) == Approx(-1.0 / 3.0));
  CHECK(m.second_moment(1, 0) == Approx(-1.0 / 3.0));
}

TEST_CASE("simulate stop conditions", "[sampler]") {
  auto s = setup(Dynamics::Bps, 2, {1.0, 1.0, 1.0, 0.0});
  Rng rng(6);
  const State s0{kInside, vec({0, 0}), vec({0.6, 0.8}), 0.0};
  const auto skel = simulate(s.target, s.kind, s.space, BoundaryKernel::limit(), s0,
                             StopCondition::events(10), rng);
  REQUIRE(skel.breakpoints.size() == 12);
  CHECK(skel.breakpoints.front().tag == EventTag::Start);
  CHECK(skel.breakpoints.back().tag == EventTag::End);
  CHECK(skel.count(EventTag::Start) == 1);
  CHECK(skel.count(EventTag::End) == 1);
  CHECK(skel.count(EventTag::Bounce) + skel.count(EventTag::Refresh) +
            skel.count(EventTag::Boundary) ==
        10);
  CHECK(validate_skeleton(skel, s.target).empty());

  const auto timed = simulate(s.target, s.kind, s.space, BoundaryKernel::limit(), s0,
                              StopCondition::time(7.25), rng);
  CHECK(timed.breakpoints.back().t == 7.25);
  CHECK(timed.total_time() == 7.25);
  CHECK(validate_skeleton(timed, s.target).empty());

  CHECK_THROWS_AS(simulate(s.target, s.kind, s.space, BoundaryKernel::limit(), s0,
                           StopCondition{}, rng),
                  InvalidArgument);
  CHECK_THROWS_AS(simulate(s.target, s.kind, s.space, BoundaryKernel::limit(),
                           State{kOutside, vec({0, 0}), vec({1, 0}), 0.0},
                           StopCondition::events(1), rng),
                  InvalidArgument);
  CHECK_THROWS_AS(simulate(s.target, SamplerKind::zigzag(), s.space, BoundaryKernel::limit(), s0,
                           StopCondition::events(1), rng),
                  UnsupportedCombination);
}

TEST_CASE("Flip keeps the restricted Gaussian trajectory in the cube", "[sampler]") {
  for (const auto dyn : {Dynamics::Bps, Dynamics::ZigZag, Dynamics::Coordinate}) {
    auto s = setup(dyn, 3, {1.0, 1.0, 1.0, 0.0});
    Rng rng(7);
    const State s0{kInside, Vec::Zero(3), s.space.sample(rng), 0.0};
    const auto skel = simulate(s.target, s.kind, s.space, BoundaryKernel::flip(), s0,
                               StopCondition::events(5000), rng);
    CHECK(validate_skeleton(skel, s.target).empty());
    CHECK(skel.count(EventTag::Boundary) > 100);
    for (std::size_t i = 1; i < skel.breakpoints.size(); ++i) {
      const auto& b = skel.breakpoints[i];
      REQUIRE(b.region == kInside);
      if (b.tag == EventTag::Boundary) {
        REQUIRE(b.v == -skel.breakpoints[i - 1].v);
      }
    }
  }
}

TEST_CASE("zero outside density keeps every kernel inside", "[sampler]") {
  for (const auto dyn : {Dynamics::Bps, Dynamics::ZigZag, Dynamics::Coordinate}) {
    for (const auto& kernel : {BoundaryKernel::flip(), BoundaryKernel::limit(),
                               BoundaryKernel::metropolis_hastings(1),
                               BoundaryKernel::metropolis_hastings(20)}) {
      for (const bool rotated : {false, true}) {
        auto s = setup(dyn, 3, {1.0, 1.0, 1.0, 0.0});
        if (rotated && dyn != Dynamics::Bps) {
          const Basis b = Basis::random_rotation(3, 5);
          s.space = dyn == Dynamics::ZigZag ? VelocitySpace::signed_hypercube(b)
                                            : VelocitySpace::coordinate_axes(b);
        }
        Rng rng(8);
        const State s0{kInside, Vec::Zero(3), s.space.sample(rng), 0.0};
        const auto skel = simulate(s.target, s.kind, s.space, kernel, s0,
                                   StopCondition::events(3000), rng);
        CHECK(validate_skeleton(skel, s.target).empty());
        for (const auto& b : skel.breakpoints) {
          REQUIRE(b.x.cwiseAbs().maxCoeff() <= 1.0 + 1e-9);
          REQUIRE(b.region == kInside);
        }
      }
    }
  }
}

TEST_CASE("d=1 BPS, Zig-Zag and CS skeletons coincide", "[sampler]") {
  for (const double alpha_out : {0.0, 0.5}) {
    const CubeGaussian params{1.0, 1.0, 1.0, alpha_out};
    const auto target = make_cube_target(1, params);
    const State s0{kInside, vec({0.3}), vec({1}), 0.0};
    std::vector<TrajectorySkeleton> runs;
    for (const auto& [kind, space] :
         std::vector<std::pair<SamplerKind, VelocitySpace>>{
             {SamplerKind::bps(0.0), VelocitySpace::unit_sphere(1)},
             {SamplerKind::zigzag(), VelocitySpace::signed_hypercube(Basis::canonical(1))},
             {SamplerKind::coordinate(0.0), VelocitySpace::coordinate_axes(Basis::canonical(1))}}) {
      Rng rng(9);
      runs.push_back(simulate(target, kind, space, BoundaryKernel::limit(), s0,
                              StopCondition::events(5000), rng));
    }
    for (std::size_t r = 1; r < runs.size(); ++r) {
      REQUIRE(runs[r].breakpoints.size() == runs[0].breakpoints.size());
      for (std::size_t i = 0; i < runs[0].breakpoints.size(); ++i) {
        const auto& a = runs[0].breakpoints[i];
        const auto& b = runs[r].breakpoints[i];
        REQUIRE(a.tag == b.tag);
        REQUIRE(std::abs(a.t - b.t) <= 1e-12);
        REQUIRE(std::abs(a.x[0] - b.x[0]) <= 1e-12);
        REQUIRE(a.v[0] == b.v[0]);
      }
    }
    if (alpha_out > 0) CHECK(runs[0].count(EventTag::Boundary) > 100);
  }
}

TEST_CASE("continuous crossings pass straight through", "[sampler]") {
  auto s = setup(Dynamics::Bps, 2, {1.0, 1.0, 1.0, 1.0});
  Rng rng(10);
  const State s0{kInside, vec({0, 0}), vec({0.6, 0.8}), 0.0};
  const auto skel = simulate(s.target, s.kind, s.space, BoundaryKernel::limit(), s0,
                             StopCondition::events(200000), rng);
  CHECK(validate_skeleton(skel, s.target).empty());
  for (std::size_t i = 1; i < skel.breakpoints.size(); ++i) {
    if (skel.breakpoints[i].tag == EventTag::Boundary) {
      REQUIRE(skel.breakpoints[i].v == skel.breakpoints[i - 1].v);
      REQUIRE(skel.breakpoints[i].region != skel.breakpoints[i - 1].region);
    }
  }
  // Untruncated N(0, I).
  const PathMoments m = path_moments(skel);
  CHECK(m.variance()[0] == Approx(1.0).epsilon(0.05));
  CHECK(m.variance()[1] == Approx(1.0).epsilon(0.05));
}

TEST_CASE("edge hits fall back to a flip", "[sampler]") {
  auto s = setup(Dynamics::Bps, 2, {1.0, 1.0, 2.0, 1.0}, 0.0);
  const Vec v0 = vec({1, 1}) / std::sqrt(2.0);
  const State s0{kInside, vec({0, 0}), v0, 0.0};
  // Stop right after the corner hit at t = sqrt(2) unless a bounce comes first.
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const auto skel = simulate(s.target, s.kind, s.space, BoundaryKernel::limit(), s0,
                               StopCondition::events(1), rng);
    const auto& b = skel.breakpoints[1];
    if (b.tag != EventTag::Boundary) continue;
    CHECK(b.v.isApprox(-v0));
    CHECK(b.region == kInside);
  }
}

TEST_CASE("thinning agrees with exact inversion", "[sampler]") {
  const CubeGaussian params{1.0, 1.0, 2.0, 1.0};
  const auto exact = setup(Dynamics::Bps, 2, params);
  const PiecewiseTarget thinned = generic_cube(2, params, 0.5);
  const std::size_t n = 10000;
  std::map<std::size_t, std::array<double, 2>> hist;
  Rng rng(11);
  for (std::size_t i = 0; i < n; ++i) {
    const State s0{kInside, vec({0.2, -0.1}), vec({0.6, 0.8}), 0.0};
    const auto a = simulate(exact.target, exact.kind, exact.space, BoundaryKernel::limit(), s0,
                            StopCondition::time(3.0), rng);
    const auto b = simulate(thinned, exact.kind, exact.space, BoundaryKernel::limit(), s0,
                            StopCondition::time(3.0), rng);
    REQUIRE(validate_skeleton(b, thinned).empty());
    hist[std::min<std::size_t>(a.count(EventTag::Bounce), 6)][0] += 1;
    hist[std::min<std::size_t>(b.count(EventTag::Bounce), 6)][1] += 1;
  }
  // Two-sample chi-square over bins with enough mass.
  double stat = 0.0;
  int bins = 0;
  for (const auto& [k, c] : hist) {
    const double total = c[0] + c[1];
    if (total < 20) continue;
    const double e = total / 2.0;
    stat += (c[0] - e) * (c[0] - e) / e + (c[1] - e) * (c[1] - e) / e;
    ++bins;
  }
  REQUIRE(bins >= 3);
  // 0.1% critical values for df = bins - 1.
  const double crit[] = {0, 10.828, 13.816, 16.266, 18.467, 20.515, 22.458};
  CHECK(stat < crit[bins - 1]);
}

TEST_CASE("thinning reports an invalid bound", "[sampler]") {
  const auto base = make_cube_target(2, {});
  std::vector<Region> regions = base.regions();
  regions[0].gaussian.reset();
  regions[0].rate_bound = [](const Vec&, const Vec&, double) { return RateBound{0.5, kInf}; };
  const PiecewiseTarget target(2, regions, base.facets());
  const auto space = VelocitySpace::unit_sphere(2);
  Rng rng(12);
  const State s{kInside, vec({-0.9, 0}), vec({-1, 0}), 0.0};
  // True rate along the window is at least 0.9, above the bound of 0.5.
  bool threw = false;
  for (int i = 0; i < 1000 && !threw; ++i) {
    try {
      next_bounce_candidate(target, SamplerKind::bps(0.0), space, s, 0.09, rng);
    } catch (const BoundViolation&) {
      threw = true;
    }
  }
  CHECK(threw);
}

TEST_CASE("a flat region with no refreshment has no next event", "[sampler]") {
  Region flat;
  flat.name = "flat";
  flat.log_density = [](const Vec&) { return 0.0; };
  flat.grad_log_density = [](const Vec& x) -> Vec { return Vec::Zero(x.size()); };
  flat.contains = [](const Vec&) { return true; };
  flat.rate_bound = [](const Vec&, const Vec&, double) { return RateBound{0.0, kInf}; };
  const PiecewiseTarget target(2, {flat}, {});
  Rng rng(13);
  CHECK_THROWS_AS(simulate(target, SamplerKind::bps(0.0), VelocitySpace::unit_sphere(2),
                           BoundaryKernel::limit(), State{RegionId(0), vec({0, 0}), vec({1, 0}), 0.0},
                           StopCondition::events(3), rng),
                  NoEvent);
  // With refreshment the process runs.
  const auto skel = simulate(target, SamplerKind::bps(1.0), VelocitySpace::unit_sphere(2),
                             BoundaryKernel::limit(), State{RegionId(0), vec({0, 0}), vec({1, 0}), 0.0},
                             StopCondition::events(3), rng);
  CHECK(skel.count(EventTag::Refresh) == 3);
}

TEST_CASE("validate_skeleton flags broken skeletons", "[sampler]") {
  const auto target = make_cube_target(2, {});
  TrajectorySkeleton s;
  s.dim = 2;
  s.num_regions = 2;
  s.breakpoints.push_back({0.0, vec({0, 0}), vec({1, 0}), EventTag::Start, kInside});
  s.breakpoints.push_back({1.0, vec({1, 0}), vec({-1, 0}), EventTag::Boundary, kInside});
  s.breakpoints.push_back({1.5, vec({0.5, 0}), vec({-1, 0}), EventTag::End, kInside});
  CHECK(validate_skeleton(s, target).empty());
  s.breakpoints[2].x[0] = 0.5 + 1e-6;
  CHECK(validate_skeleton(s, target).size() == 1);
  s.breakpoints[2].x[0] = 0.5;
  s.breakpoints[1].tag = EventTag::Boundary;
  s.breakpoints[1].x = vec({0.9, 0});
  s.breakpoints[0].v = vec({0.9, 0});
  s.breakpoints[2].x = vec({0.4, 0});
  CHECK_FALSE(validate_skeleton(s, target).empty());
  s.breakpoints[2].t = 1.0;
  CHECK_FALSE(validate_skeleton(s, target).empty());
}

TEST_CASE("event tags round-trip", "[sampler]") {
  for (const auto tag : {EventTag::Start, EventTag::Bounce, EventTag::Refresh, EventTag::Boundary,
                         EventTag::End}) {
    CHECK(parse_event_tag(to_string(tag)) == tag);
  }
  CHECK_THROWS_AS(parse_event_tag("jump"), InvalidArgument);
  CHECK(parse_dynamics("zigzag") == Dynamics::ZigZag);
  CHECK(parse_dynamics("cs") == Dynamics::Coordinate);
  CHECK_THROWS_AS(parse_dynamics("hmc"), InvalidArgument);
}
