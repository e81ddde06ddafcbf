#include "catch_amalgamated.hpp"

#include "pdmp/velocity.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

using namespace pdmp;
using Catch::Approx;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (const double x : xs) v[i++] = x;
  return v;
}

bool contains_atom(const std::vector<Vec>& atoms, const Vec& v) {
  return std::any_of(atoms.begin(), atoms.end(),
                     [&](const Vec& a) { return (a - v).cwiseAbs().maxCoeff() < 1e-12; });
}

// Pearson statistic of draws against a uniform law on `atoms`.
double chi_square_uniform(const VelocitySpace& space, std::size_t draws, Rng& rng) {
  const auto atoms = space.enumerate();
  std::vector<double> counts(atoms.size(), 0.0);
  for (std::size_t i = 0; i < draws; ++i) {
    const Vec v = space.sample(rng);
    bool found = false;
    for (std::size_t j = 0; j < atoms.size(); ++j) {
      if ((atoms[j] - v).cwiseAbs().maxCoeff() < 1e-12) {
        counts[j] += 1.0;
        found = true;
      }
    }
    REQUIRE(found);
  }
  const double expected = static_cast<double>(draws) / static_cast<double>(atoms.size());
  double stat = 0.0;
  for (const double c : counts) stat += (c - expected) * (c - expected) / expected;
  return stat;
}

}  // namespace

TEST_CASE("finite spaces sample their atoms uniformly", "[velocity]") {
  Rng rng(1);
  // 0.1% critical values of chi-square with 3 and 5 degrees of freedom.
  CHECK(chi_square_uniform(VelocitySpace::signed_hypercube(Basis::canonical(2)), 100000, rng) <
        16.266);
  CHECK(chi_square_uniform(VelocitySpace::coordinate_axes(Basis::canonical(3)), 100000, rng) <
        20.515);
  CHECK(chi_square_uniform(VelocitySpace::coordinate_axes(Basis::random_rotation(3, 4)), 60000,
                           rng) < 20.515);
}

TEST_CASE("unit sphere in d=2 has a uniform angle", "[velocity]") {
  Rng rng(2);
  const auto space = VelocitySpace::unit_sphere(2);
  const std::size_t n = 100000;
  std::vector<double> angles;
  angles.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec v = space.sample(rng);
    REQUIRE(std::abs(v.norm() - 1.0) <= 1e-12);
    double a = std::atan2(v[1], v[0]);
    if (a < 0) a += 2.0 * std::numbers::pi;
    angles.push_back(a);
  }
  std::sort(angles.begin(), angles.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = angles[i] / (2.0 * std::numbers::pi);
    ks = std::max({ks, std::abs(f - static_cast<double>(i) / n),
                   std::abs(f - static_cast<double>(i + 1) / n)});
  }
  CHECK(ks < 1.9495 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("continuous laws are symmetric", "[velocity]") {
  Rng rng(5);
  for (const auto& space : {VelocitySpace::unit_sphere(3), VelocitySpace::iso_gaussian(3)}) {
    const std::size_t n = 100000;
    Vec sum = Vec::Zero(3);
    Vec sum_sq = Vec::Zero(3);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec v = space.sample(rng);
      sum += v;
      sum_sq += v.cwiseAbs2();
      CHECK(space.probability(v) == space.probability(-v));
    }
    const Vec mean = sum / n;
    const Vec se = ((sum_sq / n - mean.cwiseAbs2()) / n).cwiseSqrt();
    for (Eigen::Index i = 0; i < 3; ++i) CHECK(std::abs(mean[i]) < 4.0 * se[i]);
  }
}

TEST_CASE("probabilities of each law", "[velocity]") {
  CHECK(VelocitySpace::signed_hypercube(Basis::canonical(3)).probability(vec({1, 1, -1})) ==
        Approx(0.125));
  CHECK(VelocitySpace::coordinate_axes(Basis::canonical(3)).probability(vec({0, 0, -1})) ==
        Approx(1.0 / 6.0));
  CHECK(VelocitySpace::unit_sphere(2).probability(vec({1, 0})) ==
        Approx(1.0 / (2.0 * std::numbers::pi)));
  CHECK(VelocitySpace::unit_sphere(3).probability(vec({1, 0, 0})) ==
        Approx(1.0 / (4.0 * std::numbers::pi)));
  CHECK(VelocitySpace::iso_gaussian(1).probability(vec({0.5})) ==
        Approx(std::exp(-0.125) / std::sqrt(2.0 * std::numbers::pi)));
}

TEST_CASE("enumerate", "[velocity]") {
  const auto cube = VelocitySpace::signed_hypercube(Basis::canonical(2));
  const auto axes = VelocitySpace::coordinate_axes(Basis::canonical(2));
  CHECK(cube.enumerate().size() == 4);
  CHECK(axes.enumerate().size() == 4);
  CHECK(VelocitySpace::coordinate_axes(Basis::canonical(5)).enumerate().size() == 10);
  CHECK(VelocitySpace::signed_hypercube(Basis::canonical(5)).enumerate().size() == 32);
  CHECK_THROWS_AS(VelocitySpace::unit_sphere(2).enumerate(), NotFinite);
  CHECK_THROWS_AS(VelocitySpace::iso_gaussian(2).enumerate(), NotFinite);
  CHECK_THROWS_AS(VelocitySpace::unit_sphere(2).split_by_normal(vec({1, 0})), NotFinite);

  for (const auto& space : {VelocitySpace::signed_hypercube(Basis::random_rotation(4, 9)),
                            VelocitySpace::coordinate_axes(Basis::random_rotation(4, 9))}) {
    const auto atoms = space.enumerate();
    for (const auto& a : atoms) {
      CHECK(contains_atom(atoms, -a));
      CHECK(space.probability(a) == space.probability(-a));
      CHECK(space.contains(a));
      CHECK(space.contains(-a));
    }
  }
}

TEST_CASE("split_by_normal examples", "[velocity]") {
  const auto cube = VelocitySpace::signed_hypercube(Basis::canonical(2));
  const auto axes = VelocitySpace::coordinate_axes(Basis::canonical(2));

  auto s = cube.split_by_normal(vec({1, 0}));
  REQUIRE(s.plus.size() == 2);
  REQUIRE(s.minus.size() == 2);
  CHECK(s.tangent.empty());
  CHECK(contains_atom(s.plus, vec({1, 1})));
  CHECK(contains_atom(s.plus, vec({1, -1})));
  CHECK(contains_atom(s.minus, vec({-1, 1})));
  CHECK(contains_atom(s.minus, vec({-1, -1})));

  s = axes.split_by_normal(vec({1, 0}));
  REQUIRE(s.plus.size() == 1);
  REQUIRE(s.minus.size() == 1);
  REQUIRE(s.tangent.size() == 2);
  CHECK(contains_atom(s.plus, vec({1, 0})));
  CHECK(contains_atom(s.minus, vec({-1, 0})));
  CHECK(contains_atom(s.tangent, vec({0, 1})));
  CHECK(contains_atom(s.tangent, vec({0, -1})));

  s = cube.split_by_normal(vec({1, 1}) / std::sqrt(2.0));
  REQUIRE(s.plus.size() == 1);
  REQUIRE(s.minus.size() == 1);
  REQUIRE(s.tangent.size() == 2);
  CHECK(contains_atom(s.plus, vec({1, 1})));
  CHECK(contains_atom(s.minus, vec({-1, -1})));
  CHECK(contains_atom(s.tangent, vec({1, -1})));
  CHECK(contains_atom(s.tangent, vec({-1, 1})));
}

TEST_CASE("random rotations are orthonormal and seeded", "[velocity]") {
  for (const std::size_t d : {1u, 2u, 10u, 100u}) {
    const Basis b = Basis::random_rotation(d, 7);
    const Mat gram = b.matrix().transpose() * b.matrix();
    CHECK((gram - Mat::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(b.matrix().determinant() == Approx(1.0).epsilon(1e-9));
    CHECK(Basis::random_rotation(d, 7).matrix() == b.matrix());
    if (d > 1) CHECK(Basis::random_rotation(d, 8).matrix() != b.matrix());
  }
  Mat m = Mat::Identity(2, 2);
  m(0, 1) = 0.1;
  CHECK_THROWS_AS(Basis::from_matrix(m), InvalidArgument);
  CHECK(Basis::from_matrix(Mat::Identity(3, 3)).is_canonical());
}

TEST_CASE("rotated finite spaces map through the basis", "[velocity]") {
  const Basis b = Basis::random_rotation(3, 21);
  const auto cube = VelocitySpace::signed_hypercube(b);
  const auto axes = VelocitySpace::coordinate_axes(b);
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    const Vec v = cube.sample(rng);
    const Vec s = cube.hypercube_signs(v);
    CHECK((b.from_basis(s) - v).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(cube.snap(v + Vec::Constant(3, 1e-6)).isApprox(v, 1e-12));
    const Vec w = axes.sample(rng);
    CHECK(std::abs(w.norm() - 1.0) < 1e-12);
    const auto [axis, sign] = axes.axis_of(w);
    CHECK((sign * b.column(axis) - w).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK_FALSE(cube.contains(vec({1, 0, 0})));
  CHECK_FALSE(VelocitySpace::unit_sphere(2).contains(vec({1, 1})));
}

TEST_CASE("refresh draws a fresh velocity from p", "[velocity]") {
  Rng a(12);
  Rng b(12);
  const auto space = VelocitySpace::unit_sphere(4);
  const Vec v = space.sample(a);
  CHECK(space.refresh(v, a).isApprox(space.refresh(space.sample(b), b)));
}
