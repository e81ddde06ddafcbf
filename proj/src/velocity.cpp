#include "pdmp/velocity.hpp"

#include <Eigen/LU>
#include <Eigen/QR>

#include <cmath>
#include <numbers>

namespace pdmp {

Basis Basis::canonical(std::size_t dim) {
  Basis b;
  const auto d = static_cast<Eigen::Index>(dim);
  b.r_ = Mat::Identity(d, d);
  b.canonical_ = true;
  return b;
}

Basis Basis::random_rotation(std::size_t dim, std::uint64_t seed) {
  const auto d = static_cast<Eigen::Index>(dim);
  Rng rng(seed);
  Mat g(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * Mat::Identity(d, d);
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  if (q.determinant() < 0.0) q.col(0) *= -1.0;
  Basis b;
  b.r_ = std::move(q);
  b.canonical_ = false;
  return b;
}

Basis Basis::from_matrix(Mat columns) {
  if (columns.rows() != columns.cols() || columns.rows() == 0) {
    throw InvalidArgument("Basis: matrix must be square and nonempty");
  }
  const Mat gram = columns.transpose() * columns;
  if (!gram.isApprox(Mat::Identity(gram.rows(), gram.cols()), 1e-10) ||
      (gram - Mat::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() > 1e-10) {
    throw InvalidArgument("Basis: columns are not orthonormal");
  }
  Basis b;
  b.canonical_ = columns.isIdentity(0.0);
  b.r_ = std::move(columns);
  return b;
}

VelocitySpace VelocitySpace::unit_sphere(std::size_t dim) {
  return {Kind::UnitSphere, dim, Basis::canonical(dim)};
}

VelocitySpace VelocitySpace::iso_gaussian(std::size_t dim) {
  return {Kind::IsoGaussian, dim, Basis::canonical(dim)};
}

VelocitySpace VelocitySpace::signed_hypercube(Basis basis) {
  const auto d = basis.dim();
  return {Kind::SignedHypercube, d, std::move(basis)};
}

VelocitySpace VelocitySpace::coordinate_axes(Basis basis) {
  const auto d = basis.dim();
  return {Kind::CoordinateAxes, d, std::move(basis)};
}

std::size_t VelocitySpace::atom_count() const {
  switch (kind_) {
    case Kind::SignedHypercube:
      if (dim_ >= 63) throw InvalidArgument("atom_count: hypercube too large");
      return std::size_t{1} << dim_;
    case Kind::CoordinateAxes:
      return 2 * dim_;
    default:
      throw NotFinite("atom_count: continuous velocity space");
  }
}

double VelocitySpace::probability(const Vec& v) const {
  const double d = static_cast<double>(dim_);
  switch (kind_) {
    case Kind::SignedHypercube:
      return std::exp(-d * std::numbers::ln2);
    case Kind::CoordinateAxes:
      return 1.0 / (2.0 * d);
    case Kind::UnitSphere:
      // 1 / surface area of S^{d-1}
      return std::exp(std::lgamma(d / 2.0) - std::log(2.0) - (d / 2.0) * std::log(std::numbers::pi));
    case Kind::IsoGaussian:
      return std::exp(-0.5 * v.squaredNorm() - 0.5 * d * std::log(2.0 * std::numbers::pi));
  }
  return 0.0;
}

Vec VelocitySpace::sample(Rng& rng) const {
  const auto d = static_cast<Eigen::Index>(dim_);
  switch (kind_) {
    case Kind::UnitSphere: {
      Vec v(d);
      double norm = 0.0;
      do {
        for (auto& vi : v) vi = rng.normal();
        norm = v.norm();
      } while (norm == 0.0);
      return v / norm;
    }
    case Kind::IsoGaussian: {
      Vec v(d);
      for (auto& vi : v) vi = rng.normal();
      return v;
    }
    case Kind::SignedHypercube: {
      Vec s(d);
      for (auto& si : s) si = rng.coin() ? 1.0 : -1.0;
      return basis_.from_basis(s);
    }
    case Kind::CoordinateAxes: {
      const std::size_t j = rng.index(2 * dim_);
      const double sign = j < dim_ ? 1.0 : -1.0;
      return sign * basis_.column(j % dim_);
    }
  }
  return {};
}

Vec VelocitySpace::refresh(const Vec& /*v*/, Rng& rng) const { return sample(rng); }

std::vector<Vec> VelocitySpace::enumerate() const {
  if (!is_finite()) throw NotFinite("enumerate: continuous velocity space");
  const auto d = static_cast<Eigen::Index>(dim_);
  std::vector<Vec> atoms;
  if (kind_ == Kind::CoordinateAxes) {
    atoms.reserve(2 * dim_);
    for (Eigen::Index i = 0; i < d; ++i) atoms.emplace_back(basis_.column(i));
    for (Eigen::Index i = 0; i < d; ++i) atoms.emplace_back(-basis_.column(i));
    return atoms;
  }
  if (dim_ > 24) throw InvalidArgument("enumerate: hypercube has too many atoms");
  const std::size_t count = std::size_t{1} << dim_;
  atoms.reserve(count);
  for (std::size_t mask = 0; mask < count; ++mask) {
    Vec s(d);
    for (Eigen::Index i = 0; i < d; ++i) s[i] = (mask >> i) & 1u ? -1.0 : 1.0;
    atoms.push_back(basis_.from_basis(s));
  }
  return atoms;
}

VelocitySplit VelocitySpace::split_by_normal(const Vec& n) const {
  VelocitySplit out;
  for (auto& a : enumerate()) {
    const double dot = a.dot(n);
    if (std::abs(dot) < kTangentTol) {
      out.tangent.push_back(std::move(a));
    } else if (dot > 0.0) {
      out.plus.push_back(std::move(a));
    } else {
      out.minus.push_back(std::move(a));
    }
  }
  return out;
}

Vec VelocitySpace::hypercube_signs(const Vec& v) const {
  const Vec c = basis_.to_basis(v);
  return c.unaryExpr([](double x) { return x >= 0.0 ? 1.0 : -1.0; });
}

std::pair<std::size_t, double> VelocitySpace::axis_of(const Vec& v) const {
  const Vec c = basis_.to_basis(v);
  Eigen::Index i = 0;
  c.cwiseAbs().maxCoeff(&i);
  return {static_cast<std::size_t>(i), c[i] >= 0.0 ? 1.0 : -1.0};
}

Vec VelocitySpace::snap(const Vec& v) const {
  switch (kind_) {
    case Kind::SignedHypercube:
      return basis_.from_basis(hypercube_signs(v));
    case Kind::CoordinateAxes: {
      const auto [i, sign] = axis_of(v);
      return sign * basis_.column(i);
    }
    default:
      return v;
  }
}

bool VelocitySpace::contains(const Vec& v, double tol) const {
  if (static_cast<std::size_t>(v.size()) != dim_) return false;
  switch (kind_) {
    case Kind::UnitSphere:
      return std::abs(v.norm() - 1.0) <= tol;
    case Kind::IsoGaussian:
      return v.allFinite();
    default:
      return (snap(v) - v).cwiseAbs().maxCoeff() <= tol;
  }
}

std::string to_string(VelocitySpace::Kind kind) {
  switch (kind) {
    case VelocitySpace::Kind::UnitSphere:
      return "unit_sphere";
    case VelocitySpace::Kind::IsoGaussian:
      return "iso_gaussian";
    case VelocitySpace::Kind::SignedHypercube:
      return "signed_hypercube";
    case VelocitySpace::Kind::CoordinateAxes:
      return "coordinate_axes";
  }
  return "unknown";
}

}  // namespace pdmp
