#pragma once

#include "pdmp/common.hpp"

#include <vector>

namespace pdmp {

/// Orthonormal basis stored column-wise.
class Basis {
 public:
  static Basis canonical(std::size_t dim);
  /// Haar-distributed rotation: QR of a seeded Gaussian matrix with the
  /// sign of R's diagonal folded into Q, then det fixed to +1.
  static Basis random_rotation(std::size_t dim, std::uint64_t seed);
  /// Wraps an existing orthonormal matrix; throws InvalidArgument otherwise.
  static Basis from_matrix(Mat columns);

  std::size_t dim() const { return static_cast<std::size_t>(r_.cols()); }
  const Mat& matrix() const { return r_; }
  bool is_canonical() const { return canonical_; }
  Eigen::Ref<const Vec> column(std::size_t i) const { return r_.col(static_cast<Eigen::Index>(i)); }

  /// Coordinates of y in this basis (R^T y).
  Vec to_basis(const Vec& y) const { return canonical_ ? y : Vec(r_.transpose() * y); }
  /// Ambient vector from basis coordinates (R c).
  Vec from_basis(const Vec& c) const { return canonical_ ? c : Vec(r_ * c); }

 private:
  Mat r_;
  bool canonical_ = false;
};

/// Partition of a finite velocity set by the sign of <v, n>.
struct VelocitySplit {
  std::vector<Vec> plus;
  std::vector<Vec> minus;
  std::vector<Vec> tangent;
};

/// |<v, n>| below this counts as tangent.
inline constexpr double kTangentTol = 1e-12;

class VelocitySpace {
 public:
  enum class Kind { UnitSphere, IsoGaussian, SignedHypercube, CoordinateAxes };

  static VelocitySpace unit_sphere(std::size_t dim);
  static VelocitySpace iso_gaussian(std::size_t dim);
  static VelocitySpace signed_hypercube(Basis basis);
  static VelocitySpace coordinate_axes(Basis basis);

  Kind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  bool is_finite() const { return kind_ == Kind::SignedHypercube || kind_ == Kind::CoordinateAxes; }
  const Basis& basis() const { return basis_; }

  /// Number of atoms of a finite space (2^d or 2d).
  std::size_t atom_count() const;
  /// Probability of each atom (finite) or density value p(v) (continuous).
  double probability(const Vec& v) const;

  Vec sample(Rng& rng) const;
  /// Full resample from p; the current velocity is ignored.
  Vec refresh(const Vec& v, Rng& rng) const;

  /// All atoms of a finite space. Throws NotFinite otherwise, and
  /// InvalidArgument for hypercubes too large to list (d > 24).
  std::vector<Vec> enumerate() const;

  /// Throws NotFinite for continuous spaces.
  VelocitySplit split_by_normal(const Vec& n) const;

  /// Rounds v to the nearest atom (finite) or returns v unchanged.
  Vec snap(const Vec& v) const;

  /// Whether v is in the support within `tol`.
  bool contains(const Vec& v, double tol = 1e-9) const;

  /// Signs s with v = R s (SignedHypercube only).
  Vec hypercube_signs(const Vec& v) const;
  /// Index i and sign of v = sign * R e_i (CoordinateAxes only).
  std::pair<std::size_t, double> axis_of(const Vec& v) const;

 private:
  VelocitySpace(Kind kind, std::size_t dim, Basis basis)
      : kind_(kind), dim_(dim), basis_(std::move(basis)) {}

  Kind kind_;
  std::size_t dim_;
  Basis basis_;
};

std::string to_string(VelocitySpace::Kind kind);

}  // namespace pdmp
