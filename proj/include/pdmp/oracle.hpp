#pragma once

#include "pdmp/common.hpp"
#include "pdmp/kernels.hpp"
#include "pdmp/target.hpp"
#include "pdmp/velocity.hpp"

#include <span>
#include <vector>

namespace pdmp::oracle {

/// Transition matrix of a boundary kernel Q over a finite atom set,
/// rows indexed by the input velocity.
struct KernelMatrix {
  std::vector<Vec> atoms;
  Mat matrix;
  /// Per-entry standard errors (Monte-Carlo estimates only; zero otherwise).
  Mat std_error;
  std::size_t trials = 0;

  std::size_t size() const { return atoms.size(); }
  /// Index of the atom closest to v; throws InvalidArgument if none is within tol.
  std::size_t index_of(const Vec& v, double tol = 1e-9) const;
};

/// Atom set the kernel acts on. For the BPS limit kernel on a finite space
/// this is the space's atoms closed under reflection in bp.n (so the
/// reflected velocities are representable); otherwise enumerate().
std::vector<Vec> kernel_atoms(const BoundaryKernel& kernel, Dynamics dynamics,
                              const BoundaryPoint& bp, const VelocitySpace& space);

/// Closed form Q for Flip, MH{m} (one-step matrix raised to the m-th power)
/// and the BPS / CS limit kernels. Throws NotClosedForm for the Zig-Zag
/// limit kernel and NotFinite for continuous spaces.
KernelMatrix kernel_matrix_exact(const BoundaryKernel& kernel, Dynamics dynamics,
                                 const BoundaryPoint& bp, const VelocitySpace& space);

/// Empirical Q from `trials` kernel applications per starting atom.
KernelMatrix kernel_matrix_mc(const BoundaryKernel& kernel, Dynamics dynamics,
                              const BoundaryPoint& bp, const VelocitySpace& space,
                              std::size_t trials, Rng& rng);

/// Q'(v'|v) = Q(v'|-v).
KernelMatrix flip_compose(const KernelMatrix& q);

/// l over the atoms with uniform p.
std::vector<double> l_weights(const BoundaryPoint& bp, std::span<const Vec> atoms);

/// max_v' |sum_v l(v) M[v, v'] - l(v')| / sum l. M must be the Q' matrix.
double check_l_invariance(const Mat& matrix, std::span<const double> l);

/// Column-wise residuals sum_v l(v) M[v,v'] - l(v') and their standard
/// errors, both divided by sum l.
struct InvarianceEstimate {
  std::vector<double> residual;
  std::vector<double> std_error;
};
InvarianceEstimate check_l_invariance_mc(const KernelMatrix& q_prime, std::span<const double> l);

/// l(-v) Q(v'|v) - l(v') Q(-v|-v') for every atom pair, with standard errors.
struct BalanceTerm {
  std::size_t from = 0;
  std::size_t to = 0;
  double residual = 0.0;
  double std_error = 0.0;
};
std::vector<BalanceTerm> detailed_balance_terms(const KernelMatrix& q, std::span<const double> l);

/// Moments of N(0, sigma) truncated to (a, b); sigma is the variance.
/// `mass` is the unnormalized integral of exp(-x^2 / (2 sigma)) over (a, b).
struct TruncatedMoments {
  double mass = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};
TruncatedMoments truncated_gaussian_moments(double sigma, double a, double b);

/// Proposal N(0, sigma I) scaled by weight: the target must satisfy
/// pi(x) <= weight * exp(-|x|^2 / (2 sigma)).
struct GaussianEnvelope {
  double sigma = 1.0;
  double weight = 1.0;
};

struct ReferenceMoments {
  Vec mean;
  Vec mean_stderr;
  Mat second_moment;
  std::vector<double> occupancy;
  std::vector<double> occupancy_stderr;
  std::size_t accepted = 0;
  std::size_t proposed = 0;
};

/// I.i.d. samples from the target by rejection under `envelope` until
/// `accepted` samples are collected. Throws EnvelopeViolation.
ReferenceMoments rejection_reference(const PiecewiseTarget& target, const GaussianEnvelope& envelope,
                                     std::size_t accepted, Rng& rng);

}  // namespace pdmp::oracle
