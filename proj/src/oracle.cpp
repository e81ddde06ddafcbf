#include "pdmp/oracle.hpp"

#include <cmath>
#include <numbers>

namespace pdmp::oracle {

namespace {

constexpr double kAtomTol = 1e-9;

bool is_space_atom_set(const VelocitySpace& space, std::span<const Vec> atoms) {
  return space.is_finite() && atoms.size() == space.atom_count();
}

// Index of v in the space's own enumerate() order, without a linear scan.
std::size_t fast_index(const VelocitySpace& space, const Vec& v) {
  if (space.kind() == VelocitySpace::Kind::SignedHypercube) {
    const Vec c = space.basis().to_basis(v);
    std::size_t mask = 0;
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      if (c[i] < 0.0) mask |= std::size_t{1} << i;
    }
    return mask;
  }
  const auto [axis, sign] = space.axis_of(v);
  return axis + (sign < 0.0 ? space.dim() : 0);
}

std::vector<std::size_t> negation_index(const KernelMatrix& q) {
  std::vector<std::size_t> neg(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) neg[i] = q.index_of(-q.atoms[i]);
  return neg;
}

void require_finite(const VelocitySpace& space, const char* who) {
  if (!space.is_finite()) throw NotFinite(std::string(who) + ": continuous velocity space");
}

bool uses_bps_limit(const BoundaryKernel& kernel, Dynamics dynamics) {
  return kernel.is_limit() && dynamics == Dynamics::Bps;
}

}  // namespace

std::size_t KernelMatrix::index_of(const Vec& v, double tol) const {
  std::size_t best = atoms.size();
  double best_dist = kInf;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const double dist = (atoms[i] - v).cwiseAbs().maxCoeff();
    if (dist < best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  if (best == atoms.size() || best_dist > tol) {
    throw InvalidArgument("KernelMatrix::index_of: velocity is not an atom");
  }
  return best;
}

std::vector<Vec> kernel_atoms(const BoundaryKernel& kernel, Dynamics dynamics,
                              const BoundaryPoint& bp, const VelocitySpace& space) {
  require_finite(space, "kernel_atoms");
  std::vector<Vec> atoms = space.enumerate();
  if (!uses_bps_limit(kernel, dynamics)) return atoms;
  const std::size_t base = atoms.size();
  for (std::size_t i = 0; i < base; ++i) {
    const Vec r = reflect(atoms[i], bp.n);
    bool present = false;
    for (const auto& a : atoms) {
      if ((a - r).cwiseAbs().maxCoeff() <= kAtomTol) {
        present = true;
        break;
      }
    }
    if (!present) atoms.push_back(r);
  }
  return atoms;
}

std::vector<double> l_weights(const BoundaryPoint& bp, std::span<const Vec> atoms) {
  std::vector<double> l;
  l.reserve(atoms.size());
  const double p = 1.0 / static_cast<double>(atoms.size());
  for (const auto& a : atoms) l.push_back(l_weight(bp, a, p));
  return l;
}

KernelMatrix kernel_matrix_exact(const BoundaryKernel& kernel, Dynamics dynamics,
                                 const BoundaryPoint& bp, const VelocitySpace& space) {
  require_finite(space, "kernel_matrix_exact");
  if (kernel.is_limit() && dynamics == Dynamics::ZigZag) {
    throw NotClosedForm("kernel_matrix_exact: the Zig-Zag limit kernel has no closed form");
  }
  KernelMatrix q;
  q.atoms = kernel_atoms(kernel, dynamics, bp, space);
  const std::size_t n = q.size();
  const auto ni = static_cast<Eigen::Index>(n);
  q.matrix = Mat::Zero(ni, ni);
  q.std_error = Mat::Zero(ni, ni);
  const std::vector<std::size_t> neg = negation_index(q);

  if (kernel.is_flip()) {
    for (std::size_t i = 0; i < n; ++i) q.matrix(i, neg[i]) = 1.0;
    return q;
  }

  if (kernel.is_mh()) {
    const std::vector<double> l = l_weights(bp, q.atoms);
    Mat step = Mat::Zero(ni, ni);
    for (std::size_t i = 0; i < n; ++i) {
      double moved = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        step(i, j) = mh_acceptance(l[i], l[j]) / static_cast<double>(n);
        moved += step(i, j);
      }
      step(i, i) = 1.0 - moved;
    }
    Mat power = Mat::Identity(ni, ni);
    Mat base = step;
    for (int m = kernel.mh_iters(); m > 0; m >>= 1) {
      if (m & 1) power = power * base;
      if (m > 1) base = base * base;
    }
    // The chain starts from the flipped input.
    for (std::size_t i = 0; i < n; ++i) q.matrix.row(i) = power.row(neg[i]);
    return q;
  }

  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<Branch> branches = dynamics == Dynamics::Bps
                                             ? limit_bps_branches(bp, q.atoms[i])
                                             : limit_cs_branches(bp, space, q.atoms[i]);
    for (const auto& b : branches) q.matrix(i, q.index_of(b.v)) += b.probability;
  }
  return q;
}

KernelMatrix kernel_matrix_mc(const BoundaryKernel& kernel, Dynamics dynamics,
                              const BoundaryPoint& bp, const VelocitySpace& space,
                              std::size_t trials, Rng& rng) {
  require_finite(space, "kernel_matrix_mc");
  if (trials == 0) throw InvalidArgument("kernel_matrix_mc: trials must be positive");
  KernelMatrix q;
  q.atoms = kernel_atoms(kernel, dynamics, bp, space);
  q.trials = trials;
  const std::size_t n = q.size();
  const auto ni = static_cast<Eigen::Index>(n);
  const bool fast = is_space_atom_set(space, q.atoms);
  const bool bps_limit = uses_bps_limit(kernel, dynamics);

  std::vector<std::size_t> counts(n);
  q.matrix = Mat::Zero(ni, ni);
  q.std_error = Mat::Zero(ni, ni);
  const double nt = static_cast<double>(trials);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t t = 0; t < trials; ++t) {
      const Vec out = bps_limit ? limit_bps(bp, q.atoms[i], rng)
                                : apply(kernel, dynamics, bp, space, q.atoms[i], rng);
      ++counts[fast ? fast_index(space, out) : q.index_of(out)];
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double p = static_cast<double>(counts[j]) / nt;
      q.matrix(i, j) = p;
      q.std_error(i, j) = std::sqrt(p * (1.0 - p) / nt);
    }
  }
  return q;
}

KernelMatrix flip_compose(const KernelMatrix& q) {
  KernelMatrix out = q;
  const std::vector<std::size_t> neg = negation_index(q);
  for (std::size_t i = 0; i < q.size(); ++i) {
    out.matrix.row(i) = q.matrix.row(neg[i]);
    out.std_error.row(i) = q.std_error.row(neg[i]);
  }
  return out;
}

double check_l_invariance(const Mat& matrix, std::span<const double> l) {
  const auto n = static_cast<Eigen::Index>(l.size());
  if (matrix.rows() != n || matrix.cols() != n) {
    throw InvalidArgument("check_l_invariance: size mismatch");
  }
  const Eigen::Map<const Vec> lv(l.data(), n);
  const double total = lv.sum();
  if (!(total > 0.0)) throw InvalidArgument("check_l_invariance: weights sum to zero");
  const Vec residual = matrix.transpose() * lv - lv;
  return residual.cwiseAbs().maxCoeff() / total;
}

InvarianceEstimate check_l_invariance_mc(const KernelMatrix& q_prime, std::span<const double> l) {
  const auto n = static_cast<Eigen::Index>(l.size());
  if (static_cast<Eigen::Index>(q_prime.size()) != n) {
    throw InvalidArgument("check_l_invariance_mc: size mismatch");
  }
  const Eigen::Map<const Vec> lv(l.data(), n);
  const double total = lv.sum();
  if (!(total > 0.0)) throw InvalidArgument("check_l_invariance_mc: weights sum to zero");
  InvarianceEstimate est;
  // Rows come from independent trials, so variances add across rows.
  const Vec residual = q_prime.matrix.transpose() * lv - lv;
  const Vec variance = q_prime.std_error.cwiseAbs2().transpose() * lv.cwiseAbs2();
  for (Eigen::Index j = 0; j < n; ++j) {
    est.residual.push_back(residual[j] / total);
    est.std_error.push_back(std::sqrt(variance[j]) / total);
  }
  return est;
}

std::vector<BalanceTerm> detailed_balance_terms(const KernelMatrix& q, std::span<const double> l) {
  if (l.size() != q.size()) throw InvalidArgument("detailed_balance_terms: size mismatch");
  const std::vector<std::size_t> neg = negation_index(q);
  std::vector<BalanceTerm> terms;
  terms.reserve(q.size() * q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    for (std::size_t j = 0; j < q.size(); ++j) {
      const double lhs = l[neg[i]] * q.matrix(i, j);
      const double rhs = l[j] * q.matrix(neg[j], neg[i]);
      BalanceTerm t;
      t.from = i;
      t.to = j;
      t.residual = lhs - rhs;
      if (neg[j] != i) {
        t.std_error = std::hypot(l[neg[i]] * q.std_error(i, j), l[j] * q.std_error(neg[j], neg[i]));
      }
      terms.push_back(t);
    }
  }
  return terms;
}

TruncatedMoments truncated_gaussian_moments(double sigma, double a, double b) {
  if (!(sigma > 0.0)) throw InvalidArgument("truncated_gaussian_moments: sigma must be positive");
  if (!(a < b)) throw InvalidArgument("truncated_gaussian_moments: need a < b");
  const double s = std::sqrt(sigma);
  const double alpha = a / s;
  const double beta = b / s;
  const auto phi = [](double z) {
    return std::isfinite(z) ? std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi) : 0.0;
  };
  const auto zphi = [&](double z) { return std::isfinite(z) ? z * phi(z) : 0.0; };
  // Z = Phi(beta) - Phi(alpha), taken from the tail that avoids cancellation.
  double z = 0.0;
  if (alpha > 0.0) {
    z = 0.5 * (std::erfc(alpha / std::numbers::sqrt2) - std::erfc(beta / std::numbers::sqrt2));
  } else if (beta < 0.0) {
    z = 0.5 * (std::erfc(-beta / std::numbers::sqrt2) - std::erfc(-alpha / std::numbers::sqrt2));
  } else {
    z = 1.0 - 0.5 * std::erfc(beta / std::numbers::sqrt2) -
        0.5 * std::erfc(-alpha / std::numbers::sqrt2);
  }
  if (!(z > 0.0)) throw InvalidArgument("truncated_gaussian_moments: interval has no mass");
  const double ratio = (phi(alpha) - phi(beta)) / z;
  TruncatedMoments m;
  m.mass = s * std::sqrt(2.0 * std::numbers::pi) * z;
  m.mean = s * ratio;
  m.variance = sigma * (1.0 + (zphi(alpha) - zphi(beta)) / z - ratio * ratio);
  return m;
}

ReferenceMoments rejection_reference(const PiecewiseTarget& target, const GaussianEnvelope& envelope,
                                     std::size_t accepted, Rng& rng) {
  if (!(envelope.sigma > 0.0) || !(envelope.weight > 0.0)) {
    throw InvalidArgument("rejection_reference: envelope sigma and weight must be positive");
  }
  if (accepted < 2) throw InvalidArgument("rejection_reference: need at least two samples");
  const auto d = static_cast<Eigen::Index>(target.dim());
  const double scale = std::sqrt(envelope.sigma);
  const double log_weight = std::log(envelope.weight);

  ReferenceMoments ref;
  Vec sum = Vec::Zero(d);
  Vec sum_sq = Vec::Zero(d);
  Mat outer = Mat::Zero(d, d);
  std::vector<double> hits(target.num_regions(), 0.0);
  Vec x(d);
  while (ref.accepted < accepted) {
    for (auto& xi : x) xi = scale * rng.normal();
    ++ref.proposed;
    RegionId k;
    try {
      k = target.region_of(x);
    } catch (const BoundaryAmbiguous&) {
      continue;
    }
    const double log_env = log_weight - x.squaredNorm() / (2.0 * envelope.sigma);
    const double log_ratio = target.log_density(k, x) - log_env;
    if (log_ratio > 1e-12) {
      throw EnvelopeViolation("rejection_reference: density exceeds the envelope");
    }
    if (rng.uniform() >= std::exp(log_ratio)) continue;
    ++ref.accepted;
    sum += x;
    sum_sq += x.cwiseAbs2();
    outer.noalias() += x * x.transpose();
    hits[k.value] += 1.0;
  }
  const double n = static_cast<double>(ref.accepted);
  ref.mean = sum / n;
  ref.second_moment = outer / n;
  const Vec var = (sum_sq / n - ref.mean.cwiseAbs2()) * (n / (n - 1.0));
  ref.mean_stderr = (var / n).cwiseSqrt();
  for (const double h : hits) {
    const double p = h / n;
    ref.occupancy.push_back(p);
    ref.occupancy_stderr.push_back(std::sqrt(p * (1.0 - p) / n));
  }
  return ref;
}

}  // namespace pdmp::oracle
