#include "pdmp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pdmp {

BoundaryKernel BoundaryKernel::metropolis_hastings(int iters) {
  if (iters < 1) throw InvalidArgument("metropolis_hastings: iters must be >= 1");
  return BoundaryKernel(MetropolisHastings{iters});
}

BoundaryKernel BoundaryKernel::parse(const std::string& text) {
  if (text == "flip") return flip();
  if (text == "limit") return limit();
  if (text.rfind("mh:", 0) == 0) {
    const std::string rest = text.substr(3);
    std::size_t used = 0;
    int iters = 0;
    try {
      iters = std::stoi(rest, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != rest.size() || rest.empty()) {
      throw InvalidArgument("kernel: bad iteration count in '" + text + "'");
    }
    return metropolis_hastings(iters);
  }
  throw InvalidArgument("kernel: expected flip, limit or mh:<iters>, got '" + text + "'");
}

int BoundaryKernel::mh_iters() const {
  if (const auto* mh = std::get_if<MetropolisHastings>(&policy_)) return mh->iters;
  return 0;
}

std::string BoundaryKernel::to_string() const {
  if (is_flip()) return "flip";
  if (is_limit()) return "limit";
  return "mh:" + std::to_string(mh_iters());
}

double l_weight(const BoundaryPoint& bp, const Vec& v, double p_v) {
  const double dot = bp.n.dot(v);
  if (std::abs(dot) < kTangentTol) return 0.0;
  return std::abs(dot) * p_v * (dot > 0.0 ? bp.pi2 : bp.pi1);
}

double l_density(const BoundaryPoint& bp, const VelocitySpace& space, const Vec& v) {
  return l_weight(bp, v, space.probability(v));
}

Vec reflect(const Vec& v, const Vec& n) { return v - 2.0 * n.dot(v) * n; }

double mh_acceptance(double l_from, double l_to) {
  if (l_from <= 0.0) return l_to > 0.0 ? 1.0 : 0.0;
  return std::min(1.0, l_to / l_from);
}

namespace {

// |<n,v>| times the density on the side v points to. Equals l(v)/p(v), which
// is the acceptance weight for every proposal used below: uniform proposals
// on finite sets and the sphere cancel p, and the Gaussian independence
// proposal q = p cancels it too.
double side_weight(const BoundaryPoint& bp, double dot) {
  if (std::abs(dot) < kTangentTol) return 0.0;
  return std::abs(dot) * (dot > 0.0 ? bp.pi2 : bp.pi1);
}

bool mh_accept(double w_from, double w_to, Rng& rng) {
  const double a = mh_acceptance(w_from, w_to);
  if (a >= 1.0) return true;
  if (a <= 0.0) return false;
  return rng.uniform() < a;
}

Vec mh_chain(const BoundaryPoint& bp, const VelocitySpace& space, const Vec& start, int iters,
             Rng& rng) {
  const Basis& basis = space.basis();
  switch (space.kind()) {
    case VelocitySpace::Kind::SignedHypercube: {
      const Vec nb = basis.to_basis(bp.n);
      Vec s = space.hypercube_signs(start);
      double w = side_weight(bp, nb.dot(s));
      Vec prop(s.size());
      for (int it = 0; it < iters; ++it) {
        for (auto& p : prop) p = rng.coin() ? 1.0 : -1.0;
        const double w_prop = side_weight(bp, nb.dot(prop));
        if (mh_accept(w, w_prop, rng)) {
          s = prop;
          w = w_prop;
        }
      }
      return basis.from_basis(s);
    }
    case VelocitySpace::Kind::CoordinateAxes: {
      const Vec nb = basis.to_basis(bp.n);
      const std::size_t d = space.dim();
      auto [axis, sign] = space.axis_of(start);
      double w = side_weight(bp, sign * nb[static_cast<Eigen::Index>(axis)]);
      for (int it = 0; it < iters; ++it) {
        const std::size_t j = rng.index(2 * d);
        const std::size_t p_axis = j % d;
        const double p_sign = j < d ? 1.0 : -1.0;
        const double w_prop = side_weight(bp, p_sign * nb[static_cast<Eigen::Index>(p_axis)]);
        if (mh_accept(w, w_prop, rng)) {
          axis = p_axis;
          sign = p_sign;
          w = w_prop;
        }
      }
      return sign * basis.column(axis);
    }
    case VelocitySpace::Kind::UnitSphere:
    case VelocitySpace::Kind::IsoGaussian: {
      Vec v = start;
      double w = side_weight(bp, bp.n.dot(v));
      for (int it = 0; it < iters; ++it) {
        Vec prop = space.sample(rng);
        const double w_prop = side_weight(bp, bp.n.dot(prop));
        if (mh_accept(w, w_prop, rng)) {
          v = std::move(prop);
          w = w_prop;
        }
      }
      return v;
    }
  }
  return start;
}

// Pass through the discontinuity iff an Exp(1) clock outlasts log(pi2/pi1).
bool passes(const BoundaryPoint& bp, Rng& rng) { return rng.exponential() >= bp.log_ratio; }

}  // namespace

Vec mh_step(const BoundaryPoint& bp, const VelocitySpace& space, const Vec& v, Rng& rng) {
  return mh_chain(bp, space, v, 1, rng);
}

Vec limit_bps(const BoundaryPoint& bp, const Vec& v, Rng& rng) {
  const double dot = bp.n.dot(v);
  if (dot > -kTangentTol) return v;
  return passes(bp, rng) ? v : reflect(v, bp.n);
}

namespace {

struct PositiveCone {
  std::vector<Vec> atoms;
  std::vector<long double> weights;
  long double total = 0.0L;
};

PositiveCone positive_cone(const BoundaryPoint& bp, const VelocitySpace& space) {
  const Vec nb = space.basis().to_basis(bp.n);
  PositiveCone cone;
  for (Eigen::Index i = 0; i < nb.size(); ++i) {
    if (std::abs(nb[i]) < kTangentTol) continue;
    const double sign = nb[i] > 0.0 ? 1.0 : -1.0;
    cone.atoms.emplace_back(sign * space.basis().column(static_cast<std::size_t>(i)));
    cone.weights.push_back(static_cast<long double>(std::abs(nb[i])));
    cone.total += cone.weights.back();
  }
  if (cone.atoms.empty()) throw EmptyPositiveCone("limit_cs: no velocity points into k2");
  return cone;
}

void require_coordinate_axes(const VelocitySpace& space, const char* who) {
  if (space.kind() != VelocitySpace::Kind::CoordinateAxes) {
    throw UnsupportedCombination(std::string(who) + ": needs a CoordinateAxes velocity space");
  }
}

}  // namespace

Vec limit_cs(const BoundaryPoint& bp, const VelocitySpace& space, const Vec& v, Rng& rng) {
  require_coordinate_axes(space, "limit_cs");
  const double dot = bp.n.dot(v);
  if (dot > -kTangentTol) return v;
  if (passes(bp, rng)) return v;
  const PositiveCone cone = positive_cone(bp, space);
  if (cone.atoms.size() == 1) return cone.atoms.front();
  const long double u = static_cast<long double>(rng.uniform()) * cone.total;
  long double acc = 0.0L;
  for (std::size_t i = 0; i + 1 < cone.atoms.size(); ++i) {
    acc += cone.weights[i];
    if (u < acc) return cone.atoms[i];
  }
  return cone.atoms.back();
}

ZzBoundaryOutcome zz_exit_time(std::span<const double> tau, std::span<const double> v,
                               std::span<const double> n, double log_ratio) {
  const std::size_t d = v.size();
  if (tau.size() != d || n.size() != d) throw InvalidArgument("zz_exit_time: size mismatch");
  double slope = 0.0;
  for (std::size_t i = 0; i < d; ++i) slope += v[i] * n[i];
  if (std::abs(slope) < kTangentTol) throw NoExit("zz_exit_time: tangent entry");
  const bool from_heavy = slope < 0.0;
  const double c = log_ratio;

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < d; ++i) {
    if (std::isfinite(tau[i])) {
      if (!(tau[i] > 0.0)) throw InvalidArgument("zz_exit_time: flip times must be positive");
      order.push_back(i);
    }
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return tau[a] < tau[b] || (tau[a] == tau[b] && a < b);
  });

  ZzBoundaryOutcome out;
  out.v_out = Vec(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) out.v_out[static_cast<Eigen::Index>(i)] = v[i];

  double t = 0.0;
  double h = 0.0;
  for (std::size_t k = 0;; ++k) {
    const double t_next = k < order.size() ? tau[order[k]] : kInf;
    if (slope < 0.0 && from_heavy && std::isfinite(c)) {
      const double tc = t + (-c - h) / slope;
      if (tc <= t_next) {
        out.exit = ZzBoundaryOutcome::Exit::PassThrough;
        out.t_star = tc;
        return out;
      }
    } else if (slope > 0.0) {
      const double level = from_heavy ? 0.0 : c;
      const double tc = std::isfinite(level) ? t + (level - h) / slope : kInf;
      if (tc <= t_next) {
        out.exit = from_heavy ? ZzBoundaryOutcome::Exit::BounceBack
                              : ZzBoundaryOutcome::Exit::PassThrough;
        out.t_star = tc;
        return out;
      }
    }
    if (k >= order.size()) throw NoExit("zz_exit_time: no threshold is ever reached");
    h += slope * (t_next - t);
    t = t_next;
    const std::size_t j = order[k];
    slope -= 2.0 * v[j] * n[j];
    out.v_out[static_cast<Eigen::Index>(j)] = -v[j];
  }
}

Vec limit_zz(const BoundaryPoint& bp, const VelocitySpace& space, const Vec& v, Rng& rng) {
  if (space.kind() != VelocitySpace::Kind::SignedHypercube) {
    throw UnsupportedCombination("limit_zz: needs a SignedHypercube velocity space");
  }
  if (std::abs(bp.n.dot(v)) < kTangentTol) return v;
  const Vec s = space.hypercube_signs(v);
  const Vec nb = space.basis().to_basis(bp.n);
  std::vector<double> tau(static_cast<std::size_t>(s.size()), kInf);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double rate = std::max(-nb[i] * s[i], 0.0);
    if (rate > 0.0) tau[static_cast<std::size_t>(i)] = rng.exponential() / rate;
  }
  const ZzBoundaryOutcome out =
      zz_exit_time(tau, std::span<const double>(s.data(), static_cast<std::size_t>(s.size())),
                   std::span<const double>(nb.data(), static_cast<std::size_t>(nb.size())),
                   bp.log_ratio);
  return space.basis().from_basis(out.v_out);
}

Vec apply(const BoundaryKernel& kernel, Dynamics dynamics, const BoundaryPoint& bp,
          const VelocitySpace& space, const Vec& v_in, Rng& rng) {
  if (kernel.is_flip()) return -v_in;
  if (kernel.is_mh()) return mh_chain(bp, space, -v_in, kernel.mh_iters(), rng);
  switch (dynamics) {
    case Dynamics::Bps:
      if (space.is_finite()) {
        throw UnsupportedCombination("limit kernel: BPS needs a spherically symmetric velocity law");
      }
      return limit_bps(bp, v_in, rng);
    case Dynamics::Coordinate:
      require_coordinate_axes(space, "limit kernel");
      return limit_cs(bp, space, v_in, rng);
    case Dynamics::ZigZag:
      return limit_zz(bp, space, v_in, rng);
  }
  return v_in;
}

std::vector<Branch> limit_bps_branches(const BoundaryPoint& bp, const Vec& v) {
  if (bp.n.dot(v) > -kTangentTol) return {{v, 1.0}};
  const double pass = bp.pass_probability();
  return {{v, pass}, {reflect(v, bp.n), 1.0 - pass}};
}

std::vector<Branch> limit_cs_branches(const BoundaryPoint& bp, const VelocitySpace& space,
                                      const Vec& v) {
  require_coordinate_axes(space, "limit_cs_branches");
  if (bp.n.dot(v) > -kTangentTol) return {{v, 1.0}};
  const double pass = bp.pass_probability();
  std::vector<Branch> out{{v, pass}};
  const PositiveCone cone = positive_cone(bp, space);
  for (std::size_t i = 0; i < cone.atoms.size(); ++i) {
    out.push_back({cone.atoms[i],
                   static_cast<double>((1.0L - pass) * cone.weights[i] / cone.total)});
  }
  return out;
}

}  // namespace pdmp
