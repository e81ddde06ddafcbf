#include "pdmp/experiment.hpp"
#include "pdmp/kernels.hpp"
#include "pdmp/oracle.hpp"
#include "pdmp/sampler.hpp"
#include "pdmp/target.hpp"
#include "pdmp/velocity.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace pdmp;

namespace {

py::object to_python(const experiment::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

experiment::json from_python(const py::object& obj) {
  const std::string text = py::str(py::module_::import("json").attr("dumps")(obj));
  return experiment::json::parse(text);
}

py::dict skeleton_dict(const TrajectorySkeleton& skel) {
  const auto n = static_cast<Eigen::Index>(skel.breakpoints.size());
  const auto d = static_cast<Eigen::Index>(skel.dim);
  Vec t(n);
  Mat x(n, d);
  Mat v(n, d);
  std::vector<std::string> tags;
  std::vector<std::uint32_t> regions;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& b = skel.breakpoints[static_cast<std::size_t>(i)];
    t[i] = b.t;
    x.row(i) = b.x.transpose();
    v.row(i) = b.v.transpose();
    tags.push_back(to_string(b.tag));
    regions.push_back(b.region.value);
  }
  py::dict out;
  out["t"] = t;
  out["x"] = x;
  out["v"] = v;
  out["tag"] = tags;
  out["region"] = regions;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Event-driven PDMP samplers with boundary kernels for piecewise-smooth targets";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<BoundaryAmbiguous>(m, "BoundaryAmbiguous", base.ptr());
  py::register_exception<DegenerateBoundary>(m, "DegenerateBoundary", base.ptr());
  py::register_exception<NotFinite>(m, "NotFinite", base.ptr());
  py::register_exception<UnsupportedCombination>(m, "UnsupportedCombination", base.ptr());
  py::register_exception<EmptyPositiveCone>(m, "EmptyPositiveCone", base.ptr());
  py::register_exception<NoExit>(m, "NoExit", base.ptr());
  py::register_exception<BoundViolation>(m, "BoundViolation", base.ptr());
  py::register_exception<ZeroGradient>(m, "ZeroGradient", base.ptr());
  py::register_exception<StuckAtBoundary>(m, "StuckAtBoundary", base.ptr());
  py::register_exception<NoEvent>(m, "NoEvent", base.ptr());
  py::register_exception<NotClosedForm>(m, "NotClosedForm", base.ptr());
  py::register_exception<EnvelopeViolation>(m, "EnvelopeViolation", base.ptr());
  py::register_exception<SchemaMismatch>(m, "SchemaMismatch", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def_static("stream", &Rng::stream, py::arg("seed"), py::arg("index"))
      .def("uniform", &Rng::uniform)
      .def("exponential", &Rng::exponential)
      .def("normal", &Rng::normal);

  py::class_<BoundaryPoint>(m, "BoundaryPoint")
      .def_static("make", &BoundaryPoint::make, py::arg("n"), py::arg("pi1"), py::arg("pi2"))
      .def_readonly("x", &BoundaryPoint::x)
      .def_readonly("n", &BoundaryPoint::n)
      .def_property_readonly("k1", [](const BoundaryPoint& b) { return b.k1.value; })
      .def_property_readonly("k2", [](const BoundaryPoint& b) { return b.k2.value; })
      .def_readonly("pi1", &BoundaryPoint::pi1)
      .def_readonly("pi2", &BoundaryPoint::pi2)
      .def_readonly("log_ratio", &BoundaryPoint::log_ratio)
      .def_readonly("facet", &BoundaryPoint::facet);

  py::class_<PiecewiseTarget>(m, "PiecewiseTarget")
      .def_property_readonly("dim", &PiecewiseTarget::dim)
      .def_property_readonly("num_regions", &PiecewiseTarget::num_regions)
      .def_property_readonly("num_facets", [](const PiecewiseTarget& t) { return t.facets().size(); })
      .def("region_of", [](const PiecewiseTarget& t, const Vec& x) { return t.region_of(x).value; })
      .def("first_boundary_hit",
           [](const PiecewiseTarget& t, std::uint32_t k, const Vec& x, const Vec& v) -> py::object {
             const auto hit = t.first_boundary_hit(RegionId(k), x, v);
             if (!hit) return py::none();
             return py::make_tuple(hit->t, hit->facet);
           })
      .def("classify_hit", &PiecewiseTarget::classify_hit, py::arg("facet"), py::arg("x"))
      .def("log_density", [](const PiecewiseTarget& t, std::uint32_t k, const Vec& x) {
        return t.log_density(RegionId(k), x);
      })
      .def("density", &PiecewiseTarget::density);

  m.def(
      "make_cube_target",
      [](std::size_t dim, double sigma_in, double sigma_out, double alpha_in, double alpha_out) {
        return make_cube_target(dim, CubeGaussian{sigma_in, sigma_out, alpha_in, alpha_out});
      },
      py::arg("dim"), py::arg("sigma_in") = 1.0, py::arg("sigma_out") = 1.0,
      py::arg("alpha_in") = 1.0, py::arg("alpha_out") = 0.0);

  py::class_<Basis>(m, "Basis")
      .def_static("canonical", &Basis::canonical)
      .def_static("random_rotation", &Basis::random_rotation, py::arg("dim"), py::arg("seed"))
      .def_static("from_matrix", &Basis::from_matrix)
      .def_property_readonly("matrix", &Basis::matrix);

  py::class_<VelocitySpace>(m, "VelocitySpace")
      .def_static("unit_sphere", &VelocitySpace::unit_sphere)
      .def_static("iso_gaussian", &VelocitySpace::iso_gaussian)
      .def_static("signed_hypercube", &VelocitySpace::signed_hypercube)
      .def_static("coordinate_axes", &VelocitySpace::coordinate_axes)
      .def_property_readonly("kind", [](const VelocitySpace& s) { return to_string(s.kind()); })
      .def_property_readonly("dim", &VelocitySpace::dim)
      .def_property_readonly("is_finite", &VelocitySpace::is_finite)
      .def("probability", &VelocitySpace::probability)
      .def("sample", &VelocitySpace::sample)
      .def("refresh", &VelocitySpace::refresh)
      .def("enumerate", &VelocitySpace::enumerate)
      .def("split_by_normal", [](const VelocitySpace& s, const Vec& n) {
        const VelocitySplit sp = s.split_by_normal(n);
        return py::make_tuple(sp.plus, sp.minus, sp.tangent);
      });

  py::class_<BoundaryKernel>(m, "BoundaryKernel")
      .def_static("flip", &BoundaryKernel::flip)
      .def_static("limit", &BoundaryKernel::limit)
      .def_static("metropolis_hastings", &BoundaryKernel::metropolis_hastings)
      .def_static("parse", &BoundaryKernel::parse)
      .def("__str__", &BoundaryKernel::to_string)
      .def("__repr__", [](const BoundaryKernel& k) { return "BoundaryKernel('" + k.to_string() + "')"; });

  m.def("l_density", &l_density, py::arg("bp"), py::arg("space"), py::arg("v"));
  m.def(
      "apply_kernel",
      [](const BoundaryKernel& k, const std::string& sampler, const BoundaryPoint& bp,
         const VelocitySpace& s, const Vec& v, Rng& rng) {
        return apply(k, parse_dynamics(sampler), bp, s, v, rng);
      },
      py::arg("kernel"), py::arg("sampler"), py::arg("bp"), py::arg("space"), py::arg("v_in"),
      py::arg("rng"));
  m.def(
      "zz_exit_time",
      [](const std::vector<double>& tau, const std::vector<double>& v, const std::vector<double>& n,
         double c) {
        const ZzBoundaryOutcome o = zz_exit_time(tau, v, n, c);
        return py::make_tuple(
            o.v_out, o.exit == ZzBoundaryOutcome::Exit::PassThrough ? "pass" : "bounce", o.t_star);
      },
      py::arg("tau"), py::arg("v"), py::arg("n"), py::arg("log_ratio"));

  m.def("affine_event_time", &affine_event_time, py::arg("a"), py::arg("b"), py::arg("rng"));

  m.def(
      "simulate",
      [](const PiecewiseTarget& target, const std::string& sampler, double refresh_rate,
         const VelocitySpace& space, const BoundaryKernel& kernel, const Vec& x0, const Vec& v0,
         std::optional<double> max_time, std::optional<std::size_t> max_events, Rng& rng) {
        const Dynamics dyn = parse_dynamics(sampler);
        const SamplerKind kind = dyn == Dynamics::Bps        ? SamplerKind::bps(refresh_rate)
                                 : dyn == Dynamics::ZigZag ? SamplerKind::zigzag()
                                                           : SamplerKind::coordinate(refresh_rate);
        const State s0{target.region_of(x0), x0, v0, 0.0};
        const TrajectorySkeleton skel =
            simulate(target, kind, space, kernel, s0, StopCondition{max_time, max_events}, rng);
        py::dict out = skeleton_dict(skel);
        const PathMoments pm = path_moments(skel);
        out["mean"] = pm.mean;
        out["second_moment"] = pm.second_moment;
        out["occupancy"] = pm.occupancy;
        out["total_time"] = pm.total_time;
        out["issues"] = validate_skeleton(skel, target);
        return out;
      },
      py::arg("target"), py::arg("sampler"), py::arg("refresh_rate"), py::arg("space"),
      py::arg("kernel"), py::arg("x0"), py::arg("v0"), py::arg("max_time") = std::nullopt,
      py::arg("max_events") = std::nullopt, py::arg("rng"));

  auto oracle = m.def_submodule("oracle", "Reference computations");
  oracle.def(
      "kernel_matrix_exact",
      [](const BoundaryKernel& k, const std::string& sampler, const BoundaryPoint& bp,
         const VelocitySpace& s) {
        const auto q = oracle::kernel_matrix_exact(k, parse_dynamics(sampler), bp, s);
        return py::make_tuple(q.atoms, q.matrix);
      });
  oracle.def("l_weights", [](const BoundaryPoint& bp, const std::vector<Vec>& atoms) {
    return oracle::l_weights(bp, atoms);
  });
  oracle.def(
      "invariance_residual",
      [](const BoundaryKernel& k, const std::string& sampler, const BoundaryPoint& bp,
         const VelocitySpace& s) {
        const auto q = oracle::flip_compose(oracle::kernel_matrix_exact(k, parse_dynamics(sampler), bp, s));
        const auto l = oracle::l_weights(bp, q.atoms);
        return oracle::check_l_invariance(q.matrix, l);
      });
  oracle.def("truncated_gaussian_moments", [](double sigma, double a, double b) {
    const auto t = oracle::truncated_gaussian_moments(sigma, a, b);
    return py::make_tuple(t.mass, t.mean, t.variance);
  });

  auto ex = m.def_submodule("experiment", "Cube-target experiment runner");
  ex.def(
      "run",
      [](const py::object& config) {
        const auto cfg = experiment::ExperimentConfig::from_json(from_python(config));
        return to_python(experiment::run(cfg).summary);
      },
      py::arg("config"));
  ex.def("summarize", [](const std::vector<std::string>& paths) {
    return to_python(experiment::summarize(paths));
  });
}
