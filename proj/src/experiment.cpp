#include "pdmp/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

namespace pdmp::experiment {

namespace {

const std::vector<std::string> kRegionNames{"inside", "outside"};

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  std::uint64_t value = 0;
  try {
    if (!text.empty() && text[0] == '-') throw std::invalid_argument("negative");
    value = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = std::string::npos;
  }
  if (text.empty() || used != text.size()) throw ConfigError("bad " + what + " '" + text + "'");
  return value;
}

double parse_real(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = std::string::npos;
  }
  if (text.empty() || used != text.size()) throw ConfigError("bad " + what + " '" + text + "'");
  return value;
}

std::string chain_path(const std::string& pattern, std::size_t index, std::size_t chains) {
  if (pattern.empty()) return pattern;
  const std::string token = "{chain}";
  if (const auto pos = pattern.find(token); pos != std::string::npos) {
    std::string out = pattern;
    out.replace(pos, token.size(), std::to_string(index));
    return out;
  }
  if (chains == 1) return pattern;
  const auto slash = pattern.find_last_of('/');
  const auto dot = pattern.find_last_of('.');
  const std::string tag = ".chain" + std::to_string(index);
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return pattern + tag;
  return pattern.substr(0, dot) + tag + pattern.substr(dot);
}

template <typename Fn>
void write_file(const std::string& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  fn(out);
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (const double x : v) a.push_back(x);
  return a;
}

json mat_json(const Mat& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i).transpose()));
  return a;
}

// Cube membership of the midpoint of each segment; zero-length segments
// inherit the previous region.
void recover_cube_regions(TrajectorySkeleton& skel) {
  auto& bps = skel.breakpoints;
  RegionId last = kInside;
  for (std::size_t i = 0; i < bps.size(); ++i) {
    if (i + 1 < bps.size() && bps[i + 1].t > bps[i].t) {
      const Vec mid = 0.5 * (bps[i].x + bps[i + 1].x);
      last = mid.cwiseAbs().maxCoeff() < 1.0 ? kInside : kOutside;
    }
    bps[i].region = last;
  }
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

BasisSpec BasisSpec::parse(const std::string& text) {
  if (text == "canonical") return {};
  const std::string prefix = "rotated:";
  if (text.rfind(prefix, 0) == 0) {
    return {true, parse_u64(text.substr(prefix.size()), "rotation seed")};
  }
  throw ConfigError("basis: expected canonical or rotated:<seed>, got '" + text + "'");
}

std::string BasisSpec::to_string() const {
  return rotated ? "rotated:" + std::to_string(seed) : "canonical";
}

StopCondition parse_horizon(const std::string& text) {
  if (text.rfind("time:", 0) == 0) {
    const double t = parse_real(text.substr(5), "horizon time");
    if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("horizon time must be positive");
    return StopCondition::time(t);
  }
  if (text.rfind("events:", 0) == 0) {
    return StopCondition::events(parse_u64(text.substr(7), "horizon event count"));
  }
  throw ConfigError("horizon: expected time:<T> or events:<N>, got '" + text + "'");
}

std::string horizon_to_string(const StopCondition& stop) {
  if (stop.max_time) return "time:" + format_double(*stop.max_time);
  return "events:" + std::to_string(stop.max_events.value_or(0));
}

void ExperimentConfig::validate() const {
  const auto positive = [](double x) { return x > 0.0 && std::isfinite(x); };
  const auto nonnegative = [](double x) { return x >= 0.0 && std::isfinite(x); };
  if (dim == 0) throw ConfigError("dim must be positive");
  if (!positive(sigma_in) || !positive(sigma_out)) throw ConfigError("sigmas must be positive");
  if (!nonnegative(alpha_in) || !nonnegative(alpha_out)) {
    throw ConfigError("alphas must be nonnegative");
  }
  if (!(alpha_in + alpha_out > 0.0)) throw ConfigError("alpha_in + alpha_out must be positive");
  if (!nonnegative(refresh_rate)) throw ConfigError("refresh_rate must be nonnegative");
  if (chains == 0) throw ConfigError("chains must be positive");
  if (bps_velocity != "sphere" && bps_velocity != "gaussian") {
    throw ConfigError("bps_velocity must be sphere or gaussian");
  }
  if (!horizon.max_time.has_value() && !horizon.max_events.has_value()) {
    throw ConfigError("horizon is not set");
  }
}

json ExperimentConfig::to_json() const {
  return json{{"dim", dim},
              {"sigma_in", sigma_in},
              {"sigma_out", sigma_out},
              {"alpha_in", alpha_in},
              {"alpha_out", alpha_out},
              {"sampler", pdmp::to_string(sampler)},
              {"refresh_rate", refresh_rate},
              {"kernel", kernel.to_string()},
              {"basis", basis.to_string()},
              {"bps_velocity", bps_velocity},
              {"horizon", horizon_to_string(horizon)},
              {"chains", chains},
              {"seed", seed},
              {"csv", csv_path},
              {"json", json_path},
              {"svg", svg_path},
              {"record_timing", record_timing}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "dim") {
        c.dim = value.get<std::size_t>();
      } else if (key == "sigma_in") {
        c.sigma_in = value.get<double>();
      } else if (key == "sigma_out") {
        c.sigma_out = value.get<double>();
      } else if (key == "alpha_in") {
        c.alpha_in = value.get<double>();
      } else if (key == "alpha_out") {
        c.alpha_out = value.get<double>();
      } else if (key == "sampler") {
        c.sampler = parse_dynamics(value.get<std::string>());
      } else if (key == "refresh_rate") {
        c.refresh_rate = value.get<double>();
      } else if (key == "kernel") {
        c.kernel = BoundaryKernel::parse(value.get<std::string>());
      } else if (key == "basis") {
        c.basis = BasisSpec::parse(value.get<std::string>());
      } else if (key == "bps_velocity") {
        c.bps_velocity = value.get<std::string>();
      } else if (key == "horizon") {
        c.horizon = parse_horizon(value.get<std::string>());
      } else if (key == "chains") {
        c.chains = value.get<std::size_t>();
      } else if (key == "seed") {
        c.seed = value.get<std::uint64_t>();
      } else if (key == "csv") {
        c.csv_path = value.get<std::string>();
      } else if (key == "json") {
        c.json_path = value.get<std::string>();
      } else if (key == "svg") {
        c.svg_path = value.get<std::string>();
      } else if (key == "record_timing") {
        c.record_timing = value.get<bool>();
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

PiecewiseTarget build_target(const ExperimentConfig& config) {
  return make_cube_target(config.dim, CubeGaussian{config.sigma_in, config.sigma_out,
                                                   config.alpha_in, config.alpha_out});
}

VelocitySpace build_velocity_space(const ExperimentConfig& config) {
  const auto basis = [&] {
    return config.basis.rotated ? Basis::random_rotation(config.dim, config.basis.seed)
                                : Basis::canonical(config.dim);
  };
  switch (config.sampler) {
    case Dynamics::Bps:
      return config.bps_velocity == "gaussian" ? VelocitySpace::iso_gaussian(config.dim)
                                               : VelocitySpace::unit_sphere(config.dim);
    case Dynamics::ZigZag:
      return VelocitySpace::signed_hypercube(basis());
    case Dynamics::Coordinate:
      return VelocitySpace::coordinate_axes(basis());
  }
  throw ConfigError("unknown sampler");
}

SamplerKind build_sampler_kind(const ExperimentConfig& config) {
  switch (config.sampler) {
    case Dynamics::Bps:
      return SamplerKind::bps(config.refresh_rate);
    case Dynamics::ZigZag:
      return SamplerKind::zigzag();
    case Dynamics::Coordinate:
      return SamplerKind::coordinate(config.refresh_rate);
  }
  throw ConfigError("unknown sampler");
}

State initial_state(const ExperimentConfig& config, const VelocitySpace& space, Rng& rng) {
  State s;
  s.x = Vec::Zero(static_cast<Eigen::Index>(config.dim));
  s.k = kInside;
  if (!(config.alpha_in > 0.0)) {
    s.x[0] = 1.5;
    s.k = kOutside;
  }
  s.v = space.sample(rng);
  return s;
}

std::string chain_csv_path(const ExperimentConfig& config, std::size_t index) {
  return chain_path(config.csv_path, index, config.chains);
}

json chain_summary(const TrajectorySkeleton& skel, const std::vector<std::string>& region_names) {
  const PathMoments m = path_moments(skel);
  json occupancy = json::object();
  for (std::size_t k = 0; k < m.occupancy.size(); ++k) {
    occupancy[k < region_names.size() ? region_names[k] : std::to_string(k)] = m.occupancy[k];
  }
  json events = json::object();
  std::size_t total = 0;
  for (const EventTag tag : {EventTag::Bounce, EventTag::Refresh, EventTag::Boundary}) {
    events[to_string(tag)] = skel.count(tag);
    total += skel.count(tag);
  }
  events["total"] = total;
  return json{{"total_time", m.total_time},
              {"breakpoints", skel.breakpoints.size()},
              {"mean", vec_json(m.mean)},
              {"second_moment", mat_json(m.second_moment)},
              {"variance", vec_json(m.variance())},
              {"occupancy", occupancy},
              {"events", events},
              {"boundary_hit_rate",
               static_cast<double>(skel.count(EventTag::Boundary)) / m.total_time},
              {"wall_clock_sec", nullptr},
              {"events_per_sec", nullptr}};
}

json pool(const json& per_chain) {
  if (!per_chain.is_array() || per_chain.empty()) throw InvalidArgument("pool: no chains");
  const std::size_t d = per_chain[0]["mean"].size();
  const std::size_t chains = per_chain.size();
  double total_time = 0.0;
  Vec mean = Vec::Zero(static_cast<Eigen::Index>(d));
  Mat second = Mat::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  json occupancy = json::object();
  json events = json::object();
  bool timed = true;
  double wall = 0.0;
  for (const auto& c : per_chain) {
    if (c["mean"].size() != d) throw SchemaMismatch("pool: chains have different dimensions");
    const double t = c["total_time"].get<double>();
    total_time += t;
    for (std::size_t i = 0; i < d; ++i) {
      mean[static_cast<Eigen::Index>(i)] += t * c["mean"][i].get<double>();
      for (std::size_t j = 0; j < d; ++j) {
        second(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
            t * c["second_moment"][i][j].get<double>();
      }
    }
    for (const auto& [name, value] : c["occupancy"].items()) {
      occupancy[name] = occupancy.value(name, 0.0) + t * value.get<double>();
    }
    for (const auto& [name, value] : c["events"].items()) {
      events[name] = events.value(name, std::size_t{0}) + value.get<std::size_t>();
    }
    if (c["wall_clock_sec"].is_number()) {
      wall += c["wall_clock_sec"].get<double>();
    } else {
      timed = false;
    }
  }
  mean /= total_time;
  second /= total_time;
  for (auto& [name, value] : occupancy.items()) value = value.get<double>() / total_time;

  json spread = nullptr;
  json spread_se = nullptr;
  if (chains > 1) {
    Vec s2 = Vec::Zero(static_cast<Eigen::Index>(d));
    Vec avg = Vec::Zero(static_cast<Eigen::Index>(d));
    for (const auto& c : per_chain) {
      for (std::size_t i = 0; i < d; ++i) avg[static_cast<Eigen::Index>(i)] += c["mean"][i].get<double>();
    }
    avg /= static_cast<double>(chains);
    for (const auto& c : per_chain) {
      for (std::size_t i = 0; i < d; ++i) {
        const double diff = c["mean"][i].get<double>() - avg[static_cast<Eigen::Index>(i)];
        s2[static_cast<Eigen::Index>(i)] += diff * diff;
      }
    }
    const Vec sd = (s2 / static_cast<double>(chains - 1)).cwiseSqrt();
    spread = vec_json(sd);
    spread_se = vec_json(sd / std::sqrt(static_cast<double>(chains)));
  }
  const Vec variance = second.diagonal() - mean.cwiseAbs2();
  const auto boundary = events.value("boundary", std::size_t{0});
  const auto total_events = events.value("total", std::size_t{0});
  return json{{"chains", chains},
              {"total_time", total_time},
              {"mean", vec_json(mean)},
              {"second_moment", mat_json(second)},
              {"variance", vec_json(variance)},
              {"occupancy", occupancy},
              {"events", events},
              {"boundary_hit_rate", static_cast<double>(boundary) / total_time},
              {"between_chain_mean_sd", spread},
              {"between_chain_mean_se", spread_se},
              {"wall_clock_sec", timed ? json(wall) : json(nullptr)},
              {"events_per_sec",
               timed && wall > 0.0 ? json(static_cast<double>(total_events) / wall) : json(nullptr)}};
}

void write_skeleton_csv(std::ostream& out, const TrajectorySkeleton& skel) {
  out << "t,tag";
  for (std::size_t i = 1; i <= skel.dim; ++i) out << ",x" << i;
  for (std::size_t i = 1; i <= skel.dim; ++i) out << ",v" << i;
  out << '\n';
  std::string line;
  for (const auto& b : skel.breakpoints) {
    line = format_double(b.t);
    line += ',';
    line += to_string(b.tag);
    for (const double xi : b.x) {
      line += ',';
      line += format_double(xi);
    }
    for (const double vi : b.v) {
      line += ',';
      line += format_double(vi);
    }
    line += '\n';
    out << line;
  }
}

TrajectorySkeleton read_skeleton_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw SchemaMismatch("skeleton CSV is empty");
  std::vector<std::string> cols;
  {
    std::stringstream ss(header);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
  }
  if (cols.size() < 4 || (cols.size() - 2) % 2 != 0 || cols[0] != "t" || cols[1] != "tag") {
    throw SchemaMismatch("skeleton CSV header must be t,tag,x1..xd,v1..vd");
  }
  const std::size_t d = (cols.size() - 2) / 2;
  for (std::size_t i = 0; i < d; ++i) {
    if (cols[2 + i] != "x" + std::to_string(i + 1) ||
        cols[2 + d + i] != "v" + std::to_string(i + 1)) {
      throw SchemaMismatch("skeleton CSV header must be t,tag,x1..xd,v1..vd");
    }
  }
  TrajectorySkeleton skel;
  skel.dim = d;
  skel.num_regions = kRegionNames.size();
  std::string line;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    Breakpoint b;
    b.x.resize(static_cast<Eigen::Index>(d));
    b.v.resize(static_cast<Eigen::Index>(d));
    std::size_t field = 0;
    std::size_t start = 0;
    const auto bad = [&] { return SchemaMismatch("skeleton CSV: malformed row " + std::to_string(row)); };
    while (start <= line.size()) {
      const auto comma = line.find(',', start);
      const std::string cell =
          line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (field == 1) {
        try {
          b.tag = parse_event_tag(cell);
        } catch (const InvalidArgument&) {
          throw bad();
        }
      } else {
        char* end = nullptr;
        const double value = std::strtod(cell.c_str(), &end);
        if (cell.empty() || end != cell.c_str() + cell.size()) throw bad();
        if (field == 0) {
          b.t = value;
        } else if (field < 2 + d) {
          b.x[static_cast<Eigen::Index>(field - 2)] = value;
        } else if (field < 2 + 2 * d) {
          b.v[static_cast<Eigen::Index>(field - 2 - d)] = value;
        } else {
          throw bad();
        }
      }
      ++field;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (field != 2 + 2 * d) throw bad();
    ++skel.event_counts[static_cast<std::size_t>(b.tag)];
    skel.breakpoints.push_back(std::move(b));
  }
  return skel;
}

json summarize(const std::vector<std::string>& csv_paths) {
  if (csv_paths.empty()) throw InvalidArgument("summarize: no CSV files");
  json per_chain = json::array();
  std::size_t dim = 0;
  for (const auto& path : csv_paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    TrajectorySkeleton skel = read_skeleton_csv(in);
    if (dim != 0 && skel.dim != dim) {
      throw SchemaMismatch("summarize: '" + path + "' has a different dimension");
    }
    dim = skel.dim;
    recover_cube_regions(skel);
    per_chain.push_back(chain_summary(skel, kRegionNames));
  }
  return json{{"per_chain", per_chain}, {"pooled", pool(per_chain)}};
}

void write_svg(std::ostream& out, const TrajectorySkeleton& skel, const std::string& title) {
  constexpr double kSize = 800.0;
  constexpr double kHalfWidth = 1.5;
  const auto px = [](double x) { return (x + kHalfWidth) / (2.0 * kHalfWidth) * kSize; };
  const auto py = [](double y) { return (kHalfWidth - y) / (2.0 * kHalfWidth) * kSize; };
  const auto coord = [&](const Vec& x) {
    const double x2 = x.size() > 1 ? x[1] : 0.0;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f,%.3f", px(x[0]), py(x2));
    return std::string(buf);
  };
  const auto color = [](EventTag tag) {
    switch (tag) {
      case EventTag::Bounce:
        return "#d62728";
      case EventTag::Refresh:
        return "#2ca02c";
      case EventTag::Boundary:
        return "#1f77b4";
      default:
        return "#000000";
    }
  };
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" "
         "viewBox=\"0 0 800 800\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"800\" fill=\"#ffffff\"/>\n";
  out << "<rect x=\"" << px(-1.0) << "\" y=\"" << py(1.0) << "\" width=\"" << px(1.0) - px(-1.0)
      << "\" height=\"" << py(-1.0) - py(1.0)
      << "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"2\"/>\n";
  out << "<polyline fill=\"none\" stroke=\"#555555\" stroke-width=\"0.6\" points=\"";
  for (std::size_t i = 0; i < skel.breakpoints.size(); ++i) {
    if (i > 0) out << ' ';
    out << coord(skel.breakpoints[i].x);
  }
  out << "\"/>\n";
  for (const auto& b : skel.breakpoints) {
    const std::string c = coord(b.x);
    const auto comma = c.find(',');
    out << "<circle cx=\"" << c.substr(0, comma) << "\" cy=\"" << c.substr(comma + 1)
        << "\" r=\"2\" fill=\"" << color(b.tag) << "\"/>\n";
  }
  std::string escaped;
  for (const char ch : title) {
    switch (ch) {
      case '<':
        escaped += "&lt;";
        break;
      case '>':
        escaped += "&gt;";
        break;
      case '&':
        escaped += "&amp;";
        break;
      default:
        escaped += ch;
    }
  }
  out << "<text x=\"10\" y=\"24\" font-family=\"monospace\" font-size=\"16\">" << escaped
      << "</text>\n</svg>\n";
}

RunResult run(const ExperimentConfig& config) {
  config.validate();
  const PiecewiseTarget target = build_target(config);
  const VelocitySpace space = build_velocity_space(config);
  const SamplerKind kind = build_sampler_kind(config);
  const BoundaryKernel kernel = config.kernel;
  if (kernel.is_limit() && config.sampler == Dynamics::Bps && space.is_finite()) {
    throw UnsupportedCombination("limit kernel: BPS needs a spherically symmetric velocity law");
  }

  RunResult result;
  result.skeletons.resize(config.chains);
  std::vector<double> wall(config.chains, 0.0);
  std::vector<std::exception_ptr> errors(config.chains);
  std::vector<std::thread> workers;
  workers.reserve(config.chains);
  for (std::size_t c = 0; c < config.chains; ++c) {
    workers.emplace_back([&, c] {
      try {
        const auto t0 = std::chrono::steady_clock::now();
        Rng rng = Rng::stream(config.seed, c);
        const State s0 = initial_state(config, space, rng);
        result.skeletons[c] = simulate(target, kind, space, kernel, s0, config.horizon, rng);
        wall[c] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  json per_chain = json::array();
  for (std::size_t c = 0; c < config.chains; ++c) {
    json s = chain_summary(result.skeletons[c], kRegionNames);
    if (config.record_timing) {
      s["wall_clock_sec"] = wall[c];
      s["events_per_sec"] =
          wall[c] > 0.0 ? json(s["events"]["total"].get<double>() / wall[c]) : json(nullptr);
    }
    per_chain.push_back(std::move(s));
  }
  json cfg = config.to_json();
  for (const char* key : {"csv", "json", "svg"}) cfg.erase(key);
  result.summary = json{{"config", cfg}, {"per_chain", per_chain}, {"pooled", pool(per_chain)}};

  for (std::size_t c = 0; c < config.chains; ++c) {
    if (!config.csv_path.empty()) {
      write_file(chain_csv_path(config, c),
                 [&](std::ostream& out) { write_skeleton_csv(out, result.skeletons[c]); });
    }
    if (!config.svg_path.empty()) {
      const std::string title = pdmp::to_string(config.sampler) + " " + kernel.to_string() +
                                " d=" + std::to_string(config.dim) + " chain " + std::to_string(c);
      write_file(chain_path(config.svg_path, c, config.chains),
                 [&](std::ostream& out) { write_svg(out, result.skeletons[c], title); });
    }
  }
  if (!config.json_path.empty()) {
    write_file(config.json_path, [&](std::ostream& out) { out << result.summary.dump(2) << '\n'; });
  }
  return result;
}

}  // namespace pdmp::experiment
