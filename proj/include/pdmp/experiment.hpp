#pragma once

#include "pdmp/kernels.hpp"
#include "pdmp/sampler.hpp"
#include "pdmp/target.hpp"
#include "pdmp/velocity.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pdmp::experiment {

using nlohmann::json;

/// Velocity basis for Zig-Zag and the coordinate sampler.
struct BasisSpec {
  bool rotated = false;
  std::uint64_t seed = 0;

  /// "canonical" or "rotated:<seed>".
  static BasisSpec parse(const std::string& text);
  std::string to_string() const;
};

/// "time:<T>" or "events:<N>".
StopCondition parse_horizon(const std::string& text);
std::string horizon_to_string(const StopCondition& stop);

struct ExperimentConfig {
  std::size_t dim = 2;
  double sigma_in = 1.0;
  double sigma_out = 1.0;
  double alpha_in = 1.0;
  double alpha_out = 0.0;
  Dynamics sampler = Dynamics::Bps;
  double refresh_rate = 1.0;
  BoundaryKernel kernel = BoundaryKernel::limit();
  BasisSpec basis;
  /// BPS velocity law: "sphere" or "gaussian".
  std::string bps_velocity = "sphere";
  StopCondition horizon = StopCondition::events(10000);
  std::size_t chains = 1;
  std::uint64_t seed = 0;

  /// Skeleton CSV path; "{chain}" is replaced by the chain index, otherwise
  /// ".chain<i>" is inserted before the extension when chains > 1.
  std::string csv_path;
  std::string json_path;
  std::string svg_path;
  /// Adds wall-clock fields to the summary (breaks byte-identical reruns).
  bool record_timing = false;

  /// Throws ConfigError.
  void validate() const;

  json to_json() const;
  /// Keys are the long flag names with '-' replaced by '_'. Unknown keys
  /// raise ConfigError.
  static ExperimentConfig from_json(const json& j);
};

PiecewiseTarget build_target(const ExperimentConfig& config);
VelocitySpace build_velocity_space(const ExperimentConfig& config);
SamplerKind build_sampler_kind(const ExperimentConfig& config);
/// Origin when the cube carries mass, otherwise just outside the face x1 = 1.
State initial_state(const ExperimentConfig& config, const VelocitySpace& space, Rng& rng);

struct RunResult {
  std::vector<TrajectorySkeleton> skeletons;
  json summary;
};

/// Runs `chains` independent chains in worker threads, chain i drawing from
/// Rng::stream(seed, i), and writes whichever outputs have a path set.
RunResult run(const ExperimentConfig& config);

/// Path of the CSV written for chain `index`.
std::string chain_csv_path(const ExperimentConfig& config, std::size_t index);

/// Per-chain summary: total_time, mean, second_moment, occupancy, events,
/// boundary_hit_rate.
json chain_summary(const TrajectorySkeleton& skel, const std::vector<std::string>& region_names);

/// Pools chain summaries weighted by total time and reports the between-chain
/// spread of the means.
json pool(const json& per_chain);

/// Re-reads skeleton CSVs (hypercube regions recovered from segment
/// midpoints) and returns {"per_chain": [...], "pooled": {...}}.
/// Throws SchemaMismatch for incompatible headers.
json summarize(const std::vector<std::string>& csv_paths);

void write_skeleton_csv(std::ostream& out, const TrajectorySkeleton& skel);
/// Parses `t,tag,x1..xd,v1..vd`. Regions are left at 0.
TrajectorySkeleton read_skeleton_csv(std::istream& in);

/// 800x800 SVG of (x1, x2) over [-1.5, 1.5]^2 with the unit square and
/// event markers colored by tag.
void write_svg(std::ostream& out, const TrajectorySkeleton& skel, const std::string& title);

/// Formats with 17 significant digits.
std::string format_double(double x);

}  // namespace pdmp::experiment
