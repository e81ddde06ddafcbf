#include "pdmp/experiment.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using pdmp::experiment::ExperimentConfig;
using pdmp::experiment::json;

struct RunFlags {
  std::string config_file;
  std::size_t dim = 0;
  double sigma_in = 0.0;
  double sigma_out = 0.0;
  double alpha_in = 0.0;
  double alpha_out = 0.0;
  std::string sampler;
  double refresh_rate = 0.0;
  std::string kernel;
  std::string basis;
  std::string bps_velocity;
  std::string horizon;
  std::size_t chains = 0;
  std::uint64_t seed = 0;
  std::string csv;
  std::string json_out;
  std::string svg;
  bool record_timing = false;
};

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pdmp::ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw pdmp::ConfigError("config file '" + path + "': " + e.what());
  }
  return ExperimentConfig::from_json(j);
}

// Flags given on the command line override the config file.
ExperimentConfig resolve(const CLI::App& cmd, const RunFlags& f) {
  ExperimentConfig c = f.config_file.empty() ? ExperimentConfig{} : load_config(f.config_file);
  const auto given = [&](const char* name) { return cmd.count(name) > 0; };
  try {
    if (given("--dim")) c.dim = f.dim;
    if (given("--sigma-in")) c.sigma_in = f.sigma_in;
    if (given("--sigma-out")) c.sigma_out = f.sigma_out;
    if (given("--alpha-in")) c.alpha_in = f.alpha_in;
    if (given("--alpha-out")) c.alpha_out = f.alpha_out;
    if (given("--sampler")) c.sampler = pdmp::parse_dynamics(f.sampler);
    if (given("--refresh-rate")) c.refresh_rate = f.refresh_rate;
    if (given("--kernel")) c.kernel = pdmp::BoundaryKernel::parse(f.kernel);
    if (given("--bps-velocity")) c.bps_velocity = f.bps_velocity;
    if (given("--chains")) c.chains = f.chains;
    if (given("--seed")) c.seed = f.seed;
    if (given("--csv")) c.csv_path = f.csv;
    if (given("--json")) c.json_path = f.json_out;
    if (given("--svg")) c.svg_path = f.svg;
    if (given("--record-timing")) c.record_timing = f.record_timing;
  } catch (const pdmp::InvalidArgument& e) {
    throw pdmp::ConfigError(e.what());
  }
  if (given("--basis")) c.basis = pdmp::experiment::BasisSpec::parse(f.basis);
  if (given("--horizon")) c.horizon = pdmp::experiment::parse_horizon(f.horizon);
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-driven PDMP samplers for piecewise-smooth targets"};
  app.require_subcommand(1);

  RunFlags f;
  auto* run = app.add_subcommand("run", "Simulate chains on the Gaussian-in/out-of-cube target");
  run->add_option("--config", f.config_file, "JSON config file (flags override it)");
  run->add_option("--dim", f.dim, "Dimension d");
  run->add_option("--sigma-in", f.sigma_in, "Variance inside the cube");
  run->add_option("--sigma-out", f.sigma_out, "Variance outside the cube");
  run->add_option("--alpha-in", f.alpha_in, "Weight inside the cube");
  run->add_option("--alpha-out", f.alpha_out, "Weight outside the cube");
  run->add_option("--sampler", f.sampler, "bps | zigzag | cs");
  run->add_option("--refresh-rate", f.refresh_rate, "Refreshment rate (BPS, CS)");
  run->add_option("--kernel", f.kernel, "flip | limit | mh:<iters>");
  run->add_option("--basis", f.basis, "canonical | rotated:<seed>");
  run->add_option("--bps-velocity", f.bps_velocity, "sphere | gaussian");
  run->add_option("--horizon", f.horizon, "time:<T> | events:<N>");
  run->add_option("--chains", f.chains, "Number of independent chains");
  run->add_option("--seed", f.seed, "Base seed");
  run->add_option("--csv", f.csv, "Skeleton CSV path ({chain} is replaced by the chain index)");
  run->add_option("--json", f.json_out, "Summary JSON path");
  run->add_option("--svg", f.svg, "SVG plot path");
  run->add_flag("--record-timing", f.record_timing, "Add wall-clock fields to the summary");

  std::vector<std::string> csv_inputs;
  std::string summary_out;
  auto* summarize = app.add_subcommand("summarize", "Pool skeleton CSVs into a summary JSON");
  summarize->add_option("csv", csv_inputs, "Skeleton CSV files")->required();
  summarize->add_option("--json", summary_out, "Output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run) {
      const ExperimentConfig config = resolve(*run, f);
      const auto result = pdmp::experiment::run(config);
      if (config.json_path.empty()) std::cout << result.summary.dump(2) << '\n';
    } else {
      const json out = pdmp::experiment::summarize(csv_inputs);
      if (summary_out.empty()) {
        std::cout << out.dump(2) << '\n';
      } else {
        std::ofstream file(summary_out, std::ios::binary);
        if (!file) throw pdmp::ConfigError("cannot open '" + summary_out + "' for writing");
        file << out.dump(2) << '\n';
      }
    }
  } catch (const pdmp::ConfigError& e) {
    std::cerr << "pdmp: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const pdmp::UnsupportedCombination& e) {
    std::cerr << "pdmp: unsupported combination: " << e.what() << '\n';
    return 2;
  } catch (const pdmp::SchemaMismatch& e) {
    std::cerr << "pdmp: schema mismatch: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "pdmp: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
