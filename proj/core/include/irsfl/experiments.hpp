#ifndef IRSFL_EXPERIMENTS_HPP_
#define IRSFL_EXPERIMENTS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "irsfl/channel.hpp"
#include "irsfl/system.hpp"
#include "irsfl/tdma_solver.hpp"
#include "irsfl/tradeoff.hpp"

namespace irsfl {

enum class SweepVariable { Energy, Elements, Nu, Kappa, LatencyCap };

struct Diagnostic {
  std::string field;
  std::string message;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string what, std::vector<Diagnostic> diags)
      : std::runtime_error(std::move(what)), diagnostics(std::move(diags)) {}
  std::vector<Diagnostic> diagnostics;
};

struct ExperimentConfig {
  ScenarioSpec scenario;
  SystemParams system;
  double cycles_per_sample = 10.0;
  std::vector<std::int64_t> samples_pattern = {1000, 2000};
  double energy_budget_j = 0.1;
  std::vector<Protocol> protocols = {Protocol::TDMA};
  SweepVariable sweep_variable = SweepVariable::Energy;
  std::vector<double> sweep_values;
  double nu = 0.0;  // excludable fraction of the total data volume
  bool rho_from_convergence = false;
  ConvergenceParams convergence;
  double latency_cap_s = 0.0;  // used by the LatencyCap sweep
  PhaseMode phase_mode = PhaseMode::Optimized;
  int trials = 100;
  std::uint64_t seed_base = 1;
  int jobs = 1;
  std::string output = "experiment";
  SolverOptions solver;
};

/// Strict schema check; returns one diagnostic per problem, empty when the
/// config is valid.
std::vector<Diagnostic> validate_config(const std::string& json_text);

/// Parses and validates; throws ConfigError carrying the diagnostics.
ExperimentConfig load_config(const std::string& json_text);

/// A config with the canonical defaults, serialized; validates cleanly.
std::string default_config_json();

struct ExperimentRow {
  std::uint64_t seed = 0;
  double sweep_value = 0.0;
  Protocol protocol = Protocol::TDMA;
  double latency_total = 0.0;
  double latency_upload = 0.0;
  double latency_local = 0.0;
  int scheduled_count = 0;
  bool feasible = true;
  std::string condition_flags;  // "power", "phase", "power|phase" or "none"
};

struct AggregateRow {
  double sweep_value = 0.0;
  Protocol protocol = Protocol::TDMA;
  int trials = 0;
  int feasible_trials = 0;
  double mean_latency = 0.0;
  double stderr_latency = 0.0;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  std::vector<AggregateRow> aggregate;
};

extern const char kRowsCsvHeader[];
extern const char kAggregateCsvHeader[];
extern const char kCompareCsvHeader[];

/// Runs every (sweep value x trial x protocol) cell, seeds fixed by
/// seed_base + trial; rows arrive in deterministic order regardless of
/// the worker count.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Helpers shared by the runner and the CLI.
std::vector<DeviceProfile> build_devices(const ExperimentConfig& config,
                                         const ChannelRealization& ch,
                                         double energy_budget_j);
double rho_for(const ExperimentConfig& config,
               const std::vector<DeviceProfile>& devices, double sweep_value);

std::string rows_to_csv(const std::vector<ExperimentRow>& rows);
std::string aggregate_to_csv(const std::vector<AggregateRow>& rows);

struct CompareResult {
  std::vector<std::uint64_t> seeds;
  std::vector<ComparisonReport> reports;
};

CompareResult run_compare(const ExperimentConfig& config);
std::string compare_to_csv(const CompareResult& result);

/// Writes <output>_rows.csv and <output>_agg.csv; returns the paths.
std::vector<std::string> write_experiment_csv(const ExperimentConfig& config,
                                              const ExperimentResult& result);

}  // namespace irsfl

#endif  // IRSFL_EXPERIMENTS_HPP_
