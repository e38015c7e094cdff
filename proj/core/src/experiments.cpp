#include "irsfl/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <thread>

#include "irsfl/fdma_solver.hpp"
#include "irsfl/noma_solver.hpp"
#include "json.hpp"

namespace irsfl {

using nlohmann::json;

const char kRowsCsvHeader[] =
    "seed,sweep_value,protocol,latency_total,latency_upload,latency_local,"
    "scheduled_count,feasible,condition_flags";
const char kAggregateCsvHeader[] =
    "sweep_value,protocol,trials,feasible_trials,mean_latency,stderr_latency";
const char kCompareCsvHeader[] =
    "seed,tau_tdma,tau_fdma,tau_noma,power_homogeneous,phase_homogeneous,"
    "tdma_le_fdma_ok,fdma_equality_applicable,fdma_equality_ok,"
    "tdma_le_noma_applicable,tdma_le_noma_ok,noma_le_tdma_applicable,"
    "noma_le_tdma_ok,noma_le_fdma_ok,restarts_used";

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Checker {
  const json& root;
  std::vector<Diagnostic> diags;

  void fail(const std::string& field, const std::string& message) {
    diags.push_back({field, message});
  }

  const json* find(const std::string& path) {
    const json* cur = &root;
    std::size_t begin = 0;
    while (begin <= path.size()) {
      const auto dot = path.find('.', begin);
      const std::string key = path.substr(begin, dot - begin);
      if (!cur->is_object() || !cur->contains(key)) return nullptr;
      cur = &(*cur)[key];
      if (dot == std::string::npos) break;
      begin = dot + 1;
    }
    return cur;
  }

  double number(const std::string& path, double fallback, bool required = false) {
    const json* v = find(path);
    if (v == nullptr) {
      if (required) fail(path, "missing required field");
      return fallback;
    }
    if (!v->is_number()) {
      fail(path, "expected a number");
      return fallback;
    }
    return v->get<double>();
  }

  std::string text(const std::string& path, const std::string& fallback) {
    const json* v = find(path);
    if (v == nullptr) return fallback;
    if (!v->is_string()) {
      fail(path, "expected a string");
      return fallback;
    }
    return v->get<std::string>();
  }
};

void run_pool(int jobs, int tasks, const std::function<void(int)>& body) {
  jobs = std::max(1, jobs);
  if (jobs == 1) {
    for (int i = 0; i < tasks; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> workers;
  const int n = std::min(jobs, tasks);
  workers.reserve(n);
  for (int w = 0; w < n; ++w) {
    workers.emplace_back([&] {
      for (int i = next.fetch_add(1); i < tasks; i = next.fetch_add(1)) body(i);
    });
  }
  for (auto& t : workers) t.join();
}

std::string flags_for(const ChannelRealization& ch) {
  const bool power = detect_power_homogeneous(ch);
  const bool phase = detect_phase_homogeneous(ch);
  if (power && phase) return "power|phase";
  if (power) return "power";
  if (phase) return "phase";
  return "none";
}

ProtocolSolution solve_one(Protocol protocol, const ChannelRealization& ch,
                           const std::vector<DeviceProfile>& devices,
                           const SystemParams& params, double rho,
                           const SolverOptions& opts) {
  switch (protocol) {
    case Protocol::TDMA: return solve_tdma(ch, devices, params, rho, opts);
    case Protocol::FDMA: return solve_fdma(ch, devices, params, rho, opts);
    case Protocol::NOMA: return solve_noma(ch, devices, params, rho, opts);
  }
  throw std::invalid_argument("unknown protocol");
}

}  // namespace

std::vector<Diagnostic> validate_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    return {{"", std::string("JSON parse error: ") + e.what()}};
  }
  if (!root.is_object()) return {{"", "top-level JSON value must be an object"}};

  Checker c{root, {}};

  const std::string kind = c.text("scenario.kind", "general");
  try {
    scenario_from_name(kind);
  } catch (const std::invalid_argument& e) {
    c.fail("scenario.kind", e.what());
  }
  const double devices = c.number("scenario.devices", 1.0, true);
  if (devices < 1.0 || devices != std::floor(devices)) {
    c.fail("scenario.devices", "expected a positive integer");
  }
  const double elements = c.number("scenario.elements", 1.0, true);
  if (elements < 1.0 || elements != std::floor(elements)) {
    c.fail("scenario.elements", "expected a positive integer");
  }
  if (c.number("scenario.rician_db", 3.0) < 0.0) {
    c.fail("scenario.rician_db", "Rician factor must be >= 0 dB");
  }

  if (!(c.number("system.bandwidth_hz", 10e6) > 0.0)) {
    c.fail("system.bandwidth_hz", "bandwidth must be positive");
  }
  c.number("system.noise_dbm", -80.0);
  if (!(c.number("system.model_bits", 1e6) > 0.0)) {
    c.fail("system.model_bits", "model size must be positive");
  }
  if (!(c.number("system.energy_coeff", 1e-27) > 0.0)) {
    c.fail("system.energy_coeff", "energy coefficient must be positive");
  }

  if (!(c.number("devices.cycles_per_sample", 10.0) > 0.0)) {
    c.fail("devices.cycles_per_sample", "cycles per sample must be positive");
  }
  if (!(c.number("devices.energy_budget_j", 0.1) > 0.0)) {
    c.fail("devices.energy_budget_j", "energy budget must be positive");
  }
  if (const json* pattern = c.find("devices.samples_pattern")) {
    if (!pattern->is_array() || pattern->empty()) {
      c.fail("devices.samples_pattern", "expected a nonempty array of counts");
    } else {
      for (const auto& v : *pattern) {
        if (!v.is_number() || v.get<double>() < 1.0) {
          c.fail("devices.samples_pattern", "sample counts must be >= 1");
          break;
        }
      }
    }
  }

  if (const json* protos = c.find("protocols")) {
    if (!protos->is_array() || protos->empty()) {
      c.fail("protocols", "expected a nonempty array");
    } else {
      for (const auto& p : *protos) {
        const std::string name = p.is_string() ? p.get<std::string>() : "";
        if (name != "tdma" && name != "fdma" && name != "noma") {
          c.fail("protocols", "entries must be tdma, fdma or noma");
          break;
        }
      }
    }
  }

  const std::string variable = c.text("sweep.variable", "energy");
  if (variable != "energy" && variable != "elements" && variable != "nu" &&
      variable != "kappa" && variable != "latency_cap") {
    c.fail("sweep.variable",
           "expected one of energy, elements, nu, kappa, latency_cap");
  }
  if (const json* values = c.find("sweep.values")) {
    if (!values->is_array() || values->empty()) {
      c.fail("sweep.values", "expected a nonempty array of numbers");
    } else {
      for (const auto& v : *values) {
        if (!v.is_number()) {
          c.fail("sweep.values", "expected a nonempty array of numbers");
          break;
        }
      }
    }
  } else {
    c.fail("sweep.values", "missing required field");
  }

  const double nu = c.number("nu", 0.0);
  if (nu < 0.0 || nu > 1.0) c.fail("nu", "nu must lie in [0, 1]");

  if (variable == "kappa" || variable == "latency_cap" ||
      c.find("convergence") != nullptr) {
    const double L = c.number("convergence.smoothness", 1.0);
    const double delta = c.number("convergence.pl", 1.0);
    if (!(L > 0.0)) c.fail("convergence.smoothness", "L must be positive");
    if (!(delta > 0.0) || delta > L) {
      c.fail("convergence.pl", "delta must satisfy 0 < delta <= L");
    }
    if (!(c.number("convergence.epsilon", 1.0) > 0.0)) {
      c.fail("convergence.epsilon", "epsilon must be positive");
    }
  }

  const std::string phase_mode = c.text("phase_mode", "optimized");
  if (phase_mode != "optimized" && phase_mode != "random") {
    c.fail("phase_mode", "expected optimized or random");
  }

  const json* trials = c.find("trials");
  if (trials == nullptr) {
    c.fail("trials", "missing required field");
  } else if (!trials->is_number() || trials->get<double>() < 1.0 ||
             trials->get<double>() != std::floor(trials->get<double>())) {
    c.fail("trials", "expected an integer >= 1");
  }
  const double jobs = c.number("jobs", 1.0);
  if (jobs < 1.0 || jobs != std::floor(jobs)) c.fail("jobs", "expected an integer >= 1");
  c.number("seed_base", 1.0);
  c.text("output", "experiment");

  return c.diags;
}

ExperimentConfig load_config(const std::string& json_text) {
  auto diags = validate_config(json_text);
  if (!diags.empty()) {
    std::string what = "invalid config:";
    for (const auto& d : diags) what += "\n  " + d.field + ": " + d.message;
    throw ConfigError(what, std::move(diags));
  }

  const json root = json::parse(json_text);
  Checker c{root, {}};
  ExperimentConfig cfg;

  cfg.scenario.kind = scenario_from_name(c.text("scenario.kind", "general"));
  cfg.scenario.num_devices = static_cast<int>(c.number("scenario.devices", 1.0));
  cfg.scenario.num_elements = static_cast<int>(c.number("scenario.elements", 1.0));
  cfg.scenario.rician_factor_db = c.number("scenario.rician_db", 3.0);
  cfg.scenario.carrier_hz = c.number("scenario.carrier_hz", 2.4e9);
  cfg.scenario.half_circle_radius_m = c.number("scenario.half_circle_radius_m", 10.0);
  cfg.scenario.disc_radius_m = c.number("scenario.disc_radius_m", 20.0);

  cfg.system.bandwidth_hz = c.number("system.bandwidth_hz", 10e6);
  cfg.system.noise_power_w = dbm_to_watts(c.number("system.noise_dbm", -80.0));
  cfg.system.model_bits = c.number("system.model_bits", 1e6);
  cfg.system.energy_coeff = c.number("system.energy_coeff", 1e-27);
  cfg.system.num_devices = cfg.scenario.num_devices;
  cfg.system.num_elements = cfg.scenario.num_elements;

  cfg.cycles_per_sample = c.number("devices.cycles_per_sample", 10.0);
  cfg.energy_budget_j = c.number("devices.energy_budget_j", 0.1);
  if (const json* pattern = c.find("devices.samples_pattern")) {
    cfg.samples_pattern.clear();
    for (const auto& v : *pattern) {
      cfg.samples_pattern.push_back(static_cast<std::int64_t>(v.get<double>()));
    }
  }

  if (const json* protos = c.find("protocols")) {
    cfg.protocols.clear();
    for (const auto& p : *protos) {
      const std::string name = p.get<std::string>();
      if (name == "tdma") cfg.protocols.push_back(Protocol::TDMA);
      if (name == "fdma") cfg.protocols.push_back(Protocol::FDMA);
      if (name == "noma") cfg.protocols.push_back(Protocol::NOMA);
    }
  }

  const std::string variable = c.text("sweep.variable", "energy");
  if (variable == "energy") cfg.sweep_variable = SweepVariable::Energy;
  if (variable == "elements") cfg.sweep_variable = SweepVariable::Elements;
  if (variable == "nu") cfg.sweep_variable = SweepVariable::Nu;
  if (variable == "kappa") cfg.sweep_variable = SweepVariable::Kappa;
  if (variable == "latency_cap") cfg.sweep_variable = SweepVariable::LatencyCap;
  for (const auto& v : *c.find("sweep.values")) {
    cfg.sweep_values.push_back(v.get<double>());
  }

  cfg.nu = c.number("nu", 0.0);
  if (c.find("convergence") != nullptr) {
    cfg.rho_from_convergence = true;
    cfg.convergence.smoothness = c.number("convergence.smoothness", 1.0);
    cfg.convergence.pl_constant = c.number("convergence.pl", 1.0);
    cfg.convergence.gradient_bound = c.number("convergence.epsilon", 1.0);
    cfg.convergence.initial_gap = c.number("convergence.initial_gap", 1.0);
    cfg.convergence.kappa = c.number("convergence.kappa", 0.0);
  }
  cfg.latency_cap_s = c.number("latency_cap", 0.0);
  cfg.phase_mode = c.text("phase_mode", "optimized") == "random"
                       ? PhaseMode::Random
                       : PhaseMode::Optimized;
  cfg.trials = static_cast<int>(c.number("trials", 100.0));
  cfg.seed_base = static_cast<std::uint64_t>(c.number("seed_base", 1.0));
  cfg.jobs = static_cast<int>(c.number("jobs", 1.0));
  cfg.output = c.text("output", "experiment");
  return cfg;
}

std::string default_config_json() {
  json j;
  j["scenario"] = {{"kind", "general"}, {"devices", 10}, {"elements", 30},
                   {"rician_db", 3.0}};
  j["system"] = {{"bandwidth_hz", 10e6}, {"noise_dbm", -80.0},
                 {"model_bits", 1e6}, {"energy_coeff", 1e-27}};
  j["devices"] = {{"cycles_per_sample", 10.0},
                  {"samples_pattern", {1000, 2000}},
                  {"energy_budget_j", 0.1}};
  j["protocols"] = {"tdma", "fdma", "noma"};
  j["sweep"] = {{"variable", "energy"}, {"values", {0.05, 0.1, 0.2, 0.4}}};
  j["nu"] = 0.0;
  j["phase_mode"] = "optimized";
  j["trials"] = 100;
  j["seed_base"] = 1;
  j["jobs"] = 1;
  j["output"] = "experiment";
  return j.dump(2);
}

std::vector<DeviceProfile> build_devices(const ExperimentConfig& config,
                                         const ChannelRealization& ch,
                                         double energy_budget_j) {
  const int K = ch.num_devices;
  const int P = static_cast<int>(config.samples_pattern.size());
  std::vector<DeviceProfile> devices(K);
  for (int k = 0; k < K; ++k) {
    devices[k].samples = config.samples_pattern[std::min(P - 1, k * P / K)];
    devices[k].cycles_per_sample = config.cycles_per_sample;
    devices[k].energy_budget_j = energy_budget_j;
    devices[k].position = ch.device_positions[k];
  }
  return devices;
}

double rho_for(const ExperimentConfig& config,
               const std::vector<DeviceProfile>& devices, double sweep_value) {
  double total = 0.0;
  for (const auto& d : devices) total += static_cast<double>(d.samples);
  switch (config.sweep_variable) {
    case SweepVariable::Nu:
      return sweep_value * total;
    case SweepVariable::Kappa: {
      ConvergenceParams cp = config.convergence;
      cp.kappa = sweep_value;
      return rho_from_kappa(cp, total);
    }
    default:
      break;
  }
  if (config.rho_from_convergence && config.convergence.kappa > 0.0) {
    return rho_from_kappa(config.convergence, total);
  }
  return config.nu * total;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const int n_values = static_cast<int>(config.sweep_values.size());
  const int n_protocols = static_cast<int>(config.protocols.size());
  const int cells = n_values * config.trials;

  ExperimentResult result;
  result.rows.assign(static_cast<std::size_t>(cells) * n_protocols, {});

  run_pool(config.jobs, cells, [&](int cell) {
    const int vi = cell / config.trials;
    const int trial = cell % config.trials;
    const double value = config.sweep_values[vi];

    ScenarioSpec scenario = config.scenario;
    scenario.seed = config.seed_base + static_cast<std::uint64_t>(trial);
    double energy = config.energy_budget_j;
    switch (config.sweep_variable) {
      case SweepVariable::Energy: energy = value; break;
      case SweepVariable::Elements:
        scenario.num_elements = static_cast<int>(value);
        break;
      default: break;
    }

    const auto ch = generate_realization(scenario);
    const auto devices = build_devices(config, ch, energy);
    const std::string flags = flags_for(ch);

    SystemParams params = config.system;
    params.num_devices = scenario.num_devices;
    params.num_elements = scenario.num_elements;

    SolverOptions opts = config.solver;
    opts.phase_mode = config.phase_mode;
    opts.random_phase_seed = scenario.seed * 0x2545F4914F6CDD1Dull + 0x9E37ull;

    for (int pi = 0; pi < n_protocols; ++pi) {
      ExperimentRow row;
      row.seed = scenario.seed;
      row.sweep_value = value;
      row.protocol = config.protocols[pi];
      row.condition_flags = flags;
      try {
        ProtocolSolution sol;
        if (config.sweep_variable == SweepVariable::LatencyCap) {
          ConvergenceParams cp = config.convergence;
          auto res = min_loss_given_latency(row.protocol, ch, devices, params,
                                            cp, value, opts);
          sol = std::move(res.solution);
        } else {
          const double rho = rho_for(config, devices, value);
          sol = solve_one(row.protocol, ch, devices, params, rho, opts);
        }
        row.latency_total = sol.total_latency;
        row.latency_upload = sol.upload_total;
        row.latency_local = sol.local_time;
        row.scheduled_count = sol.schedule.count();
        row.feasible = sol.feasible;
      } catch (const InfeasibleError&) {
        row.feasible = false;
        row.latency_total = row.latency_upload = row.latency_local =
            std::numeric_limits<double>::quiet_NaN();
      }
      result.rows[static_cast<std::size_t>(cell) * n_protocols + pi] = row;
    }
  });

  // Per (sweep value, protocol) mean and standard error over feasible trials.
  for (int vi = 0; vi < n_values; ++vi) {
    for (int pi = 0; pi < n_protocols; ++pi) {
      AggregateRow agg;
      agg.sweep_value = config.sweep_values[vi];
      agg.protocol = config.protocols[pi];
      double sum = 0.0, sum_sq = 0.0;
      for (int trial = 0; trial < config.trials; ++trial) {
        const auto& row =
            result.rows[(static_cast<std::size_t>(vi) * config.trials + trial) *
                            n_protocols +
                        pi];
        agg.trials += 1;
        if (!row.feasible) continue;
        agg.feasible_trials += 1;
        sum += row.latency_total;
        sum_sq += row.latency_total * row.latency_total;
      }
      if (agg.feasible_trials > 0) {
        agg.mean_latency = sum / agg.feasible_trials;
        if (agg.feasible_trials > 1) {
          const double var =
              (sum_sq - sum * sum / agg.feasible_trials) / (agg.feasible_trials - 1);
          agg.stderr_latency = std::sqrt(std::max(0.0, var) / agg.feasible_trials);
        }
      }
      result.aggregate.push_back(agg);
    }
  }
  return result;
}

std::string rows_to_csv(const std::vector<ExperimentRow>& rows) {
  std::string out = kRowsCsvHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.seed);
    out += ',';
    out += fmt_double(r.sweep_value);
    out += ',';
    out += protocol_name(r.protocol);
    out += ',';
    out += fmt_double(r.latency_total);
    out += ',';
    out += fmt_double(r.latency_upload);
    out += ',';
    out += fmt_double(r.latency_local);
    out += ',';
    out += std::to_string(r.scheduled_count);
    out += ',';
    out += r.feasible ? '1' : '0';
    out += ',';
    out += r.condition_flags;
    out += '\n';
  }
  return out;
}

std::string aggregate_to_csv(const std::vector<AggregateRow>& rows) {
  std::string out = kAggregateCsvHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += fmt_double(r.sweep_value);
    out += ',';
    out += protocol_name(r.protocol);
    out += ',';
    out += std::to_string(r.trials);
    out += ',';
    out += std::to_string(r.feasible_trials);
    out += ',';
    out += fmt_double(r.mean_latency);
    out += ',';
    out += fmt_double(r.stderr_latency);
    out += '\n';
  }
  return out;
}

CompareResult run_compare(const ExperimentConfig& config) {
  CompareResult result;
  result.seeds.resize(config.trials);
  result.reports.resize(config.trials);

  run_pool(config.jobs, config.trials, [&](int trial) {
    ScenarioSpec scenario = config.scenario;
    scenario.seed = config.seed_base + static_cast<std::uint64_t>(trial);
    const auto ch = generate_realization(scenario);
    const auto devices = build_devices(config, ch, config.energy_budget_j);

    SystemParams params = config.system;
    params.num_devices = scenario.num_devices;
    params.num_elements = scenario.num_elements;

    double total = 0.0;
    for (const auto& d : devices) total += static_cast<double>(d.samples);
    const double rho = config.rho_from_convergence && config.convergence.kappa > 0.0
                           ? rho_from_kappa(config.convergence, total)
                           : config.nu * total;

    ComparisonOptions copts;
    copts.solver = config.solver;
    result.seeds[trial] = scenario.seed;
    result.reports[trial] = compare_protocols(ch, devices, params, rho, copts);
  });
  return result;
}

std::string compare_to_csv(const CompareResult& result) {
  std::string out = kCompareCsvHeader;
  out += '\n';
  for (std::size_t i = 0; i < result.reports.size(); ++i) {
    const auto& r = result.reports[i];
    out += std::to_string(result.seeds[i]);
    out += ',';
    out += fmt_double(r.tau_tdma);
    out += ',';
    out += fmt_double(r.tau_fdma);
    out += ',';
    out += fmt_double(r.tau_noma);
    auto flag = [&out](bool b) {
      out += ',';
      out += b ? '1' : '0';
    };
    flag(r.power_homogeneous);
    flag(r.phase_homogeneous);
    flag(r.tdma_le_fdma_ok);
    flag(r.fdma_equality_applicable);
    flag(r.fdma_equality_ok);
    flag(r.tdma_le_noma_applicable);
    flag(r.tdma_le_noma_ok);
    flag(r.noma_le_tdma_applicable);
    flag(r.noma_le_tdma_ok);
    flag(r.noma_le_fdma_ok);
    out += ',';
    out += std::to_string(r.restarts_used);
    out += '\n';
  }
  return out;
}

std::vector<std::string> write_experiment_csv(const ExperimentConfig& config,
                                              const ExperimentResult& result) {
  const std::string rows_path = config.output + "_rows.csv";
  const std::string agg_path = config.output + "_agg.csv";
  std::ofstream rows(rows_path, std::ios::binary);
  rows << rows_to_csv(result.rows);
  std::ofstream agg(agg_path, std::ios::binary);
  agg << aggregate_to_csv(result.aggregate);
  return {rows_path, agg_path};
}

}  // namespace irsfl
