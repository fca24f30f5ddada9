#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "energymimo/asymptotic.hpp"
#include "energymimo/channel.hpp"
#include "energymimo/model.hpp"
#include "energymimo/oracle.hpp"
#include "energymimo/precoding.hpp"

namespace energymimo::harness {

/// Physical scenario. Defaults reproduce the reference parameter table.
struct ScenarioConfig {
  int antennas = 32;
  /// Single user count, or a sweep for the asymptotic study.
  std::vector<int> users{4};
  int subcarriers = 1;

  double p_max_watts = 1.0;
  double eta_max = 0.22;
  double backoff_db = 10.0;
  double noise_dbm = -96.0;
  double p_fix_watts = 15.0;
  double circuit_watts = 0.7;
  double active_threshold_watts = 1e-9;
  CellGeometry geometry{35.0, 250.0};
  double sinr_reference = kSinrReferenceGain;

  ChannelKind channel = ChannelKind::rayleigh;
  FrequencyCorrelation correlation;
  std::uint64_t seed = 1;

  PaModel pa() const { return PaModel(p_max_watts, eta_max, db_to_linear(backoff_db)); }
  BsModel bs() const { return {p_fix_watts, circuit_watts, active_threshold_watts}; }
  double noise_power() const { return dbm_to_watts(noise_dbm); }
};

struct ExperimentConfig {
  ScenarioConfig scenario;
  int realizations = 200;
  /// Any of "zf", "min_pa", "saturating".
  std::vector<std::string> precoders{"zf", "min_pa"};
  bool discard_over_pmax = true;
  std::string output_path;
  FixedPointConfig fixed_point;
  /// 0 selects the hardware concurrency.
  int threads = 0;

  // convergence study
  bool oracle = true;
  oracle::BruteForceOptions oracle_options;

  // asymptotic study
  int curve_users = 0;
  std::vector<int> finite_q_users;
  std::vector<int> finite_q_subcarriers;

  // validation; scales the PA constant used on the model side
  double fault_alpha_scale = 1.0;
};

/// Parses flat `key = value` text with `#` comments. Unknown keys and bad
/// values raise ConfigError carrying the 1-based line number.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Key/value overrides applied after parsing (e.g. from the command line).
void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value,
                   int line = 0);

std::string format_number(double value);

// ---------------------------------------------------------------------------
// run: per-realization consumption of each precoder against zero-forcing

struct RunRow {
  std::uint64_t seed = 0;
  int realization = 0;
  std::string solver;
  double p_tx = 0.0;
  double p_pas = 0.0;
  double p_bs = 0.0;
  int m_active = 0;
  double gain_pas = 1.0;
  double gain_bs = 1.0;
  bool discarded = false;
};

struct SolverSummary {
  std::string solver;
  int kept = 0;
  int discarded = 0;
  double mean_gain_pas = 0.0;
  double mean_gain_bs = 0.0;
  double mean_m_active = 0.0;
};

struct RunResult {
  std::vector<RunRow> rows;
  std::vector<SolverSummary> summary;
};

RunResult run_experiment(const ExperimentConfig& cfg);
void write_run_csv(std::ostream& out, const RunResult& result);

// ---------------------------------------------------------------------------
// convergence: fixed-point trajectory and distance to a reference optimum

struct ConvergenceRow {
  int run = 0;
  int iteration = 0;
  double max_abs_change = 0.0;
  double sq_dist_to_oracle = 0.0;  // NaN without a reference
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  std::vector<int> iterations;
  std::vector<int> converged;
  std::vector<double> final_sq_dist;
  bool oracle_used = false;
  std::string warning;
};

ConvergenceResult run_convergence(const ExperimentConfig& cfg);
void write_convergence_csv(std::ostream& out, const ConvergenceResult& result);

// ---------------------------------------------------------------------------
// asymptotic: antenna-count plans over a user sweep, consumption curves and
// finite-Q accuracy of the large-Q predictions

struct SweepRow {
  int users = 0;
  int feasible = 0;
  int infeasible = 0;
  double trace_term = 0.0;
  double m_hat = 0.0;
  double m_dagger = 0.0;
  double p_bs_all = 0.0;
  double p_bs_dagger = 0.0;
  double p_bs_min = 0.0;
  double gain_vs_all = 0.0;
  double gain_vs_min = 0.0;
  double share_pas = 0.0;
  double share_circuit = 0.0;
  double share_fixed = 0.0;
};

struct CurveRow {
  int active_antennas = 0;
  double p_pas_bar = 0.0;
  double p_bs_bar = 0.0;
};

struct FiniteQRow {
  int users = 0;
  int subcarriers = 0;
  int realizations = 0;
  double mean_abs_error = 0.0;
  double variance_abs_error = 0.0;
};

struct AsymptoticResult {
  std::vector<SweepRow> sweep;
  std::vector<CurveRow> curve;
  /// Mean unconstrained optimum over realizations for the curve's user count.
  double curve_m_star = 0.0;
  std::vector<FiniteQRow> finite_q;
};

AsymptoticResult run_asymptotic(const ExperimentConfig& cfg);
void write_sweep_csv(std::ostream& out, const AsymptoticResult& result);
void write_curve_csv(std::ostream& out, const AsymptoticResult& result);
void write_finite_q_csv(std::ostream& out, const AsymptoticResult& result);

// ---------------------------------------------------------------------------
// validate: oracle identities

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<CheckResult> run_validation(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// shared helpers

/// Unit-scale test instance: beta = 1, noise power 1, gamma uniform in [1, 10].
struct Instance {
  ChannelRealization channel;
  QosTargets qos;
};
Instance make_unit_instance(int antennas, int users, int subcarriers, Rng& rng);

/// One realization of the configured cell: user drop plus channel.
struct Realization {
  UserDrop drop;
  ChannelRealization channel;
  QosTargets qos;
};
Realization draw_realization(const ScenarioConfig& scenario, int users, std::uint64_t index);

int resolve_threads(int requested);

/// Calls fn(i) for i in [0, count) on `threads` workers.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace energymimo::harness
