#include <doctest.h>

#include <cmath>
#include <sstream>

#include "energymimo/harness.hpp"

using namespace energymimo;
using namespace energymimo::harness;

TEST_CASE("config defaults follow the reference table") {
  const ExperimentConfig cfg = parse_config("");
  CHECK(cfg.scenario.p_max_watts == 1.0);
  CHECK(cfg.scenario.eta_max == 0.22);
  CHECK(cfg.scenario.noise_dbm == -96.0);
  CHECK(cfg.scenario.p_fix_watts == 15.0);
  CHECK(cfg.scenario.circuit_watts == 0.7);
  CHECK(cfg.scenario.geometry.u_min == 35.0);
  CHECK(cfg.scenario.geometry.u_max == 250.0);
  CHECK(cfg.scenario.pa().backoff() == doctest::Approx(10.0));
  CHECK(cfg.realizations == 200);
  CHECK(cfg.discard_over_pmax);
}

TEST_CASE("config parsing") {
  const ExperimentConfig cfg = parse_config(
      "# comment\n"
      "antennas = 64   # trailing comment\n"
      "users = 1:3, 8\n"
      "subcarriers=128\n"
      "channel = los\n"
      "precoders = min_pa\n"
      "discard_over_pmax = off\n"
      "fp_tolerance = 1e-6\n"
      "seed = 42\n");
  CHECK(cfg.scenario.antennas == 64);
  CHECK(cfg.scenario.users == std::vector<int>{1, 2, 3, 8});
  CHECK(cfg.scenario.subcarriers == 128);
  CHECK(cfg.scenario.channel == ChannelKind::los);
  CHECK(cfg.precoders == std::vector<std::string>{"min_pa"});
  CHECK_FALSE(cfg.discard_over_pmax);
  CHECK(cfg.fixed_point.tolerance == 1e-6);
  CHECK(cfg.scenario.seed == 42);
}

TEST_CASE("config errors carry line numbers") {
  auto line_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK(line_of("antennas = 4\nusers = four\n") == 2);
  CHECK(line_of("\n\nbogus = 1\n") == 3);
  CHECK(line_of("antennas 4\n") == 1);
  CHECK(line_of("precoders = zf, mmse\n") == 1);
  CHECK(line_of("users = 5:2\n") == 1);
  CHECK_THROWS_AS(parse_config("realizations = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("eta_max = 2\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.cfg"), ConfigError);
}

TEST_CASE("number formatting uses nine significant digits") {
  CHECK(format_number(1.0 / 3.0) == "0.333333333");
  CHECK(format_number(2.5e-13) == "2.5e-13");
  CHECK(format_number(12) == "12");
}

TEST_CASE("run is deterministic across thread counts") {
  ExperimentConfig cfg = parse_config("antennas = 12\nusers = 2\nrealizations = 5\nseed = 3\n");
  cfg.threads = 1;
  std::ostringstream a, b;
  write_run_csv(a, run_experiment(cfg));
  cfg.threads = 4;
  write_run_csv(b, run_experiment(cfg));
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("seed,realization,solver,p_tx,p_pas,p_bs,m_active,gain_pas,gain_bs,discarded\n", 0) == 0);
}

TEST_CASE("run rows and discard rule") {
  ExperimentConfig cfg = parse_config(
      "antennas = 8\nusers = 1\nrealizations = 6\nprecoders = zf,min_pa,saturating\n");
  RunResult r = run_experiment(cfg);
  REQUIRE(r.rows.size() == 18);
  for (std::size_t i = 0; i < r.rows.size(); i += 3) {
    CHECK(r.rows[i].solver == "zf");
    CHECK(r.rows[i].gain_pas == 1.0);
    CHECK(r.rows[i].m_active == 8);
    CHECK(r.rows[i + 1].gain_pas >= 1.0 - 1e-6);
    CHECK(r.rows[i + 1].discarded == r.rows[i].discarded);
    CHECK_FALSE(r.rows[i + 2].discarded);
  }

  // A cap far below the radiated powers discards every zero-forcing realization,
  // while the saturating precoder only drops out when it cannot reach the target.
  cfg.scenario.p_max_watts = 1e-9;
  r = run_experiment(cfg);
  CHECK(r.summary[0].kept == 0);
  CHECK(r.summary[0].discarded == 6);
  for (std::size_t i = 2; i < r.rows.size(); i += 3) {
    CHECK(r.rows[i].discarded == std::isnan(r.rows[i].p_bs));
  }

  cfg.scenario.users = {2};
  CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
  cfg.scenario.users = {9};
  cfg.precoders = {"zf"};
  CHECK_THROWS_AS(run_experiment(cfg), InfeasibleError);
  cfg.scenario.users = {1, 2};
  CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
}

TEST_CASE("convergence study") {
  ExperimentConfig cfg = parse_config("antennas = 6\nusers = 2\nrealizations = 2\n");
  ConvergenceResult r = run_convergence(cfg);
  CHECK(r.oracle_used);
  CHECK(r.warning.empty());
  REQUIRE(r.final_sq_dist.size() == 2);
  for (double d : r.final_sq_dist) CHECK(d < 1e-2);
  CHECK(r.rows.front().run == 0);
  CHECK(r.rows.front().iteration == 1);

  cfg.scenario.antennas = 16;
  r = run_convergence(cfg);
  CHECK_FALSE(r.oracle_used);
  CHECK_FALSE(r.warning.empty());
  CHECK(std::isnan(r.rows.front().sq_dist_to_oracle));
}

TEST_CASE("asymptotic study") {
  ExperimentConfig cfg = parse_config(
      "antennas = 64\nusers = 1:12\nrealizations = 20\ncurve_users = 4\n"
      "finite_q_users = 2\nfinite_q_subcarriers = 8\n");
  cfg.realizations = 20;
  const AsymptoticResult r = run_asymptotic(cfg);
  REQUIRE(r.sweep.size() == 12);
  for (std::size_t i = 0; i < r.sweep.size(); ++i) {
    const SweepRow& row = r.sweep[i];
    CHECK(row.feasible + row.infeasible == 20);
    CHECK(row.gain_vs_all >= 1.0);
    CHECK(row.share_pas + row.share_circuit + row.share_fixed == doctest::Approx(1.0));
    if (i > 0) CHECK(row.m_dagger >= r.sweep[i - 1].m_dagger);
  }
  CHECK(r.curve.size() == 60);
  CHECK(r.curve.front().active_antennas == 5);
  REQUIRE(r.finite_q.size() == 1);
  CHECK(r.finite_q[0].subcarriers == 8);
  CHECK(r.finite_q[0].mean_abs_error >= 0.0);

  std::ostringstream s;
  write_sweep_csv(s, r);
  CHECK(s.str().rfind("users,feasible,infeasible,", 0) == 0);
}

TEST_CASE("validation suite and fault injection") {
  ExperimentConfig cfg = parse_config("seed = 5\n");
  for (const CheckResult& c : run_validation(cfg)) {
    INFO(c.name << ": " << c.detail);
    CHECK(c.passed);
  }
  cfg.fault_alpha_scale = 1.1;
  bool pa_failed = false;
  for (const CheckResult& c : run_validation(cfg)) {
    if (c.name == "pa-consumption") pa_failed = !c.passed;
  }
  CHECK(pa_failed);
}
