#include <algorithm>
#include <cmath>
#include <cstdio>

#include "energymimo/harness.hpp"

namespace energymimo::harness {

namespace {

std::string describe(const char* fmt, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  return buf;
}

double relative_gap(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

FixedPointConfig tight_fixed_point() {
  FixedPointConfig fp;
  fp.tolerance = 1e-11;
  fp.max_iterations = 200000;
  return fp;
}

CheckResult check_bruteforce(const ExperimentConfig& cfg) {
  Rng rng = make_stream(cfg.scenario.seed, 101);
  std::uniform_int_distribution<int> users_d(1, 3), sub_d(1, 4);
  const double alpha = cfg.scenario.pa().alpha();
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const int k = users_d(rng);
    const int m = std::uniform_int_distribution<int>(k + 1, 6)(rng);
    const Instance inst = make_unit_instance(m, k, sub_d(rng), rng);
    const PrecoderSolution sol = min_pa_precoder(inst.channel, inst.qos, tight_fixed_point());
    oracle::BruteForceOptions opts;
    opts.seed = cfg.scenario.seed + static_cast<std::uint64_t>(i);
    const auto ref = oracle::solve_min_pa_bruteforce(inst.channel, inst.qos, alpha, opts);
    worst = std::max(worst, relative_gap(pa_consumed_power(sol.powers, alpha), ref.objective));
  }
  return {"bruteforce-equivalence", worst <= 1e-3,
          describe("max relative gap %.3g (limit %.3g)", worst, 1e-3)};
}

CheckResult check_pa_consumption(const ExperimentConfig& cfg) {
  const ScenarioConfig& s = cfg.scenario;
  const PaModel model(s.p_max_watts, s.eta_max / cfg.fault_alpha_scale,
                      db_to_linear(s.backoff_db));
  const double alpha = std::sqrt(s.p_max_watts) / s.eta_max;
  Rng rng = make_stream(s.seed, 102);
  std::uniform_real_distribution<double> u(0.0, s.p_max_watts);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    RVector p(16);
    double by_alpha = 0.0;
    double by_efficiency = 0.0;
    for (int m = 0; m < p.size(); ++m) {
      p[m] = u(rng);
      by_alpha += alpha * std::sqrt(p[m]);
      if (p[m] > 0.0) by_efficiency += p[m] / (s.eta_max * std::sqrt(p[m] / s.p_max_watts));
    }
    const double got = pa_consumed_power(p, model);
    worst = std::max({worst, relative_gap(got, by_alpha), relative_gap(got, by_efficiency)});
  }
  return {"pa-consumption", worst <= 1e-12,
          describe("max relative gap %.3g (limit %.3g)", worst, 1e-12)};
}

CheckResult check_zf_residual(const ExperimentConfig& cfg) {
  Rng rng = make_stream(cfg.scenario.seed, 103);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int k = std::uniform_int_distribution<int>(1, 8)(rng);
    const int m = std::uniform_int_distribution<int>(k, 64)(rng);
    const int q = std::uniform_int_distribution<int>(1, 16)(rng);
    const Instance inst = make_unit_instance(m, k, q, rng);
    const PrecoderSolution sol = zf_precoder(inst.channel, inst.qos);
    worst = std::max(worst, max_zf_residual(inst.channel, inst.qos, sol.matrices));
  }
  return {"zf-residual", worst <= 1e-9, describe("max residual %.3g (limit %.3g)", worst, 1e-9)};
}

CheckResult check_single_user(const ExperimentConfig& cfg) {
  Rng rng = make_stream(cfg.scenario.seed, 104);
  const double alpha = cfg.scenario.pa().alpha();
  FixedPointConfig fp;
  fp.tolerance = 1e-13;
  fp.max_iterations = 1000000;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int m = std::uniform_int_distribution<int>(2, 32)(rng);
    const Instance inst = make_unit_instance(m, 1, 1, rng);
    const PrecoderSolution sol = min_pa_precoder(inst.channel, inst.qos, fp);
    const double gain = inst.channel.per_subcarrier[0].cwiseAbs().maxCoeff();
    const double expected = alpha * std::sqrt(inst.qos.noise_power * inst.qos.gamma[0]) / gain;
    worst = std::max(worst, relative_gap(pa_consumed_power(sol.powers, alpha), expected));
  }
  return {"single-user-closed-form", worst <= 1e-3,
          describe("max relative gap %.3g (limit %.3g)", worst, 1e-3)};
}

CheckResult check_wishart(const ExperimentConfig& cfg) {
  Rng rng = make_stream(cfg.scenario.seed, 105);
  const int m = 16;
  const int k = 4;
  Rng drop_rng = make_stream(cfg.scenario.seed, 106);
  const UserDrop drop = draw_user_drop(k, cfg.scenario.geometry, drop_rng, cfg.scenario.sinr_reference);
  const double noise = cfg.scenario.noise_power();
  const double estimate =
      oracle::mc_inverse_wishart_trace(m, k, drop.beta, drop.gamma, noise, 10000, rng);
  const double expected = trace_term(drop.beta, drop.gamma, noise) / (m - k);
  const double gap = relative_gap(estimate, expected);
  return {"inverse-wishart", gap <= 0.02, describe("relative gap %.3g (limit %.3g)", gap, 0.02)};
}

CheckResult check_grid(const ExperimentConfig& cfg) {
  Rng rng = make_stream(cfg.scenario.seed, 107);
  const ScenarioConfig& s = cfg.scenario;
  const PaModel pa = s.pa();
  const BsModel bs = s.bs();
  int tested = 0;
  int mismatches = 0;
  while (tested < 100) {
    const int m = std::uniform_int_distribution<int>(2, 256)(rng);
    const int k = std::uniform_int_distribution<int>(1, m - 1)(rng);
    const double tr = std::exp(std::uniform_real_distribution<double>(-3.0, 5.0)(rng)) * k;
    if (!feasibility_check(m, k, tr, pa.p_max())) continue;
    ++tested;
    const int fast = optimal_ma_constrained(m, k, tr, pa, bs).m_dagger;
    if (fast != oracle::grid_min_bs(m, k, tr, pa, bs)) ++mismatches;
  }
  return {"grid-equivalence", mismatches == 0,
          describe("%.0f mismatches over %.0f scenarios", mismatches, tested)};
}

CheckResult check_los(const ExperimentConfig& cfg) {
  Rng rng = make_stream(cfg.scenario.seed, 108);
  const double alpha = cfg.scenario.pa().alpha();
  const int m = 16;
  const int q = 8;
  const ChannelRealization channel = draw_los_channel(m, 1, q, rng);
  const double gamma = 5.0;
  const double sigma = 1.0;
  const double expected = alpha * sigma * std::sqrt(gamma);
  QosTargets qos{RVector::Constant(1, gamma), sigma * sigma, q};
  double worst = 0.0;
  double residual = 0.0;
  std::exponential_distribution<double> e(1.0);
  for (int i = 0; i < 20; ++i) {
    RVector w(m);
    for (int j = 0; j < m; ++j) w[j] = e(rng);
    w /= w.sum();
    const PrecoderSolution sol = los_allocation_precoder(channel, gamma, sigma, w);
    worst = std::max(worst, relative_gap(pa_consumed_power(sol.powers, alpha), expected));
    residual = std::max(residual, max_zf_residual(channel, qos, sol.matrices));
  }
  const bool ok = worst <= 1e-12 && residual <= 1e-9;
  return {"los-invariance", ok,
          describe("max relative gap %.3g, max residual %.3g", worst, residual)};
}

}  // namespace

std::vector<CheckResult> run_validation(const ExperimentConfig& cfg) {
  return {check_zf_residual(cfg), check_pa_consumption(cfg), check_single_user(cfg),
          check_bruteforce(cfg),  check_wishart(cfg),        check_grid(cfg),
          check_los(cfg)};
}

}  // namespace energymimo::harness
