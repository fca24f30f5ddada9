#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "energymimo/harness.hpp"

namespace energymimo::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

bool exceeds(const RVector& powers, double p_max) { return (powers.array() > p_max).any(); }

int single_user_count(const ScenarioConfig& scenario) {
  if (scenario.users.size() != 1) {
    throw ConfigError("this command takes a single user count, got a sweep of " +
                      std::to_string(scenario.users.size()));
  }
  const int users = scenario.users.front();
  if (scenario.antennas < users) {
    throw InfeasibleError("zero-forcing needs at least as many antennas as users (M=" +
                              std::to_string(scenario.antennas) + ", K=" + std::to_string(users) + ")",
                          0.0, users);
  }
  return users;
}

ScenarioConfig with_subcarriers(ScenarioConfig scenario, int subcarriers) {
  scenario.subcarriers = subcarriers;
  return scenario;
}

UserDrop first_users(const UserDrop& drop, int users) {
  return {drop.distances.head(users), drop.beta.head(users), drop.gamma.head(users)};
}

}  // namespace

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ENERGYMIMO_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  threads = std::clamp(threads, 1, std::max(count, 1));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

Instance make_unit_instance(int antennas, int users, int subcarriers, Rng& rng) {
  std::uniform_real_distribution<double> target(1.0, 10.0);
  Instance out;
  out.qos.gamma = RVector(users);
  for (int k = 0; k < users; ++k) out.qos.gamma[k] = target(rng);
  out.qos.noise_power = 1.0;
  out.qos.subcarriers = subcarriers;
  out.channel = draw_rayleigh_channel(antennas, users, subcarriers, RVector::Ones(users), {}, rng);
  return out;
}

Realization draw_realization(const ScenarioConfig& scenario, int users, std::uint64_t index) {
  Rng rng = make_stream(scenario.seed, index);
  Realization out;
  out.drop = draw_user_drop(users, scenario.geometry, rng, scenario.sinr_reference);
  if (scenario.channel == ChannelKind::los) {
    out.channel = draw_los_channel(scenario.antennas, users, scenario.subcarriers, rng);
  } else {
    out.channel = draw_rayleigh_channel(scenario.antennas, users, scenario.subcarriers,
                                        out.drop.beta, scenario.correlation, rng);
  }
  out.qos.gamma = out.drop.gamma;
  out.qos.noise_power = scenario.noise_power();
  out.qos.subcarriers = scenario.subcarriers;
  return out;
}

// ---------------------------------------------------------------------------

RunResult run_experiment(const ExperimentConfig& cfg) {
  const ScenarioConfig& scenario = cfg.scenario;
  const int users = single_user_count(scenario);
  const bool wants_saturating =
      std::find(cfg.precoders.begin(), cfg.precoders.end(), "saturating") != cfg.precoders.end();
  if (wants_saturating && (users != 1 || scenario.subcarriers != 1)) {
    throw ConfigError("the saturating precoder needs users = 1 and subcarriers = 1");
  }
  const PaModel pa = scenario.pa();
  const BsModel bs = scenario.bs();
  const std::size_t per_realization = cfg.precoders.size();

  std::vector<RunRow> rows(static_cast<std::size_t>(cfg.realizations) * per_realization);
  parallel_for(cfg.realizations, resolve_threads(cfg.threads), [&](int r) {
    const Realization real = draw_realization(scenario, users, static_cast<std::uint64_t>(r));
    const PrecoderSolution zf = zf_precoder(real.channel, real.qos);
    const PowerReport zf_report = bs_consumed_power(zf.powers, pa, bs);

    PrecoderSolution min_pa;
    const bool wants_min_pa =
        std::find(cfg.precoders.begin(), cfg.precoders.end(), "min_pa") != cfg.precoders.end();
    if (wants_min_pa) min_pa = min_pa_precoder(real.channel, real.qos, cfg.fixed_point);

    const bool over = cfg.discard_over_pmax &&
                      (exceeds(zf.powers, pa.p_max()) ||
                       (wants_min_pa && exceeds(min_pa.powers, pa.p_max())));

    for (std::size_t j = 0; j < per_realization; ++j) {
      const std::string& name = cfg.precoders[j];
      RunRow& row = rows[static_cast<std::size_t>(r) * per_realization + j];
      row.seed = scenario.seed;
      row.realization = r;
      row.solver = name;

      PowerReport report;
      if (name == "zf") {
        report = zf_report;
        row.discarded = over;
      } else if (name == "min_pa") {
        report = bs_consumed_power(min_pa.powers, pa, bs);
        row.discarded = over;
      } else {
        try {
          const PrecoderSolution sat = single_user_saturating_precoder(
              real.channel.per_subcarrier[0].row(0).transpose(), real.qos.gamma[0],
              real.qos.sigma(), pa.p_max());
          report = bs_consumed_power(sat.powers, pa, bs);
        } catch (const InfeasibleError&) {
          row.p_tx = row.p_pas = row.p_bs = row.gain_pas = row.gain_bs = kNaN;
          row.m_active = 0;
          row.discarded = true;
          continue;
        }
      }
      const Gains g = gain_metrics(zf_report, report);
      row.p_tx = report.p_tx;
      row.p_pas = report.p_pas;
      row.p_bs = report.p_bs;
      row.m_active = report.m_active;
      row.gain_pas = g.pas;
      row.gain_bs = g.bs;
    }
  });

  RunResult result;
  result.rows = std::move(rows);
  for (const std::string& name : cfg.precoders) {
    SolverSummary s;
    s.solver = name;
    std::vector<double> gp, gb, ma;
    for (const RunRow& row : result.rows) {
      if (row.solver != name) continue;
      if (row.discarded) {
        ++s.discarded;
        continue;
      }
      ++s.kept;
      gp.push_back(row.gain_pas);
      gb.push_back(row.gain_bs);
      ma.push_back(row.m_active);
    }
    s.mean_gain_pas = mean(gp);
    s.mean_gain_bs = mean(gb);
    s.mean_m_active = mean(ma);
    result.summary.push_back(s);
  }
  return result;
}

void write_run_csv(std::ostream& out, const RunResult& result) {
  out << "seed,realization,solver,p_tx,p_pas,p_bs,m_active,gain_pas,gain_bs,discarded\n";
  for (const RunRow& r : result.rows) {
    out << r.seed << ',' << r.realization << ',' << r.solver << ',' << format_number(r.p_tx)
        << ',' << format_number(r.p_pas) << ',' << format_number(r.p_bs) << ',' << r.m_active
        << ',' << format_number(r.gain_pas) << ',' << format_number(r.gain_bs) << ','
        << (r.discarded ? 1 : 0) << '\n';
  }
}

// ---------------------------------------------------------------------------

ConvergenceResult run_convergence(const ExperimentConfig& cfg) {
  const ScenarioConfig& scenario = cfg.scenario;
  const int users = single_user_count(scenario);
  const int antennas = scenario.antennas;
  const int subcarriers = scenario.subcarriers;
  const PaModel pa = scenario.pa();
  const oracle::BruteForceOptions& guard = cfg.oracle_options;

  ConvergenceResult result;
  const bool analytic = users == 1 && subcarriers == 1;
  const bool within_guard = antennas <= guard.max_antennas && users <= guard.max_users &&
                            subcarriers <= guard.max_subcarriers;
  result.oracle_used = cfg.oracle && (analytic || within_guard);
  if (cfg.oracle && !result.oracle_used) {
    result.warning = "instance " + std::to_string(antennas) + "x" + std::to_string(users) + "x" +
                     std::to_string(subcarriers) +
                     " exceeds the oracle size guard; distance column left empty";
  }

  const auto n = static_cast<std::size_t>(cfg.realizations);
  std::vector<std::vector<ConvergenceRow>> per_run(n);
  result.iterations.assign(n, 0);
  result.converged.assign(n, false);
  result.final_sq_dist.assign(n, kNaN);

  parallel_for(cfg.realizations, resolve_threads(cfg.threads), [&](int r) {
    const Realization real = draw_realization(scenario, users, static_cast<std::uint64_t>(r));
    RVector reference;
    if (result.oracle_used) {
      if (analytic) {
        reference = oracle::single_user_analytic(real.channel.per_subcarrier[0].row(0).transpose(),
                                                 real.qos.gamma[0], real.qos.noise_power,
                                                 pa.alpha())
                        .powers;
      } else {
        oracle::BruteForceOptions opts = guard;
        opts.seed = scenario.seed + static_cast<std::uint64_t>(r);
        reference = oracle::solve_min_pa_bruteforce(real.channel, real.qos, pa.alpha(), opts).powers;
      }
    }
    auto distance = [&](const RVector& p) {
      return reference.size() == 0 ? kNaN : (p - reference).squaredNorm();
    };

    std::vector<ConvergenceRow>& rows = per_run[static_cast<std::size_t>(r)];
    const PrecoderSolution sol = min_pa_precoder(
        real.channel, real.qos, cfg.fixed_point, [&](int it, const RVector& p, double change) {
          rows.push_back({r, it, change, distance(p)});
        });
    result.iterations[r] = sol.iterations;
    result.converged[r] = sol.converged;
    result.final_sq_dist[r] = distance(sol.powers);
  });

  for (auto& rows : per_run) {
    result.rows.insert(result.rows.end(), rows.begin(), rows.end());
  }
  return result;
}

void write_convergence_csv(std::ostream& out, const ConvergenceResult& result) {
  out << "run,iteration,max_abs_change,sq_dist_to_oracle\n";
  for (const ConvergenceRow& r : result.rows) {
    out << r.run << ',' << r.iteration << ',' << format_number(r.max_abs_change) << ','
        << format_number(r.sq_dist_to_oracle) << '\n';
  }
}

// ---------------------------------------------------------------------------

AsymptoticResult run_asymptotic(const ExperimentConfig& cfg) {
  const ScenarioConfig& scenario = cfg.scenario;
  const int antennas = scenario.antennas;
  const PaModel pa = scenario.pa();
  const BsModel bs = scenario.bs();
  const double noise = scenario.noise_power();
  const int threads = resolve_threads(cfg.threads);
  const int realizations = cfg.realizations;

  int max_users = *std::max_element(scenario.users.begin(), scenario.users.end());
  max_users = std::max(max_users, cfg.curve_users);
  if (max_users < 1) throw ConfigError("users must be >= 1");

  // Nested drops: user count K sees the first K users of one shared drop.
  std::vector<UserDrop> drops(static_cast<std::size_t>(realizations));
  for (int r = 0; r < realizations; ++r) {
    Rng rng = make_stream(scenario.seed, static_cast<std::uint64_t>(r));
    drops[r] = draw_user_drop(max_users, scenario.geometry, rng, scenario.sinr_reference);
  }

  AsymptoticResult result;
  for (int users : scenario.users) {
    SweepRow row;
    row.users = users;
    std::vector<double> tr_v, mh, md, all, dag, mn, g_all, g_min, s0, s1, s2;
    for (const UserDrop& full : drops) {
      const UserDrop drop = first_users(full, users);
      const double tr = trace_term(drop.beta, drop.gamma, noise);
      tr_v.push_back(tr);
      AsymptoticPlan plan;
      try {
        plan = optimal_ma_constrained(antennas, users, tr, pa, bs);
      } catch (const InfeasibleError&) {
        ++row.infeasible;
        continue;
      }
      ++row.feasible;
      const double p_all = asymptotic_bs_power(antennas, users, tr, pa, bs);
      const double p_min = asymptotic_bs_power(users + 1, users, tr, pa, bs);
      mh.push_back(plan.m_hat);
      md.push_back(plan.m_dagger);
      all.push_back(p_all);
      dag.push_back(plan.p_bs_bar);
      mn.push_back(p_min);
      g_all.push_back(p_all / plan.p_bs_bar);
      g_min.push_back(p_min / plan.p_bs_bar);
      const RVector uniform =
          RVector::Constant(antennas, asymptotic_per_antenna_power(antennas, users, tr));
      const PowerReport report = bs_consumed_power(uniform, pa, bs);
      s0.push_back(report.shares[0]);
      s1.push_back(report.shares[1]);
      s2.push_back(report.shares[2]);
    }
    row.trace_term = mean(tr_v);
    row.m_hat = mean(mh);
    row.m_dagger = mean(md);
    row.p_bs_all = mean(all);
    row.p_bs_dagger = mean(dag);
    row.p_bs_min = mean(mn);
    row.gain_vs_all = mean(g_all);
    row.gain_vs_min = mean(g_min);
    row.share_pas = mean(s0);
    row.share_circuit = mean(s1);
    row.share_fixed = mean(s2);
    result.sweep.push_back(row);
  }

  if (cfg.curve_users > 0) {
    const int users = cfg.curve_users;
    if (antennas <= users) throw ConfigError("curve_users must be below antennas");
    std::vector<double> traces, stars;
    for (const UserDrop& full : drops) {
      const UserDrop drop = first_users(full, users);
      traces.push_back(trace_term(drop.beta, drop.gamma, noise));
      stars.push_back(optimal_ma_unconstrained(antennas, users, traces.back(), pa, bs));
    }
    result.curve_m_star = mean(stars);
    for (int ma = users + 1; ma <= antennas; ++ma) {
      CurveRow c;
      c.active_antennas = ma;
      for (double tr : traces) {
        c.p_pas_bar += asymptotic_pa_power(ma, users, tr, pa);
        c.p_bs_bar += asymptotic_bs_power(ma, users, tr, pa, bs);
      }
      c.p_pas_bar /= static_cast<double>(traces.size());
      c.p_bs_bar /= static_cast<double>(traces.size());
      result.curve.push_back(c);
    }
  }

  for (int users : cfg.finite_q_users) {
    if (antennas <= users) throw ConfigError("finite_q_users must be below antennas");
    for (int subcarriers : cfg.finite_q_subcarriers) {
      if (subcarriers < 1) throw ConfigError("finite_q_subcarriers must be >= 1");
      const ScenarioConfig sc = with_subcarriers(scenario, subcarriers);
      std::vector<double> errors(static_cast<std::size_t>(realizations));
      parallel_for(realizations, threads, [&](int r) {
        const Realization real = draw_realization(sc, users, static_cast<std::uint64_t>(r));
        const PrecoderSolution sol = min_pa_precoder(real.channel, real.qos, cfg.fixed_point);
        const double simulated = pa_consumed_power(sol.powers, pa);
        const double tr = trace_term(real.drop.beta, real.drop.gamma, real.qos.noise_power);
        errors[r] = std::abs(simulated - asymptotic_pa_power(antennas, users, tr, pa));
      });
      result.finite_q.push_back(
          {users, subcarriers, realizations, mean(errors), variance(errors)});
    }
  }
  return result;
}

void write_sweep_csv(std::ostream& out, const AsymptoticResult& result) {
  out << "users,feasible,infeasible,trace_term,m_hat,m_dagger,p_bs_all,p_bs_dagger,p_bs_min,"
         "gain_vs_all,gain_vs_min,share_pas,share_circuit,share_fixed\n";
  for (const SweepRow& r : result.sweep) {
    out << r.users << ',' << r.feasible << ',' << r.infeasible << ','
        << format_number(r.trace_term) << ',' << format_number(r.m_hat) << ','
        << format_number(r.m_dagger) << ',' << format_number(r.p_bs_all) << ','
        << format_number(r.p_bs_dagger) << ',' << format_number(r.p_bs_min) << ','
        << format_number(r.gain_vs_all) << ',' << format_number(r.gain_vs_min) << ','
        << format_number(r.share_pas) << ',' << format_number(r.share_circuit) << ','
        << format_number(r.share_fixed) << '\n';
  }
}

void write_curve_csv(std::ostream& out, const AsymptoticResult& result) {
  out << "active_antennas,p_pas_bar,p_bs_bar\n";
  for (const CurveRow& r : result.curve) {
    out << r.active_antennas << ',' << format_number(r.p_pas_bar) << ','
        << format_number(r.p_bs_bar) << '\n';
  }
}

void write_finite_q_csv(std::ostream& out, const AsymptoticResult& result) {
  out << "users,subcarriers,realizations,mean_abs_error,variance_abs_error\n";
  for (const FiniteQRow& r : result.finite_q) {
    out << r.users << ',' << r.subcarriers << ',' << r.realizations << ','
        << format_number(r.mean_abs_error) << ',' << format_number(r.variance_abs_error) << '\n';
  }
}

}  // namespace energymimo::harness
