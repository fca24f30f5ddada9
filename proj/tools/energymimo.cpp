#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "energymimo/harness.hpp"

namespace fs = std::filesystem;
using namespace energymimo;
using namespace energymimo::harness;

namespace {

enum Exit { kOk = 0, kConfig = 1, kInfeasible = 2, kValidation = 3 };

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> realizations;
  std::optional<int> threads;
  std::vector<std::string> settings;
};

struct IoError : Error {
  using Error::Error;
};

ExperimentConfig resolve(const Options& o) {
  ExperimentConfig cfg = o.config.empty() ? parse_config("") : load_config(o.config);
  for (const std::string& kv : o.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
    apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) cfg.scenario.seed = *o.seed;
  if (o.realizations) {
    if (*o.realizations < 1) throw ConfigError("--realizations must be >= 1");
    cfg.realizations = *o.realizations;
  }
  if (o.threads) cfg.threads = *o.threads;
  if (!o.out.empty()) cfg.output_path = o.out;
  return cfg;
}

// Writes through `emit` to the configured file, or to stdout when none is set.
// Returns the stream human-readable summaries should go to.
template <class Emit>
std::ostream& write_output(const std::string& path, Emit emit) {
  if (path.empty()) {
    emit(std::cout);
    std::cout.flush();
    return std::cerr;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open " + path + " for writing");
  emit(file);
  file.close();
  if (!file) throw IoError("failed writing " + path);
  return std::cout;
}

std::string sibling(const std::string& path, const std::string& suffix) {
  const fs::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix + p.extension().string())).string();
}

int cmd_run(const Options& o) {
  const ExperimentConfig cfg = resolve(o);
  const RunResult result = run_experiment(cfg);
  std::ostream& log = write_output(cfg.output_path, [&](std::ostream& s) { write_run_csv(s, result); });
  for (const SolverSummary& s : result.summary) {
    log << s.solver << ": kept " << s.kept << ", discarded " << s.discarded << ", mean gain_pas "
        << format_number(s.mean_gain_pas) << ", mean gain_bs " << format_number(s.mean_gain_bs)
        << ", mean active antennas " << format_number(s.mean_m_active) << '\n';
  }
  return kOk;
}

int cmd_convergence(const Options& o) {
  const ExperimentConfig cfg = resolve(o);
  const ConvergenceResult result = run_convergence(cfg);
  if (!result.warning.empty()) std::cerr << "warning: " << result.warning << '\n';
  std::ostream& log =
      write_output(cfg.output_path, [&](std::ostream& s) { write_convergence_csv(s, result); });
  double iterations = 0.0;
  double dist = 0.0;
  int converged = 0;
  for (std::size_t i = 0; i < result.iterations.size(); ++i) {
    iterations += result.iterations[i];
    dist += result.final_sq_dist[i];
    converged += result.converged[i];
  }
  const double n = static_cast<double>(result.iterations.size());
  log << "runs " << result.iterations.size() << ", converged " << converged
      << ", mean iterations " << format_number(iterations / n)
      << ", mean final squared distance " << format_number(dist / n) << '\n';
  return kOk;
}

int cmd_asymptotic(const Options& o) {
  const ExperimentConfig cfg = resolve(o);
  const AsymptoticResult result = run_asymptotic(cfg);
  std::ostream& log =
      write_output(cfg.output_path, [&](std::ostream& s) { write_sweep_csv(s, result); });
  if (!cfg.output_path.empty()) {
    if (!result.curve.empty()) {
      write_output(sibling(cfg.output_path, "_curve"),
                   [&](std::ostream& s) { write_curve_csv(s, result); });
    }
    if (!result.finite_q.empty()) {
      write_output(sibling(cfg.output_path, "_finite_q"),
                   [&](std::ostream& s) { write_finite_q_csv(s, result); });
    }
  } else {
    if (!result.curve.empty()) write_curve_csv(std::cout, result);
    if (!result.finite_q.empty()) write_finite_q_csv(std::cout, result);
  }
  int infeasible = 0;
  for (const SweepRow& r : result.sweep) infeasible += r.infeasible;
  if (infeasible > 0) log << infeasible << " user drops violate the per-antenna cap\n";
  if (!result.curve.empty()) {
    log << "mean unconstrained optimum " << format_number(result.curve_m_star) << '\n';
  }
  return kOk;
}

int cmd_validate(const Options& o) {
  const ExperimentConfig cfg = resolve(o);
  bool ok = true;
  for (const CheckResult& c : run_validation(cfg)) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    ok = ok && c.passed;
  }
  return ok ? kOk : kValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-aware massive MIMO precoding experiments"};
  app.require_subcommand(1);

  Options o;
  std::uint64_t seed = 0;
  int realizations = 0;
  int threads = 0;
  int (*handler)(const Options&) = nullptr;

  auto add = [&](const char* name, const char* help, int (*fn)(const Options&)) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config, "Config file (key = value)")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "Output CSV path (stdout when omitted)");
    sub->add_option("--seed", seed, "Master seed (overrides the config)");
    sub->add_option("--realizations", realizations, "Monte-Carlo realizations");
    sub->add_option("--threads", threads, "Worker threads (default: ENERGYMIMO_THREADS or all cores)");
    sub->add_option("--set", o.settings, "Extra KEY=VALUE config overrides");
    sub->callback([&, fn, sub] {
      handler = fn;
      if (sub->count("--seed")) o.seed = seed;
      if (sub->count("--realizations")) o.realizations = realizations;
      if (sub->count("--threads")) o.threads = threads;
    });
  };
  add("run", "Per-realization consumption of each precoder against zero-forcing", cmd_run);
  add("convergence", "Fixed-point trajectory and distance to the reference optimum", cmd_convergence);
  add("asymptotic", "Antenna-count plans, consumption curves and finite-Q accuracy", cmd_asymptotic);
  add("validate", "Oracle identity checks", cmd_validate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    return handler(o);
  } catch (const ConfigError& e) {
    if (e.line() > 0) {
      std::cerr << "config error (line " << e.line() << "): " << e.what() << '\n';
    } else {
      std::cerr << "config error: " << e.what() << '\n';
    }
    return kConfig;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible scenario: " << e.what() << '\n';
    return kInfeasible;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  }
}
