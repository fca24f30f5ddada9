#include "energymimo/model.hpp"

#include <string>

namespace energymimo {

namespace {

void require_nonnegative(const RVector& powers) {
  for (Eigen::Index m = 0; m < powers.size(); ++m) {
    if (!(powers[m] >= 0.0)) {
      throw DomainError("antenna " + std::to_string(m) + " has negative or NaN power");
    }
  }
}

}  // namespace

PaModel::PaModel(double p_max, double eta_max, double backoff)
    : p_max_(p_max), eta_max_(eta_max), backoff_(backoff) {
  if (!(p_max > 0.0)) throw DomainError("p_max must be positive");
  if (!(eta_max > 0.0 && eta_max <= 1.0)) throw DomainError("eta_max must lie in (0, 1]");
  if (!(backoff >= 1.0)) throw DomainError("back-off must be a linear ratio >= 1");
}

void BsModel::validate() const {
  if (!(p_fix >= 0.0)) throw DomainError("p_fix must be nonnegative");
  if (!(circuit_per_antenna >= 0.0)) throw DomainError("circuit power must be nonnegative");
  if (!(active_power_threshold >= 0.0)) throw DomainError("activity threshold must be nonnegative");
}

RVector per_antenna_powers(std::span<const CMatrix> precoders) {
  if (precoders.empty()) return RVector();
  const auto rows = precoders.front().rows();
  const auto cols = precoders.front().cols();
  RVector powers = RVector::Zero(rows);
  for (std::size_t q = 0; q < precoders.size(); ++q) {
    const CMatrix& w = precoders[q];
    if (w.rows() != rows || w.cols() != cols) {
      throw DimensionError("precoder " + std::to_string(q) + " is " + std::to_string(w.rows()) +
                           "x" + std::to_string(w.cols()) + ", expected " +
                           std::to_string(rows) + "x" + std::to_string(cols));
    }
    powers += w.rowwise().squaredNorm();
  }
  return powers;
}

double pa_consumed_power(const RVector& powers, double alpha) {
  require_nonnegative(powers);
  return alpha * powers.array().sqrt().sum();
}

double pa_consumed_power(const RVector& powers, const PaModel& pa) {
  return pa_consumed_power(powers, pa.alpha());
}

double ideal_pa_consumed_power(const RVector& powers, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("efficiency must lie in (0, 1]");
  require_nonnegative(powers);
  return powers.sum() / eta;
}

double pa_efficiency(double p, const PaModel& pa) {
  if (!(p > 0.0) || p > pa.p_sat()) {
    throw DomainError("output power must lie in (0, p_sat]");
  }
  return pa.eta_sat() * std::sqrt(p / pa.p_sat());
}

PowerReport bs_consumed_power(const RVector& powers, const PaModel& pa, const BsModel& bs) {
  bs.validate();
  PowerReport report;
  report.per_antenna = powers;
  report.p_pas = pa_consumed_power(powers, pa);
  report.p_tx = powers.sum();
  report.m_active = static_cast<int>((powers.array() > bs.active_power_threshold).count());
  const double circuits = bs.circuit_per_antenna * report.m_active;
  report.p_bs = report.p_pas + bs.p_fix + circuits;
  if (report.p_bs > 0.0) {
    report.shares = {report.p_pas / report.p_bs, circuits / report.p_bs, bs.p_fix / report.p_bs};
  }
  return report;
}

Gains gain_metrics(const PowerReport& reference, const PowerReport& candidate) {
  if (!(candidate.p_pas > 0.0) || !(candidate.p_bs > 0.0)) {
    throw DomainError("candidate consumption must be positive to form a gain");
  }
  return {reference.p_pas / candidate.p_pas, reference.p_bs / candidate.p_bs};
}

double estimate_flops(SystemKind system, SolverKind solver, int users, int antennas,
                      int subcarriers, int iterations) {
  const double k = users;
  const double m = antennas;
  const double q = system == SystemKind::narrowband ? 1.0 : subcarriers;
  const double i = iterations;

  // Cholesky of the Gram, M forward/backward substitutions, scaling.
  const double base = k * k * k * q / 3.0 + 3.0 * k * k * m * q + 2.0 * k * m * q + k * q;
  if (solver == SolverKind::conventional || system == SystemKind::asymptotic) return base;
  // Row powers: KQ magnitudes and K+Q-2 additions per antenna.
  const double power_update = k * q * m + k * m + q * m - 2.0 * m;
  return (base + power_update) * i;
}

}  // namespace energymimo
