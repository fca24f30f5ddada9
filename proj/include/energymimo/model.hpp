#pragma once

#include <array>
#include <span>

#include "energymimo/types.hpp"

namespace energymimo {

/// Power amplifier with square-root efficiency below saturation.
///
/// The operating ceiling `p_max` sits `backoff` below saturation, and
/// `eta_max` is the efficiency reached at `p_max`. Consumption of an
/// amplifier radiating p is alpha * sqrt(p) with alpha = sqrt(p_max) / eta_max.
/// p_sat is derived as p_max * backoff so the product is exact.
class PaModel {
 public:
  PaModel(double p_max, double eta_max, double backoff = 10.0);

  double p_max() const noexcept { return p_max_; }
  double eta_max() const noexcept { return eta_max_; }
  double backoff() const noexcept { return backoff_; }
  double p_sat() const noexcept { return p_max_ * backoff_; }
  /// Efficiency at saturation, eta_max * sqrt(backoff).
  double eta_sat() const noexcept { return eta_max_ * std::sqrt(backoff_); }
  double alpha() const noexcept { return std::sqrt(p_max_) / eta_max_; }

 private:
  double p_max_;
  double eta_max_;
  double backoff_;
};

/// Whole base-station consumption: PAs + p_fix + circuit_per_antenna * M_a.
struct BsModel {
  double p_fix = 15.0;
  double circuit_per_antenna = 0.7;
  /// Antennas radiating no more than this count as switched off.
  double active_power_threshold = 1e-9;

  void validate() const;
};

struct PowerReport {
  RVector per_antenna;
  double p_tx = 0.0;
  double p_pas = 0.0;
  double p_bs = 0.0;
  int m_active = 0;
  /// Fractions of p_bs spent in (PAs, circuits, fixed). When p_bs is zero the
  /// whole share is attributed to the fixed term.
  std::array<double, 3> shares{0.0, 0.0, 1.0};
};

/// p_m = sum over users and subcarriers of |w_{m,k,q}|^2. Every matrix is M x K.
RVector per_antenna_powers(std::span<const CMatrix> precoders);

/// alpha * sum_m sqrt(p_m).
double pa_consumed_power(const RVector& powers, const PaModel& pa);
double pa_consumed_power(const RVector& powers, double alpha);

/// Fixed-efficiency reference model: sum_m p_m / eta.
double ideal_pa_consumed_power(const RVector& powers, double eta);

/// eta_sat * sqrt(p / p_sat), defined on (0, p_sat].
double pa_efficiency(double p, const PaModel& pa);

PowerReport bs_consumed_power(const RVector& powers, const PaModel& pa, const BsModel& bs);

struct Gains {
  double pas = 1.0;
  double bs = 1.0;
};

/// Ratios reference / candidate for the PA and BS consumption.
Gains gain_metrics(const PowerReport& reference, const PowerReport& candidate);

enum class SystemKind { wideband, narrowband, asymptotic };
enum class SolverKind { proposed, conventional };

/// Complex flop count of one precoder computation.
///
/// For `asymptotic`, `antennas` is the number of active antennas that build
/// the precoder. `iterations` only matters for the proposed wideband and
/// narrowband solvers.
double estimate_flops(SystemKind system, SolverKind solver, int users, int antennas,
                      int subcarriers, int iterations);

}  // namespace energymimo
