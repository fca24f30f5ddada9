#pragma once

#include "energymimo/model.hpp"

namespace energymimo {

/// Large-Q plan for how many antennas to switch on.
///
/// All quantities depend only on large-scale statistics through
/// trace_term = sum_k gamma_k sigma^2 / beta_k.
struct AsymptoticPlan {
  /// Continuous minimizer of the BS consumption (root of the quartic), > K.
  double m_tilde = 0.0;
  /// Fewest antennas whose uniform power stays within p_max.
  int m_hat = 0;
  int m_dagger = 0;
  /// Per-antenna power, PA and BS consumption when m_dagger antennas are on.
  double p_bar = 0.0;
  double p_pas_bar = 0.0;
  double p_bs_bar = 0.0;
  bool feasible = false;
};

/// trace_term / (M_a (M_a - K)).
double asymptotic_per_antenna_power(int active_antennas, int users, double trace_term);

/// alpha * sqrt(M_a / (M_a - K) * trace_term).
double asymptotic_pa_power(int active_antennas, int users, double trace_term, const PaModel& pa);

/// asymptotic_pa_power + p_fix + C * M_a.
double asymptotic_bs_power(int active_antennas, int users, double trace_term, const PaModel& pa,
                           const BsModel& bs);

/// Unique root x > K of x (x - K)^3 = t K / (2 C), by bracketed Newton.
/// The continuous BS-power minimizer is the root for t = a^2 K / (2 C) with
/// a = alpha * sqrt(trace_term); see optimal_ma_unconstrained.
double solve_quartic_ma(int users, double t, double circuit);

/// Integer antenna count minimizing the asymptotic BS consumption on [K+1, M],
/// ignoring per-antenna power caps.
int optimal_ma_unconstrained(int antennas, int users, double trace_term, const PaModel& pa,
                             const BsModel& bs);

/// Smallest integer M_a with trace_term / (M_a (M_a - K)) <= p_max.
/// Returns K when trace_term is zero.
int min_ma_power_constraint(int users, double trace_term, double p_max);

/// True when all M antennas at uniform power respect p_max.
bool feasibility_check(int antennas, int users, double trace_term, double p_max);

/// Optimal active-antenna count under per-antenna power caps.
/// Throws InfeasibleError (carrying the smallest feasible M) when even M
/// antennas exceed p_max.
AsymptoticPlan optimal_ma_constrained(int antennas, int users, double trace_term,
                                      const PaModel& pa, const BsModel& bs);

}  // namespace energymimo
