#include "energymimo/asymptotic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace energymimo {

namespace {

void require_zf_margin(int active_antennas, int users) {
  if (users < 1) throw DomainError("user count must be >= 1");
  if (active_antennas <= users) {
    throw DomainError("zero-forcing needs more active antennas than users (M_a=" +
                      std::to_string(active_antennas) + ", K=" + std::to_string(users) + ")");
  }
}

// Continuous minimizer of the asymptotic BS consumption over M_a > K;
// +inf when circuits are free, K when there is nothing to transmit.
double continuous_optimum(int users, double trace_term, const PaModel& pa, const BsModel& bs) {
  if (trace_term <= 0.0) return users;
  if (bs.circuit_per_antenna <= 0.0) return std::numeric_limits<double>::infinity();
  // Stationarity of t sqrt(x / (x - K)) + C x gives x (x - K)^3 = (t K / (2C))^2,
  // i.e. the quartic with constant t' = t^2 K / (2C) in place of t.
  const double t = pa.alpha() * std::sqrt(trace_term);
  const double c = bs.circuit_per_antenna;
  return solve_quartic_ma(users, t * t * users / (2.0 * c), c);
}

// Ceil-floor operator: whichever neighbouring integer gives the lower
// consumption, the smaller one on exact ties.
int ceil_floor(double x, int users, double trace_term, const PaModel& pa, const BsModel& bs) {
  const int lo = static_cast<int>(std::floor(x));
  const int hi = static_cast<int>(std::ceil(x));
  if (lo == hi) return lo;
  const double f_lo = asymptotic_bs_power(lo, users, trace_term, pa, bs);
  const double f_hi = asymptotic_bs_power(hi, users, trace_term, pa, bs);
  return f_hi < f_lo ? hi : lo;
}

}  // namespace

double asymptotic_per_antenna_power(int active_antennas, int users, double trace_term) {
  require_zf_margin(active_antennas, users);
  const double ma = active_antennas;
  return trace_term / (ma * (ma - users));
}

double asymptotic_pa_power(int active_antennas, int users, double trace_term, const PaModel& pa) {
  require_zf_margin(active_antennas, users);
  const double ma = active_antennas;
  return pa.alpha() * std::sqrt(ma / (ma - users) * trace_term);
}

double asymptotic_bs_power(int active_antennas, int users, double trace_term, const PaModel& pa,
                           const BsModel& bs) {
  return asymptotic_pa_power(active_antennas, users, trace_term, pa) + bs.p_fix +
         bs.circuit_per_antenna * active_antennas;
}

double solve_quartic_ma(int users, double t, double circuit) {
  if (users < 1) throw DomainError("user count must be >= 1");
  if (!(t > 0.0) || !(circuit > 0.0)) throw DomainError("t and C must be positive");
  const double k = users;
  const double c = t * k / (2.0 * circuit);

  // Work in y = x - K so tiny offsets keep full precision. g(y) = (y + K) y^3 - c
  // is strictly increasing on y > 0 and (y + K) y^3 >= max(y^4, K y^3).
  auto g = [&](double y) { return (y + k) * y * y * y - c; };
  double lo = 0.0;
  double hi = std::min(std::pow(c, 0.25), std::cbrt(c / k));
  double y = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double value = g(y);
    if (value == 0.0) break;
    (value < 0.0 ? lo : hi) = y;
    const double slope = 4.0 * y * y * y + 3.0 * k * y * y;
    double next = slope > 0.0 ? y - value / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - y) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(next, 1e-300)) {
      y = next;
      break;
    }
    y = next;
  }
  return k + y;
}

int optimal_ma_unconstrained(int antennas, int users, double trace_term, const PaModel& pa,
                             const BsModel& bs) {
  if (antennas <= users) {
    throw InfeasibleError("zero-forcing needs M >= K + 1", 0.0, users + 1);
  }
  const double root = continuous_optimum(users, trace_term, pa, bs);
  const double clamped = std::clamp(root, static_cast<double>(users + 1),
                                    static_cast<double>(antennas));
  return ceil_floor(clamped, users, trace_term, pa, bs);
}

int min_ma_power_constraint(int users, double trace_term, double p_max) {
  if (!(p_max > 0.0)) throw DomainError("p_max must be positive");
  const double k = users;
  const double bound = 0.5 * (k + std::sqrt(k * k + 4.0 * trace_term / p_max));
  int m = static_cast<int>(std::ceil(bound));
  // The closed form can land one off when the bound is an integer up to rounding;
  // settle on the exact smallest count satisfying the power inequality.
  auto fits = [&](int ma) { return ma > users && trace_term / (double(ma) * (ma - users)) <= p_max; };
  if (m <= users) return m;
  while (m - 1 > users && fits(m - 1)) --m;
  while (!fits(m)) ++m;
  return m;
}

bool feasibility_check(int antennas, int users, double trace_term, double p_max) {
  if (antennas <= users) return false;
  return asymptotic_per_antenna_power(antennas, users, trace_term) <= p_max;
}

AsymptoticPlan optimal_ma_constrained(int antennas, int users, double trace_term,
                                      const PaModel& pa, const BsModel& bs) {
  if (antennas <= users) {
    throw InfeasibleError("zero-forcing needs M >= K + 1", 0.0, users + 1);
  }
  const int m_hat = min_ma_power_constraint(users, trace_term, pa.p_max());
  if (!feasibility_check(antennas, users, trace_term, pa.p_max())) {
    throw InfeasibleError("per-antenna power exceeds p_max even with all " +
                              std::to_string(antennas) + " antennas; need M >= " +
                              std::to_string(m_hat),
                          0.0, m_hat);
  }

  AsymptoticPlan plan;
  plan.feasible = true;
  plan.m_hat = m_hat;
  plan.m_tilde = continuous_optimum(users, trace_term, pa, bs);

  const double y = std::max(static_cast<double>(m_hat), plan.m_tilde);
  if (y <= users + 1) {
    plan.m_dagger = users + 1;
  } else if (y >= antennas) {
    plan.m_dagger = antennas;
  } else {
    plan.m_dagger = ceil_floor(y, users, trace_term, pa, bs);
  }

  plan.p_bar = asymptotic_per_antenna_power(plan.m_dagger, users, trace_term);
  plan.p_pas_bar = asymptotic_pa_power(plan.m_dagger, users, trace_term, pa);
  plan.p_bs_bar = asymptotic_bs_power(plan.m_dagger, users, trace_term, pa, bs);
  return plan;
}

}  // namespace energymimo
