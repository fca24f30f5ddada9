#pragma once

#include <cstdint>

#include "energymimo/channel.hpp"
#include "energymimo/model.hpp"

// Reference solvers that share no code with the precoding and asymptotic
// modules. They are slow on purpose and only meant to check those modules.
namespace energymimo::oracle {

enum class Method { nullspace_descent, analytic, grid };

struct OracleResult {
  RVector powers;
  /// alpha * sum_m sqrt(p_m).
  double objective = 0.0;
  Method method = Method::nullspace_descent;
  double zf_residual = 0.0;
  double gradient_norm = 0.0;
};

struct BruteForceOptions {
  int starts = 8;
  std::uint64_t seed = 0;
  /// Stop a smoothing level once the gradient (normalized units) is this small.
  double gradient_tolerance = 1e-8;
  /// Total Newton steps are capped at this factor times the number of real unknowns.
  int steps_per_dimension = 200;
  int max_antennas = 8;
  int max_users = 4;
  int max_subcarriers = 8;
};

/// Minimizes alpha * sum_m sqrt(p_m) over every precoder with H_q W_q = D.
///
/// Feasible precoders are W_q = W_q^+ + N_q Z_q, with W_q^+ the minimum-norm
/// solution and N_q an orthonormal null-space basis, both from an SVD of H_q.
/// The convex objective is smoothed as sum_m sqrt(|w_m|^2 + mu^2) and
/// minimized by damped Newton steps over Z while mu shrinks geometrically.
OracleResult solve_min_pa_bruteforce(const ChannelRealization& channel, const QosTargets& qos,
                                     double alpha, const BruteForceOptions& options = {});

/// Closed-form single-user narrowband optimum: the whole power on the
/// strongest antenna, sigma^2 gamma / |h_max|^2.
OracleResult single_user_analytic(const CVector& channel, double gamma, double noise_power,
                                  double alpha);

/// Sample mean of tr((H H^H)^{-1} D_gamma sigma^2) over i.i.d. Rayleigh draws.
double mc_inverse_wishart_trace(int antennas, int users, const RVector& beta,
                                const RVector& gamma, double noise_power, int draws, Rng& rng);

/// Exhaustive minimizer of the asymptotic BS consumption over the integer
/// antenna counts in (K, M] whose uniform power stays within p_max.
/// Ties go to the smaller count.
int grid_min_bs(int antennas, int users, double trace_term, const PaModel& pa,
                const BsModel& bs);

}  // namespace energymimo::oracle
