#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "energymimo/channel.hpp"
#include "energymimo/model.hpp"

namespace energymimo {

/// One precoder per subcarrier (M x K each) with its per-antenna powers.
struct PrecoderSolution {
  std::vector<CMatrix> matrices;
  RVector powers;
  int iterations = 0;
  bool converged = true;
  /// Max absolute power change of the last fixed-point step (0 for closed forms).
  double residual = 0.0;
  /// Max absolute power change after each fixed-point step.
  std::vector<double> residual_history;
  std::vector<int> active_set;
};

struct FixedPointConfig {
  double tolerance = 1e-4;
  int max_iterations = 2000;
  double initial_power = 1.0;
  /// Antennas whose iterate drops below this are switched off for good.
  double dead_antenna_floor = 1e-12;
  /// Ridge regularization * trace(Gram) added to the Gram diagonal.
  double regularization = 0.0;

  void validate() const;
};

/// Reciprocal condition number under which a Gram solve is refused.
inline constexpr double kMinGramRcond = 1e-12;

/// Called after every fixed-point step with the step index (1-based), the new
/// power vector and the max absolute change.
using IterationObserver = std::function<void(int, const RVector&, double)>;

/// Per-subcarrier zero-forcing, W_q = H_q^H (H_q H_q^H)^{-1} D.
PrecoderSolution zf_precoder(const ChannelRealization& channel, const QosTargets& qos);

/// Precoder minimizing alpha * sum_m sqrt(p_m) under the zero-forcing constraint.
///
/// Runs the power fixed point
///   p_m <- sum_{k,q} |[D_p^{1/2} H_q^H (H_q D_p^{1/2} H_q^H)^{-1} D]_{m,k}|^2
/// from p = initial_power until the largest absolute change is at most
/// `tolerance` or `max_iterations` steps were taken, then builds W_q from the
/// final powers. The reported powers are those of the returned matrices.
/// Non-convergence is reported through `converged`, not thrown.
PrecoderSolution min_pa_precoder(const ChannelRealization& channel, const QosTargets& qos,
                                 const FixedPointConfig& cfg = {},
                                 const IterationObserver& observer = {});

/// Narrowband (Q = 1) form of min_pa_precoder for a single K x M channel.
PrecoderSolution min_pa_precoder_narrowband(const CMatrix& channel, const RVector& gamma,
                                            double noise_power, const FixedPointConfig& cfg = {},
                                            const IterationObserver& observer = {});

/// Single-user narrowband optimum: all power on the strongest antenna
/// (lowest index on ties), w = sigma sqrt(gamma) h* / |h|^2 there.
PrecoderSolution single_user_narrowband_precoder(const CVector& channel, double gamma,
                                                 double sigma);

/// Single-user narrowband precoder under per-antenna caps: saturate the
/// strongest antennas at p_max until the received amplitude reaches sigma sqrt(gamma).
PrecoderSolution single_user_saturating_precoder(const CVector& channel, double gamma,
                                                 double sigma, double p_max);

/// Single-user line-of-sight allocation with sqrt(p_m) = weight_m * sigma sqrt(gamma).
/// Any nonnegative weights summing to one give the same, optimal PA consumption.
PrecoderSolution los_allocation_precoder(const ChannelRealization& channel, double gamma,
                                         double sigma, const RVector& weights);

/// max_{q,k,k'} |[H_q W_q]_{k',k} - delta_{k',k} sqrt(gamma_k / Q) sigma|.
double max_zf_residual(const ChannelRealization& channel, const QosTargets& qos,
                       const std::vector<CMatrix>& precoders);

}  // namespace energymimo
