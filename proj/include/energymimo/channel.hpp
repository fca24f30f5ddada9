#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "energymimo/types.hpp"

namespace energymimo {

/// The only random engine used by the library. Every draw takes one by
/// reference; Monte-Carlo loops seed one stream per realization.
using Rng = std::mt19937_64;

inline Rng make_stream(std::uint64_t master_seed, std::uint64_t index) {
  return Rng(master_seed + index);
}

/// Annular cell: users are uniform over the area between u_min and u_max.
struct CellGeometry {
  double u_min = 35.0;
  double u_max = 250.0;

  void validate() const;
};

/// Per-user SINR targets over Q subcarriers. Each subcarrier must deliver gamma_k / Q.
struct QosTargets {
  RVector gamma;
  double noise_power = 0.0;
  int subcarriers = 1;

  void validate() const;
  int users() const { return static_cast<int>(gamma.size()); }
  double sigma() const { return std::sqrt(noise_power); }
  RVector normalized_gamma() const { return gamma / static_cast<double>(subcarriers); }
  /// Diagonal of sqrt(gamma_k / Q) * sigma, the right-hand side of H_q W_q = D.
  RVector zf_target() const;
};

enum class ChannelKind { rayleigh, los };

/// Q channel matrices of shape K x M plus the users' large-scale gains.
struct ChannelRealization {
  std::vector<CMatrix> per_subcarrier;
  RVector large_scale;
  ChannelKind kind = ChannelKind::rayleigh;

  int users() const { return per_subcarrier.empty() ? 0 : static_cast<int>(per_subcarrier[0].rows()); }
  int antennas() const { return per_subcarrier.empty() ? 0 : static_cast<int>(per_subcarrier[0].cols()); }
  int subcarriers() const { return static_cast<int>(per_subcarrier.size()); }
  /// Throws DimensionError if subcarrier shapes disagree.
  void validate() const;
};

/// Optional correlation across subcarriers: an L-tap channel with an
/// exponential power-delay profile, P_l proportional to exp(-l / decay_taps),
/// transformed to the Q subcarriers. Disabled means i.i.d. subcarriers.
struct FrequencyCorrelation {
  bool enabled = false;
  int taps = 1;
  double decay_taps = 1.0;
};

/// Inverse CDF of the annulus distance law, v in [0, 1).
double distance_from_uniform(double v, const CellGeometry& geometry);

RVector draw_user_distances(int users, const CellGeometry& geometry, Rng& rng);

/// Linear large-scale gain from -35.3 - 37.6 log10(u) dB.
double large_scale_fading(double distance_m);

/// Default reference of the SINR-target law gamma_dB = 5 log10(beta / ref).
inline constexpr double kSinrReferenceGain = 4.86e-14;

/// Linear SINR target from 5 log10(beta / reference) dB.
double target_sinr(double beta, double reference = kSinrReferenceGain);

/// H_q = D_beta^{1/2} G_q with standard circularly-symmetric Gaussian G_q.
ChannelRealization draw_rayleigh_channel(int antennas, int users, int subcarriers,
                                         const RVector& beta,
                                         const FrequencyCorrelation& correlation, Rng& rng);

/// Unit-modulus entries. Phases uniform on [0, 2pi) unless `zero_phase`.
ChannelRealization draw_los_channel(int antennas, int users, int subcarriers, Rng& rng,
                                    bool zero_phase = false);

/// Large-scale picture of one cell drop: distances, gains, SINR targets.
struct UserDrop {
  RVector distances;
  RVector beta;
  RVector gamma;
};

UserDrop draw_user_drop(int users, const CellGeometry& geometry, Rng& rng,
                        double sinr_reference = kSinrReferenceGain);

/// tr(D_beta^{-1} D_gamma sigma^2) = sum_k gamma_k sigma^2 / beta_k.
double trace_term(const RVector& beta, const RVector& gamma, double noise_power);

}  // namespace energymimo
