#include "energymimo/channel.hpp"

#include <numbers>
#include <string>

namespace energymimo {

namespace {

void require_counts(int antennas, int users, int subcarriers) {
  if (antennas < 1 || users < 1 || subcarriers < 1) {
    throw DomainError("antennas, users and subcarriers must all be >= 1");
  }
}

// CN(0, variance): independent real and imaginary parts of variance / 2.
Complex complex_gaussian(Rng& rng, double variance) {
  std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
  const double re = normal(rng);
  const double im = normal(rng);
  return {re, im};
}

}  // namespace

void CellGeometry::validate() const {
  if (!(u_min > 0.0 && u_min < u_max)) {
    throw DomainError("cell geometry requires 0 < u_min < u_max");
  }
}

void QosTargets::validate() const {
  if (gamma.size() == 0) throw DomainError("at least one user is required");
  if (!(gamma.array() > 0.0).all()) throw DomainError("SINR targets must be positive");
  if (!(noise_power > 0.0)) throw DomainError("noise power must be positive");
  if (subcarriers < 1) throw DomainError("subcarrier count must be >= 1");
}

RVector QosTargets::zf_target() const {
  return normalized_gamma().array().sqrt() * sigma();
}

void ChannelRealization::validate() const {
  if (per_subcarrier.empty()) throw DimensionError("channel has no subcarriers");
  const auto k = per_subcarrier.front().rows();
  const auto m = per_subcarrier.front().cols();
  for (std::size_t q = 1; q < per_subcarrier.size(); ++q) {
    if (per_subcarrier[q].rows() != k || per_subcarrier[q].cols() != m) {
      throw DimensionError("subcarrier " + std::to_string(q) + " shape differs from subcarrier 0");
    }
  }
  if (large_scale.size() != 0 && large_scale.size() != k) {
    throw DimensionError("large-scale vector length differs from the user count");
  }
}

double distance_from_uniform(double v, const CellGeometry& geometry) {
  const double lo2 = geometry.u_min * geometry.u_min;
  const double hi2 = geometry.u_max * geometry.u_max;
  return std::sqrt(lo2 + v * (hi2 - lo2));
}

RVector draw_user_distances(int users, const CellGeometry& geometry, Rng& rng) {
  if (users < 1) throw DomainError("user count must be >= 1");
  geometry.validate();
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  RVector u(users);
  for (int k = 0; k < users; ++k) u[k] = distance_from_uniform(uniform(rng), geometry);
  return u;
}

double large_scale_fading(double distance_m) {
  if (!(distance_m > 0.0)) throw DomainError("distance must be positive");
  return db_to_linear(-35.3 - 37.6 * std::log10(distance_m));
}

double target_sinr(double beta, double reference) {
  if (!(beta > 0.0)) throw DomainError("large-scale gain must be positive");
  return db_to_linear(5.0 * std::log10(beta / reference));
}

ChannelRealization draw_rayleigh_channel(int antennas, int users, int subcarriers,
                                         const RVector& beta,
                                         const FrequencyCorrelation& correlation, Rng& rng) {
  require_counts(antennas, users, subcarriers);
  if (beta.size() != users) throw DimensionError("beta must have one entry per user");
  if (!(beta.array() > 0.0).all()) throw DomainError("large-scale gains must be positive");

  ChannelRealization out;
  out.kind = ChannelKind::rayleigh;
  out.large_scale = beta;
  out.per_subcarrier.reserve(subcarriers);
  const RVector amplitude = beta.array().sqrt();

  if (!correlation.enabled) {
    for (int q = 0; q < subcarriers; ++q) {
      CMatrix h(users, antennas);
      for (int k = 0; k < users; ++k) {
        for (int m = 0; m < antennas; ++m) h(k, m) = amplitude[k] * complex_gaussian(rng, 1.0);
      }
      out.per_subcarrier.push_back(std::move(h));
    }
    return out;
  }

  if (correlation.taps < 1 || !(correlation.decay_taps > 0.0)) {
    throw DomainError("correlated channel needs >= 1 tap and a positive decay");
  }
  const int taps = correlation.taps;
  RVector profile(taps);
  for (int l = 0; l < taps; ++l) profile[l] = std::exp(-l / correlation.decay_taps);
  profile /= profile.sum();

  std::vector<CMatrix> tap_gains(taps, CMatrix(users, antennas));
  for (int l = 0; l < taps; ++l) {
    for (int k = 0; k < users; ++k) {
      for (int m = 0; m < antennas; ++m) {
        tap_gains[l](k, m) = amplitude[k] * complex_gaussian(rng, profile[l]);
      }
    }
  }
  for (int q = 0; q < subcarriers; ++q) {
    CMatrix h = CMatrix::Zero(users, antennas);
    for (int l = 0; l < taps; ++l) {
      const double phase = -2.0 * std::numbers::pi * l * q / subcarriers;
      h += std::polar(1.0, phase) * tap_gains[l];
    }
    out.per_subcarrier.push_back(std::move(h));
  }
  return out;
}

ChannelRealization draw_los_channel(int antennas, int users, int subcarriers, Rng& rng,
                                    bool zero_phase) {
  require_counts(antennas, users, subcarriers);
  ChannelRealization out;
  out.kind = ChannelKind::los;
  out.large_scale = RVector::Ones(users);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  for (int q = 0; q < subcarriers; ++q) {
    CMatrix h(users, antennas);
    for (int k = 0; k < users; ++k) {
      for (int m = 0; m < antennas; ++m) {
        h(k, m) = zero_phase ? Complex(1.0, 0.0) : std::polar(1.0, phase(rng));
      }
    }
    out.per_subcarrier.push_back(std::move(h));
  }
  return out;
}

UserDrop draw_user_drop(int users, const CellGeometry& geometry, Rng& rng, double sinr_reference) {
  UserDrop drop;
  drop.distances = draw_user_distances(users, geometry, rng);
  drop.beta.resize(users);
  drop.gamma.resize(users);
  for (int k = 0; k < users; ++k) {
    drop.beta[k] = large_scale_fading(drop.distances[k]);
    drop.gamma[k] = target_sinr(drop.beta[k], sinr_reference);
  }
  return drop;
}

double trace_term(const RVector& beta, const RVector& gamma, double noise_power) {
  if (beta.size() != gamma.size()) throw DimensionError("beta and gamma lengths differ");
  return noise_power * (gamma.array() / beta.array()).sum();
}

}  // namespace energymimo
