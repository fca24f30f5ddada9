#include "energymimo/precoding.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace energymimo {

namespace {

void require_zf_feasible(const ChannelRealization& channel, const QosTargets& qos) {
  channel.validate();
  qos.validate();
  if (qos.users() != channel.users()) {
    throw DimensionError("QoS targets list " + std::to_string(qos.users()) +
                         " users but the channel has " + std::to_string(channel.users()));
  }
  if (qos.subcarriers != channel.subcarriers()) {
    throw DimensionError("QoS subcarrier count differs from the channel's");
  }
  if (channel.antennas() < channel.users()) {
    throw SingularChannelError("zero-forcing needs at least as many antennas as users");
  }
}

// Factorizes a Hermitian positive-definite Gram matrix, refusing ill-conditioned ones.
Eigen::LLT<CMatrix> factor_gram(CMatrix gram, double regularization, int subcarrier) {
  if (regularization > 0.0) {
    const double ridge = regularization * gram.trace().real();
    gram.diagonal().array() += ridge;
  }
  Eigen::LLT<CMatrix> llt(gram);
  if (llt.info() != Eigen::Success || !(llt.rcond() >= kMinGramRcond)) {
    throw SingularChannelError("Gram matrix of subcarrier " + std::to_string(subcarrier) +
                               " is singular or ill-conditioned");
  }
  return llt;
}

std::vector<int> active_indices(const RVector& powers, double threshold) {
  std::vector<int> idx;
  for (Eigen::Index m = 0; m < powers.size(); ++m) {
    if (powers[m] > threshold) idx.push_back(static_cast<int>(m));
  }
  return idx;
}

// Rows of D_p^{1/2} H^H (H D_p^{1/2} H^H)^{-1} D restricted to `active`;
// `root_powers` holds p_m^{1/2} of the active antennas in the same order.
CMatrix weighted_zf_rows(const CMatrix& h, const std::vector<int>& active,
                         const RVector& root_powers, const RVector& target,
                         double regularization, int subcarrier) {
  const CMatrix a = h(Eigen::all, active);
  const CMatrix weighted = a * root_powers.cast<Complex>().asDiagonal();
  const auto llt = factor_gram(weighted * a.adjoint(), regularization, subcarrier);
  const CMatrix x = llt.solve(CMatrix(target.cast<Complex>().asDiagonal()));
  return weighted.adjoint() * x;
}

}  // namespace

void FixedPointConfig::validate() const {
  if (!(tolerance > 0.0)) throw DomainError("fixed-point tolerance must be positive");
  if (max_iterations < 1) throw DomainError("max_iterations must be >= 1");
  if (!(initial_power > 0.0)) throw DomainError("initial power must be positive");
  if (!(dead_antenna_floor >= 0.0)) throw DomainError("dead-antenna floor must be nonnegative");
  if (!(regularization >= 0.0)) throw DomainError("regularization must be nonnegative");
}

PrecoderSolution zf_precoder(const ChannelRealization& channel, const QosTargets& qos) {
  require_zf_feasible(channel, qos);
  const RVector target = qos.zf_target();
  const CMatrix target_diag = target.cast<Complex>().asDiagonal();

  PrecoderSolution sol;
  sol.matrices.reserve(channel.subcarriers());
  for (int q = 0; q < channel.subcarriers(); ++q) {
    const CMatrix& h = channel.per_subcarrier[q];
    const auto llt = factor_gram(h * h.adjoint(), 0.0, q);
    sol.matrices.push_back(h.adjoint() * llt.solve(target_diag));
  }
  sol.powers = per_antenna_powers(sol.matrices);
  sol.active_set = active_indices(sol.powers, 0.0);
  return sol;
}

PrecoderSolution min_pa_precoder(const ChannelRealization& channel, const QosTargets& qos,
                                 const FixedPointConfig& cfg, const IterationObserver& observer) {
  require_zf_feasible(channel, qos);
  cfg.validate();

  const int antennas = channel.antennas();
  const int users = channel.users();
  const RVector target = qos.zf_target();

  RVector powers = RVector::Constant(antennas, cfg.initial_power);
  std::vector<int> active(antennas);
  std::iota(active.begin(), active.end(), 0);

  PrecoderSolution sol;
  double change = std::numeric_limits<double>::infinity();
  int iteration = 0;
  while (iteration < cfg.max_iterations && change > cfg.tolerance) {
    if (static_cast<int>(active.size()) < users) {
      throw SingularChannelError("fewer surviving antennas than users");
    }
    const RVector roots = powers(active).array().sqrt();
    RVector next = RVector::Zero(antennas);
    for (int q = 0; q < channel.subcarriers(); ++q) {
      const CMatrix rows = weighted_zf_rows(channel.per_subcarrier[q], active, roots, target,
                                            cfg.regularization, q);
      const RVector row_power = rows.rowwise().squaredNorm();
      for (std::size_t i = 0; i < active.size(); ++i) next[active[i]] += row_power[i];
    }

    std::vector<int> survivors;
    survivors.reserve(active.size());
    for (int m : active) {
      if (next[m] < cfg.dead_antenna_floor) {
        next[m] = 0.0;
      } else {
        survivors.push_back(m);
      }
    }
    active = std::move(survivors);

    change = (next - powers).cwiseAbs().maxCoeff();
    powers = std::move(next);
    ++iteration;
    sol.residual_history.push_back(change);
    if (observer) observer(iteration, powers, change);
  }

  if (static_cast<int>(active.size()) < users) {
    throw SingularChannelError("fewer surviving antennas than users");
  }
  const RVector roots = powers(active).array().sqrt();
  sol.matrices.reserve(channel.subcarriers());
  for (int q = 0; q < channel.subcarriers(); ++q) {
    CMatrix w = CMatrix::Zero(antennas, users);
    w(active, Eigen::all) = weighted_zf_rows(channel.per_subcarrier[q], active, roots, target,
                                             cfg.regularization, q);
    sol.matrices.push_back(std::move(w));
  }
  sol.powers = per_antenna_powers(sol.matrices);
  sol.iterations = iteration;
  sol.residual = change;
  sol.converged = change <= cfg.tolerance;
  sol.active_set = std::move(active);
  return sol;
}

PrecoderSolution min_pa_precoder_narrowband(const CMatrix& channel, const RVector& gamma,
                                            double noise_power, const FixedPointConfig& cfg,
                                            const IterationObserver& observer) {
  ChannelRealization realization;
  realization.per_subcarrier = {channel};
  QosTargets qos{gamma, noise_power, 1};
  return min_pa_precoder(realization, qos, cfg, observer);
}

PrecoderSolution single_user_narrowband_precoder(const CVector& channel, double gamma,
                                                 double sigma) {
  if (channel.size() < 1) throw DomainError("channel vector is empty");
  if (!(gamma > 0.0) || !(sigma > 0.0)) throw DomainError("gamma and sigma must be positive");
  Eigen::Index best = 0;
  for (Eigen::Index m = 1; m < channel.size(); ++m) {
    if (std::abs(channel[m]) > std::abs(channel[best])) best = m;
  }
  const double gain = std::abs(channel[best]);
  if (gain == 0.0) throw InfeasibleError("all-zero channel cannot carry any SINR");

  CMatrix w = CMatrix::Zero(channel.size(), 1);
  w(best, 0) = sigma * std::sqrt(gamma) * std::conj(channel[best]) / (gain * gain);

  PrecoderSolution sol;
  sol.matrices = {w};
  sol.powers = per_antenna_powers(sol.matrices);
  sol.active_set = {static_cast<int>(best)};
  return sol;
}

PrecoderSolution single_user_saturating_precoder(const CVector& channel, double gamma,
                                                 double sigma, double p_max) {
  if (channel.size() < 1) throw DomainError("channel vector is empty");
  if (!(gamma > 0.0) || !(sigma > 0.0) || !(p_max > 0.0)) {
    throw DomainError("gamma, sigma and p_max must be positive");
  }
  const Eigen::Index antennas = channel.size();
  const double amplitude_cap = std::sqrt(p_max);
  const double target = sigma * std::sqrt(gamma);
  const double reachable = channel.cwiseAbs().sum() * amplitude_cap;
  if (reachable < target) {
    const double deficit = target - reachable;
    throw InfeasibleError("saturating every antenna falls short of the QoS amplitude by " +
                              std::to_string(deficit),
                          deficit);
  }

  std::vector<Eigen::Index> order(antennas);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(channel[a]) > std::abs(channel[b]);
  });

  RVector powers = RVector::Zero(antennas);
  double remaining = target;
  for (std::size_t i = 0; i < order.size() && remaining > 0.0; ++i) {
    const Eigen::Index m = order[i];
    const double gain = std::abs(channel[m]);
    if (gain == 0.0) break;
    if (gain * amplitude_cap >= remaining || i + 1 == order.size()) {
      powers[m] = std::min(p_max, (remaining / gain) * (remaining / gain));
      remaining = 0.0;
    } else {
      powers[m] = p_max;
      remaining -= gain * amplitude_cap;
    }
  }

  CMatrix w = CMatrix::Zero(antennas, 1);
  PrecoderSolution sol;
  for (Eigen::Index m = 0; m < antennas; ++m) {
    if (powers[m] > 0.0) {
      w(m, 0) = std::sqrt(powers[m]) * std::conj(channel[m]) / std::abs(channel[m]);
      sol.active_set.push_back(static_cast<int>(m));
    }
  }
  sol.matrices = {w};
  sol.powers = per_antenna_powers(sol.matrices);
  return sol;
}

PrecoderSolution los_allocation_precoder(const ChannelRealization& channel, double gamma,
                                         double sigma, const RVector& weights) {
  channel.validate();
  if (channel.users() != 1) throw DomainError("line-of-sight allocation is single-user");
  if (!(gamma > 0.0) || !(sigma > 0.0)) throw DomainError("gamma and sigma must be positive");
  const int antennas = channel.antennas();
  const int subcarriers = channel.subcarriers();
  for (const CMatrix& h : channel.per_subcarrier) {
    if (((h.cwiseAbs().array() - 1.0).abs() > 1e-9).any()) {
      throw DomainError("line-of-sight allocation needs unit-modulus channel entries");
    }
  }
  if (weights.size() != antennas) throw DimensionError("one weight per antenna is required");
  if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-9) {
    throw DomainError("weights must be nonnegative and sum to one");
  }

  const RVector roots = weights * (sigma * std::sqrt(gamma));
  const double scale = 1.0 / std::sqrt(static_cast<double>(subcarriers));

  PrecoderSolution sol;
  for (const CMatrix& h : channel.per_subcarrier) {
    CMatrix w(antennas, 1);
    for (int m = 0; m < antennas; ++m) w(m, 0) = roots[m] * std::conj(h(0, m)) * scale;
    sol.matrices.push_back(std::move(w));
  }
  sol.powers = per_antenna_powers(sol.matrices);
  sol.active_set = active_indices(sol.powers, 0.0);
  return sol;
}

double max_zf_residual(const ChannelRealization& channel, const QosTargets& qos,
                       const std::vector<CMatrix>& precoders) {
  if (precoders.size() != channel.per_subcarrier.size()) {
    throw DimensionError("one precoder per subcarrier is required");
  }
  const CMatrix target = qos.zf_target().cast<Complex>().asDiagonal();
  double worst = 0.0;
  for (std::size_t q = 0; q < precoders.size(); ++q) {
    const CMatrix err = channel.per_subcarrier[q] * precoders[q] - target;
    worst = std::max(worst, err.cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace energymimo
