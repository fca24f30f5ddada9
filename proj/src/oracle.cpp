#include "energymimo/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace energymimo::oracle {

namespace {

// Feasible set of one subcarrier: W = base + basis * Z.
struct Affine {
  CMatrix base;   // M x K, minimum-norm solution (normalized)
  CMatrix basis;  // M x J, orthonormal null space of H
};

class SmoothedProblem {
 public:
  SmoothedProblem(std::vector<Affine> pieces, int antennas, int users)
      : pieces_(std::move(pieces)), antennas_(antennas), users_(users) {
    free_ = pieces_.empty() ? 0 : static_cast<int>(pieces_.front().basis.cols());
    dim_ = static_cast<int>(pieces_.size()) * users_ * 2 * free_;
  }

  int dimension() const { return dim_; }

  std::vector<CMatrix> precoders(const RVector& x) const {
    std::vector<CMatrix> out;
    out.reserve(pieces_.size());
    for (std::size_t q = 0; q < pieces_.size(); ++q) {
      CMatrix w = pieces_[q].base;
      if (free_ > 0) w.noalias() += pieces_[q].basis * unknowns(x, q);
      out.push_back(std::move(w));
    }
    return out;
  }

  static RVector row_energy(const std::vector<CMatrix>& w) {
    RVector e = RVector::Zero(w.front().rows());
    for (const CMatrix& wq : w) e += wq.rowwise().squaredNorm();
    return e;
  }

  static double smoothed(const RVector& energy, double mu) {
    return (energy.array() + mu * mu).sqrt().sum();
  }

  double value(const RVector& x, double mu) const { return smoothed(row_energy(precoders(x)), mu); }

  RVector gradient(const std::vector<CMatrix>& w, const RVector& inv_s) const {
    RVector g(dim_);
    for (std::size_t q = 0; q < pieces_.size(); ++q) {
      const CMatrix gq = pieces_[q].basis.adjoint() * (inv_s.cast<Complex>().asDiagonal() * w[q]);
      for (int k = 0; k < users_; ++k) {
        const int off = offset(q, k);
        g.segment(off, free_) = gq.col(k).real();
        g.segment(off + free_, free_) = gq.col(k).imag();
      }
    }
    return g;
  }

  // Lower triangle of the Hessian of the smoothed objective.
  RMatrix hessian(const std::vector<CMatrix>& w, const RVector& inv_s) const {
    RMatrix h = RMatrix::Zero(dim_, dim_);
    for (std::size_t q = 0; q < pieces_.size(); ++q) {
      const CMatrix& n = pieces_[q].basis;
      const CMatrix p = n.adjoint() * inv_s.cast<Complex>().asDiagonal() * n;
      for (int k = 0; k < users_; ++k) {
        const int off = offset(q, k);
        h.block(off, off, free_, free_) += p.real();
        h.block(off + free_, off, free_, free_) += p.imag();
        h.block(off, off + free_, free_, free_) -= p.imag();
        h.block(off + free_, off + free_, free_, free_) += p.real();
      }
    }
    RVector g(dim_);
    for (int m = 0; m < antennas_; ++m) {
      for (std::size_t q = 0; q < pieces_.size(); ++q) {
        const CVector col = pieces_[q].basis.row(m).adjoint();
        for (int k = 0; k < users_; ++k) {
          const CVector v = col * (w[q](m, k) * inv_s[m]);
          const int off = offset(q, k);
          g.segment(off, free_) = v.real();
          g.segment(off + free_, free_) = v.imag();
        }
      }
      h.selfadjointView<Eigen::Lower>().rankUpdate(g, -inv_s[m]);
    }
    return h;
  }

 private:
  int offset(std::size_t q, int k) const { return (static_cast<int>(q) * users_ + k) * 2 * free_; }

  CMatrix unknowns(const RVector& x, std::size_t q) const {
    CMatrix z(free_, users_);
    for (int k = 0; k < users_; ++k) {
      const int off = offset(q, k);
      for (int j = 0; j < free_; ++j) z(j, k) = Complex(x[off + j], x[off + free_ + j]);
    }
    return z;
  }

  std::vector<Affine> pieces_;
  int antennas_;
  int users_;
  int free_ = 0;
  int dim_ = 0;
};

struct DescentOutcome {
  RVector x;
  double gradient_norm = 0.0;
};

DescentOutcome newton_continuation(const SmoothedProblem& problem, RVector x,
                                   const BruteForceOptions& options) {
  const int dim = problem.dimension();
  long budget = static_cast<long>(options.steps_per_dimension) * std::max(dim, 1);
  double last_gradient = 0.0;

  constexpr int kLevels = 11;
  for (int level = 0; level < kLevels && budget > 0; ++level) {
    const double mu = std::pow(10.0, -level);
    // Intermediate levels only need a warm start for the next one.
    const double decrement_tolerance = level + 1 == kLevels ? 1e-15 : 1e-9;
    while (budget-- > 0) {
      const auto w = problem.precoders(x);
      const RVector energy = SmoothedProblem::row_energy(w);
      const RVector inv_s = (energy.array() + mu * mu).sqrt().inverse();
      const double f = SmoothedProblem::smoothed(energy, mu);
      const RVector grad = problem.gradient(w, inv_s);
      last_gradient = grad.norm();
      if (last_gradient <= options.gradient_tolerance) break;

      RMatrix hess = problem.hessian(w, inv_s);
      Eigen::LLT<RMatrix, Eigen::Lower> llt(hess);
      RVector step;
      if (llt.info() == Eigen::Success) {
        step = -llt.solve(grad);
      } else {
        hess.diagonal().array() += 1e-12 * hess.diagonal().cwiseAbs().maxCoeff();
        llt.compute(hess);
        step = llt.info() == Eigen::Success ? RVector(-llt.solve(grad)) : RVector(-grad);
      }
      const double slope = grad.dot(step);
      if (!(slope < 0.0) || -0.5 * slope <= decrement_tolerance * (1.0 + f)) break;

      double t = 1.0;
      bool moved = false;
      while (t > 1e-12) {
        const RVector trial = x + t * step;
        if (problem.value(trial, mu) <= f + 1e-4 * t * slope) {
          x = trial;
          moved = true;
          break;
        }
        t *= 0.5;
      }
      if (!moved) break;
    }
  }
  return {std::move(x), last_gradient};
}

}  // namespace

OracleResult solve_min_pa_bruteforce(const ChannelRealization& channel, const QosTargets& qos,
                                     double alpha, const BruteForceOptions& options) {
  channel.validate();
  qos.validate();
  const int antennas = channel.antennas();
  const int users = channel.users();
  const int subcarriers = channel.subcarriers();
  if (antennas > options.max_antennas || users > options.max_users ||
      subcarriers > options.max_subcarriers) {
    throw SizeError("instance " + std::to_string(antennas) + "x" + std::to_string(users) + "x" +
                    std::to_string(subcarriers) + " exceeds the brute-force size guard");
  }
  if (qos.users() != users || qos.subcarriers != subcarriers) {
    throw DimensionError("QoS targets do not match the channel");
  }
  if (antennas < users) throw SingularChannelError("fewer antennas than users");

  const RVector d = (qos.gamma.array() / subcarriers).sqrt() * std::sqrt(qos.noise_power);
  std::vector<Affine> pieces;
  pieces.reserve(subcarriers);
  double scale = 0.0;
  for (const CMatrix& h : channel.per_subcarrier) {
    Eigen::JacobiSVD<CMatrix> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RVector& sv = svd.singularValues();
    if (sv.size() < users || !(sv[users - 1] > 1e-12 * sv[0])) {
      throw SingularChannelError("channel matrix is rank deficient");
    }
    Affine piece;
    piece.base = svd.matrixV().leftCols(users) * sv.head(users).cwiseInverse().asDiagonal() *
                 svd.matrixU().adjoint() * d.cast<Complex>().asDiagonal();
    piece.basis = svd.matrixV().rightCols(antennas - users);
    pieces.push_back(std::move(piece));
  }
  {
    RVector e = RVector::Zero(antennas);
    for (const Affine& p : pieces) e += p.base.rowwise().squaredNorm();
    scale = std::sqrt(e.maxCoeff());
  }
  for (Affine& p : pieces) p.base /= scale;

  const SmoothedProblem problem(std::move(pieces), antennas, users);
  Rng rng(options.seed);
  std::normal_distribution<double> normal(0.0, 0.5);

  OracleResult best;
  best.method = Method::nullspace_descent;
  best.objective = std::numeric_limits<double>::infinity();
  const int starts = std::max(1, options.starts);
  for (int s = 0; s < starts; ++s) {
    RVector x0 = RVector::Zero(problem.dimension());
    if (s > 0) {
      for (Eigen::Index i = 0; i < x0.size(); ++i) x0[i] = normal(rng);
    }
    const DescentOutcome run = newton_continuation(problem, std::move(x0), options);
    std::vector<CMatrix> w = problem.precoders(run.x);
    for (CMatrix& wq : w) wq *= scale;
    const RVector powers = SmoothedProblem::row_energy(w);
    const double objective = alpha * powers.array().sqrt().sum();
    if (objective < best.objective) {
      best.objective = objective;
      best.powers = powers;
      best.gradient_norm = run.gradient_norm;
      double residual = 0.0;
      for (int q = 0; q < subcarriers; ++q) {
        const CMatrix err = channel.per_subcarrier[q] * w[q] -
                            CMatrix(d.cast<Complex>().asDiagonal());
        residual = std::max(residual, err.cwiseAbs().maxCoeff());
      }
      best.zf_residual = residual;
    }
  }
  return best;
}

OracleResult single_user_analytic(const CVector& channel, double gamma, double noise_power,
                                  double alpha) {
  const RVector gains = channel.cwiseAbs2();
  Eigen::Index strongest = 0;
  if (gains.size() == 0 || !(gains.maxCoeff(&strongest) > 0.0)) {
    throw InfeasibleError("all-zero channel");
  }
  OracleResult out;
  out.method = Method::analytic;
  out.powers = RVector::Zero(channel.size());
  out.powers[strongest] = noise_power * gamma / gains[strongest];
  out.objective = alpha * std::sqrt(out.powers[strongest]);
  return out;
}

double mc_inverse_wishart_trace(int antennas, int users, const RVector& beta,
                                const RVector& gamma, double noise_power, int draws, Rng& rng) {
  if (antennas <= users) throw DomainError("inverse Wishart mean needs M > K");
  if (draws < 100) throw DomainError("at least 100 draws are required");
  if (beta.size() != users || gamma.size() != users) {
    throw DimensionError("beta and gamma need one entry per user");
  }
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  const RVector amplitude = beta.array().sqrt();
  const RVector weights = gamma * noise_power;
  double total = 0.0;
  CMatrix h(users, antennas);
  for (int draw = 0; draw < draws; ++draw) {
    for (int k = 0; k < users; ++k) {
      for (int m = 0; m < antennas; ++m) {
        const double re = normal(rng);
        const double im = normal(rng);
        h(k, m) = amplitude[k] * Complex(re, im);
      }
    }
    const CMatrix inverse = (h * h.adjoint()).inverse();
    total += (inverse.diagonal().real().array() * weights.array()).sum();
  }
  return total / draws;
}

int grid_min_bs(int antennas, int users, double trace_term, const PaModel& pa,
                const BsModel& bs) {
  if (antennas > 4096) throw SizeError("grid search is limited to M <= 4096");
  const double alpha = std::sqrt(pa.p_max()) / pa.eta_max();
  int best = -1;
  double best_value = std::numeric_limits<double>::infinity();
  for (int ma = users + 1; ma <= antennas; ++ma) {
    const double ratio = static_cast<double>(ma) / (ma - users);
    if (trace_term / (static_cast<double>(ma) * (ma - users)) > pa.p_max()) continue;
    const double value = alpha * std::sqrt(ratio * trace_term) + bs.p_fix +
                         bs.circuit_per_antenna * ma;
    if (value < best_value) {
      best_value = value;
      best = ma;
    }
  }
  if (best < 0) throw InfeasibleError("no antenna count in range satisfies the power cap");
  return best;
}

}  // namespace energymimo::oracle
