#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "energymimo/channel.hpp"

using namespace energymimo;

TEST_CASE("distance law matches the annulus cdf") {
  const CellGeometry g{35.0, 250.0};
  Rng rng(2024);
  RVector u = draw_user_distances(10000, g, rng);
  std::vector<double> sorted(u.begin(), u.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double v = sorted[i];
    const double cdf = (v * v - 35.0 * 35.0) / (250.0 * 250.0 - 35.0 * 35.0);
    ks = std::max({ks, std::abs(cdf - i / n), std::abs(cdf - (i + 1) / n)});
  }
  CHECK(ks < 0.02);
  CHECK(sorted.front() >= 35.0);
  CHECK(sorted.back() <= 250.0);
  CHECK(distance_from_uniform(0.0, g) == doctest::Approx(35.0));
  CHECK_THROWS_AS((CellGeometry{250.0, 35.0}.validate()), DomainError);
}

TEST_CASE("large-scale fading and sinr targets") {
  CHECK(large_scale_fading(100.0) == doctest::Approx(std::pow(10.0, -11.05)));
  CHECK(large_scale_fading(1.0) == doctest::Approx(std::pow(10.0, -3.53)));
  // Targets span roughly 4 to 20 dB across the cell.
  const double near_db = 10.0 * std::log10(target_sinr(large_scale_fading(35.0)));
  const double far_db = 10.0 * std::log10(target_sinr(large_scale_fading(250.0)));
  CHECK(near_db == doctest::Approx(19.89).epsilon(1e-3));
  CHECK(far_db == doctest::Approx(3.84).epsilon(1e-3));
  CHECK(target_sinr(4.86e-14) == doctest::Approx(1.0));
  double previous = 0.0;
  for (double b = 1e-14; b < 1e-8; b *= 3.0) {
    const double g = target_sinr(b);
    CHECK(g > previous);
    previous = g;
  }
}

TEST_CASE("trace term") {
  RVector beta(2), gamma(2);
  beta << 2.0, 0.5;
  gamma << 4.0, 1.0;
  CHECK(trace_term(beta, gamma, 0.5) == doctest::Approx(0.5 * (2.0 + 2.0)));
}

TEST_CASE("rayleigh rows have identity covariance after large-scale normalization") {
  RVector beta(3);
  beta << 1e-10, 4e-12, 2.5e-13;
  Rng rng(7);
  const int draws = 10000;
  const int antennas = 4;
  CMatrix cov = CMatrix::Zero(antennas, antennas);
  for (int d = 0; d < draws; ++d) {
    const ChannelRealization c = draw_rayleigh_channel(antennas, 3, 1, beta, {}, rng);
    REQUIRE(c.users() == 3);
    REQUIRE(c.antennas() == antennas);
    for (int k = 0; k < 3; ++k) {
      const CVector row = c.per_subcarrier[0].row(k).transpose() / std::sqrt(beta[k]);
      cov += row * row.adjoint();
    }
  }
  cov /= static_cast<double>(3 * draws);
  for (int i = 0; i < antennas; ++i) {
    CHECK(cov(i, i).real() == doctest::Approx(1.0).epsilon(0.05));
    for (int j = 0; j < antennas; ++j) {
      if (i != j) CHECK(std::abs(cov(i, j)) < 0.05);
    }
  }
}

TEST_CASE("frequency correlation keeps the per-entry variance") {
  RVector beta = RVector::Ones(1);
  FrequencyCorrelation corr{true, 4, 2.0};
  Rng rng(11);
  const int q = 16;
  double power = 0.0;
  Complex neighbour(0.0, 0.0);
  const int draws = 4000;
  for (int d = 0; d < draws; ++d) {
    const ChannelRealization c = draw_rayleigh_channel(1, 1, q, beta, corr, rng);
    for (int s = 0; s < q; ++s) power += std::norm(c.per_subcarrier[s](0, 0));
    neighbour += c.per_subcarrier[0](0, 0) * std::conj(c.per_subcarrier[1](0, 0));
  }
  CHECK(power / (draws * q) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(std::abs(neighbour) / draws > 0.3);
}

TEST_CASE("line-of-sight channels have unit modulus") {
  Rng rng(3);
  const ChannelRealization c = draw_los_channel(8, 2, 4, rng);
  CHECK(c.kind == ChannelKind::los);
  for (const CMatrix& h : c.per_subcarrier) {
    CHECK((h.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-14);
  }
  const ChannelRealization ones = draw_los_channel(3, 1, 2, rng, true);
  CHECK((ones.per_subcarrier[1] - CMatrix::Ones(1, 3)).norm() == 0.0);
}

TEST_CASE("streams are reproducible") {
  Rng a = make_stream(5, 3);
  Rng b = make_stream(5, 3);
  const UserDrop da = draw_user_drop(4, {}, a);
  const UserDrop db = draw_user_drop(4, {}, b);
  CHECK(da.distances == db.distances);
  for (int k = 0; k < 4; ++k) {
    CHECK(da.beta[k] == doctest::Approx(large_scale_fading(da.distances[k])));
    CHECK(da.gamma[k] == doctest::Approx(target_sinr(da.beta[k])));
  }
}
