#include <doctest.h>

#include <cmath>
#include <vector>

#include "energymimo/precoding.hpp"

using namespace energymimo;

namespace {

ChannelRealization single(const CMatrix& h) {
  ChannelRealization c;
  c.per_subcarrier = {h};
  return c;
}

QosTargets targets(std::initializer_list<double> gamma, double noise = 1.0, int q = 1) {
  RVector g(static_cast<Eigen::Index>(gamma.size()));
  int i = 0;
  for (double x : gamma) g[i++] = x;
  return {g, noise, q};
}

QosTargets random_targets(int users, int q, Rng& rng) {
  std::uniform_real_distribution<double> u(1.0, 10.0);
  RVector g(users);
  for (int k = 0; k < users; ++k) g[k] = u(rng);
  return {g, 1.0, q};
}

FixedPointConfig tight(double tol = 1e-12) {
  FixedPointConfig cfg;
  cfg.tolerance = tol;
  cfg.max_iterations = 200000;
  return cfg;
}

double pas(const RVector& p) { return p.array().sqrt().sum(); }

}  // namespace

TEST_CASE("zero-forcing small cases") {
  CMatrix h(1, 1);
  h << 1.0;
  PrecoderSolution s = zf_precoder(single(h), targets({4.0}));
  CHECK(std::abs(s.matrices[0](0, 0) - Complex(2.0, 0.0)) < 1e-14);
  CHECK(s.powers.sum() == doctest::Approx(4.0));

  CMatrix h2(1, 2);
  h2 << 1.0, 1.0;
  s = zf_precoder(single(h2), targets({4.0}));
  CHECK(std::abs(s.matrices[0](0, 0) - Complex(1.0, 0.0)) < 1e-14);
  CHECK(std::abs(s.matrices[0](1, 0) - Complex(1.0, 0.0)) < 1e-14);
  CHECK(s.powers.sum() == doctest::Approx(2.0));
}

TEST_CASE("zero-forcing residual on random wideband draws") {
  Rng rng(1);
  for (int i = 0; i < 10; ++i) {
    const int k = 1 + i % 6;
    const int m = k + 3 * i;
    const int q = 1 + 7 * i;
    const ChannelRealization c = draw_rayleigh_channel(m, k, q, RVector::Ones(k), {}, rng);
    const QosTargets qos = random_targets(k, q, rng);
    const PrecoderSolution s = zf_precoder(c, qos);
    CHECK(max_zf_residual(c, qos, s.matrices) <= 1e-9);
    CHECK((s.powers - per_antenna_powers(s.matrices)).norm() <= 1e-10 * s.powers.norm());
  }
}

TEST_CASE("zero-forcing rejects singular and undersized channels") {
  CMatrix dup(2, 3);
  dup << 1.0, 2.0, 3.0, 1.0, 2.0, 3.0;
  CHECK_THROWS_AS(zf_precoder(single(dup), targets({1.0, 1.0})), SingularChannelError);
  CHECK_THROWS_AS(min_pa_precoder(single(dup), targets({1.0, 1.0})), SingularChannelError);
  CMatrix wide(3, 2);
  wide.setOnes();
  CHECK_THROWS_AS(zf_precoder(single(wide), targets({1.0, 1.0, 1.0})), SingularChannelError);
  CMatrix ok(2, 3);
  ok.setRandom();
  CHECK_THROWS_AS(zf_precoder(single(ok), targets({1.0})), DimensionError);
}

TEST_CASE("fixed point puts a single user on the strongest antenna") {
  CMatrix h(1, 2);
  h << 2.0, 1.0;
  const double gamma = 3.0;
  const PrecoderSolution s = min_pa_precoder(single(h), targets({gamma}), tight());
  CHECK(s.converged);
  CHECK(s.powers[0] == doctest::Approx(gamma / 4.0));
  CHECK(s.powers[1] < 1e-12);
  CHECK(max_zf_residual(single(h), targets({gamma}), s.matrices) <= 1e-9);
}

TEST_CASE("fixed point matches the single-user closed form on random channels") {
  Rng rng(5);
  for (int i = 0; i < 10; ++i) {
    const int m = 4 + 3 * i;
    const ChannelRealization c = draw_rayleigh_channel(m, 1, 1, RVector::Ones(1), {}, rng);
    const QosTargets qos = random_targets(1, 1, rng);
    const PrecoderSolution fp = min_pa_precoder(c, qos, tight(1e-13));
    const CVector h = c.per_subcarrier[0].row(0).transpose();
    const PrecoderSolution cf = single_user_narrowband_precoder(h, qos.gamma[0], 1.0);
    CHECK(pas(fp.powers) == doctest::Approx(pas(cf.powers)).epsilon(1e-6));
  }
}

TEST_CASE("fixed point solution properties") {
  Rng rng(9);
  const ChannelRealization c = draw_rayleigh_channel(12, 3, 4, RVector::Ones(3), {}, rng);
  const QosTargets qos = random_targets(3, 4, rng);
  const FixedPointConfig cfg = tight(1e-10);
  const PrecoderSolution s = min_pa_precoder(c, qos, cfg);
  CHECK(s.converged);
  CHECK(s.residual <= cfg.tolerance);
  CHECK(s.residual_history.size() == static_cast<std::size_t>(s.iterations));
  CHECK(s.residual_history.back() == s.residual);
  CHECK(max_zf_residual(c, qos, s.matrices) <= 1e-9);
  CHECK((s.powers - per_antenna_powers(s.matrices)).norm() <= 1e-10 * s.powers.norm());
  const PrecoderSolution zf = zf_precoder(c, qos);
  CHECK(pas(s.powers) <= pas(zf.powers) + cfg.tolerance);

  SUBCASE("scale covariance") {
    const double scale = 3.0;
    QosTargets louder = qos;
    louder.noise_power *= scale * scale;
    const PrecoderSolution t = min_pa_precoder(c, louder, cfg);
    CHECK(pas(t.powers) == doctest::Approx(scale * pas(s.powers)).epsilon(1e-6));
  }

  SUBCASE("phase covariance") {
    ChannelRealization rotated = c;
    for (CMatrix& h : rotated.per_subcarrier) {
      h.row(0) *= std::polar(1.0, 0.7);
      h.row(2) *= std::polar(1.0, -2.1);
    }
    const PrecoderSolution t = min_pa_precoder(rotated, qos, cfg);
    CHECK((t.powers - s.powers).cwiseAbs().maxCoeff() <= 1e-8 * s.powers.maxCoeff());
  }

  SUBCASE("observer sees every step") {
    int calls = 0;
    double last = -1.0;
    min_pa_precoder(c, qos, cfg, [&](int it, const RVector& p, double change) {
      CHECK(it == ++calls);
      CHECK(p.size() == 12);
      last = change;
    });
    CHECK(calls == s.iterations);
    CHECK(last == s.residual);
  }
}

TEST_CASE("fixed point reports non-convergence") {
  Rng rng(4);
  const ChannelRealization c = draw_rayleigh_channel(16, 2, 1, RVector::Ones(2), {}, rng);
  FixedPointConfig cfg;
  cfg.max_iterations = 2;
  cfg.tolerance = 1e-14;
  const PrecoderSolution s = min_pa_precoder(c, random_targets(2, 1, rng), cfg);
  CHECK_FALSE(s.converged);
  CHECK(s.iterations == 2);
  CHECK(s.residual > cfg.tolerance);

  FixedPointConfig bad;
  bad.tolerance = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("square channel leaves no freedom") {
  Rng rng(12);
  const ChannelRealization c = draw_rayleigh_channel(4, 4, 1, RVector::Ones(4), {}, rng);
  const QosTargets qos = random_targets(4, 1, rng);
  const PrecoderSolution zf = zf_precoder(c, qos);
  const PrecoderSolution fp = min_pa_precoder(c, qos, tight(1e-12));
  CHECK((fp.powers - zf.powers).cwiseAbs().maxCoeff() <= 1e-9 * zf.powers.maxCoeff());
}

TEST_CASE("narrowband wrapper equals the general solver") {
  Rng rng(8);
  const ChannelRealization c = draw_rayleigh_channel(10, 2, 1, RVector::Ones(2), {}, rng);
  const QosTargets qos = random_targets(2, 1, rng);
  const PrecoderSolution a = min_pa_precoder(c, qos);
  const PrecoderSolution b = min_pa_precoder_narrowband(c.per_subcarrier[0], qos.gamma, 1.0);
  CHECK((a.powers - b.powers).norm() == 0.0);
}

TEST_CASE("ridge regularization keeps near-singular grams solvable") {
  CMatrix h(2, 3);
  h << 1.0, 2.0, 3.0, 1.0, 2.0, 3.0 + 1e-9;
  FixedPointConfig cfg;
  cfg.regularization = 1e-10;
  cfg.max_iterations = 5;
  CHECK_NOTHROW(min_pa_precoder(single(h), targets({1.0, 1.0}), cfg));
}

TEST_CASE("single-user closed form") {
  CVector h(1);
  h << Complex(1.0, 0.0);
  PrecoderSolution s = single_user_narrowband_precoder(h, 4.0, 1.0);
  CHECK(std::abs(s.matrices[0](0, 0) - Complex(2.0, 0.0)) < 1e-14);

  CVector h2(2);
  h2 << Complex(0.0, 2.0), Complex(1.0, 0.0);
  s = single_user_narrowband_precoder(h2, 5.0, 1.0);
  CHECK(s.active_set == std::vector<int>{0});
  CHECK(s.powers[0] == doctest::Approx(5.0 / 4.0));
  CHECK(s.powers[1] == 0.0);
  // Received amplitude is sigma sqrt(gamma) with zero phase.
  const Complex rx = (h2.transpose() * s.matrices[0].col(0))(0);
  CHECK(std::abs(rx - Complex(std::sqrt(5.0), 0.0)) < 1e-12);

  CVector tie(2);
  tie << Complex(1.0, 0.0), Complex(0.0, 1.0);
  s = single_user_narrowband_precoder(tie, 2.0, 1.0);
  CHECK(s.active_set == std::vector<int>{0});
  CHECK(s.powers[0] == doctest::Approx(2.0));

  CHECK_THROWS_AS(single_user_narrowband_precoder(CVector::Zero(3), 1.0, 1.0), InfeasibleError);
}

TEST_CASE("saturating single-user precoder") {
  CVector h(2);
  h << Complex(1.0, 0.0), Complex(1.0, 0.0);
  // 1 + sqrt(p2) = 1.5 with sigma sqrt(gamma) = 1.5.
  PrecoderSolution s = single_user_saturating_precoder(h, 2.25, 1.0, 1.0);
  CHECK(s.powers[0] == doctest::Approx(1.0));
  CHECK(s.powers[1] == doctest::Approx(0.25));

  CVector g(3);
  g << Complex(0.5, 0.0), Complex(0.0, 2.0), Complex(1.0, 0.0);
  s = single_user_saturating_precoder(g, 1.0, 1.0, 10.0);
  const PrecoderSolution closed = single_user_narrowband_precoder(g, 1.0, 1.0);
  CHECK((s.powers - closed.powers).norm() < 1e-14);

  // Boundary: the target needs every antenna at full power.
  s = single_user_saturating_precoder(h, 4.0, 1.0, 1.0);
  CHECK(s.powers[0] == doctest::Approx(1.0));
  CHECK(s.powers[1] == doctest::Approx(1.0));
  CHECK((s.powers.array() <= 1.0 + 1e-12).all());

  try {
    single_user_saturating_precoder(h, 9.0, 1.0, 1.0);
    FAIL("expected infeasibility");
  } catch (const InfeasibleError& e) {
    CHECK(e.deficit() == doctest::Approx(1.0));
  }
}

TEST_CASE("line-of-sight allocations") {
  Rng rng(6);
  const ChannelRealization c = draw_los_channel(4, 1, 3, rng);
  const double gamma = 8.0;
  const double sigma = 0.5;
  RVector corner = RVector::Zero(4);
  corner[0] = 1.0;
  PrecoderSolution s = los_allocation_precoder(c, gamma, sigma, corner);
  CHECK(s.powers[0] == doctest::Approx(sigma * sigma * gamma));
  CHECK(s.powers.tail(3).norm() == 0.0);

  s = los_allocation_precoder(c, gamma, sigma, RVector::Constant(4, 0.25));
  for (int m = 0; m < 4; ++m) CHECK(s.powers[m] == doctest::Approx(sigma * sigma * gamma / 16));
  const QosTargets qos{RVector::Constant(1, gamma), sigma * sigma, 3};
  CHECK(max_zf_residual(c, qos, s.matrices) <= 1e-12);

  // The fixed point lands on the same manifold sum sqrt(p_m) = sigma sqrt(gamma).
  const PrecoderSolution fp = min_pa_precoder(c, qos, tight(1e-13));
  CHECK(pas(fp.powers) == doctest::Approx(sigma * std::sqrt(gamma)).epsilon(1e-6));

  CHECK_THROWS_AS(los_allocation_precoder(c, gamma, sigma, RVector::Constant(4, 0.3)), DomainError);
  ChannelRealization rayleigh = draw_rayleigh_channel(4, 1, 1, RVector::Ones(1), {}, rng);
  CHECK_THROWS_AS(los_allocation_precoder(rayleigh, gamma, sigma, corner), DomainError);
}
