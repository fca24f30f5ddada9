import math

import numpy as np
import pytest

import energymimo as em


def test_pa_model():
    pa = em.PaModel(1.0, 0.22)
    assert pa.p_sat == pytest.approx(10.0)
    assert pa.alpha == pytest.approx(1 / 0.22)
    assert em.pa_consumed_power(np.full(4, 0.25), pa) == pytest.approx(4 * 0.5 / 0.22)


def test_zero_forcing_by_hand():
    h = [np.array([[1.0, 1.0]], dtype=complex)]
    sol = em.zf_precoder(h, np.array([4.0]), 1.0)
    np.testing.assert_allclose(sol.matrices[0][:, 0], [1.0, 1.0], atol=1e-14)
    assert sol.powers.sum() == pytest.approx(2.0)


def test_min_pa_beats_zero_forcing():
    h = em.draw_rayleigh_channel(16, 2, 4, np.ones(2), seed=3)
    gamma = np.array([2.0, 5.0])
    zf = em.zf_precoder(h, gamma, 1.0)
    fp = em.min_pa_precoder(h, gamma, 1.0, tolerance=1e-10, max_iterations=100000)
    assert fp.converged
    assert em.max_zf_residual(h, gamma, 1.0, fp.matrices) < 1e-9
    pa = em.PaModel(1.0, 0.22)
    assert em.pa_consumed_power(fp.powers, pa) <= em.pa_consumed_power(zf.powers, pa)


def test_single_user_sparsity_matches_oracle():
    h = em.draw_rayleigh_channel(5, 1, 1, np.ones(1), seed=8)
    gamma = np.array([3.0])
    fp = em.min_pa_precoder(h, gamma, 1.0, tolerance=1e-13, max_iterations=1000000)
    powers, objective = em.solve_min_pa_bruteforce(h, gamma, 1.0, alpha=1.0)
    assert np.sqrt(fp.powers).sum() == pytest.approx(objective, rel=1e-6)
    strongest = int(np.argmax(np.abs(h[0][0])))
    assert fp.powers[strongest] == pytest.approx(gamma[0] / abs(h[0][0][strongest]) ** 2, rel=1e-6)


def test_asymptotic_plan_matches_grid():
    pa, bs = em.PaModel(1.0, 0.22), em.BsModel()
    plan = em.optimal_ma_constrained(64, 4, 3.0, pa, bs)
    assert plan.feasible
    assert plan.m_dagger == em.grid_min_bs(64, 4, 3.0, pa, bs)
    x = em.solve_quartic_ma(4, 2.0, 0.7)
    assert x * (x - 4) ** 3 == pytest.approx(4 * 2.0 / 1.4, rel=1e-12)


def test_errors_are_python_exceptions():
    with pytest.raises(em.InfeasibleError):
        em.optimal_ma_constrained(8, 4, 1e4, em.PaModel(1.0, 0.22), em.BsModel())
    with pytest.raises(em.DomainError):
        em.PaModel(-1.0, 0.22)
    assert issubclass(em.SingularChannelError, em.Error)


def test_flops():
    assert em.estimate_flops("wideband", "conventional", 4, 32, 128) == pytest.approx(232618.667, rel=1e-6)
    assert math.isfinite(em.estimate_flops("asymptotic", "proposed", 4, 20, 128, 7))
