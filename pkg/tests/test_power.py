import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cellfree.channel import LargeScaleState
from cellfree.power import (NumericDomainError, PowerPolicy, compute_eta, constraint_residual,
                            effective_power_share)

ALPHAS = [-1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5]


def _state(gamma_row, beta_row=None):
    gamma = np.atleast_2d(np.asarray(gamma_row, float))
    beta = gamma * 1.5 if beta_row is None else np.atleast_2d(np.asarray(beta_row, float))
    return LargeScaleState(beta=beta, pilot_of_ue=np.arange(gamma.shape[1]), gamma=gamma,
                           rho_d=1.0, rho_p=1.0, tau=gamma.shape[1])


def test_single_served_ue_gets_full_budget():
    st_ = _state([0.3, 0.7])
    mask = np.array([[True, False]])
    for alpha in ALPHAS:
        eta = compute_eta(st_, mask, PowerPolicy("gamma", alpha))
        assert eta[0, 0] == pytest.approx(1 / 0.3)
        assert eta[0, 1] == 0.0


def test_uniform_policy_example():
    eta = compute_eta(_state([0.2, 0.3]), np.ones((1, 2), bool), PowerPolicy("gamma", 0.0))
    np.testing.assert_allclose(eta, [[2.0, 2.0]])


def test_inverse_sqrt_example():
    eta = compute_eta(_state([0.25, 1.0]), np.ones((1, 2), bool), PowerPolicy("gamma", -0.5))
    np.testing.assert_allclose(eta, [[4 / 3, 2 / 3]])
    assert 0.25 * eta[0, 0] + 1.0 * eta[0, 1] == pytest.approx(1.0)


def test_beta_basis_keeps_gamma_weighting():
    st_ = _state([0.25, 1.0], beta_row=[1.0, 4.0])
    eta = compute_eta(st_, np.ones((1, 2), bool), PowerPolicy("beta", -0.5))
    # f(beta) = [1, 0.5], denominator 0.25*1 + 1.0*0.5 = 0.75
    np.testing.assert_allclose(eta, [[1 / 0.75, 0.5 / 0.75]])


def test_idle_ap_row_is_zero():
    st_ = _state([[0.2, 0.3], [0.1, 0.4]])
    mask = np.array([[True, True], [False, False]])
    eta = compute_eta(st_, mask, PowerPolicy())
    assert np.all(eta[1] == 0.0)
    np.testing.assert_allclose(constraint_residual(st_, eta), [1.0, 0.0])


def test_bad_policy():
    with pytest.raises(ValueError):
        PowerPolicy("delta", 0.0)
    with pytest.raises(ValueError):
        PowerPolicy("gamma", float("inf"))


def test_non_positive_normalisation_raises():
    st_ = _state([0.0, 0.0])
    with pytest.raises(NumericDomainError):
        compute_eta(st_, np.ones((1, 2), bool), PowerPolicy("gamma", 0.0))


def test_effective_share_proportional_to_sqrt_gamma():
    gamma = np.array([[0.01, 0.09, 0.25, 1.0]])
    st_ = _state(gamma)
    share = effective_power_share(st_, compute_eta(st_, np.ones((1, 4), bool), PowerPolicy()))
    ratio = share / np.sqrt(gamma)
    np.testing.assert_allclose(ratio, ratio[0, 0])
    share0 = effective_power_share(st_, compute_eta(st_, np.ones((1, 4), bool),
                                                    PowerPolicy("gamma", 0.0)))
    np.testing.assert_allclose(share0 / gamma, share0[0, 0] / gamma[0, 0])
    assert share.sum() == pytest.approx(1.0)


def _random(seed, m=6, k=5):
    rng = np.random.default_rng(seed)
    beta = 10 ** rng.uniform(-14, -9, (m, k))
    st_ = LargeScaleState.build(beta, rng.integers(0, 3, k), rho_d=1e11, rho_p=5e10, tau=3)
    mask = rng.random((m, k)) < 0.6
    return st_, mask


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), alpha=st.sampled_from(ALPHAS),
       basis=st.sampled_from(["gamma", "beta"]))
def test_constraint_met_with_equality(seed, alpha, basis):
    st_, mask = _random(seed)
    eta = compute_eta(st_, mask, PowerPolicy(basis, alpha))
    assert np.all(eta >= 0)
    assert np.all(eta[~mask] == 0)
    active = mask.any(axis=1)
    np.testing.assert_allclose(constraint_residual(st_, eta)[active], 1.0, rtol=0, atol=1e-9)
    assert np.all(eta[~active] == 0)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), alpha=st.sampled_from(ALPHAS),
       c=st.floats(1e-3, 1e3))
def test_scaling_one_ap_row(seed, alpha, c):
    st_, mask = _random(seed)
    mask[0] = True
    gamma = st_.gamma.copy()
    gamma[0] *= c
    scaled = LargeScaleState(st_.beta, st_.pilot_of_ue, gamma, st_.rho_d, st_.rho_p, st_.tau)
    policy = PowerPolicy("gamma", alpha)
    share = effective_power_share(scaled, compute_eta(scaled, mask, policy))[0]
    base = effective_power_share(st_, compute_eta(st_, mask, policy))[0]
    np.testing.assert_allclose(share, base, rtol=1e-9)
    law = st_.gamma[0] ** (alpha + 1)
    np.testing.assert_allclose(base, law / law.sum(), rtol=1e-9)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), alpha=st.sampled_from(ALPHAS),
       basis=st.sampled_from(["gamma", "beta"]))
def test_row_depends_only_on_own_statistics(seed, alpha, basis):
    st_, mask = _random(seed)
    policy = PowerPolicy(basis, alpha)
    eta = compute_eta(st_, mask, policy)
    rng = np.random.default_rng(seed + 1)
    perm = np.concatenate([[0], 1 + rng.permutation(st_.beta.shape[0] - 1)])
    other = LargeScaleState(st_.beta[perm], st_.pilot_of_ue, st_.gamma[perm] * 1.0,
                            st_.rho_d, st_.rho_p, st_.tau)
    # scramble everything except row 0, including the other rows' serving sets
    eta2 = compute_eta(other, mask[perm], policy)
    np.testing.assert_array_equal(eta2[0], eta[0])
