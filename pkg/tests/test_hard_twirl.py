"""Tests for the three twirl routes and their mutual agreement."""

import numpy as np
import pytest

from combcert.combs import certify_comb
from combcert.hard import (
    GammaFamily,
    HardInstanceSpec,
    commutant_projector,
    gamma_twirl,
    gamma_twirl_exact_commutant,
    gamma_twirl_monte_carlo,
    gamma_twirl_weingarten,
    rho_action,
)
from combcert.hard.instance import comb_sequence, slot_spaces
from combcert.linalg import LabeledOperator, haar_unitary, psd_check, random_psd


def test_rho_action_is_a_representation():
    rng = np.random.default_rng(0)
    spec = HardInstanceSpec.random(2, 5, rng)
    k = spec.rotor_dim
    u, w = haar_unitary(k, rng), haar_unitary(k, rng)
    lhs = rho_action(spec, 2, u) @ rho_action(spec, 2, w)
    np.testing.assert_allclose(lhs, rho_action(spec, 2, u @ w), atol=1e-12)


def test_commutant_projector_is_projection_onto_commutant():
    rng = np.random.default_rng(1)
    spec = HardInstanceSpec.random(1, 3, rng)
    proj = commutant_projector(spec, 2, seed=7)
    dim = (spec.d1 * spec.d2) ** 2
    x = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    tw = proj.twirl(x)
    # idempotent
    np.testing.assert_allclose(proj.twirl(tw), tw, atol=1e-10)
    # output commutes with a fresh group element
    g = rho_action(spec, 2, haar_unitary(spec.rotor_dim, rng))
    np.testing.assert_allclose(tw @ g, g @ tw, atol=1e-9)
    # the identity lies in the commutant and is fixed
    eye = np.eye(dim, dtype=complex)
    np.testing.assert_allclose(proj.twirl(eye), eye, atol=1e-10)
    # twirl output of a Hermitian input stays Hermitian
    h = (x + x.conj().T) / 2
    th = proj.twirl(h)
    np.testing.assert_allclose(th, th.conj().T, atol=1e-10)


def test_commutant_projector_dimension_cap():
    spec = HardInstanceSpec.concrete(2, 4)
    with pytest.raises(ValueError):
        commutant_projector(spec, 3)  # dim 512 > 48


def test_weingarten_matches_commutant_on_grid():
    # includes rotor_dim = 1 and 2 cells where the permutation Gram matrix is
    # singular for i >= 2 and i >= 3 respectively
    rng = np.random.default_rng(2)
    cells = [(1, 2, 3), (1, 3, 3), (2, 4, 1), (2, 5, 1)]
    for d1, d2, n_max in cells:
        spec = HardInstanceSpec.random(d1, d2, rng)
        for n in range(1, n_max + 1):
            proj = commutant_projector(spec, n, seed=11)
            for i in range(n + 1):
                gw = gamma_twirl_weingarten(spec, n, i)
                gc = gamma_twirl_exact_commutant(spec, n, i, projector=proj)
                assert np.linalg.norm(gw - gc) <= 1e-8, (d1, d2, n, i)


def test_twirl_output_invariances():
    rng = np.random.default_rng(3)
    for d1, d2, n in [(1, 2, 3), (1, 3, 2), (2, 4, 2)]:
        spec = HardInstanceSpec.random(d1, d2, rng)
        for i in range(n + 1):
            g = gamma_twirl_weingarten(spec, n, i)
            # trace d1^n, PSD, commutes with fresh rho(U)
            np.testing.assert_allclose(np.trace(g).real, d1**n, atol=1e-9)
            assert psd_check(g, tol=1e-10).ok
            r = rho_action(spec, n, haar_unitary(spec.rotor_dim, rng))
            assert np.linalg.norm(g @ r - r @ g) <= 1e-9


def test_twirled_gamma_is_comb():
    rng = np.random.default_rng(4)
    for d1, d2 in [(1, 2), (1, 3), (2, 4), (2, 5)]:
        for n in (1, 2):
            spec = HardInstanceSpec.random(d1, d2, rng)
            for i in range(n + 1):
                g = gamma_twirl_weingarten(spec, n, i)
                op = LabeledOperator(mat=g, spaces=slot_spaces(spec, n))
                cert = certify_comb(op, comb_sequence(n), psd_tol=1e-7, chain_tol=1e-7)
                assert cert.ok, (d1, d2, n, i, cert)


def test_monte_carlo_agrees_with_exact():
    rng_seed = 5
    spec = HardInstanceSpec.concrete(1, 3)
    n, i, samples = 2, 1, 20_000
    est, se = gamma_twirl_monte_carlo(spec, n, i, samples=samples, seed=rng_seed)
    exact = gamma_twirl_weingarten(spec, n, i)
    assert np.max(np.abs(est - exact)) <= 5 * se
    assert se == pytest.approx(1.0 / np.sqrt(samples))


def test_gamma_twirl_dispatcher():
    spec = HardInstanceSpec.concrete(1, 2)
    g_auto = gamma_twirl(spec, 2, 1)
    np.testing.assert_allclose(g_auto, gamma_twirl_weingarten(spec, 2, 1), atol=1e-12)
    with pytest.raises(ValueError):
        gamma_twirl(spec, 2, 1, method="nonsense")
    # i above the permutation cap with dimension above the commutant cap must
    # refuse rather than silently sample
    big = HardInstanceSpec.concrete(2, 4)
    with pytest.raises(ValueError):
        gamma_twirl(big, 5, 5)
    # explicit monte-carlo opt-in works there
    out = gamma_twirl(spec, 2, 2, method="monte-carlo", samples=500, seed=0)
    assert out.shape == (4, 4)


def test_weingarten_rejects_large_order():
    spec = HardInstanceSpec.concrete(1, 2)
    with pytest.raises(ValueError):
        gamma_twirl_weingarten(spec, 6, 5)
