import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from perturbmc import closed_forms
from perturbmc.errors import NullityNotOne, SolverError
from perturbmc.generator import PerturbedGenerator, block_decompose
from perturbmc.scrn_model import ChromatinParams, build_chromatin_model
from perturbmc.stationary_expansion import (higher_order, partial_balance_check, reduced_generator,
                                            stationary_exact, zeroth_and_first_order,
                                            zeroth_via_transient)
from reference_rates import random_params


def _gen(params):
    return build_chromatin_model(params).generator


def test_one_d_two_nucleosomes_by_hand():
    gen = _gen(ChromatinParams("1d", 2, mu=2.0))
    expansion = zeroth_and_first_order(gen)
    np.testing.assert_allclose(expansion.reduced.matrix, 4 / 3 * np.array([[-1, 1], [4, -4]]), rtol=1e-13)
    np.testing.assert_allclose(expansion.coefficient(0), [0.8, 0.0, 0.2], atol=1e-14)
    assert expansion.coefficient(1)[1] == pytest.approx(1.6, rel=1e-13)


@given(st.integers(2, 8), st.floats(0.3, 3.0), st.floats(0.3, 3.0))
@settings(max_examples=30, deadline=None)
def test_one_d_matches_closed_forms(dtot, mu, b):
    params = ChromatinParams("1d", dtot, mu=mu, b=b)
    gen = _gen(params)
    expansion = zeroth_and_first_order(gen)
    np.testing.assert_allclose(expansion.coefficient(0), closed_forms.one_d_limit(params), atol=1e-12)
    np.testing.assert_allclose(expansion.reduced.matrix, closed_forms.one_d_reduced_generator(params),
                               rtol=1e-10)
    np.testing.assert_allclose(expansion.coefficient(1)[1:-1], closed_forms.one_d_beta1(params), rtol=1e-10)


def test_two_d_matches_closed_forms():
    params = ChromatinParams("2d", 2, mu=1.7, b=0.6, rates={"kWA0": 0.4, "kMR_V": 2.2})
    gen = _gen(params)
    expansion = zeroth_and_first_order(gen)
    np.testing.assert_allclose(expansion.reduced.matrix, closed_forms.two_d_reduced_generator(params),
                               rtol=1e-10)
    a, r = gen.space.landmarks["a"], gen.space.landmarks["r"]
    limit = closed_forms.two_d_limit_on_landmarks(params)
    np.testing.assert_allclose(expansion.coefficient(0)[[a, r]], limit, rtol=1e-12)
    first = expansion.coefficient(1)
    for state, value in closed_forms.two_d_beta1(params).items():
        assert first[gen.space.index_of[state]] == pytest.approx(value, rel=1e-10, abs=1e-14)


@given(st.sampled_from(["1d", "2d", "3d", "4d"]), st.integers(2, 3), st.integers(0, 2**31))
@settings(max_examples=25, deadline=None)
def test_deviation_matrix_identities(kind, dtot, seed):
    gen = _gen(random_params(kind, dtot, np.random.default_rng(seed)))
    reduced = reduced_generator(block_decompose(gen))
    D, QA, alpha = reduced.deviation, reduced.matrix, reduced.alpha
    m = len(alpha)
    ones_alpha = np.outer(np.ones(m), alpha)
    np.testing.assert_allclose(D @ np.ones(m), 0, atol=1e-10)
    np.testing.assert_allclose(alpha @ D, 0, atol=1e-10)
    np.testing.assert_allclose(QA @ D, ones_alpha - np.eye(m), atol=1e-9)
    np.testing.assert_allclose(D @ QA, ones_alpha - np.eye(m), atol=1e-9)


@given(st.sampled_from(["1d", "2d", "3d", "4d"]), st.integers(2, 3), st.integers(0, 2**31))
@settings(max_examples=25, deadline=None)
def test_recursion_invariants(kind, dtot, seed):
    gen = _gen(random_params(kind, dtot, np.random.default_rng(seed)))
    expansion = higher_order(gen, 3)
    coefficients = expansion.coefficients
    assert coefficients[0].sum() == pytest.approx(1.0, abs=1e-12)
    assert coefficients[0].min() >= -1e-14
    np.testing.assert_allclose(coefficients[0] @ gen.Q0, 0, atol=1e-10)
    for k in range(1, 4):
        assert abs(coefficients[k].sum()) < 1e-9 * max(1, np.abs(coefficients[k]).max())
        scale = max(1, np.abs(coefficients[k]).max(), np.abs(coefficients[k - 1]).max())
        residual = coefficients[k] @ gen.Q0 + coefficients[k - 1] @ gen.Q1
        assert np.abs(residual).max() < 1e-8 * scale


@given(st.sampled_from(["1d", "2d", "3d", "4d"]), st.integers(2, 3), st.integers(0, 2**31))
@settings(max_examples=20, deadline=None)
def test_transient_route_agrees(kind, dtot, seed):
    gen = _gen(random_params(kind, dtot, np.random.default_rng(seed)))
    expansion = zeroth_and_first_order(gen)
    alpha, beta1 = zeroth_via_transient(gen)
    np.testing.assert_allclose(alpha, expansion.alphas[0], atol=1e-10)
    np.testing.assert_allclose(beta1, expansion.betas[1], rtol=1e-8, atol=1e-12)


@pytest.mark.parametrize("kind,dtot", [("1d", 3), ("2d", 2), ("3d", 2), ("4d", 2)])
def test_series_error_shrinks_at_expected_rate(kind, dtot):
    gen = _gen(ChromatinParams(kind, dtot))
    expansion = higher_order(gen, 2)
    for order in range(3):
        errors = [np.abs(stationary_exact(gen, e) - expansion.evaluate(e, order)).max() for e in (1e-2, 1e-3)]
        assert np.log10(errors[0] / errors[1]) == pytest.approx(order + 1, abs=0.15)


def test_gth_agrees_with_least_squares():
    gen = _gen(ChromatinParams("2d", 3))
    for eps in (0.5, 1e-2, 1e-4):
        gth = stationary_exact(gen, eps)
        lstsq = stationary_exact(gen, eps, method="lstsq")
        np.testing.assert_allclose(gth, lstsq, atol=1e-10)
        assert gth.min() > 0


def test_gth_keeps_relative_accuracy_on_tiny_components():
    params = ChromatinParams("1d", 12, mu=0.9)
    pi = stationary_exact(_gen(params), 1e-3)
    np.testing.assert_allclose(pi, closed_forms.one_d_stationary(params, 1e-3), rtol=1e-10)


def test_unknown_method_rejected():
    with pytest.raises(ValueError):
        stationary_exact(_gen(ChromatinParams("1d", 2)), 0.1, method="svd")


def test_partial_balance_on_birth_death_chain():
    balance = partial_balance_check(_gen(ChromatinParams("1d", 2)), 0.1)
    assert balance.transient == (1,)
    assert np.isfinite(balance.max_residual)


def test_reduced_generator_with_two_closed_classes_raises():
    # two absorbing states never connected through transient states
    Q0 = np.zeros((4, 4))
    Q0[2, 0] = Q0[3, 1] = 1.0
    Q1 = np.zeros((4, 4))
    Q1[0, 2] = Q1[1, 3] = 1.0
    for Q in (Q0, Q1):
        np.fill_diagonal(Q, -Q.sum(axis=1))
    gen = PerturbedGenerator(Q0, Q1)
    with pytest.raises(NullityNotOne):
        reduced_generator(block_decompose(gen))


def test_recursion_check_trips_with_absurd_tolerance(monkeypatch):
    monkeypatch.setenv("PERTURBMC_TOL_REC", "1e-30")
    gen = _gen(ChromatinParams("4d", 3, mu=1.3))
    with pytest.raises(SolverError):
        higher_order(gen, 3)
