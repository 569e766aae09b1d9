import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from perturbmc.errors import AssumptionViolation, ModelError, NearCancellationWarning, SingularBlock
from perturbmc.generator import (PerturbedGenerator, block_decompose, classify_states,
                                 verify_assumptions)
from perturbmc.scrn_model import ChromatinParams, build_chromatin_model
from reference_rates import random_params


def _gen(kind, dtot, **kw):
    return build_chromatin_model(ChromatinParams(kind, dtot, **kw)).generator


def test_rows_sum_to_zero_and_irreducible():
    for kind in ("1d", "2d", "3d", "4d"):
        gen = _gen(kind, 3)
        assert np.abs(gen.Q0.sum(axis=1)).max() < 1e-12
        assert np.abs(gen.Q1.sum(axis=1)).max() < 1e-12
        assert gen.irreducible_at(0.5)
        assert not gen.irreducible_at(0.0)


def test_constructor_rejects_bad_rows():
    with pytest.raises(ModelError, match="sum to zero"):
        PerturbedGenerator(np.array([[0.0, 1.0], [0.0, 0.0]]), np.zeros((2, 2)))
    with pytest.raises(ModelError, match="negative"):
        PerturbedGenerator(np.array([[1.0, -1.0], [0.0, 0.0]]), np.zeros((2, 2)))


def test_classification_of_builtins():
    for kind, dtot in (("1d", 3), ("2d", 3), ("3d", 2), ("4d", 2)):
        gen = _gen(kind, dtot)
        cls = classify_states(gen)
        landmarks = gen.space.landmarks
        assert set(cls.absorbing) == {landmarks["a"], landmarks["r"]}
        assert cls.absorbing[0] == landmarks["a"]
        assert len(cls.transient) == gen.n - 2


def test_closed_class_violation():
    Q0 = np.array([[-1.0, 1.0, 0.0], [1.0, -1.0, 0.0], [0.0, 1.0, -1.0]])
    Q1 = np.array([[-1.0, 0.0, 1.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    with pytest.raises(AssumptionViolation) as info:
        classify_states(PerturbedGenerator(Q0, Q1))
    assert info.value.assumption == 1


def test_no_transient_states_is_a_violation():
    Q1 = np.array([[-1.0, 1.0], [1.0, -1.0]])
    with pytest.raises(AssumptionViolation):
        classify_states(PerturbedGenerator(np.zeros((2, 2)), Q1))


@given(st.sampled_from(["1d", "2d", "3d", "4d"]), st.integers(2, 3), st.integers(0, 2**31))
@settings(max_examples=25, deadline=None)
def test_blocks_reassemble_exactly(kind, dtot, seed):
    gen = build_chromatin_model(random_params(kind, dtot, np.random.default_rng(seed))).generator
    blocks = block_decompose(gen)
    Q0, Q1 = blocks.reassemble()
    assert np.array_equal(Q0, gen.Q0)
    assert np.array_equal(Q1, gen.Q1)
    rhs = np.arange(len(blocks.transient), dtype=float)
    np.testing.assert_allclose(blocks.times_inv_neg_T0(rhs) @ -blocks.T0, rhs, atol=1e-9)


def test_singular_T0_detected():
    # transient state 1 feeds state 2, which only returns to 1 under Q0
    Q0 = np.array([[0.0, 0.0, 0.0], [1.0, -1.0, 0.0], [0.0, 0.0, 0.0]])
    Q1 = np.array([[-1.0, 1.0, 0.0], [0.0, -1.0, 1.0], [1.0, 0.0, -1.0]])
    gen = PerturbedGenerator(Q0, Q1)
    blocks = block_decompose(gen)
    assert blocks.transient == (1,)
    bad = PerturbedGenerator(np.zeros((3, 3)), Q1)
    with pytest.raises(AssumptionViolation):
        block_decompose(bad)


def test_singular_T0_raises_on_forced_classification():
    from perturbmc.generator import Classification

    Q0 = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [1.0, 0.0, -1.0]])
    Q1 = np.array([[-1.0, 1.0, 0.0], [0.0, -1.0, 1.0], [1.0, 0.0, -1.0]])
    gen = PerturbedGenerator(Q0, Q1)
    forced = Classification(absorbing=(0,), transient=(1, 2))
    with pytest.raises(SingularBlock):
        block_decompose(gen, forced)


@pytest.mark.parametrize("kind, expected", [
    ("1d", {1: True, 2: True, 3: True, 4: True, 5: True}),
    ("2d", {1: True, 2: True, 3: True, 4: False, 5: True}),
    ("3d", {1: True, 2: True, 3: False, 4: False, 5: True}),
    ("4d", {1: True, 2: True, 3: False, 4: False, 5: True}),
])
def test_assumption_pattern(kind, expected):
    for dtot in (2, 3):
        report = verify_assumptions(_gen(kind, dtot))
        assert {k: report.holds(k) for k in range(1, 6)} == expected
        assert report.irreducible.holds


def test_near_cancellation_warns():
    Q0 = np.array([[-5e-10, 5e-10, 0.0], [0.0, 0.0, 0.0], [1.0, 0.0, -1.0]])
    Q1 = np.array([[-1.0, 0.0, 1.0], [1.0, -1.0, 0.0], [0.0, 0.0, 0.0]])
    with pytest.warns(NearCancellationWarning):
        classify_states(PerturbedGenerator(Q0, Q1))


def test_transition_vectors_2d():
    gen = _gen("2d", 3)
    assert gen.transition_vectors() == [(-1, 0), (0, -1), (0, 1), (1, 0)]
