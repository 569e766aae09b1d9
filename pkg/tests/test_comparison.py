import numpy as np
import pytest

from perturbmc.comparison import (BUILTIN_CONES, QUANTITIES, ConeSpec, SweepTable, check_comparison,
                                  evaluate_quantity, increasing_set_check, monotone_sweep)
from perturbmc.errors import ModelError
from perturbmc.generator import PerturbedGenerator
from perturbmc.scrn_model import ChromatinParams, build_chromatin_model


def _builder(kind, dtot, parameter, **kw):
    def build(value):
        params = ChromatinParams(kind, dtot, **{parameter: value}, **kw)
        return build_chromatin_model(params).generator
    return build


def test_cone_validation_and_order():
    with pytest.raises(ModelError):
        ConeSpec(((0, 0), (1, 0)))
    with pytest.raises(ModelError):
        ConeSpec(((0.5, 1.0),))
    cone = BUILTIN_CONES["2d"]
    assert cone.precedes((0, 2), (1, 0))
    assert not cone.precedes((1, 0), (0, 2))


@pytest.mark.parametrize("kind,parameter", [("2d", "mu"), ("3d", "mu_prime")])
@pytest.mark.parametrize("dtot", [2, 3])
def test_smaller_asymmetry_dominates(kind, parameter, dtot):
    build = _builder(kind, dtot, parameter)
    report = check_comparison(build(2.0), build(1.0), BUILTIN_CONES[kind])
    assert report.jumps_ok and report.holds


def test_reversed_orientation_fails():
    build = _builder("2d", 2, "mu")
    report = check_comparison(build(1.0), build(2.0), BUILTIN_CONES["2d"])
    assert not report.holds
    assert all(v.direction in ("in", "out") for v in report.violations)
    assert "need upper" in str(report.violations[0])


def test_four_d_grouped_check_holds_with_approximate_pairs():
    build = _builder("4d", 2, "mu_prime", approximate_pairs=True)
    assert check_comparison(build(2.0), build(1.0), BUILTIN_CONES["4d"]).holds


def test_four_d_exact_rates_violate_grouped_check():
    build = _builder("4d", 2, "mu_prime")
    report = check_comparison(build(2.0), build(1.0), BUILTIN_CONES["4d"])
    assert report.jumps_ok
    assert len(report.violations) == 4


def test_cone_with_large_jump_images_is_flagged():
    build = _builder("2d", 2, "mu")
    cone = ConeSpec(((2, 0), (0, -1)))
    report = check_comparison(build(2.0), build(1.0), cone)
    assert not report.jumps_ok
    assert (1, 0) in report.bad_jumps


def test_dimension_mismatch_rejected():
    build = _builder("2d", 2, "mu")
    with pytest.raises(ModelError):
        check_comparison(build(2.0), build(1.0), BUILTIN_CONES["3d"])
    bare = PerturbedGenerator(np.zeros((2, 2)), np.array([[-1.0, 1.0], [1.0, -1.0]]))
    with pytest.raises(ModelError):
        check_comparison(bare, bare, BUILTIN_CONES["2d"])


def test_increasing_set_classification():
    gen = _builder("2d", 2, "mu")(1.0)
    cone = BUILTIN_CONES["2d"]
    a, r = gen.space.landmarks["a"], gen.space.landmarks["r"]
    assert increasing_set_check(cone, gen.space.states, [r]).kind == "increasing"
    assert increasing_set_check(cone, gen.space.states, [a]).kind == "decreasing"
    assert increasing_set_check(cone, gen.space.states, range(gen.n)).kind == "both"
    middle = [i for i in range(gen.n) if i not in (a, r)][:1]
    assert increasing_set_check(cone, gen.space.states, middle).kind == "neither"


@pytest.mark.parametrize("kind,dtot,parameter,kw", [("2d", 3, "mu", {}), ("3d", 2, "mu_prime", {}),
                                                     ("4d", 2, "mu_prime", {"approximate_pairs": True})])
def test_sweep_directions(kind, dtot, parameter, kw):
    build = _builder(kind, dtot, parameter, **kw)
    grid = [0.5, 0.8, 1.0, 1.5, 2.0, 3.0]
    expected = {"h_ar": "non-decreasing", "h_ra": "non-increasing",
                "pi_a": "non-decreasing", "pi_r": "non-increasing"}
    for quantity in QUANTITIES:
        assert monotone_sweep(build, parameter, grid, 1e-2, quantity).verdict == expected[quantity]


def test_sweep_verdicts_and_errors():
    assert SweepTable("p", "q", 0.1, [1, 2, 3], [1.0, 1.0, 1.0]).verdict == "constant"
    assert SweepTable("p", "q", 0.1, [1, 2, 3], [1.0, 2.0, 1.0]).verdict == "non-monotone"
    build = _builder("2d", 2, "mu")
    with pytest.raises(ModelError):
        monotone_sweep(build, "mu", [], 0.1, "h_ar")
    with pytest.raises(ModelError):
        evaluate_quantity(build(1.0), 0.1, "variance")
