"""End-to-end acceptance criteria, one test per criterion with its runtime budget.

Each test logs a PASS/FAIL line that is repeated in the pytest terminal summary.
"""
import warnings

import numpy as np
import pytest

from acceptance_log import criterion
from perturbmc import closed_forms
from perturbmc.comparison import (BUILTIN_CONES, QUANTITIES, check_comparison, monotone_sweep)
from perturbmc.generator import block_decompose
from perturbmc.mfpt import (birth_death_mfpt, birth_death_rates, mean_return_time, mfpt_exact,
                            mfpt_leading)
from perturbmc.oracle import SimConfig, hitting_time_sample, slope_fit, ssa_run, total_variation
from perturbmc.pole_order import pole_orders
from perturbmc.scrn_model import ChromatinParams, build_chromatin_model
from perturbmc.stationary_expansion import (higher_order, stationary_exact, zeroth_and_first_order,
                                            zeroth_via_transient)
from reference_rates import random_params


def _gen(params):
    return build_chromatin_model(params).generator


def _relative(computed, expected):
    computed, expected = np.asarray(computed, float), np.asarray(expected, float)
    return float(np.max(np.abs(computed - expected) / np.maximum(np.abs(expected), 1e-300)))


def test_one_d_closed_forms():
    with criterion(1, "1D closed forms", time_limit=1.0) as notes:
        worst = 0.0
        for dtot in (2, 3, 5):
            for mu in (0.5, 2.0):
                for b in (1.0, 2.0):
                    params = ChromatinParams("1d", dtot, mu=mu, b=b)
                    expansion = zeroth_and_first_order(_gen(params))
                    worst = max(worst,
                                _relative(expansion.coefficient(0)[[0, -1]], closed_forms.one_d_limit(params)[[0, -1]]),
                                _relative(expansion.coefficient(1)[1:-1], closed_forms.one_d_beta1(params)),
                                _relative(expansion.reduced.matrix, closed_forms.one_d_reduced_generator(params)))
        notes.append(f"max relative error {worst:.1e}")
        assert worst <= 1e-10


def test_two_d_closed_forms():
    with criterion(2, "2D two-nucleosome closed forms", time_limit=1.0) as notes:
        rng = np.random.default_rng(2024)
        draws = [ChromatinParams("2d", 2)] + [random_params("2d", 2, rng) for _ in range(3)]
        worst_limit, worst_beta = 0.0, 0.0
        for params in draws:
            gen = _gen(params)
            expansion = zeroth_and_first_order(gen)
            a, r = gen.space.landmarks["a"], gen.space.landmarks["r"]
            worst_limit = max(worst_limit,
                              _relative(expansion.coefficient(0)[[a, r]], closed_forms.two_d_limit_on_landmarks(params)),
                              _relative(expansion.reduced.matrix, closed_forms.two_d_reduced_generator(params)))
            first = expansion.coefficient(1)
            for state, value in closed_forms.two_d_beta1(params).items():
                computed = first[gen.space.index_of[state]]
                error = abs(computed) if value == 0 else abs(computed - value) / abs(value)
                worst_beta = max(worst_beta, error)
        notes.append(f"limit/generator {worst_limit:.1e}, first order {worst_beta:.1e}")
        assert worst_limit <= 1e-9
        assert worst_beta <= 1e-9


def test_three_d_corner_and_passage_times():
    with criterion(3, "3D two-nucleosome expansion and passage times", time_limit=5.0) as notes:
        params = ChromatinParams("3d", 2)
        gen = _gen(params)
        expansion = zeroth_and_first_order(gen)
        np.testing.assert_allclose(expansion.alphas[0], [0.0, 1.0], atol=1e-12)
        expected = closed_forms.three_d_beta1(params)
        first = expansion.coefficient(1)
        transient = np.array(expansion.blocks.transient)
        support = {tuple(int(c) for c in gen.space.states[i])
                   for i in transient[np.abs(expansion.betas[1]) > 1e-12]}
        assert support == set(expected)
        for state, value in expected.items():
            assert first[gen.space.index_of[state]] == pytest.approx(value, rel=1e-10)
        eps = 1e-4
        ratios = []
        for source, target, power in (("a", "r", 1), ("r", "a", 2)):
            leading = mfpt_leading(gen, source, target)
            assert leading.order == power
            exact = mfpt_exact(gen, eps, [target])[gen.resolve(source)]
            ratios.append(exact * eps ** power / leading.coefficient)
        notes.append("scaled exact / leading = " + ", ".join(f"{r:.5f}" for r in ratios))
        assert all(abs(r - 1) <= 0.01 for r in ratios)


def test_pole_orders():
    with criterion(4, "pole orders with slope cross-check", time_limit=30.0) as notes:
        grid = [1e-3, 3e-4, 1e-4, 3e-5, 1e-5]
        cases = [(kind, dtot, 1, 1) for kind in ("1d", "2d") for dtot in (2, 3, 5, 10)]
        cases += [(kind, dtot, 1, 2) for kind in ("3d", "4d") for dtot in (2, 3)]
        worst = 0.0
        for kind, dtot, p_ar, p_ra in cases:
            gen = _gen(ChromatinParams(kind, dtot))
            a, r = gen.space.landmarks["a"], gen.space.landmarks["r"]
            assert pole_orders(gen, [r])[a] == p_ar, (kind, dtot)
            assert pole_orders(gen, [a])[r] == p_ra, (kind, dtot)
            for source, target, p in ((a, r, p_ar), (r, a, p_ra)):
                slope, _ = slope_fit([mfpt_exact(gen, e, [target])[source] for e in grid], grid)
                worst = max(worst, abs(slope + p))
        notes.append(f"{len(cases)} models, max |slope + p| {worst:.3f}")
        assert worst <= 0.15


def test_expansion_convergence():
    with criterion(5, "expansion convergence rates", time_limit=10.0) as notes:
        grid = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4]
        lowest = {}
        for kind, dtot in (("1d", 3), ("2d", 2), ("3d", 2), ("4d", 2)):
            gen = _gen(ChromatinParams(kind, dtot))
            expansion = higher_order(gen, 2)
            exact = [stationary_exact(gen, e) for e in grid]
            for K in range(3):
                errors = [np.abs(pi - expansion.evaluate(e, K)).max() for pi, e in zip(exact, grid)]
                slope, _ = slope_fit(errors, grid)
                lowest[K] = min(lowest.get(K, np.inf), slope - K)
        notes.append("min slope - K: " + ", ".join(f"K={k} {v:.3f}" for k, v in lowest.items()))
        assert all(v >= 0.7 for v in lowest.values())


def test_route_equivalence():
    with criterion(6, "alternative routes agree") as notes:
        alpha_gap, bd_gap = 0.0, 0.0
        for kind, dtot in (("1d", 2), ("1d", 3), ("1d", 5), ("2d", 2), ("2d", 3)):
            gen = _gen(ChromatinParams(kind, dtot, mu=1.4))
            blocks = block_decompose(gen)
            alpha, _ = zeroth_via_transient(gen, blocks)
            alpha_gap = max(alpha_gap, np.abs(alpha - higher_order(gen, 0, blocks).alphas[0]).max())
        for dtot in (2, 3, 5, 10):
            for mu in (0.5, 1.0, 2.0):
                gen = _gen(ChromatinParams("1d", dtot, mu=mu))
                for eps in (1e-1, 1e-2, 1e-3):
                    down, up = birth_death_mfpt(*birth_death_rates(gen, eps))
                    bd_gap = max(bd_gap, _relative([down, up], [mfpt_exact(gen, eps, [0])[-1],
                                                                mfpt_exact(gen, eps, [gen.n - 1])[0]]))
        notes.append(f"alpha routes {alpha_gap:.1e}, birth-death {bd_gap:.1e}")
        assert alpha_gap <= 1e-9
        assert bd_gap <= 1e-10


def test_return_time_identity():
    with criterion(7, "return-time identity") as notes:
        worst = 0.0
        for kind, dtot in (("1d", 3), ("1d", 5), ("2d", 2), ("2d", 3)):
            gen = _gen(ChromatinParams(kind, dtot))
            for eps in (1e-1, 1e-2, 1e-3):
                pi, Q = stationary_exact(gen, eps), gen.at(eps)
                for x in range(gen.n):
                    worst = max(worst, abs(pi[x] * -Q[x, x] * mean_return_time(gen, eps, x) - 1))
        notes.append(f"max deviation {worst:.1e}")
        assert worst <= 1e-9


def test_comparison_and_monotone_sweeps():
    with criterion(8, "comparison conditions and monotone sweeps", time_limit=30.0) as notes:
        expected = {"h_ar": "non-decreasing", "h_ra": "non-increasing",
                    "pi_a": "non-decreasing", "pi_r": "non-increasing"}
        cases = [("2d", 3, "mu", False), ("3d", 2, "mu_prime", False), ("4d", 2, "mu_prime", True)]
        grid = [0.5, 1.0, 1.5, 2.0]
        for kind, dtot, parameter, approximate in cases:
            def build(value, kind=kind, dtot=dtot, parameter=parameter, approximate=approximate):
                params = ChromatinParams(kind, dtot, approximate_pairs=approximate, **{parameter: value})
                return _gen(params)
            for lower, upper in zip(grid[1:], grid[:-1]):
                report = check_comparison(build(lower), build(upper), BUILTIN_CONES[kind])
                assert report.holds, (kind, lower, upper, [str(v) for v in report.violations[:3]])
            verdicts = {q: monotone_sweep(build, parameter, grid, 1e-2, q).verdict for q in QUANTITIES}
            assert verdicts == expected, (kind, verdicts)
            notes.append(f"{kind} ok")


def test_simulation_cross_check():
    with criterion(9, "simulation cross-check", time_limit=60.0) as notes:
        gen = _gen(ChromatinParams("1d", 5))
        eps = 0.1
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            sim = ssa_run(gen, SimConfig(eps, n_events=1_000_000, seed=7))
        tv = total_variation(sim.occupancy, stationary_exact(gen, eps))
        notes.append(f"TV {tv:.4f}")
        assert tv <= 0.05
        for source, target in (("a", "r"), ("r", "a"), ((2,), "r")):
            sample = hitting_time_sample(gen, eps, source, [target], 1000, seed=11)
            exact = mfpt_exact(gen, eps, [target])[gen.resolve(source)]
            z = (sample.mean - exact) / sample.standard_error
            notes.append(f"z({gen.label(gen.resolve(source))}) {z:+.2f}")
            assert abs(z) <= 3


def test_large_one_d_sweep():
    with criterion(10, "1D fifty-nucleosome sweep", time_limit=10.0) as notes:
        eps_grid = [0.2, 0.1, 0.05, 0.01]
        extreme_mass = {}
        for mu in (0.8, 0.9, 1.1, 1.2):
            params = ChromatinParams("1d", 50, mu=mu)
            gen = _gen(params)
            masses = []
            for eps in eps_grid:
                pi = stationary_exact(gen, eps)
                assert _relative(pi, closed_forms.one_d_stationary(params, eps)) <= 1e-9
                masses.append(pi[0] + pi[-1])
            assert np.all(np.diff(masses) > 0), (mu, masses)
            # the split between the extremes approaches the limiting ratio b mu^D
            pi_small = stationary_exact(gen, 1e-8)
            limit = closed_forms.one_d_limit(params)
            assert pi_small[0] / pi_small[-1] == pytest.approx(limit[0] / limit[-1], rel=1e-4)
            extreme_mass[mu] = masses[-1]
        notes.append("mass on extremes at eps=0.01: "
                     + ", ".join(f"mu={mu} {m:.3f}" for mu, m in extreme_mass.items()))
        # stated threshold; at fifty nucleosomes it is only reached near eps = 1e-3
        assert extreme_mass[0.8] >= 0.9 and extreme_mass[1.2] >= 0.9
