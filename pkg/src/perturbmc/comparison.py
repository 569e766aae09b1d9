"""Hypotheses of the cone-ordering comparison theorem and monotone parameter sweeps.

Two chains on the same lattice with jump vectors ``v_j`` and rates
``L_j`` (reference) and ``L'_j`` (comparison) can be coupled so that
``X(t) <=_A X'(t)`` for all time when

(i)  every ``A v_j`` has entries in ``{-1, 0, 1}``, and
(ii) on each face ``i`` of the cone ``{y : A (y - x) >= 0}``, jumps that
     point out through the face are no faster for the upper chain and jumps
     that point inward are no slower.

Hitting times of increasing sets are then shorter for the upper chain and
the stationary mass of increasing sets is larger.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import config
from .errors import ModelError
from .generator import PerturbedGenerator
from .mfpt import mfpt_exact
from .stationary_expansion import stationary_exact


@dataclass(frozen=True)
class ConeSpec:
    """Cone matrix ``A`` with optional grouping of jump vectors.

    Parameters
    ----------
    matrix : array_like of int, shape (m, d)
    groups : sequence of sequence of tuple, optional
        When given, condition (ii) is checked on summed rates within each
        group instead of per jump vector. Jumps not in any group form
        singleton groups.
    """

    matrix: tuple[tuple[int, ...], ...]
    groups: tuple[tuple[tuple[int, ...], ...], ...] | None = None

    def __post_init__(self):
        A = np.asarray(self.matrix)
        if A.ndim != 2 or A.size == 0 or not np.issubdtype(A.dtype, np.integer):
            raise ModelError("cone matrix must be a nonempty integer matrix")
        if np.any(~A.any(axis=1)):
            raise ModelError("cone matrix has a zero row")
        object.__setattr__(self, "matrix", tuple(tuple(int(v) for v in row) for row in A))
        if self.groups is not None:
            object.__setattr__(self, "groups", tuple(tuple(tuple(int(c) for c in v) for v in g)
                                                     for g in self.groups))

    @property
    def A(self) -> np.ndarray:
        return np.array(self.matrix, dtype=np.int64)

    def precedes(self, x, y) -> bool:
        """``x <=_A y``."""
        return bool(np.all(self.A @ (np.asarray(y) - np.asarray(x)) >= 0))


BUILTIN_CONES = {
    "2d": ConeSpec(((1, 0), (0, -1))),
    "3d": ConeSpec(((1, 0, 0), (0, -1, 0), (1, 0, 1))),
    "4d": ConeSpec(((0, -1, 0, 0), (1, 0, 1, 0), (1, 0, 0, 1), (1, 0, 1, 1)),
                   groups=(((0, 0, 0, 1), (1, 0, -1, 0)),
                           ((0, 0, 0, -1), (-1, 0, 1, 0)),
                           ((0, 0, 1, 0), (1, 0, 0, -1)),
                           ((0, 0, -1, 0), (-1, 0, 0, 1)),
                           ((0, 1, 0, 0),),
                           ((0, -1, 0, 0),))),
}

# parameter whose increase moves the chain up in the built-in cone order
BUILTIN_CONE_PARAMETER = {"2d": "mu", "3d": "mu_prime", "4d": "mu_prime"}


@dataclass
class Violation:
    source: str
    witness: str
    face: int
    jumps: tuple[tuple[int, ...], ...]
    eps: float
    lower_rate: float
    upper_rate: float
    direction: str

    def __str__(self) -> str:
        relation = "<=" if self.direction == "out" else ">="
        return (f"x={self.source} y={self.witness} face={self.face} jumps={list(self.jumps)} "
                f"eps={self.eps:g}: need upper {self.upper_rate:.6g} {relation} lower {self.lower_rate:.6g}")


@dataclass
class ComparisonReport:
    jumps_ok: bool
    bad_jumps: list[tuple[int, ...]]
    violations: list[Violation] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.jumps_ok and not self.violations


def _rate_table(gen: PerturbedGenerator, jumps: Sequence[tuple[int, ...]], eps: float) -> np.ndarray:
    """``rates[x, j]`` = rate of jump ``j`` out of state ``x``."""
    Q = gen.at(eps)
    space = gen.space
    table = np.zeros((gen.n, len(jumps)))
    for j, v in enumerate(jumps):
        for x in range(gen.n):
            y = space.index_of.get(tuple(int(c) for c in space.states[x] + np.asarray(v)))
            if y is not None:
                table[x, j] = Q[x, y]
    return table


def check_comparison(gen: PerturbedGenerator, gen_upper: PerturbedGenerator, cone: ConeSpec,
                     eps_values: Sequence[float] | None = None, rtol: float = 1e-12) -> ComparisonReport:
    """Check conditions (i) and (ii) for a reference chain and an upper chain.

    Rates are affine in eps, so checking both ends of the eps domain covers
    the whole interval; that is the default.

    Parameters
    ----------
    gen : PerturbedGenerator
        Reference chain ``X``.
    gen_upper : PerturbedGenerator
        Chain ``X'`` expected to dominate ``X`` in the cone order.
    """
    if gen.space is None or gen_upper.space is None or gen.n != gen_upper.n:
        raise ModelError("both generators need the same state space")
    if not np.array_equal(gen.space.states, gen_upper.space.states):
        raise ModelError("generators are defined on different state spaces")
    A = cone.A
    if A.shape[1] != gen.space.dimension:
        raise ModelError("cone matrix does not match the state dimension")
    jumps = sorted(set(gen.transition_vectors()) | set(gen_upper.transition_vectors()))
    images = np.array([A @ np.asarray(v) for v in jumps])
    bad = [v for v, img in zip(jumps, images) if np.abs(img).max() > 1]
    report = ComparisonReport(not bad, bad)

    if cone.groups is None:
        groups = [(v,) for v in jumps]
    else:
        # groups may name jumps that never occur in this state space
        listed = {v for g in cone.groups for v in g}
        groups = [tuple(v for v in g if v in set(jumps)) for g in cone.groups]
        groups += [(v,) for v in jumps if v not in listed]
        groups = [g for g in groups if g]
    column = {v: j for j, v in enumerate(jumps)}
    states = gen.space.states
    eps_values = [0.0, gen.eps_max] if eps_values is None else list(eps_values)
    for eps in eps_values:
        lower = _rate_table(gen, jumps, eps)
        upper = _rate_table(gen_upper, jumps, eps)
        for x in range(gen.n):
            offsets = (states - states[x]) @ A.T
            in_cone = np.all(offsets >= 0, axis=1)
            for i in range(A.shape[0]):
                witnesses = np.nonzero(in_cone & (offsets[:, i] == 0))[0]
                if witnesses.size == 0:
                    continue
                for group in groups:
                    for direction, sign in (("out", -1), ("in", 1)):
                        members = [column[v] for v in group if np.sign(A[i] @ np.asarray(v)) == sign]
                        if not members:
                            continue
                        reference = lower[x, members].sum()
                        candidate = upper[np.ix_(witnesses, members)].sum(axis=1)
                        slack = rtol * max(1.0, abs(reference))
                        failed = candidate > reference + slack if sign < 0 else candidate < reference - slack
                        for y in witnesses[failed]:
                            report.violations.append(Violation(
                                gen.label(x), gen.label(y), i, tuple(jumps[m] for m in members), eps,
                                float(reference), float(upper[y, members].sum()), direction))
    return report


@dataclass(frozen=True)
class SetMonotonicity:
    increasing: bool
    decreasing: bool

    @property
    def kind(self) -> str:
        if self.increasing and self.decreasing:
            return "both"
        if self.increasing:
            return "increasing"
        if self.decreasing:
            return "decreasing"
        return "neither"


def increasing_set_check(cone: ConeSpec, states: np.ndarray, subset: Sequence[int]) -> SetMonotonicity:
    """Whether a set of state indices is increasing or decreasing in the cone order."""
    states = np.asarray(states)
    inside = np.zeros(len(states), dtype=bool)
    inside[list(subset)] = True
    offsets = states @ cone.A.T
    # above[x, y] is True when x <=_A y
    above = np.all(offsets[None, :, :] - offsets[:, None, :] >= 0, axis=2)
    increasing = not np.any(above[inside][:, ~inside])
    decreasing = not np.any(above[~inside][:, inside])
    return SetMonotonicity(increasing, decreasing)


QUANTITIES = ("h_ar", "h_ra", "pi_a", "pi_r")


def evaluate_quantity(gen: PerturbedGenerator, eps: float, quantity: str) -> float:
    """One of the sweep observables at fixed eps."""
    landmarks = gen.space.landmarks if gen.space is not None else {}
    if "a" not in landmarks or "r" not in landmarks:
        raise ModelError("sweep quantities need landmark states 'a' and 'r'")
    a, r = landmarks["a"], landmarks["r"]
    if quantity == "h_ar":
        return float(mfpt_exact(gen, eps, [r])[a])
    if quantity == "h_ra":
        return float(mfpt_exact(gen, eps, [a])[r])
    if quantity in ("pi_a", "pi_r"):
        pi = stationary_exact(gen, eps)
        return float(pi[a if quantity == "pi_a" else r])
    raise ModelError(f"unknown quantity {quantity!r}; expected one of {QUANTITIES}")


@dataclass
class SweepTable:
    parameter: str
    quantity: str
    eps: float
    values: list[float]
    results: list[float]

    @property
    def verdict(self) -> str:
        """``non-decreasing``, ``non-increasing``, ``constant`` or ``non-monotone``."""
        diffs = np.diff(self.results)
        scale = config.tol_eq() * 10 * np.maximum(np.abs(self.results[:-1]), 1e-300)
        up = np.all(diffs >= -scale)
        down = np.all(diffs <= scale)
        if up and down:
            return "constant"
        return "non-decreasing" if up else "non-increasing" if down else "non-monotone"


def monotone_sweep(builder: Callable[[float], PerturbedGenerator], parameter: str,
                   values: Sequence[float], eps: float, quantity: str) -> SweepTable:
    """Evaluate a quantity along a sorted parameter grid and classify its trend.

    Parameters
    ----------
    builder : callable
        Maps a parameter value to a generator.
    """
    if len(values) == 0:
        raise ModelError("parameter grid is empty")
    values = sorted(float(v) for v in values)
    results = [evaluate_quantity(builder(v), eps, quantity) for v in values]
    return SweepTable(parameter, quantity, eps, values, results)
