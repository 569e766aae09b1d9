"""Mean first passage times: exact solves, leading Laurent terms and birth-death formulas."""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np
import scipy.linalg

from . import config
from ._linalg import hitting_times_by_reduction
from .errors import ModelError, PoleOrderMismatch, SolverError, ZeroLeadingCoefficient
from .generator import Blocks, PerturbedGenerator, block_decompose
from .pole_order import pole_orders, stationary_orders
from .stationary_expansion import ReducedGenerator, higher_order, reduced_generator


def mfpt_exact(gen: PerturbedGenerator, eps: float, target: Iterable[int],
               method: str = "reduction") -> np.ndarray:
    """Expected hitting times of ``target`` from every state at fixed eps.

    Solves ``Q_{B^c} h = -1`` restricted to the complement of the target.

    Parameters
    ----------
    method : {"reduction", "lu"}
        ``"reduction"`` eliminates states without subtractions and keeps
        full relative accuracy for stiff chains; ``"lu"`` is a plain dense
        solve.

    Returns
    -------
    ndarray, shape (n,)
        Hitting times, zero on the target itself.

    Raises
    ------
    SolverError
        If the restricted generator is singular or the solution is not positive.
    """
    target = sorted({gen.resolve(t) for t in target})
    if not target:
        raise ModelError("target set is empty")
    mask = np.zeros(gen.n, dtype=bool)
    mask[target] = True
    Q = gen.at(eps)
    if method == "reduction":
        return hitting_times_by_reduction(Q, mask)
    if method != "lu":
        raise ValueError(f"unknown method {method!r}")
    rest = np.nonzero(~mask)[0]
    h = np.zeros(gen.n)
    if rest.size == 0:
        return h
    try:
        solution = scipy.linalg.solve(Q[np.ix_(rest, rest)], -np.ones(rest.size))
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"passage-time system is singular: {exc}") from None
    if not np.all(np.isfinite(solution)) or solution.min() <= 0:
        raise SolverError("passage-time solution is not positive; target may be unreachable")
    h[rest] = solution
    return h


@dataclass
class MfptExpansion:
    """Leading Laurent term ``coefficient * eps**(-order)`` of ``h_{source,target}``.

    Attributes
    ----------
    source, target : int
    order : int
        Pole order.
    coefficient : float
    graph_order : int or None
        Order from the graph algorithm, kept for cross-checking.
    zero_coefficient : bool
        True when the deviation-matrix difference vanishes, so the true pole
        order is lower than ``order``.
    reduced_mfpt : float or None
        Passage time under the reduced generator, when that chain is
        irreducible. Equal to ``coefficient`` in the first-order case.
    """

    source: int
    target: int
    order: int
    coefficient: float
    graph_order: int | None = None
    zero_coefficient: bool = False
    reduced_mfpt: float | None = None

    def evaluate(self, eps: float) -> float:
        return self.coefficient * eps ** (-self.order)


def mfpt_leading(gen: PerturbedGenerator, source, target, blocks: Blocks | None = None,
                 reduced: ReducedGenerator | None = None) -> MfptExpansion:
    """Leading term of the passage time between two absorbing states of ``Q0``.

    With ``k`` the order of the leading term of ``pi_target(eps)``, the pole
    order is ``k + 1`` and the coefficient is
    ``(D[t, t] - D[s, t]) / pi_t^(k)`` with ``D`` the deviation matrix of the
    reduced generator.

    Raises
    ------
    ModelError
        If ``source`` or ``target`` is not absorbing under ``Q0``.
    """
    blocks = blocks or block_decompose(gen)
    x, y = gen.resolve(source), gen.resolve(target)
    for state in (x, y):
        if state not in blocks.absorbing:
            raise ModelError(f"state {gen.label(state)} is not absorbing under Q0")
    if x == y:
        return MfptExpansion(x, y, 0, 0.0, 0)
    reduced = reduced or reduced_generator(blocks)
    k_y = stationary_orders(gen, [y])[y]
    expansion = higher_order(gen, k_y, blocks, reduced)
    pi_y = expansion.coefficient(k_y)[y]
    ix, iy = blocks.absorbing.index(x), blocks.absorbing.index(y)
    D = reduced.deviation
    difference = D[iy, iy] - D[ix, iy]
    order = k_y + 1
    graph_order = pole_orders(gen, [y])[x]
    if graph_order != order:
        warnings.warn(f"graph pole order {graph_order} differs from {order} for "
                      f"{gen.label(x)} -> {gen.label(y)}", PoleOrderMismatch, stacklevel=2)
    zero = abs(difference) <= config.tol_eq() * max(1.0, np.abs(D).max())
    if zero:
        warnings.warn(f"leading coefficient of {gen.label(x)} -> {gen.label(y)} vanishes",
                      ZeroLeadingCoefficient, stacklevel=2)
    if abs(pi_y) <= config.tol_eq():
        raise SolverError(f"leading stationary coefficient of {gen.label(y)} vanishes")
    reduced_time = None
    QA = reduced.matrix
    if k_y == 0 and np.all(reduced.alpha > config.tol_eq()):
        others = [i for i in range(len(QA)) if i != iy]
        times = np.linalg.solve(QA[np.ix_(others, others)], -np.ones(len(others)))
        reduced_time = float(times[others.index(ix)])
    return MfptExpansion(x, y, order, float(difference / pi_y), graph_order, bool(zero), reduced_time)


def mean_return_time(gen: PerturbedGenerator, eps: float, state) -> float:
    """Expected time to leave ``state`` and come back.

    ``1 / q_x + sum_y P_xy h_{y,x}`` with ``q_x`` the exit rate and ``P`` the
    jump-chain transition probabilities.
    """
    x = gen.resolve(state)
    Q = gen.at(eps)
    rate = -Q[x, x]
    if rate <= 0:
        raise SolverError(f"state {gen.label(x)} has no exit rate")
    jumps = Q[x].copy()
    jumps[x] = 0.0
    h = mfpt_exact(gen, eps, [x])
    return 1.0 / rate + float(jumps @ h) / rate


def birth_death_mfpt(birth_rates, death_rates) -> tuple[float, float]:
    """Passage times between the ends of a birth-death chain on ``0..u``.

    Parameters
    ----------
    birth_rates : array_like, length u
        ``lambda_0 .. lambda_{u-1}``, rates ``x -> x + 1``.
    death_rates : array_like, length u
        ``gamma_1 .. gamma_u``, rates ``x -> x - 1``.

    Returns
    -------
    down, up : float
        ``h_{u -> 0}`` and ``h_{0 -> u}``.

    Notes
    -----
    Increments of the passage time between neighbours satisfy first-order
    recursions with positive terms only, evaluated in extended precision so
    that products of ratios spanning many decades stay accurate.
    """
    lam = np.asarray(birth_rates, dtype=np.longdouble)
    gam = np.asarray(death_rates, dtype=np.longdouble)
    if lam.shape != gam.shape or lam.ndim != 1 or lam.size == 0:
        raise ModelError("birth and death rates must be equal-length nonempty vectors")
    if np.any(lam <= 0) or np.any(gam <= 0):
        raise ModelError("birth-death rates must be positive")
    u = lam.size
    # step_down[x] = h_{x+1 -> 0} - h_{x -> 0}, built from the top
    step_down = np.empty(u, dtype=np.longdouble)
    step_down[u - 1] = 1 / gam[u - 1]
    for x in range(u - 2, -1, -1):
        step_down[x] = 1 / gam[x] + lam[x + 1] / gam[x] * step_down[x + 1]
    # step_up[x] = h_{x -> u} - h_{x+1 -> u}, built from the bottom
    step_up = np.empty(u, dtype=np.longdouble)
    step_up[0] = 1 / lam[0]
    for x in range(1, u):
        step_up[x] = 1 / lam[x] + gam[x - 1] / lam[x] * step_up[x - 1]
    return float(step_down.sum()), float(step_up.sum())


def birth_death_rates(gen: PerturbedGenerator, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """Birth and death rates of a tridiagonal generator, states ordered 0..u."""
    Q = gen.at(eps)
    off = Q - np.diag(np.diag(Q)) - np.diag(np.diag(Q, 1), 1) - np.diag(np.diag(Q, -1), -1)
    if np.abs(off).max(initial=0.0) > config.STRUCTURAL_ZERO:
        raise ModelError("generator is not tridiagonal")
    return np.diag(Q, 1).copy(), np.diag(Q, -1).copy()


def write_mfpt_csv(rows, path, meta: str | None = None) -> None:
    """Rows ``(source, target, eps, h)`` as CSV."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        if meta:
            fh.write(f"# {meta}\n")
        writer = csv.writer(fh)
        writer.writerow(["source", "target", "eps", "h"])
        for source, target, eps, h in rows:
            writer.writerow([source, target, f"{eps:.17g}", f"{h:.17g}"])
