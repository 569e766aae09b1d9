"""Power-series expansion of the stationary distribution in eps.

Writing the stationary distribution as ``pi(eps) = sum_k eps**k pi_k``, the
coefficient ``pi_k`` splits into a part ``alpha_k`` on the absorbing states of
``Q0`` and a part ``beta_k`` on the transient states. The zeroth order lives
on the absorbing states only and is the stationary distribution of the
reduced generator; higher orders follow from a two-term recursion that only
needs solves with ``T0`` and the deviation matrix of the reduced generator.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from . import config
from ._linalg import gth_stationary, left_null_probability, numerical_nullity
from .errors import NullityNotOne, SingularBlock, SolverError
from .generator import Blocks, PerturbedGenerator, block_decompose, classify_states


@dataclass
class ReducedGenerator:
    """Reduced generator, its stationary vector and deviation matrix.

    Attributes
    ----------
    matrix : ndarray
        ``A1 + S1 inv(-T0) R0`` on the absorbing states.
    alpha : ndarray
        Stationary probability vector of ``matrix``.
    deviation : ndarray
        ``inv(-matrix + 1 alpha) - 1 alpha``.
    """

    matrix: np.ndarray
    alpha: np.ndarray
    deviation: np.ndarray


def reduced_generator(blocks: Blocks) -> ReducedGenerator:
    """Reduced generator on the absorbing states with its deviation matrix.

    Raises
    ------
    NullityNotOne
        If the reduced generator does not have a unique stationary vector.
    SolverError
        If the deviation matrix fails its defining identities.
    """
    QA = blocks.reduced_matrix()
    alpha = left_null_probability(QA)
    m = len(alpha)
    ones_alpha = np.outer(np.ones(m), alpha)
    fundamental = np.linalg.inv(-QA + ones_alpha)
    deviation = fundamental - ones_alpha
    tol = config.tol_eq() * max(1.0, np.abs(QA).max())
    if np.abs(alpha @ QA).max() > tol or alpha.min() < -config.tol_eq():
        raise SolverError("stationary vector of the reduced generator is inaccurate")
    if np.abs(deviation.sum(axis=1)).max() > config.tol_rec() * max(1.0, np.abs(deviation).max()):
        raise SolverError("deviation matrix rows do not sum to zero")
    return ReducedGenerator(QA, alpha, deviation)


@dataclass
class StationaryExpansion:
    """Coefficients of the stationary distribution series.

    Attributes
    ----------
    alphas, betas : list of ndarray
        Coefficients on absorbing and transient states, in the order of
        ``blocks.absorbing`` and ``blocks.transient``.
    blocks : Blocks
    reduced : ReducedGenerator
    """

    alphas: list[np.ndarray]
    betas: list[np.ndarray]
    blocks: Blocks
    reduced: ReducedGenerator

    @property
    def order(self) -> int:
        return len(self.alphas) - 1

    def coefficient(self, k: int) -> np.ndarray:
        """Full-length coefficient ``pi_k`` in the original state order."""
        n = len(self.blocks.absorbing) + len(self.blocks.transient)
        out = np.zeros(n)
        out[list(self.blocks.absorbing)] = self.alphas[k]
        out[list(self.blocks.transient)] = self.betas[k]
        return out

    @property
    def coefficients(self) -> np.ndarray:
        """Array of shape (order + 1, n)."""
        return np.array([self.coefficient(k) for k in range(self.order + 1)])

    def evaluate(self, eps: float, order: int | None = None) -> np.ndarray:
        """Truncated series ``sum_{k <= order} eps**k pi_k``."""
        order = self.order if order is None else order
        powers = eps ** np.arange(order + 1)
        return powers @ self.coefficients[: order + 1]


def _recursion_matrix(blocks: Blocks) -> np.ndarray:
    """``R1 + T1 inv(-T0) R0``, mapping transient mass to absorbing corrections."""
    return blocks.R1 + blocks.T1 @ blocks.inv_neg_T0_times(blocks.R0)


def _next_alpha(beta: np.ndarray, recursion: np.ndarray, reduced: ReducedGenerator) -> np.ndarray:
    return beta @ recursion @ reduced.deviation - beta.sum() * reduced.alpha


def higher_order(gen: PerturbedGenerator, order: int, blocks: Blocks | None = None,
                 reduced: ReducedGenerator | None = None, check: bool = True) -> StationaryExpansion:
    """Expansion coefficients up to ``order``.

    The recursion is::

        beta_k  = (alpha_{k-1} S1 + beta_{k-1} T1) inv(-T0)
        alpha_k = beta_k (R1 + T1 inv(-T0) R0) D - (beta_k 1) alpha

    with ``D`` the deviation matrix of the reduced generator.

    Raises
    ------
    SolverError
        If a coefficient fails ``pi_k Q0 + pi_{k-1} Q1 = 0`` or ``pi_k 1 = 0``
        beyond the recursion tolerance.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    blocks = blocks or block_decompose(gen)
    reduced = reduced or reduced_generator(blocks)
    recursion = _recursion_matrix(blocks)
    alphas = [reduced.alpha]
    betas = [np.zeros(len(blocks.transient))]
    for _ in range(order):
        beta = blocks.times_inv_neg_T0(alphas[-1] @ blocks.S1 + betas[-1] @ blocks.T1)
        alphas.append(_next_alpha(beta, recursion, reduced))
        betas.append(beta)
    expansion = StationaryExpansion(alphas, betas, blocks, reduced)
    if check:
        _check_recursion(gen, expansion)
    return expansion


def zeroth_and_first_order(gen: PerturbedGenerator, blocks: Blocks | None = None) -> StationaryExpansion:
    """Zeroth order ``[alpha, 0]`` and first order ``[alpha_1, beta_1]``."""
    return higher_order(gen, 1, blocks)


def _check_recursion(gen: PerturbedGenerator, expansion: StationaryExpansion) -> None:
    tol = config.tol_rec()
    scale = max(1.0, np.abs(gen.Q0).max(), np.abs(gen.Q1).max())
    previous = expansion.coefficient(0)
    if np.abs(previous @ gen.Q0).max() > tol * scale:
        raise SolverError("zeroth-order coefficient is not invariant under Q0")
    for k in range(1, expansion.order + 1):
        current = expansion.coefficient(k)
        size = max(1.0, np.abs(current).max(), np.abs(previous).max())
        residual = np.abs(current @ gen.Q0 + previous @ gen.Q1).max()
        if residual > tol * scale * size:
            raise SolverError(f"order-{k} coefficient residual {residual:.3g} exceeds tolerance")
        if abs(current.sum()) > tol * size:
            raise SolverError(f"order-{k} coefficient does not sum to zero")
        previous = current


def zeroth_via_transient(gen: PerturbedGenerator, blocks: Blocks | None = None):
    """``alpha`` and ``beta_1`` from the chain watched on the transient states.

    The transient-state generator ``T0 + R0 inv(-A1) S1`` has a stationary
    vector ``nu``; then ``beta_1 = c nu`` and ``alpha = c nu R0 inv(-A1)``,
    with ``c`` fixed by normalising ``alpha``.

    Returns
    -------
    alpha, beta1 : ndarray

    Raises
    ------
    SingularBlock
        If ``A1`` is singular.
    NullityNotOne
        If the transient-state generator has no unique stationary vector.
    """
    blocks = blocks or block_decompose(gen)
    A1 = blocks.A1
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A1)
    pivots = np.abs(np.diag(lu))
    if pivots.min() < 1e-12 * max(np.abs(A1).max(), 1e-300):
        raise SingularBlock("A1")
    # S1 and R0 never mix rows of A1, so inv(-A1) is applied by solves
    inv_neg_A1_S1 = -scipy.linalg.lu_solve((lu, piv), blocks.S1)
    QT = blocks.T0 + blocks.R0 @ inv_neg_A1_S1
    nu = left_null_probability(QT)
    unscaled = -scipy.linalg.lu_solve((lu, piv), (nu @ blocks.R0), trans=1)
    c = 1.0 / unscaled.sum()
    return c * unscaled, c * nu


def stationary_exact(gen: PerturbedGenerator, eps: float, method: str = "gth") -> np.ndarray:
    """Stationary distribution of ``Q(eps)``.

    Parameters
    ----------
    method : {"gth", "lstsq"}
        ``"gth"`` uses subtraction-free state reduction and keeps relative
        accuracy in every component; ``"lstsq"`` solves the normalised
        transposed system by least squares.

    Raises
    ------
    SolverError
        If the residual ``|pi Q(eps)|`` exceeds the equality tolerance.
    """
    Q = gen.at(eps)
    if method == "gth":
        pi = gth_stationary(Q)
    elif method == "lstsq":
        n = gen.n
        system = np.vstack([Q.T, np.ones((1, n))])
        rhs = np.zeros(n + 1)
        rhs[-1] = 1.0
        pi, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    else:
        raise ValueError(f"unknown method {method!r}")
    residual = np.abs(pi @ Q).max()
    if residual > config.tol_eq() * max(1.0, np.abs(Q).max()):
        cond = np.linalg.cond(Q + np.outer(np.ones(gen.n), np.ones(gen.n)) / gen.n)
        raise SolverError(f"stationary residual {residual:.3g} too large (condition ~{cond:.2g})")
    return pi


@dataclass
class PartialBalance:
    residuals: np.ndarray
    transient: tuple[int, ...]

    @property
    def max_residual(self) -> float:
        return float(np.abs(self.residuals).max(initial=0.0))


def partial_balance_check(gen: PerturbedGenerator, eps: float) -> PartialBalance:
    """Flux balance between each transient state and the absorbing set.

    For every transient ``x`` the residual is
    ``pi_x sum_{y in A} Q_xy - sum_{y in A} pi_y Q_yx`` at the exact
    stationary distribution. It is a diagnostic, not a theorem check: the
    balance holds exactly only for chains with suitable structure.
    """
    cls = classify_states(gen)
    Q = gen.at(eps)
    pi = stationary_exact(gen, eps)
    a, t = list(cls.absorbing), list(cls.transient)
    out_flow = pi[t] * Q[np.ix_(t, a)].sum(axis=1)
    in_flow = pi[a] @ Q[np.ix_(a, t)]
    return PartialBalance(out_flow - in_flow, cls.transient)


def write_coefficients_csv(expansion: StationaryExpansion, labels, path, meta: str | None = None) -> None:
    """Long-format CSV with columns ``state, k, value``."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        if meta:
            fh.write(f"# {meta}\n")
        writer = csv.writer(fh)
        writer.writerow(["state", "k", "value"])
        coefficients = expansion.coefficients
        for k in range(coefficients.shape[0]):
            for i, value in enumerate(coefficients[k]):
                writer.writerow([labels[i], k, f"{value:.17g}"])


__all__ = [
    "ReducedGenerator", "StationaryExpansion", "reduced_generator", "higher_order",
    "zeroth_and_first_order", "zeroth_via_transient", "stationary_exact", "partial_balance_check",
    "PartialBalance", "write_coefficients_csv", "numerical_nullity", "NullityNotOne", "classify_states",
]
