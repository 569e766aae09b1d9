"""Linearly perturbed generators, state classification and block structure."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import config
from .errors import AssumptionViolation, ModelError, NearCancellationWarning, SingularBlock
from .scrn_model import ReactionNetwork, StateSpace, _falling_factorial_product


@dataclass
class PerturbedGenerator:
    """Generator family ``Q(eps) = Q0 + eps * Q1``.

    Parameters
    ----------
    Q0, Q1 : ndarray, shape (n, n)
        Unperturbed part and first-order perturbation. Rows of both sum to
        zero and ``Q(eps)`` has nonnegative off-diagonal entries on the eps
        domain.
    space : StateSpace, optional
        State space the indices refer to.
    eps_max : float
        Upper end of the eps domain.
    """

    Q0: np.ndarray
    Q1: np.ndarray
    space: StateSpace | None = None
    eps_max: float = config.EPS_DOMAIN_UPPER

    def __post_init__(self):
        self.Q0 = np.asarray(self.Q0, dtype=float)
        self.Q1 = np.asarray(self.Q1, dtype=float)
        if self.Q0.shape != self.Q1.shape or self.Q0.ndim != 2 or self.Q0.shape[0] != self.Q0.shape[1]:
            raise ModelError("Q0 and Q1 must be square matrices of equal shape")
        for name, m in (("Q0", self.Q0), ("Q1", self.Q1)):
            scale = max(1.0, np.abs(m).max(initial=0.0))
            if np.abs(m.sum(axis=1)).max(initial=0.0) > config.STRUCTURAL_ZERO * scale:
                raise ModelError(f"rows of {name} do not sum to zero")
        for eps in (0.0, self.eps_max):
            off = self.at(eps) - np.diag(np.diag(self.at(eps)))
            if off.min(initial=0.0) < -config.STRUCTURAL_ZERO:
                raise ModelError(f"Q({eps}) has a negative off-diagonal entry")

    @property
    def n(self) -> int:
        return self.Q0.shape[0]

    def at(self, eps: float) -> np.ndarray:
        return self.Q0 + eps * self.Q1

    def label(self, index: int) -> str:
        return self.space.label(index) if self.space is not None else str(index)

    def resolve(self, token) -> int:
        if self.space is not None:
            return self.space.resolve(token)
        index = int(token)
        if not 0 <= index < self.n:
            raise ModelError(f"state index {index} out of range")
        return index

    def transition_vectors(self) -> list[tuple[int, ...]]:
        """Distinct jumps ``y - x`` over all positive off-diagonal entries, sorted."""
        if self.space is None:
            raise ModelError("transition vectors need a state space")
        mask = _positive_offdiagonal(np.abs(self.Q0) + np.abs(self.Q1))
        xs, ys = np.nonzero(mask)
        jumps = self.space.states[ys] - self.space.states[xs]
        return sorted({tuple(int(v) for v in j) for j in jumps})

    def irreducible_at(self, eps: float) -> bool:
        return _strongly_connected(_positive_offdiagonal(self.at(eps)))


def assemble_generator(network: ReactionNetwork, space: StateSpace) -> PerturbedGenerator:
    """Build ``(Q0, Q1)`` from mass-action propensities on a state space."""
    n = len(space)
    Q0 = np.zeros((n, n))
    Q1 = np.zeros((n, n))
    for merged in network.merged_reactions():
        vector = np.subtract(merged.products, merged.reactants)
        weight = _falling_factorial_product(space.full_states, merged.reactants)
        targets = space.full_states + vector
        for i in np.nonzero(weight)[0]:
            j = space.index_of.get(space.reduce(targets[i]))
            if j is None or j == i:
                continue
            Q0[i, j] += merged.constant * weight[i]
            Q1[i, j] += merged.eps_constant * weight[i]
    for Q in (Q0, Q1):
        np.fill_diagonal(Q, 0.0)
        np.fill_diagonal(Q, -Q.sum(axis=1))
    return PerturbedGenerator(Q0, Q1, space)


def _positive_offdiagonal(matrix: np.ndarray) -> np.ndarray:
    """Boolean adjacency of entries above the structural-zero threshold."""
    off = np.array(matrix, dtype=float)
    np.fill_diagonal(off, 0.0)
    near = (off > config.STRUCTURAL_ZERO) & (off < config.CANCELLATION_BAND)
    if near.any():
        i, j = np.argwhere(near)[0]
        warnings.warn(f"entry ({i}, {j}) = {off[i, j]:.3g} is close to the structural-zero "
                      "threshold; graph structure may be unreliable", NearCancellationWarning,
                      stacklevel=3)
    return off > config.STRUCTURAL_ZERO


def _components(adjacency: np.ndarray) -> tuple[int, np.ndarray]:
    return connected_components(csr_matrix(adjacency), directed=True, connection="strong")


def _strongly_connected(adjacency: np.ndarray) -> bool:
    return adjacency.shape[0] <= 1 or _components(adjacency)[0] == 1


@dataclass
class Classification:
    """Absorbing and transient states of ``Q0`` and its communicating classes.

    Attributes
    ----------
    absorbing, transient : tuple of int
        Sorted state indices.
    classes : list of tuple of int
        Strongly connected components of the ``Q0`` transition graph.
    recurrent : list of bool
        Whether each class is closed.
    """

    absorbing: tuple[int, ...]
    transient: tuple[int, ...]
    classes: list[tuple[int, ...]] = field(default_factory=list)
    recurrent: list[bool] = field(default_factory=list)


def classify_states(gen: PerturbedGenerator) -> Classification:
    """Split states into absorbing and transient sets under ``Q0``.

    Raises
    ------
    AssumptionViolation
        If a closed class of ``Q0`` is not a single absorbing state, or if no
        state is transient.
    """
    adjacency = _positive_offdiagonal(gen.Q0)
    count, labels = _components(adjacency)
    classes = [tuple(int(i) for i in np.nonzero(labels == c)[0]) for c in range(count)]
    recurrent = []
    for members in classes:
        inside = np.zeros(gen.n, dtype=bool)
        inside[list(members)] = True
        recurrent.append(not adjacency[np.ix_(inside, ~inside)].any())
    absorbing = tuple(int(i) for i in np.nonzero(~adjacency.any(axis=1))[0])
    for members, closed in zip(classes, recurrent):
        if closed and len(members) > 1:
            raise AssumptionViolation(1, f"closed class {members} of Q0 is not a single absorbing state",
                                      witness=members)
    transient = tuple(i for i in range(gen.n) if i not in set(absorbing))
    if not transient:
        raise AssumptionViolation(1, "Q0 has no transient states", witness=absorbing)
    return Classification(absorbing, transient, classes, recurrent)


@dataclass
class Blocks:
    """Block partition of ``Q0`` and ``Q1`` with absorbing states first.

    ``Q0 = [[0, 0], [R0, T0]]`` and ``Q1 = [[A1, S1], [R1, T1]]`` in the
    permuted order ``absorbing + transient``. An LU factorisation of ``T0``
    is kept for repeated solves.
    """

    absorbing: tuple[int, ...]
    transient: tuple[int, ...]
    A1: np.ndarray
    S1: np.ndarray
    R0: np.ndarray
    R1: np.ndarray
    T0: np.ndarray
    T1: np.ndarray
    _t0_lu: tuple = field(repr=False, default=None)

    @property
    def order(self) -> np.ndarray:
        return np.array(self.absorbing + self.transient, dtype=int)

    def times_inv_neg_T0(self, rows: np.ndarray) -> np.ndarray:
        """``rows @ inv(-T0)`` for a vector or matrix with rows over transient states."""
        rows = np.asarray(rows, dtype=float)
        return -scipy.linalg.lu_solve(self._t0_lu, rows.T, trans=1).T

    def inv_neg_T0_times(self, cols: np.ndarray) -> np.ndarray:
        """``inv(-T0) @ cols``."""
        return -scipy.linalg.lu_solve(self._t0_lu, np.asarray(cols, dtype=float))

    def reassemble(self) -> tuple[np.ndarray, np.ndarray]:
        """Rebuild ``(Q0, Q1)`` in the original state order."""
        na, nt = len(self.absorbing), len(self.transient)
        n = na + nt
        P0 = np.zeros((n, n))
        P0[na:, :na] = self.R0
        P0[na:, na:] = self.T0
        P1 = np.block([[self.A1, self.S1], [self.R1, self.T1]])
        inverse = np.argsort(self.order)
        return P0[np.ix_(inverse, inverse)], P1[np.ix_(inverse, inverse)]

    def reduced_matrix(self) -> np.ndarray:
        """``A1 + S1 inv(-T0) R0``, the generator of the chain watched only on absorbing states."""
        return self.A1 + self.S1 @ self.inv_neg_T0_times(self.R0)


def block_decompose(gen: PerturbedGenerator, classification: Classification | None = None) -> Blocks:
    """Permute absorbing states first and extract the blocks.

    Raises
    ------
    SingularBlock
        If ``T0`` is numerically singular.
    """
    cls = classification or classify_states(gen)
    a, t = list(cls.absorbing), list(cls.transient)
    T0 = gen.Q0[np.ix_(t, t)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(T0)
    pivots = np.abs(np.diag(lu))
    if pivots.min() < 1e-12 * max(np.abs(T0).max(), 1e-300):
        raise SingularBlock("T0", f"(smallest pivot {pivots.min():.3g})")
    return Blocks(cls.absorbing, cls.transient,
                  A1=gen.Q1[np.ix_(a, a)], S1=gen.Q1[np.ix_(a, t)],
                  R0=gen.Q0[np.ix_(t, a)], R1=gen.Q1[np.ix_(t, a)],
                  T0=T0, T1=gen.Q1[np.ix_(t, t)], _t0_lu=(lu, piv))


@dataclass
class Check:
    holds: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {"holds": bool(self.holds), "detail": self.detail}


@dataclass
class AssumptionReport:
    """Outcome of each structural assumption, with witnesses for failures."""

    checks: dict[int, Check]
    irreducible: Check

    def holds(self, number: int) -> bool:
        return self.checks[number].holds

    def to_dict(self) -> dict:
        out = {f"assumption_{k}": v.to_dict() for k, v in sorted(self.checks.items())}
        out["irreducible_Q_eps"] = self.irreducible.to_dict()
        return out


def verify_assumptions(gen: PerturbedGenerator, blocks: Blocks | None = None) -> AssumptionReport:
    """Evaluate the five structural assumptions without raising.

    1. Every closed class of ``Q0`` is a single absorbing state.
    2. The reduced generator has a one-dimensional left null space.
    3. The absorbing states lie in one communicating class of the chain
       ``[[A1, S1], [R0, T0]]``.
    4. That chain is irreducible.
    5. ``Q(eps)`` is linear in eps (always true for this representation).
    """
    from ._linalg import numerical_nullity

    eps_probe = gen.eps_max / 2
    irreducible = Check(gen.irreducible_at(eps_probe), f"probed at eps={eps_probe:g}")
    checks = {5: Check(True, "generator is linear in eps")}
    try:
        cls = classify_states(gen)
        checks[1] = Check(True, f"{len(cls.absorbing)} absorbing, {len(cls.transient)} transient")
    except AssumptionViolation as exc:
        checks[1] = Check(False, str(exc))
        for k in (2, 3, 4):
            checks[k] = Check(False, "not evaluated: assumption 1 fails")
        return AssumptionReport(checks, irreducible)
    blocks = blocks or block_decompose(gen, cls)
    mixed = np.block([[blocks.A1, blocks.S1], [blocks.R0, blocks.T0]])
    count, labels = _components(_positive_offdiagonal(mixed))
    checks[4] = Check(count == 1, f"{count} communicating classes")
    na = len(blocks.absorbing)
    absorbing_classes = sorted(set(labels[:na].tolist()))
    witness = [tuple(gen.label(blocks.absorbing[i]) for i in range(na) if labels[i] == c)
               for c in absorbing_classes]
    checks[3] = Check(len(absorbing_classes) == 1,
                      "absorbing states share one class" if len(absorbing_classes) == 1
                      else f"absorbing states split as {witness}")
    nullity = numerical_nullity(blocks.reduced_matrix().T)
    checks[2] = Check(nullity == 1, f"nullity {nullity}")
    return AssumptionReport(checks, irreducible)
