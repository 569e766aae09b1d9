"""Small dense linear algebra helpers used by several modules."""
import numpy as np
import scipy.linalg

from .errors import NullityNotOne, SolverError


def numerical_nullity(matrix: np.ndarray, rtol: float = 1e-10) -> int:
    """Dimension of the null space, with singular values below ``rtol * s_max`` treated as zero."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.size == 0:
        return matrix.shape[1] if matrix.ndim == 2 else 0
    sv = scipy.linalg.svdvals(matrix)
    scale = max(sv[0], np.finfo(float).tiny)
    rank = int(np.sum(sv > rtol * scale))
    return matrix.shape[1] - rank


def left_null_probability(generator: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """Unique probability vector ``v`` with ``v @ generator = 0``.

    The transposed generator has dependent rows (its columns sum to zero), so
    one row is replaced by the normalisation constraint and the square system
    is solved by LU. A singular value decomposition is the fallback when the
    LU factorisation is too ill conditioned.

    Raises
    ------
    NullityNotOne
        If the left null space is not one dimensional.
    """
    generator = np.asarray(generator, dtype=float)
    n = generator.shape[0]
    if n == 1:
        return np.ones(1)
    nullity = numerical_nullity(generator.T, rtol)
    if nullity != 1:
        raise NullityNotOne(nullity)
    system = generator.T.copy()
    system[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    try:
        lu, piv = scipy.linalg.lu_factor(system, check_finite=True)
        pivots = np.abs(np.diag(lu))
        if pivots.min() <= 1e-14 * max(pivots.max(), 1.0):
            raise np.linalg.LinAlgError("tiny pivot")
        vector = scipy.linalg.lu_solve((lu, piv), rhs)
    except (np.linalg.LinAlgError, ValueError):
        _, _, vt = scipy.linalg.svd(generator.T)
        vector = vt[-1]
        vector = vector / vector.sum()
    return vector


def gth_stationary(generator: np.ndarray) -> np.ndarray:
    """Stationary distribution of an irreducible generator by state reduction.

    The Grassmann-Taksar-Heyman elimination works only with nonnegative
    quantities, so every component is computed to high relative accuracy even
    when the distribution spans many orders of magnitude.

    Raises
    ------
    SolverError
        If a reduction step finds a state with no remaining exit rate, which
        means the generator is reducible.
    """
    work = np.array(generator, dtype=float)
    n = work.shape[0]
    np.fill_diagonal(work, 0.0)
    exit_rates = np.ones(n)
    if np.any(work < 0):
        raise SolverError("generator has negative off-diagonal entries")
    for k in range(n - 1, 0, -1):
        exit_rate = work[k, :k].sum()
        if exit_rate <= 0.0:
            raise SolverError(f"generator is reducible: state {k} is closed under reduction")
        exit_rates[k] = exit_rate
        work[k, :k] /= exit_rate
        work[:k, :k] += np.outer(work[:k, k], work[k, :k])
    pi = np.zeros(n)
    pi[0] = 1.0
    for k in range(1, n):
        pi[k] = pi[:k] @ work[:k, k] / exit_rates[k]
    return pi / pi.sum()


def hitting_times_by_reduction(generator: np.ndarray, target_mask: np.ndarray) -> np.ndarray:
    """Mean hitting times of a target set by subtraction-free state reduction.

    Non-target states are eliminated one at a time from the jump chain while
    the expected time spent in eliminated states is carried along, then the
    times are recovered by back substitution. Only sums and products of
    nonnegative numbers occur, so each hitting time keeps full relative
    accuracy even when the times span many orders of magnitude.

    Returns
    -------
    ndarray
        Hitting times, zero on the target.

    Raises
    ------
    SolverError
        If some state has no path to the target.
    """
    Q = np.asarray(generator, dtype=float)
    rest = np.nonzero(~target_mask)[0]
    m = rest.size
    h = np.zeros(Q.shape[0])
    if m == 0:
        return h
    rates = Q[np.ix_(rest, rest)].copy()
    np.fill_diagonal(rates, 0.0)
    # last column collects all jumps into the target
    work = np.zeros((m, m + 1))
    work[:, :m] = rates
    work[:, m] = Q[np.ix_(rest, np.nonzero(target_mask)[0])].sum(axis=1)
    if np.any(work < 0):
        raise SolverError("generator has negative off-diagonal entries")
    exit_rate = work.sum(axis=1)
    if np.any(exit_rate <= 0):
        raise SolverError("a non-target state has no exit")
    work /= exit_rate[:, None]
    time = 1.0 / exit_rate
    leave = np.empty(m)
    for k in range(m - 1, -1, -1):
        # probability of leaving k for a state still present (excluding self loops)
        leave[k] = work[k, :k].sum() + work[k, m]
        if leave[k] <= 0:
            raise SolverError("some states cannot reach the target set")
        if k == 0:
            break
        factor = work[:k, k] / leave[k]
        work[:k, :k] += np.outer(factor, work[k, :k])
        work[:k, m] += factor * work[k, m]
        time[:k] += factor * time[k]
    times = np.empty(m)
    for k in range(m):
        times[k] = (time[k] + work[k, :k] @ times[:k]) / leave[k]
    h[rest] = times
    return h
