"""Analytic results for the built-in circuits, used as independent references.

All functions take :class:`ChromatinParams` and return values indexed in the
enumeration order of the corresponding state space.
"""
from __future__ import annotations

import numpy as np

from .errors import ModelError
from .scrn_model import ChromatinParams


def _require(params: ChromatinParams, kind: str, dtot: int | None = None) -> None:
    if params.model_kind != kind:
        raise ModelError(f"closed form applies to the {kind} model only")
    if params.approximate_pairs:
        raise ModelError("closed forms assume exact pair-catalysis rates")
    if dtot is not None and params.dtot != dtot:
        raise ModelError(f"closed form applies to dtot={dtot} only")


# 1D ---------------------------------------------------------------------------

def one_d_rates(params: ChromatinParams, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """Birth rates ``x -> x + 1`` for ``x = 0..D-1`` and death rates ``x -> x - 1`` for ``x = 1..D``."""
    _require(params, "1d")
    D, k, mu, b = params.dtot, params.rate("kEA_V"), params.mu, params.b
    x = np.arange(D + 1, dtype=float)
    birth = (k * x + eps * k * D) * (D - x)
    death = mu * (k * (D - x) + b * eps * k * D) * x
    return birth[:-1], death[1:]


def one_d_stationary(params: ChromatinParams, eps: float) -> np.ndarray:
    """Exact stationary distribution from the detailed-balance product formula."""
    birth, death = one_d_rates(params, eps)
    log_weights = np.concatenate([[0.0], np.cumsum(np.log(birth) - np.log(death))])
    weights = np.exp(log_weights - log_weights.max())
    return weights / weights.sum()


def one_d_limit(params: ChromatinParams) -> np.ndarray:
    """Limit ``pi(0)``: mass ``b mu^D / (1 + b mu^D)`` on 0 and the rest on D."""
    _require(params, "1d")
    ratio = params.b * params.mu ** params.dtot
    pi = np.zeros(params.dtot + 1)
    pi[0] = ratio / (1 + ratio)
    pi[-1] = 1 / (1 + ratio)
    return pi


def _geometric(mu: float, D: int) -> float:
    """``(1 - mu^D) / (1 - mu)``, continuous at ``mu = 1``."""
    return float(D) if mu == 1 else (1 - mu ** D) / (1 - mu)


def one_d_reduced_generator(params: ChromatinParams) -> np.ndarray:
    _require(params, "1d")
    D, k = params.dtot, params.rate("kEA_V")
    ratio = params.b * params.mu ** D
    scale = k * D ** 2 / _geometric(params.mu, D)
    return scale * np.array([[-1.0, 1.0], [ratio, -ratio]])


def one_d_beta1(params: ChromatinParams) -> np.ndarray:
    """First-order stationary mass on the interior states ``1..D-1``."""
    _require(params, "1d")
    D, mu, b = params.dtot, params.mu, params.b
    x = np.arange(1, D, dtype=float)
    return D ** 2 / (x * (D - x)) * b * mu ** (D - x) / (1 + b * mu ** D)


def one_d_leading_mfpt(params: ChromatinParams) -> tuple[float, float]:
    """Coefficients of ``1/eps`` in ``h_{a,r}`` and ``h_{r,a}``."""
    _require(params, "1d")
    D, k = params.dtot, params.rate("kEA_V")
    h_ar = _geometric(params.mu, D) / (k * D ** 2)
    return h_ar, h_ar / (params.b * params.mu ** D)


# 2D, two nucleosomes -----------------------------------------------------------

def _two_d_constants(params: ChromatinParams):
    _require(params, "2d", 2)
    kA = params.rate("kWA0") + params.rate("kWA")
    kR = params.rate("kWR0") + params.rate("kWR")
    return kA, kR, params.rate("kMA_V"), params.rate("kMR_V"), params.rate("kEA_V")


def two_d_reduced_generator(params: ChromatinParams) -> np.ndarray:
    """Reduced generator on ``(a, r)`` for two nucleosomes."""
    kA, kR, kMA, kMR, _ = _two_d_constants(params)
    mu, b = params.mu, params.b
    repressed = kR * (kR + kMR)
    active = kA * (kA + kMA)
    K = (kA + kMA + kR) * (kR + kMR) + mu * (kR + kMR + kA) * (kA + kMA)
    return 4 * kMA / K * np.array([[-repressed, repressed],
                                   [b * mu ** 2 * active, -b * mu ** 2 * active]])


def two_d_limit_on_landmarks(params: ChromatinParams) -> tuple[float, float]:
    kA, kR, kMA, kMR, _ = _two_d_constants(params)
    active = params.b * params.mu ** 2 * kA * (kA + kMA)
    repressed = kR * (kR + kMR)
    return active / (active + repressed), repressed / (active + repressed)


def two_d_beta1(params: ChromatinParams) -> dict[tuple[int, int], float]:
    """First-order stationary mass on the four transient states for two nucleosomes."""
    kA, kR, kMA, kMR, kEA = _two_d_constants(params)
    mu, b = params.mu, params.b
    d1 = kMA * (kR * (kR + kMR) + b * kA * mu ** 2 * (kA + kMA))
    d2 = (kA + kMA) * ((1 + mu) * (kR + kMR) + mu * kA) + kR * (kR + kMR)
    common = 4 * b * kMA ** 2 * mu / (d1 * d2)
    return {
        (0, 1): common * kA * mu * (kR * (kR + kMR) + (kA + kMA) * ((1 + mu) * (kR + kMR) + mu * kA)),
        (1, 1): common * kA * kR * ((kR + kMR) * (kR + kA + kMA)
                                    + mu * (kA + kMA) * (kR + kA + kMR)) / kEA,
        (0, 0): 0.0,
        (1, 0): common * kR * ((kR + kMR) * ((1 + mu) * (kA + kMA) + kR) + mu * kA * (kA + kMA)),
    }


# 3D and 4D -------------------------------------------------------------------------

def three_d_beta1(params: ChromatinParams) -> dict[tuple[int, ...], float]:
    """First-order stationary mass: a single state next to the repressed corner."""
    _require(params, "3d")
    D = params.dtot
    value = params.mu * params.b * params.rate("kMA_V") * D ** 2 / (
        params.rate("kW20") + (params.rate("kM_V") + params.rate("kbarM_V")) * (D - 1))
    return {(D - 1, 0, 1): value}


def four_d_beta1(params: ChromatinParams) -> dict[tuple[int, ...], float]:
    """First-order stationary mass: two states next to the repressed corner."""
    _require(params, "4d")
    D = params.dtot
    kMA = params.rate("kMA_V")
    via_r2 = params.mu_prime * params.beta * kMA * D ** 2 / (
        params.rate("kW10") + params.rate("kpM_V") * (D - 1))
    via_r1 = params.mu * params.b * kMA * D ** 2 / (
        params.rate("kW20") + (params.rate("kM_V") + params.rate("kbarM_V")) * (D - 1))
    return {(D - 1, 0, 0, 1): via_r2, (D - 1, 0, 1, 0): via_r1}
