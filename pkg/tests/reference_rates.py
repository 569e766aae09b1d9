"""Transition rates of the built-in circuits written out by hand, one jump at a time.

These mirror the per-jump rate functions rather than the reaction lists, so
they give an independent check of network assembly.
"""
import numpy as np


def _k(params, name):
    return params.rate(name)


def jump_rates(params, state, eps):
    """Map jump vector -> rate at ``state`` (reduced coordinates)."""
    D = params.dtot
    mu, mup, b, beta = params.mu, params.mu_prime, params.b, params.beta
    kEA, kMA = _k(params, "kEA_V"), _k(params, "kMA_V")
    kind = params.model_kind
    if kind == "1d":
        (x,) = state
        return {(1,): (kEA * x + eps * kEA * D) * (D - x),
                (-1,): mu * (kEA * (D - x) + b * eps * kEA * D) * x}
    if kind == "2d":
        x1, x2 = state
        free = D - x1 - x2
        kA = _k(params, "kWA0") + _k(params, "kWA")
        kR = _k(params, "kWR0") + _k(params, "kWR")
        return {(0, 1): free * (kA + kMA * x2),
                (0, -1): x2 * (eps * kMA * D + x1 * kEA),
                (1, 0): free * (kR + _k(params, "kMR_V") * x1),
                (-1, 0): x1 * mu * (eps * kMA * D * b + x2 * kEA)}
    kA = _k(params, "kWA0") + _k(params, "kWA")
    kpM, kbM, kM = _k(params, "kpM_V"), _k(params, "kbarM_V"), _k(params, "kM_V")
    kW10, kW20 = _k(params, "kW10"), _k(params, "kW20")
    if kind == "3d":
        x1, x2, x3 = state
        free = D - x1 - x2 - x3
        return {(0, 1, 0): free * (kA + kMA * x2),
                (0, -1, 0): x2 * (eps * kMA * D + kEA * (x3 + 2 * x1)),
                (0, 0, 1): free * (kW10 + _k(params, "kW1") + kpM * x1),
                (0, 0, -1): x3 * mup * (eps * kMA * D * beta + x2 * kEA),
                (1, 0, -1): x3 * (kW20 + kM * x1 + kbM * (x1 + (x3 if params.approximate_pairs else (x3 - 1) / 2))),
                (-1, 0, 1): x1 * mu * (eps * kMA * D * b + x2 * kEA)}
    x1, x2, x3, x4 = state
    free = D - x1 - x2 - x3 - x4
    half3 = x3 if params.approximate_pairs else (x3 - 1) / 2
    half4 = x4 if params.approximate_pairs else (x4 - 1) / 2
    return {(0, 1, 0, 0): free * (kA + kMA * x2),
            (0, -1, 0, 0): x2 * (eps * kMA * D + kEA * (x3 + x4 + 2 * x1)),
            (0, 0, 1, 0): free * (kW10 + _k(params, "kW1") + kpM * (x1 + x4)),
            (0, 0, -1, 0): x3 * mup * (eps * beta * kMA * D + x2 * kEA),
            (0, 0, 0, 1): free * (kW20 + _k(params, "kW2") + kM * (x1 + x4) + kbM * (x1 + x3)),
            (0, 0, 0, -1): x4 * mu * (eps * b * kMA * D + x2 * kEA),
            (1, 0, -1, 0): x3 * (kW20 + kM * (x1 + x4) + kbM * (x1 + half3)),
            (-1, 0, 1, 0): x1 * mu * (eps * b * kMA * D + x2 * kEA),
            (1, 0, 0, -1): x4 * (kW10 + kpM * (x1 + half4)),
            (-1, 0, 0, 1): x1 * mup * (eps * beta * kMA * D + x2 * kEA)}


def reference_generator(params, space, eps):
    n = len(space)
    Q = np.zeros((n, n))
    for i, state in enumerate(space.states):
        for jump, rate in jump_rates(params, tuple(int(v) for v in state), eps).items():
            target = tuple(int(s + j) for s, j in zip(state, jump))
            if target in space.index_of:
                Q[i, space.index_of[target]] += rate
    np.fill_diagonal(Q, -Q.sum(axis=1))
    return Q


def random_params(kind, dtot, rng, approximate_pairs=False):
    from perturbmc.scrn_model import ChromatinParams, DEFAULT_RATES

    rates = {name: float(rng.uniform(0.3, 3.0)) for name in DEFAULT_RATES}
    return ChromatinParams(kind, dtot, mu=float(rng.uniform(0.3, 3)), mu_prime=float(rng.uniform(0.3, 3)),
                           b=float(rng.uniform(0.3, 3)), beta=float(rng.uniform(0.3, 3)), rates=rates,
                           approximate_pairs=approximate_pairs)
