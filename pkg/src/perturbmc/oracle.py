"""Independent checks by stochastic simulation and slope fitting."""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ModelError, ShortHorizonWarning
from .generator import PerturbedGenerator


@dataclass(frozen=True)
class SimConfig:
    """Settings for direct-method simulation.

    Exactly one of ``t_end`` and ``n_events`` bounds each trajectory.
    ``burn_in`` is the fraction of the horizon discarded before averaging.
    """

    eps: float
    t_end: float | None = None
    n_events: int | None = None
    n_trajectories: int = 1
    burn_in: float = 0.2
    seed: int | None = 0

    def __post_init__(self):
        if (self.t_end is None) == (self.n_events is None):
            raise ModelError("give exactly one of t_end and n_events")
        if not 0 <= self.burn_in < 1:
            raise ModelError("burn_in must lie in [0, 1)")
        if self.n_trajectories < 1:
            raise ModelError("n_trajectories must be positive")


@dataclass
class SimResult:
    occupancy: np.ndarray
    n_events: int
    horizon: float


class _JumpChain:
    """Exit rates and cumulative jump probabilities of ``Q(eps)``."""

    def __init__(self, gen: PerturbedGenerator, eps: float):
        Q = gen.at(eps)
        off = Q - np.diag(np.diag(Q))
        off[off < 0] = 0.0
        self.rates = off.sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            self.cumulative = np.cumsum(off, axis=1) / self.rates[:, None]

    def step(self, state: int, rng: np.random.Generator) -> tuple[int, float]:
        rate = self.rates[state]
        if rate <= 0:
            return state, np.inf
        dwell = rng.exponential(1.0 / rate)
        nxt = int(np.searchsorted(self.cumulative[state], rng.random(), side="right"))
        return min(nxt, len(self.rates) - 1), dwell


def _spawn(seed, count: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def ssa_run(gen: PerturbedGenerator, config: SimConfig, start=None) -> SimResult:
    """Time-averaged occupancy of simulated trajectories after burn-in.

    Trajectories use independent streams spawned from ``config.seed``, so
    results are reproducible. Occupancies of all trajectories are pooled
    with equal weight.
    """
    chain = _JumpChain(gen, config.eps)
    x0 = 0 if start is None else gen.resolve(start)
    occupancy = np.zeros(gen.n)
    total_events = 0
    horizons = []
    for rng in _spawn(config.seed, config.n_trajectories):
        times, states = _trajectory(chain, x0, rng, config)
        total_events += len(states) - 1
        horizon = times[-1]
        horizons.append(horizon)
        start_time = config.burn_in * horizon
        dwell = np.diff(times)
        # clip each holding interval to the averaging window
        clipped = np.clip(times[1:], start_time, None) - np.clip(times[:-1], start_time, None)
        clipped = np.minimum(clipped, dwell)
        occ = np.bincount(states[:-1], weights=clipped, minlength=gen.n)
        occupancy += occ / max(occ.sum(), np.finfo(float).tiny)
    occupancy /= config.n_trajectories
    slowest = 1.0 / chain.rates[chain.rates > 0].min()
    if min(horizons) < 100 * slowest:
        warnings.warn(f"horizon {min(horizons):.3g} is short compared with the slowest holding "
                      f"time {slowest:.3g}", ShortHorizonWarning, stacklevel=2)
    return SimResult(occupancy, total_events, float(np.mean(horizons)))


def _trajectory(chain: _JumpChain, x0: int, rng: np.random.Generator, config: SimConfig):
    limit = config.n_events if config.n_events is not None else np.iinfo(np.int64).max
    t_end = config.t_end if config.t_end is not None else np.inf
    capacity = config.n_events + 1 if config.n_events is not None else 1024
    times = np.empty(capacity)
    states = np.empty(capacity, dtype=np.int64)
    times[0], states[0] = 0.0, x0
    count, t, x = 0, 0.0, x0
    # uniforms are drawn in batches; this loop is the simulation hot path
    batch = 4096
    expo = rng.standard_exponential(batch)
    unif = rng.random(batch)
    pos = 0
    rates, cumulative = chain.rates, chain.cumulative
    while count < limit:
        if pos == batch:
            expo = rng.standard_exponential(batch)
            unif = rng.random(batch)
            pos = 0
        rate = rates[x]
        if rate <= 0:
            t = t_end if np.isfinite(t_end) else t
            break
        dt = expo[pos] / rate
        if t + dt > t_end:
            t = t_end
            break
        x = int(np.searchsorted(cumulative[x], unif[pos], side="right"))
        pos += 1
        t += dt
        count += 1
        if count >= capacity:
            times = np.resize(times, 2 * capacity)
            states = np.resize(states, 2 * capacity)
            capacity *= 2
        times[count], states[count] = t, x
    # close the last holding interval at the horizon
    if count + 1 >= capacity:
        times = np.resize(times, capacity + 1)
        states = np.resize(states, capacity + 1)
    if np.isfinite(t_end) and t > times[count]:
        count += 1
        times[count], states[count] = t, x
    return times[: count + 1], states[: count + 1]


@dataclass
class HittingSample:
    mean: float
    standard_error: float
    n: int


def hitting_time_sample(gen: PerturbedGenerator, eps: float, start, target: Iterable,
                        n: int, seed=0) -> HittingSample:
    """Monte Carlo estimate of the mean hitting time of ``target`` from ``start``."""
    if n < 2:
        raise ModelError("need at least two samples for a standard error")
    chain = _JumpChain(gen, eps)
    x0 = gen.resolve(start)
    goal = np.zeros(gen.n, dtype=bool)
    goal[[gen.resolve(t) for t in target]] = True
    if goal[x0]:
        return HittingSample(0.0, 0.0, n)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    samples = np.empty(n)
    for s in range(n):
        x, t = x0, 0.0
        while not goal[x]:
            x, dt = chain.step(x, rng)
            if not np.isfinite(dt):
                raise ModelError(f"trajectory trapped in state {gen.label(x)}")
            t += dt
        samples[s] = t
    return HittingSample(float(samples.mean()), float(samples.std(ddof=1) / np.sqrt(n)), n)


def slope_fit(values: Sequence[float], grid: Sequence[float]) -> tuple[float, float]:
    """Least-squares slope of ``log values`` against ``log grid`` and its r squared."""
    values = np.asarray(values, dtype=float)
    grid = np.asarray(grid, dtype=float)
    if values.shape != grid.shape or values.size < 3:
        raise ModelError("slope fit needs at least three matching points")
    if np.any(values <= 0) or np.any(grid <= 0):
        raise ModelError("slope fit needs positive values")
    lx, ly = np.log(grid), np.log(values)
    slope, intercept = np.polyfit(lx, ly, 1)
    residual = ly - (slope * lx + intercept)
    total = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - residual @ residual / total if total > 0 else 1.0
    return float(slope), float(r2)


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def write_histogram_csv(labels, distributions: dict[str, np.ndarray], path, meta: str | None = None) -> None:
    """Long-format ``state, source, probability`` table."""
    with Path(path).open("w", newline="") as fh:
        if meta:
            fh.write(f"# {meta}\n")
        writer = csv.writer(fh)
        writer.writerow(["state", "source", "probability"])
        for source, dist in distributions.items():
            for label, value in zip(labels, dist):
                writer.writerow([label, source, f"{value:.17g}"])


def write_hitting_csv(rows, path, meta: str | None = None) -> None:
    """Rows ``(source, target, eps, mean, standard_error, n)``."""
    with Path(path).open("w", newline="") as fh:
        if meta:
            fh.write(f"# {meta}\n")
        writer = csv.writer(fh)
        writer.writerow(["source", "target", "eps", "mean", "standard_error", "n"])
        for source, target, eps, sample in rows:
            writer.writerow([source, target, f"{eps:.17g}", f"{sample.mean:.17g}",
                             f"{sample.standard_error:.17g}", sample.n])
