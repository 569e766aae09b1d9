"""Stochastic chemical reaction networks, finite state spaces and built-in chromatin circuits.

A network is a list of species and mass-action reactions. Each reaction rate
is a product of named parameters and numeric factors, optionally carrying the
perturbation parameter ``eps``. Under a conservation law the reachable copy
numbers form a finite lattice that is enumerated explicitly.

Model documents are line oriented::

    model 1d
    species DR DA
    reaction DA + DR -> 2 DR : kEA_V
    reaction DA -> DR : kEA_V * Dtot * eps
    param kEA_V = 1.0
    param Dtot = 3
    conservation m = 1 1, total = 3

Lines starting with ``#`` are comments. The empty complex is written ``0``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping, NamedTuple, Sequence

import numpy as np

from . import config
from .errors import ModelError, StateCapExceeded

EPS_TOKEN = "eps"
_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_']*$")


@dataclass(frozen=True)
class RateExpr:
    """Product of named parameters and a numeric coefficient, possibly scaled by eps."""

    factors: tuple[str, ...] = ()
    coefficient: float = 1.0
    eps: bool = False

    @classmethod
    def parse(cls, text: str) -> "RateExpr":
        coefficient = 1.0
        factors: list[str] = []
        eps = False
        tokens = [t.strip() for t in text.split("*")]
        if not text.strip() or any(not t for t in tokens):
            raise ModelError(f"malformed rate expression {text!r}")
        for token in tokens:
            if token == EPS_TOKEN:
                if eps:
                    raise ModelError(f"rate {text!r} is not linear in eps")
                eps = True
            elif _NAME.match(token):
                factors.append(token)
            else:
                try:
                    coefficient *= float(token)
                except ValueError:
                    raise ModelError(f"cannot parse factor {token!r} in rate {text!r}") from None
        return cls(tuple(factors), coefficient, eps)

    def evaluate(self, parameters: Mapping[str, float]) -> float:
        """Rate constant without the eps factor."""
        value = self.coefficient
        for name in self.factors:
            try:
                value *= float(parameters[name])
            except KeyError:
                raise ModelError(f"undefined parameter {name!r}") from None
        return value

    def __str__(self) -> str:
        parts = [] if self.coefficient == 1.0 and self.factors else [repr(float(self.coefficient))]
        parts += list(self.factors)
        if self.eps:
            parts.append(EPS_TOKEN)
        return " * ".join(parts)


@dataclass(frozen=True)
class Reaction:
    """A single reaction ``reactants -> products`` with its rate expression."""

    reactants: tuple[int, ...]
    products: tuple[int, ...]
    rate: RateExpr

    @property
    def vector(self) -> np.ndarray:
        return np.subtract(self.products, self.reactants)


@dataclass(frozen=True)
class Conservation:
    """Linear conservation law ``weights @ x == total``."""

    weights: tuple[int, ...]
    total: int


class MergedReaction(NamedTuple):
    reactants: tuple[int, ...]
    products: tuple[int, ...]
    constant: float
    eps_constant: float


@dataclass(frozen=True)
class ReactionNetwork:
    """Species, reactions and parameter values of a mass-action network.

    Raises
    ------
    ModelError
        On duplicate species, reactions with identical reactant and product
        complexes, species that appear in no reaction, undefined parameters or
        negative rate constants.
    """

    species: tuple[str, ...]
    reactions: tuple[Reaction, ...]
    parameters: Mapping[str, float] = field(default_factory=dict)
    name: str = ""
    conservation: Conservation | None = None

    def __post_init__(self):
        object.__setattr__(self, "species", tuple(self.species))
        object.__setattr__(self, "reactions", tuple(self.reactions))
        object.__setattr__(self, "parameters", {k: float(v) for k, v in self.parameters.items()})
        if len(set(self.species)) != len(self.species):
            raise ModelError(f"duplicate species in {self.species}")
        if not self.species:
            raise ModelError("network has no species")
        d = len(self.species)
        used = np.zeros(d, dtype=bool)
        for j, reaction in enumerate(self.reactions):
            if len(reaction.reactants) != d or len(reaction.products) != d:
                raise ModelError(f"reaction {j} has vectors of wrong length")
            if min(reaction.reactants + reaction.products) < 0:
                raise ModelError(f"reaction {j} has negative stoichiometry")
            if reaction.reactants == reaction.products:
                raise ModelError(f"reaction {j} has identical reactant and product complexes")
            if reaction.rate.evaluate(self.parameters) < 0:
                raise ModelError(f"reaction {j} has a negative rate constant")
            used |= np.asarray(reaction.reactants) > 0
            used |= np.asarray(reaction.products) > 0
        if not used.all():
            missing = [s for s, u in zip(self.species, used) if not u]
            raise ModelError(f"species {missing} appear in no reaction")
        if self.conservation is not None and len(self.conservation.weights) != d:
            raise ModelError("conservation weights do not match the number of species")

    @property
    def dimension(self) -> int:
        return len(self.species)

    def stoichiometric_matrix(self) -> np.ndarray:
        """Reaction vectors as columns."""
        return np.array([r.vector for r in self.reactions], dtype=int).T.reshape(self.dimension, -1)

    def merged_reactions(self) -> list[MergedReaction]:
        """Reactions with equal complexes combined, eps-free and eps parts separated."""
        merged: dict[tuple, list[float]] = {}
        for reaction in self.reactions:
            key = (reaction.reactants, reaction.products)
            slot = merged.setdefault(key, [0.0, 0.0])
            slot[1 if reaction.rate.eps else 0] += reaction.rate.evaluate(self.parameters)
        return [MergedReaction(k[0], k[1], v[0], v[1]) for k, v in merged.items()]

    def with_parameters(self, **updates: float) -> "ReactionNetwork":
        unknown = set(updates) - set(self.parameters)
        if unknown:
            raise ModelError(f"unknown parameters {sorted(unknown)}")
        params = dict(self.parameters)
        params.update(updates)
        return ReactionNetwork(self.species, self.reactions, params, self.name, self.conservation)


# model documents -----------------------------------------------------------

def _parse_complex(text: str, species: Sequence[str]) -> tuple[int, ...]:
    counts = [0] * len(species)
    text = text.strip()
    if text in ("0", "∅", ""):
        return tuple(counts)
    for term in text.split("+"):
        parts = term.split()
        if len(parts) == 1:
            coefficient, name = 1, parts[0]
        elif len(parts) == 2 and parts[0].isdigit():
            coefficient, name = int(parts[0]), parts[1]
        else:
            raise ModelError(f"cannot parse complex term {term.strip()!r}")
        if name not in species:
            raise ModelError(f"unknown species {name!r}")
        counts[species.index(name)] += coefficient
    return tuple(counts)


def _format_complex(counts: Sequence[int], species: Sequence[str]) -> str:
    terms = []
    for count, name in zip(counts, species):
        if count == 1:
            terms.append(name)
        elif count > 1:
            terms.append(f"{count} {name}")
    return " + ".join(terms) if terms else "0"


def parse_model(text: str) -> ReactionNetwork:
    """Parse a model document into a :class:`ReactionNetwork`."""
    name = ""
    species: list[str] | None = None
    raw_reactions: list[tuple[int, str]] = []
    parameters: dict[str, float] = {}
    conservation = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword, _, rest = line.partition(" ")
        rest = rest.strip()
        try:
            if keyword == "model":
                name = rest
            elif keyword == "species":
                species = rest.split()
            elif keyword == "reaction":
                raw_reactions.append((lineno, rest))
            elif keyword == "param":
                key, _, value = rest.partition("=")
                key = key.strip()
                if not _NAME.match(key):
                    raise ModelError(f"bad parameter name {key!r}")
                parameters[key] = float(value)
            elif keyword == "conservation":
                match = re.fullmatch(r"m\s*=\s*([-\d\s]+),\s*total\s*=\s*(\d+)", rest)
                if not match:
                    raise ModelError("expected 'conservation m = <ints>, total = <int>'")
                conservation = Conservation(tuple(int(v) for v in match.group(1).split()),
                                            int(match.group(2)))
            else:
                raise ModelError(f"unknown keyword {keyword!r}")
        except ValueError as exc:
            raise ModelError(f"line {lineno}: {exc}") from None
    if species is None:
        raise ModelError("model document has no species line")
    reactions = []
    for lineno, body in raw_reactions:
        arrow, sep, rate = body.partition(":")
        left, arrow_sep, right = arrow.partition("->")
        if not sep or not arrow_sep:
            raise ModelError(f"line {lineno}: expected 'reactants -> products : rate'")
        try:
            reactions.append(Reaction(_parse_complex(left, species), _parse_complex(right, species),
                                      RateExpr.parse(rate)))
        except ModelError as exc:
            raise ModelError(f"line {lineno}: {exc}") from None
    return ReactionNetwork(tuple(species), tuple(reactions), parameters, name, conservation)


def load_model(path: str | Path) -> ReactionNetwork:
    path = Path(path)
    if not path.is_file():
        raise ModelError(f"model file {str(path)!r} does not exist")
    return parse_model(path.read_text())


def format_model(network: ReactionNetwork) -> str:
    """Serialise a network so that :func:`parse_model` reproduces it exactly."""
    lines = []
    if network.name:
        lines.append(f"model {network.name}")
    lines.append("species " + " ".join(network.species))
    for reaction in network.reactions:
        lines.append(f"reaction {_format_complex(reaction.reactants, network.species)} -> "
                     f"{_format_complex(reaction.products, network.species)} : {reaction.rate}")
    for key, value in network.parameters.items():
        lines.append(f"param {key} = {value!r}")
    if network.conservation is not None:
        weights = " ".join(str(w) for w in network.conservation.weights)
        lines.append(f"conservation m = {weights}, total = {network.conservation.total}")
    return "\n".join(lines) + "\n"


# state spaces ----------------------------------------------------------------

class StateSpace:
    """Finite lattice of states with a bidirectional state/index map.

    States are stored in reduced coordinates: under a conservation law the
    copy number of one species (the last one with nonzero weight) is implied
    and dropped.

    Parameters
    ----------
    states : array_like of int, shape (n, d_reduced)
        States in enumeration order.
    full_states : array_like of int, shape (n, d)
        The same states with every species present.
    eliminated : int or None
        Index of the dropped species.
    conservation : Conservation or None
    landmarks : dict, optional
        Named states, for example ``{"a": 0, "r": 3}``.
    """

    def __init__(self, states, full_states, eliminated=None, conservation=None, landmarks=None):
        self.states = np.asarray(states, dtype=np.int64)
        self.full_states = np.asarray(full_states, dtype=np.int64)
        self.eliminated = eliminated
        self.conservation = conservation
        self.index_of = {tuple(int(v) for v in s): i for i, s in enumerate(self.states)}
        if len(self.index_of) != len(self.states):
            raise ModelError("state list contains duplicates")
        self.landmarks = dict(landmarks or {})

    def __len__(self) -> int:
        return len(self.states)

    @property
    def dimension(self) -> int:
        return self.states.shape[1]

    def label(self, index: int) -> str:
        return "(" + ",".join(str(int(v)) for v in self.states[index]) + ")"

    @property
    def labels(self) -> list[str]:
        return [self.label(i) for i in range(len(self))]

    def reduce(self, vector) -> tuple[int, ...]:
        """Drop the eliminated coordinate from a full-species vector."""
        vector = [int(v) for v in vector]
        if self.eliminated is None:
            return tuple(vector)
        return tuple(vector[: self.eliminated] + vector[self.eliminated + 1:])

    def resolve(self, token) -> int:
        """Index of a state given as an index, a landmark name or a tuple/label."""
        if isinstance(token, (int, np.integer)):
            if not 0 <= token < len(self):
                raise ModelError(f"state index {token} out of range")
            return int(token)
        if isinstance(token, str):
            token = token.strip()
            if token in self.landmarks:
                return self.landmarks[token]
            if token.lstrip("-").isdigit():
                return self.resolve(int(token))
            values = tuple(int(v) for v in re.findall(r"-?\d+", token))
        else:
            values = tuple(int(v) for v in token)
        try:
            return self.index_of[values]
        except KeyError:
            raise ModelError(f"state {token!r} is not in the state space") from None


def _bounded_vectors(weights: Sequence[int], budget: int) -> Iterator[tuple[int, ...]]:
    if not weights:
        yield ()
        return
    head, tail = weights[0], weights[1:]
    for value in range(budget // head + 1):
        for rest in _bounded_vectors(tail, budget - head * value):
            yield (value,) + rest


def enumerate_states(network: ReactionNetwork, conservation: Conservation | None = None,
                     bounds: Sequence[int] | None = None,
                     cap: int = config.DEFAULT_STATE_CAP) -> StateSpace:
    """Enumerate the finite state space of a network.

    With a conservation law the lattice ``{x >= 0 : m @ x == total}`` is listed
    in ascending lexicographic order of the reduced coordinates. Without one,
    a box ``0 <= x <= bounds`` is used and reactions leaving the box are
    suppressed.

    Raises
    ------
    StateCapExceeded
        If more than ``cap`` states would be produced.
    ModelError
        If neither a conservation law nor bounds make the space finite.
    """
    conservation = conservation or network.conservation
    d = network.dimension
    if conservation is not None:
        weights = list(conservation.weights)
        if any(w <= 0 for w in weights):
            raise ModelError("conservation weights must be positive for a finite state space")
        eliminated = d - 1
        reduced_weights = weights[:-1]
        last = weights[-1]
        states, full = [], []
        for vec in _bounded_vectors(reduced_weights, conservation.total):
            remainder = conservation.total - sum(w * v for w, v in zip(reduced_weights, vec))
            if remainder % last:
                continue
            states.append(vec)
            full.append(vec + (remainder // last,))
            if len(states) > cap:
                raise StateCapExceeded(f"state space exceeds the cap of {cap} states")
        if not states:
            raise ModelError("conservation law admits no states")
        return StateSpace(np.array(states).reshape(len(states), d - 1), full, eliminated, conservation)
    if bounds is None:
        raise ModelError("no conservation law or bounds given; state space would be infinite")
    if len(bounds) != d:
        raise ModelError("bounds do not match the number of species")
    count = math.prod(b + 1 for b in bounds)
    if count > cap:
        raise StateCapExceeded(f"state space of {count} states exceeds the cap of {cap}")
    grid = np.indices([b + 1 for b in bounds]).reshape(d, -1).T
    return StateSpace(grid, grid, None, None)


def _falling_factorial_product(counts: np.ndarray, orders: Sequence[int]) -> np.ndarray:
    """Product over species of ``x_i (x_i - 1) ... (x_i - v_i + 1)``, vectorised over rows."""
    result = np.ones(counts.shape[0])
    for i, order in enumerate(orders):
        for step in range(order):
            result = result * np.clip(counts[:, i] - step, 0, None)
    return result


def propensity(network: ReactionNetwork, reaction_index: int, state, eps: float = 0.0,
               space: StateSpace | None = None) -> float:
    """Mass-action propensity of one reaction.

    Parameters
    ----------
    state : sequence of int
        Full copy-number vector, or a state of ``space`` in reduced
        coordinates when ``space`` is given.
    space : StateSpace, optional
        When given, the propensity is zero if the reaction leaves the space.
    """
    reaction = network.reactions[reaction_index]
    if space is not None:
        full = space.full_states[space.resolve(tuple(state))]
        target = space.reduce(full + reaction.vector)
        if target not in space.index_of:
            return 0.0
    else:
        full = np.asarray(state, dtype=np.int64)
    value = reaction.rate.evaluate(network.parameters)
    value *= _falling_factorial_product(full[None, :], reaction.reactants)[0]
    return value * eps if reaction.rate.eps else value


# built-in chromatin circuits ---------------------------------------------------

_CIRCUITS = {
    "1d": """
species DR DA
reaction DA + DR -> 2 DR : kEA_V
reaction DA -> DR : kEA_V * Dtot * eps
reaction DR + DA -> 2 DA : mu * kEA_V
reaction DR -> DA : b * mu * kEA_V * Dtot * eps
""",
    "2d": """
species DR DA D
reaction D -> DA : kWA0
reaction D -> DA : kWA
reaction D + DA -> 2 DA : kMA_V
reaction DA -> D : kMA_V * Dtot * eps
reaction DA + DR -> D + DR : kEA_V
reaction D -> DR : kWR0
reaction D -> DR : kWR
reaction D + DR -> 2 DR : kMR_V
reaction DR -> D : b * mu * kMA_V * Dtot * eps
reaction DR + DA -> D + DA : mu * kEA_V
""",
    "3d": """
species DR12 DA DR1 D
reaction D -> DA : kWA0
reaction D -> DA : kWA
reaction D + DA -> 2 DA : kMA_V
reaction DA -> D : kMA_V * Dtot * eps
reaction DA + DR1 -> D + DR1 : kEA_V
reaction DA + DR12 -> D + DR12 : 2 * kEA_V
reaction D -> DR1 : kW10
reaction D -> DR1 : kW1
reaction D + DR12 -> DR1 + DR12 : kpM_V
reaction DR1 + DR12 -> 2 DR12 : kM_V
reaction DR1 + DR12 -> 2 DR12 : kbarM_V
reaction DR1 -> DR12 : kW20
{pair_R1}
reaction DR1 -> D : beta * mu_prime * kMA_V * Dtot * eps
reaction DR1 + DA -> D + DA : mu_prime * kEA_V
reaction DR12 -> DR1 : b * mu * kMA_V * Dtot * eps
reaction DR12 + DA -> DR1 + DA : mu * kEA_V
""",
    "4d": """
species DR12 DA DR1 DR2 D
reaction D -> DA : kWA0
reaction D -> DA : kWA
reaction D + DA -> 2 DA : kMA_V
reaction DA -> D : kMA_V * Dtot * eps
reaction DA + DR1 -> D + DR1 : kEA_V
reaction DA + DR12 -> D + DR12 : 2 * kEA_V
reaction DA + DR2 -> D + DR2 : kEA_V
reaction D -> DR1 : kW10
reaction D -> DR1 : kW1
reaction D -> DR2 : kW20
reaction D -> DR2 : kW2
reaction DR2 -> DR12 : kW10
reaction DR1 -> DR12 : kW20
reaction D + DR2 -> 2 DR2 : kM_V
reaction D + DR12 -> DR2 + DR12 : kM_V
reaction D + DR12 -> DR2 + DR12 : kbarM_V
reaction DR1 + DR2 -> DR12 + DR2 : kM_V
reaction DR1 + DR12 -> 2 DR12 : kM_V
reaction DR1 + DR12 -> 2 DR12 : kbarM_V
reaction D + DR2 -> DR1 + DR2 : kpM_V
reaction D + DR12 -> DR1 + DR12 : kpM_V
reaction D + DR1 -> DR2 + DR1 : kbarM_V
{pair_R2}
reaction DR2 + DR12 -> 2 DR12 : kpM_V
{pair_R1}
reaction DR2 -> D : b * mu * kMA_V * Dtot * eps
reaction DR2 + DA -> D + DA : mu * kEA_V
reaction DR1 -> D : beta * mu_prime * kMA_V * Dtot * eps
reaction DR1 + DA -> D + DA : mu_prime * kEA_V
reaction DR12 -> DR2 : beta * mu_prime * kMA_V * Dtot * eps
reaction DR12 + DA -> DR2 + DA : mu_prime * kEA_V
reaction DR12 -> DR1 : b * mu * kMA_V * Dtot * eps
reaction DR12 + DA -> DR1 + DA : mu * kEA_V
""",
}

# Two identical molecules reacting: exact mass action, or the approximation
# x (x - 1) / 2 ~ x^2 expressed as a pair reaction plus a first-order one.
_PAIR = {
    "pair_R1": ("reaction 2 DR1 -> DR12 + DR1 : 0.5 * kbarM_V",
                "reaction 2 DR1 -> DR12 + DR1 : kbarM_V\nreaction DR1 -> DR12 : kbarM_V"),
    "pair_R2": ("reaction 2 DR2 -> DR12 + DR2 : 0.5 * kpM_V",
                "reaction 2 DR2 -> DR12 + DR2 : kpM_V\nreaction DR2 -> DR12 : kpM_V"),
}

_RATE_CONSTANTS = {
    "1d": ("kEA_V",),
    "2d": ("kEA_V", "kMA_V", "kWA0", "kWA", "kWR0", "kWR", "kMR_V"),
    "3d": ("kEA_V", "kMA_V", "kWA0", "kWA", "kW10", "kW1", "kW20", "kpM_V", "kbarM_V", "kM_V"),
    "4d": ("kEA_V", "kMA_V", "kWA0", "kWA", "kW10", "kW1", "kW20", "kW2", "kpM_V", "kbarM_V",
           "kM_V"),
}
# enzymatic recruitment terms add to the basal ones and may vanish
_OPTIONAL_CONSTANTS = {"kWA", "kWR", "kW1", "kW2"}

DEFAULT_RATES = {
    "kEA_V": 1.0, "kMA_V": 1.0, "kWA0": 1.0, "kWA": 0.0, "kWR0": 1.0, "kWR": 0.0,
    "kMR_V": 1.0, "kW10": 1.0, "kW1": 0.0, "kW20": 1.0, "kW2": 0.0, "kpM_V": 1.0,
    "kbarM_V": 1.0, "kM_V": 1.0,
}

MODEL_KINDS = tuple(_CIRCUITS)


@dataclass(frozen=True)
class ChromatinParams:
    """Parameters of a built-in chromatin circuit.

    Attributes
    ----------
    model_kind : {"1d", "2d", "3d", "4d"}
    dtot : int
        Number of nucleosomes, at least 2.
    mu, mu_prime, b, beta : float
        Erasure asymmetries and basal-erasure ratios.
    rates : dict
        Overrides of :data:`DEFAULT_RATES`.
    approximate_pairs : bool
        Replace ``x (x - 1) / 2`` by ``x^2`` in the dimer-like catalysis terms.
    """

    model_kind: str = "1d"
    dtot: int = 2
    mu: float = 1.0
    mu_prime: float = 1.0
    b: float = 1.0
    beta: float = 1.0
    rates: Mapping[str, float] = field(default_factory=dict)
    approximate_pairs: bool = False

    def __post_init__(self):
        kind = str(self.model_kind).lower()
        object.__setattr__(self, "model_kind", kind)
        if kind not in _CIRCUITS:
            raise ModelError(f"unknown model kind {self.model_kind!r}; expected one of {MODEL_KINDS}")
        if int(self.dtot) != self.dtot or self.dtot < 2:
            raise ModelError(f"dtot must be an integer >= 2, got {self.dtot}")
        object.__setattr__(self, "dtot", int(self.dtot))
        object.__setattr__(self, "rates", {k: float(v) for k, v in self.rates.items()})
        for name in ("mu", "mu_prime", "b", "beta"):
            object.__setattr__(self, name, float(getattr(self, name)))
            if not getattr(self, name) > 0:
                raise ModelError(f"{name} must be positive")
        unknown = set(self.rates) - set(DEFAULT_RATES)
        if unknown:
            raise ModelError(f"unknown rate constants {sorted(unknown)}")
        for name in _RATE_CONSTANTS[kind]:
            value = self.rate(name)
            if value < 0 or (value == 0 and name not in _OPTIONAL_CONSTANTS):
                raise ModelError(f"rate constant {name} must be positive, got {value}")

    def rate(self, name: str) -> float:
        return float(self.rates.get(name, DEFAULT_RATES[name]))

    def replace(self, **changes) -> "ChromatinParams":
        values = {f: getattr(self, f) for f in self.__dataclass_fields__}
        rate_changes = {k: changes.pop(k) for k in list(changes) if k in DEFAULT_RATES}
        values.update(changes)
        values["rates"] = {**dict(self.rates), **rate_changes}
        return ChromatinParams(**values)


class ChromatinModel(NamedTuple):
    network: ReactionNetwork
    space: StateSpace
    generator: "PerturbedGenerator"  # noqa: F821


def chromatin_network(params: ChromatinParams) -> ReactionNetwork:
    """Reaction network of a built-in circuit (no state space)."""
    kind = params.model_kind
    template = _CIRCUITS[kind]
    body = template.format(**{k: v[1 if params.approximate_pairs else 0] for k, v in _PAIR.items()})
    values = {name: params.rate(name) for name in _RATE_CONSTANTS[kind]}
    values["Dtot"] = float(params.dtot)
    values.update(mu=params.mu, b=params.b)
    if kind in ("3d", "4d"):
        values.update(mu_prime=params.mu_prime, beta=params.beta)
    d = len(body.split("species", 1)[1].splitlines()[0].split())
    lines = [f"model {kind}", body]
    lines += [f"param {k} = {float(v)!r}" for k, v in values.items()]
    lines.append(f"conservation m = {' '.join(['1'] * d)}, total = {int(params.dtot)}")
    return parse_model("\n".join(lines))


def landmark_states(model_kind: str, dtot: int) -> dict[str, tuple[int, ...]]:
    """Fully active ``a`` and fully repressed ``r`` states in reduced coordinates."""
    d = {"1d": 1, "2d": 2, "3d": 3, "4d": 4}[model_kind]
    if d == 1:
        return {"a": (0,), "r": (dtot,)}
    active = [0] * d
    active[1] = dtot
    repressed = [0] * d
    repressed[0] = dtot
    return {"a": tuple(active), "r": tuple(repressed)}


def build_chromatin_model(params: ChromatinParams, cap: int = config.DEFAULT_STATE_CAP) -> ChromatinModel:
    """Network, state space and perturbed generator of a built-in circuit."""
    from .generator import assemble_generator

    network = chromatin_network(params)
    space = enumerate_states(network, cap=cap)
    space.landmarks = {k: space.index_of[v] for k, v in landmark_states(params.model_kind, params.dtot).items()}
    return ChromatinModel(network, space, assemble_generator(network, space))
