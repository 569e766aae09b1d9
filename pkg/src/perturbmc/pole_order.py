"""Orders of the poles of mean first passage times, computed on the transition graph.

Every edge ``(u, v)`` of ``Q(eps)`` carries an integer order: 0 when the
rate is of order one and 1 when it is proportional to eps. The passage time
to a target set ``B`` behaves like ``eps**(-p(u))``, and ``p`` is found
without any linear algebra by repeatedly condensing sets of states that are
mutually reachable through order-zero jump probabilities.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import config
from .errors import DisconnectedFromTarget, ModelError
from .generator import PerturbedGenerator

TARGET = -1


def edge_orders(gen: PerturbedGenerator, tol: float = config.STRUCTURAL_ZERO) -> dict[tuple[int, int], int]:
    """Order in eps of every off-diagonal transition rate."""
    orders = {}
    for u, v in zip(*np.nonzero((np.abs(gen.Q0) > tol) | (np.abs(gen.Q1) > tol))):
        if u == v:
            continue
        if gen.Q0[u, v] > tol:
            orders[(int(u), int(v))] = 0
        elif gen.Q1[u, v] > tol:
            orders[(int(u), int(v))] = 1
    return orders


@dataclass
class PoleOrders:
    """Pole orders of passage times to a target set.

    Attributes
    ----------
    orders : dict
        State index to pole order, for states outside the target.
    target : tuple of int
    trace : list of str
        Human readable log of condensation and fixing steps.
    """

    orders: dict[int, int]
    target: tuple[int, ...]
    trace: list[str] = field(default_factory=list)

    def __getitem__(self, state: int) -> int:
        return self.orders[state]


class _Graph:
    """Weighted digraph whose nodes are merged groups of original states."""

    def __init__(self):
        self.out: dict[int, dict[int, int]] = {}
        self.inc: dict[int, dict[int, int]] = {}
        self.members: dict[int, frozenset[int]] = {}
        self.p: dict[int, int] = {}

    def add_node(self, node: int, members: Iterable[int], p: int) -> None:
        self.out.setdefault(node, {})
        self.inc.setdefault(node, {})
        self.members[node] = frozenset(members)
        self.p[node] = p

    def set_edge(self, u: int, v: int, weight: int) -> None:
        current = self.out[u].get(v)
        if current is None or weight < current:
            self.out[u][v] = weight
            self.inc[v][u] = weight

    def remove_node(self, node: int) -> None:
        for v in self.out.pop(node):
            del self.inc[v][node]
        for u in self.inc.pop(node):
            del self.out[u][node]
        del self.members[node], self.p[node]

    def rank(self, node: int) -> int:
        return min(self.members[node])


def pole_orders_from_graph(n: int, orders: Mapping[tuple[int, int], int],
                           target: Iterable[int]) -> PoleOrders:
    """Pole orders for an abstract graph with integer edge orders.

    Parameters
    ----------
    n : int
        Number of states.
    orders : mapping
        ``(u, v) -> k_uv``, the eps-order of the rate from ``u`` to ``v``.
    target : iterable of int
        Target set ``B``.

    Raises
    ------
    DisconnectedFromTarget
        If some state cannot reach the target.
    """
    target = tuple(sorted(set(int(b) for b in target)))
    if not target:
        raise ModelError("target set is empty")
    in_target = set(target)
    trace: list[str] = []
    graph = _Graph()

    # normalise each state's out-edges so the fastest exit has order zero
    outgoing: dict[int, dict[int, int]] = {u: {} for u in range(n)}
    for (u, v), k in orders.items():
        outgoing[u][v] = min(k, outgoing[u].get(v, k))
    for u in range(n):
        if u in in_target:
            continue
        if not outgoing[u]:
            raise DisconnectedFromTarget({u})
        graph.add_node(u, [u], min(outgoing[u].values()))
    graph.add_node(TARGET, target, 0)
    for u in list(graph.out):
        if u == TARGET:
            continue
        base = graph.p[u]
        for v, k in outgoing[u].items():
            graph.set_edge(u, TARGET if v in in_target else v, k - base)
    trace.append("initial orders " + str({u: graph.p[u] for u in sorted(graph.p) if u != TARGET}))

    _check_reachability(graph)
    next_id = n
    while True:
        group = _largest_fast_cycle(graph)
        if group is None:
            break
        _condense(graph, group, next_id, trace)
        next_id += 1

    result: dict[int, int] = {}
    last = None
    while len(graph.p) > 1:
        chosen = max((u for u in graph.p if u != TARGET), key=lambda u: (graph.p[u], -graph.rank(u)))
        value = graph.p[chosen]
        if last is not None and value > last:
            raise AssertionError("fixed pole orders must be non-increasing")
        last = value
        for x in graph.members[chosen]:
            result[x] = value
        for u, weight in list(graph.inc[chosen].items()):
            graph.p[u] = max(graph.p[u], value - weight)
        trace.append(f"fix {sorted(graph.members[chosen])} at {value}")
        graph.remove_node(chosen)
    return PoleOrders(dict(sorted(result.items())), target, trace)


def _check_reachability(graph: _Graph) -> None:
    reached = {TARGET}
    frontier = [TARGET]
    while frontier:
        v = frontier.pop()
        for u in graph.inc[v]:
            if u not in reached:
                reached.add(u)
                frontier.append(u)
    missing = set(graph.p) - reached
    if missing:
        raise DisconnectedFromTarget({x for u in missing for x in graph.members[u]})


def _largest_fast_cycle(graph: _Graph) -> list[int] | None:
    """Largest strongly connected set of order-zero edges with more than one node."""
    nodes = [u for u in graph.out if u != TARGET]
    position = {u: i for i, u in enumerate(nodes)}
    rows, cols = [], []
    for u in nodes:
        for v, w in graph.out[u].items():
            if w == 0 and v in position:
                rows.append(position[u])
                cols.append(position[v])
    if not rows:
        return None
    adjacency = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(nodes), len(nodes)))
    count, labels = connected_components(adjacency, directed=True, connection="strong")
    sizes = np.bincount(labels, minlength=count)
    if sizes.max() < 2:
        return None
    groups = [[nodes[i] for i in np.nonzero(labels == c)[0]] for c in range(count) if sizes[c] > 1]
    return max(groups, key=lambda g: (len(g), -min(graph.rank(u) for u in g)))


def _condense(graph: _Graph, group: list[int], new: int, trace: list[str]) -> None:
    inside = set(group)
    exits = [w for u in group for v, w in graph.out[u].items() if v not in inside]
    if not exits:
        raise DisconnectedFromTarget({x for u in group for x in graph.members[u]})
    shift = min(exits)
    p_new = max(graph.p[u] for u in group) + shift
    out_edges: dict[int, int] = {}
    in_edges: dict[int, int] = {}
    for u in group:
        for v, w in graph.out[u].items():
            if v not in inside:
                out_edges[v] = min(out_edges.get(v, w), w)
        for v, w in graph.inc[u].items():
            if v not in inside:
                in_edges[v] = min(in_edges.get(v, w), w)
    members = set().union(*(graph.members[u] for u in group))
    for u in group:
        graph.remove_node(u)
    graph.add_node(new, members, p_new)
    for v, w in out_edges.items():
        graph.set_edge(new, v, w - shift)
    for v, w in in_edges.items():
        graph.set_edge(v, new, w)
    trace.append(f"condense {sorted(members)} with order {p_new}")


def pole_orders(gen: PerturbedGenerator, target: Iterable[int]) -> PoleOrders:
    """Pole orders of ``h_{x,B}(eps)`` for every ``x`` outside ``target``."""
    return pole_orders_from_graph(gen.n, edge_orders(gen), [gen.resolve(t) for t in target])


def stationary_orders(gen: PerturbedGenerator, states: Iterable[int] | None = None) -> dict[int, int]:
    """Order ``k_x`` of the leading term of ``pi_x(eps)``.

    ``k_x = max(0, max over edges (x, y) of p_x(y) - k_xy)``, where ``p_x(y)``
    is the pole order of the passage time from ``y`` to ``{x}``. This follows
    from the return-time identity ``pi_x q_x E_x[return time] = 1``.
    """
    edges = edge_orders(gen)
    by_source: dict[int, list[tuple[int, int]]] = {}
    for (u, v), k in edges.items():
        by_source.setdefault(u, []).append((v, k))
    states = range(gen.n) if states is None else [gen.resolve(s) for s in states]
    result = {}
    for x in states:
        poles = pole_orders_from_graph(gen.n, edges, [x])
        result[x] = max([0] + [poles[y] - k for y, k in by_source.get(x, [])])
    return result
