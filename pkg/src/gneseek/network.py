"""Undirected communication graphs, schedules, and consensus primitives.

The simulator only ever talks to connected snapshots: a schedule validates
every graph it serves.  Sign-based drives use a configurable deadband so the
discretized dynamics do not chatter on vanishing disagreements; deadband 0
recovers the exact sign with sign(0) = 0.
"""

from __future__ import annotations

from typing import Iterable, Sequence, Tuple

import numpy as np

Array = np.ndarray


class Graph:
    """Immutable undirected graph on nodes 0..N-1 without self-loops."""

    def __init__(self, node_count: int, edges: Iterable[Tuple[int, int]],
                 check_connected: bool = True):
        if node_count < 1:
            raise ValueError("node_count must be >= 1")
        self.node_count = int(node_count)
        seen = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise ValueError(f"edge ({u},{v}) out of range")
            seen.add((min(u, v), max(u, v)))
        self.edges = tuple(sorted(seen))
        self.neighbors = [[] for _ in range(self.node_count)]
        adj = np.zeros((self.node_count, self.node_count), dtype=bool)
        for u, v in self.edges:
            self.neighbors[u].append(v)
            self.neighbors[v].append(u)
            adj[u, v] = adj[v, u] = True
        self.adjacency = adj
        self._adjacency_f = adj.astype(float)
        if check_connected and not is_connected(self):
            raise ValueError("graph is not connected")

    def __repr__(self):
        return f"Graph(N={self.node_count}, edges={len(self.edges)})"

    def edge_list_text(self) -> str:
        """Node/edge counts on the first line, then one edge per line."""
        lines = [f"{self.node_count} {len(self.edges)}"]
        lines += [f"{u} {v}" for u, v in self.edges]
        return "\n".join(lines) + "\n"

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(n, [(i, j) for i in range(n) for j in range(i + 1, n)])

    @classmethod
    def ring(cls, n: int) -> "Graph":
        if n == 1:
            return cls(1, [])
        if n == 2:
            return cls(2, [(0, 1)])
        return cls(n, [(i, (i + 1) % n) for i in range(n)])

    @classmethod
    def path(cls, n: int) -> "Graph":
        return cls(n, [(i, i + 1) for i in range(n - 1)])


def is_connected(g: Graph) -> bool:
    """Breadth-first reachability of every node from node 0."""
    if g.node_count == 1:
        return True
    seen = np.zeros(g.node_count, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        u = stack.pop()
        for v in g.neighbors[u]:
            if not seen[v]:
                seen[v] = True
                stack.append(v)
    return bool(seen.all())


def random_connected_graph(n: int, edge_prob: float, seed: int) -> Graph:
    """Uniform random graph conditioned on connectivity.

    Draws each edge independently with probability ``edge_prob``, then joins
    any remaining components with a random spanning chain: components are
    visited in random order and consecutive ones get one random cross edge.
    Deterministic under ``seed``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= edge_prob <= 1.0:
        raise ValueError("edge_prob must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    edges = set()
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < edge_prob:
                edges.add((i, j))

    # Union components with a random chain of bridges.
    parent = list(range(n))

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    for u, v in edges:
        parent[find(u)] = find(v)
    comps = {}
    for u in range(n):
        comps.setdefault(find(u), []).append(u)
    groups = list(comps.values())
    rng.shuffle(groups)
    for a, b in zip(groups, groups[1:]):
        u = int(a[rng.integers(len(a))])
        v = int(b[rng.integers(len(b))])
        edges.add((min(u, v), max(u, v)))
    return Graph(n, edges)


def sign_deadband(values: Array, deadband: float) -> Array:
    """Sign with a dead zone: 0 whenever |value| <= deadband."""
    if deadband < 0:
        raise ValueError("deadband must be >= 0")
    out = np.sign(values)
    if deadband > 0:
        out[np.abs(values) <= deadband] = 0.0
    return out


def consensus_drive(values: Array, g: Graph, deadband: float = 0.0) -> Array:
    """Per-node sum of deadbanded signs of neighbor disagreements.

    ``values`` has one row per node; the result has the same shape and sums
    to zero over nodes componentwise (sign antisymmetry).
    """
    values = np.atleast_2d(np.asarray(values, dtype=float))
    if values.shape[0] != g.node_count:
        raise ValueError(
            f"values rows {values.shape[0]} != node count {g.node_count}"
        )
    diff = values[None, :, :] - values[:, None, :]      # diff[i, j] = v_j - v_i
    signs = sign_deadband(diff, deadband)
    signs *= g._adjacency_f[:, :, None]
    return signs.sum(axis=1)


def max_consensus(values: Sequence[float], g: Graph, rounds: int | None = None) -> Array:
    """Iterated neighborhood maximization; N-1 rounds reach the global max.

    Raises on disconnected graphs, where some node could never learn the max.
    """
    if not is_connected(g):
        raise ValueError("max_consensus requires a connected graph")
    z = np.asarray(values, dtype=float).copy()
    if z.size != g.node_count:
        raise ValueError("one value per node required")
    rounds = g.node_count - 1 if rounds is None else int(rounds)
    for _ in range(rounds):
        znew = z.copy()
        for i in range(g.node_count):
            if g.neighbors[i]:
                znew[i] = max(z[i], max(z[j] for j in g.neighbors[i]))
        z = znew
    return z


class NetworkSchedule:
    """Time-indexed source of connected communication graphs.

    ``static`` serves one graph forever; ``switching`` cycles through a list,
    changing every ``dwell`` seconds of simulated time.
    """

    def __init__(self, mode: str, graphs: Sequence[Graph], dwell: float = 0.1,
                 seed: int = 0):
        if mode not in ("static", "switching"):
            raise ValueError(f"unknown schedule mode {mode!r}")
        if not graphs:
            raise ValueError("schedule needs at least one graph")
        if dwell <= 0:
            raise ValueError("dwell must be positive")
        n = graphs[0].node_count
        for g in graphs:
            if g.node_count != n:
                raise ValueError("all graphs must share the node count")
            if not is_connected(g):
                raise ValueError("schedule graphs must be connected")
        self.mode = mode
        self.graphs = list(graphs)
        self.dwell = float(dwell)
        self.seed = seed
        self.node_count = n

    @classmethod
    def static(cls, graph: Graph) -> "NetworkSchedule":
        return cls("static", [graph])

    @classmethod
    def switching(cls, graphs: Sequence[Graph], dwell: float = 0.1,
                  seed: int = 0) -> "NetworkSchedule":
        return cls("switching", graphs, dwell=dwell, seed=seed)

    @classmethod
    def random(cls, n: int, mode: str = "static", edge_prob: float = 0.4,
               graph_count: int = 8, dwell: float = 0.1, seed: int = 0
               ) -> "NetworkSchedule":
        if mode == "static":
            return cls("static", [random_connected_graph(n, edge_prob, seed)],
                       seed=seed)
        graphs = [random_connected_graph(n, edge_prob, seed + 1000 * k)
                  for k in range(graph_count)]
        return cls("switching", graphs, dwell=dwell, seed=seed)

    def graph_at(self, t: float) -> Graph:
        if self.mode == "static":
            return self.graphs[0]
        idx = int(t / self.dwell) % len(self.graphs)
        return self.graphs[idx]

    def export_text(self) -> str:
        blocks = [f"# schedule mode={self.mode} dwell={self.dwell}"]
        for k, g in enumerate(self.graphs):
            blocks.append(f"# graph {k}")
            blocks.append(g.edge_list_text().rstrip("\n"))
        return "\n".join(blocks) + "\n"
