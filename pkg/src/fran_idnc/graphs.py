"""Weighted graphs, greedy clique / independent-set searches and exact oracles."""

from __future__ import annotations

import enum
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

TIE_RTOL = 1e-12


class Semantics(enum.Enum):
    COMPATIBILITY = "compatibility"   # solutions are cliques
    CONFLICT = "conflict"             # solutions are independent sets


class WeightedGraph:
    """Vertices carry a payload and a non-negative weight.

    Edges are either listed explicitly or given by a symmetric predicate
    ``adjacent(payload_a, payload_b)``; large scheduling graphs use the
    predicate so that no edge list is ever materialised.
    """

    def __init__(self, payloads: Sequence, weights: Sequence[float], semantics: Semantics,
                 edges: Optional[Iterable[tuple[int, int]]] = None,
                 predicate: Optional[Callable] = None):
        if (edges is None) == (predicate is None):
            raise ValueError("give exactly one of edges / predicate")
        self.payloads = list(payloads)
        self.weights = [float(w) for w in weights]
        if len(self.payloads) != len(self.weights):
            raise ValueError("payload / weight length mismatch")
        for w in self.weights:
            if not (np.isfinite(w) and w >= 0):
                raise ValueError(f"vertex weight must be finite and >= 0, got {w}")
        self.semantics = semantics
        self._predicate = predicate
        self._adj: Optional[list] = None
        if edges is not None:
            self._adj = [set() for _ in self.payloads]
            for a, b in edges:
                if a == b:
                    raise ValueError("self-edges are not allowed")
                self._adj[a].add(b)
                self._adj[b].add(a)

    def __len__(self) -> int:
        return len(self.payloads)

    def adjacent(self, a: int, b: int) -> bool:
        if a == b:
            return False
        if self._adj is not None:
            return b in self._adj[a]
        return bool(self._predicate(self.payloads[a], self.payloads[b]))

    def neighbors(self, v: int) -> set:
        if self._adj is None:
            self.materialize()
        return self._adj[v]

    def materialize(self) -> None:
        if self._adj is not None:
            return
        n = len(self)
        adj = [set() for _ in range(n)]
        for a in range(n):
            pa = self.payloads[a]
            for b in range(a + 1, n):
                if self._predicate(pa, self.payloads[b]):
                    adj[a].add(b)
                    adj[b].add(a)
        self._adj = adj

    def edges(self) -> list:
        self.materialize()
        return [(a, b) for a in range(len(self)) for b in self._adj[a] if a < b]

    def adjacency_matrix(self) -> np.ndarray:
        n = len(self)
        m = np.zeros((n, n), dtype=bool)
        self.materialize()
        for a in range(n):
            for b in self._adj[a]:
                m[a, b] = True
        return m

    def total_weight(self, vertices: Iterable[int]) -> float:
        return float(sum(self.weights[v] for v in vertices))

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph(semantics=self.semantics.value)
        for v, (p, w) in enumerate(zip(self.payloads, self.weights)):
            g.add_node(v, label=str(p), weight=w)
        g.add_edges_from(self.edges())
        return g


def write_graph(g: WeightedGraph, path) -> None:
    """GraphML dump for inspection."""
    import networkx as nx

    nx.write_graphml(g.to_networkx(), str(path))


def pick_max(scores: dict, rng: Optional[np.random.Generator] = None) -> int:
    """Key with the largest score; near-ties go to the lowest key, or to a
    seeded random choice among them when ``rng`` is given."""
    best = max(scores.values())
    cut = best - TIE_RTOL * abs(best)
    ties = sorted(v for v, s in scores.items() if s >= cut)
    if len(ties) == 1 or rng is None:
        return ties[0]
    return ties[int(rng.integers(len(ties)))]


def greedy_max_weight_clique(g: WeightedGraph, reweigh: Optional[Callable] = None,
                             rng: Optional[np.random.Generator] = None) -> list:
    """Pick the heaviest vertex, keep only its neighbours, repeat.

    ``reweigh(chosen, candidates) -> {vertex: score}`` may rescore the
    candidates against the partial clique before each pick; it must score at
    least one candidate. Returns the chosen vertices in pick order.
    """
    if g.semantics is not Semantics.COMPATIBILITY:
        raise ValueError("clique search needs a compatibility graph")
    cand = list(range(len(g)))
    chosen: list = []
    while cand:
        if reweigh is None:
            scores = {v: g.weights[v] for v in cand}
        else:
            scores = reweigh(list(chosen), cand)
            if not scores:
                raise ValueError("reweigh scored no candidate")
        v = pick_max(scores, rng)
        chosen.append(v)
        cand = [u for u in cand if u != v and g.adjacent(v, u)]
    return chosen


def modified_weights(g: WeightedGraph, alive: Sequence[int], adj: np.ndarray) -> np.ndarray:
    """psi(v) * sum of psi(v') over surviving v' not adjacent to v (v included)."""
    idx = np.asarray(alive, dtype=int)
    psi = np.asarray(g.weights)[idx]
    nonadj = ~adj[np.ix_(idx, idx)]
    return psi * (nonadj @ psi)


def greedy_max_weight_independent_set(g: WeightedGraph, weight_mode: str = "modified",
                                      rng: Optional[np.random.Generator] = None) -> list:
    """Pick the best-scoring vertex, drop its conflicting neighbours, repeat.

    ``weight_mode="modified"`` rescores the survivors every round by their
    weight times the total weight of the survivors they do not conflict with;
    ``"original"`` uses the vertex weights as they are.
    """
    if g.semantics is not Semantics.CONFLICT:
        raise ValueError("independent-set search needs a conflict graph")
    if weight_mode not in ("modified", "original"):
        raise ValueError(f"unknown weight mode {weight_mode!r}")
    alive = list(range(len(g)))
    adj = g.adjacency_matrix() if weight_mode == "modified" and alive else None
    chosen: list = []
    while alive:
        if adj is not None:
            sc = modified_weights(g, alive, adj)
            scores = dict(zip(alive, sc.tolist()))
        else:
            scores = {v: g.weights[v] for v in alive}
        v = pick_max(scores, rng)
        chosen.append(v)
        if adj is not None:
            alive = [u for u in alive if u != v and not adj[v, u]]
        else:
            alive = [u for u in alive if u != v and not g.adjacent(v, u)]
    return chosen


# ------------------------------------------------------------------ checks

def is_clique(g: WeightedGraph, vs: Sequence[int]) -> bool:
    vs = list(vs)
    return all(g.adjacent(a, b) for i, a in enumerate(vs) for b in vs[i + 1:])


def is_independent_set(g: WeightedGraph, vs: Sequence[int]) -> bool:
    vs = list(vs)
    return all(not g.adjacent(a, b) for i, a in enumerate(vs) for b in vs[i + 1:])


def is_maximal_clique(g: WeightedGraph, vs: Sequence[int]) -> bool:
    s = set(vs)
    if not is_clique(g, vs):
        return False
    return not any(all(g.adjacent(u, v) for v in s) for u in range(len(g)) if u not in s)


def is_maximal_independent_set(g: WeightedGraph, vs: Sequence[int]) -> bool:
    s = set(vs)
    if not is_independent_set(g, vs):
        return False
    return not any(all(not g.adjacent(u, v) for v in s) for u in range(len(g)) if u not in s)


# ----------------------------------------------------------------- oracles

ORACLE_CAP = 20


def _best_maximal_clique(n: int, nbrs: list, weights: list) -> tuple[list, float]:
    best: list = [[], 0.0]

    def expand(r: list, p: set, x: set, w: float) -> None:
        if not p and not x:
            if w > best[1] or (w == best[1] and not best[0]):
                best[0], best[1] = list(r), w
            return
        pivot = max(p | x, key=lambda u: len(nbrs[u] & p))
        for v in list(p - nbrs[pivot]):
            expand(r + [v], p & nbrs[v], x & nbrs[v], w + weights[v])
            p = p - {v}
            x = x | {v}

    if n:
        expand([], set(range(n)), set(), 0.0)
    return sorted(best[0]), best[1]


def exhaustive_clique_oracle(g: WeightedGraph, cap: int = ORACLE_CAP) -> tuple[list, float]:
    """Exact maximum-weight clique by maximal-clique enumeration."""
    if len(g) > cap:
        raise ValueError(f"graph has {len(g)} vertices, oracle cap is {cap}")
    g.materialize()
    nbrs = [set(g.neighbors(v)) for v in range(len(g))]
    return _best_maximal_clique(len(g), nbrs, g.weights)


def exhaustive_is_oracle(g: WeightedGraph, cap: int = ORACLE_CAP) -> tuple[list, float]:
    """Exact maximum-weight independent set (cliques of the complement)."""
    if len(g) > cap:
        raise ValueError(f"graph has {len(g)} vertices, oracle cap is {cap}")
    n = len(g)
    g.materialize()
    full = set(range(n))
    nbrs = [full - g.neighbors(v) - {v} for v in range(n)]
    return _best_maximal_clique(n, nbrs, g.weights)
