"""Coordinated scheduling: D2D first (users with poor eRRH links get
priority), then the remaining users on the eRRHs at fixed full power."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .. import channel
from ..graphs import Semantics, WeightedGraph, greedy_max_weight_independent_set, pick_max
from ..model import NetworkInstance, SideState
from .d2d import (TransmitterInfo, build_d2d_conflict_graph, finalize_d2d,
                  plans_from_vertices)
from .decision import DecisionRules, SlotDecision, StallError, make_plan

_TINY = 1e-300


@dataclass(frozen=True)
class CoordVertex:
    errh: int
    user: int
    file: int
    rate: float


def coord_conflict(a: CoordVertex, b: CoordVertex, side: SideState) -> bool:
    if a.errh != b.errh:
        return a.user == b.user
    if a.rate != b.rate or a.user == b.user:
        return True
    return a.file != b.file and not (a.file in side.has[b.user] and b.file in side.has[a.user])


def primary_weights(instance: NetworkInstance, side: SideState, caps: np.ndarray,
                    pairs) -> dict:
    """B / (weakest capacity among the eRRHs caching the file) per (user, file)."""
    out = {}
    for u, f in pairs:
        rates = [caps[u, e] for e in range(instance.num_errhs) if f in instance.caches[e]]
        out[(u, f)] = instance.file_size / max(min(rates), _TINY)
    return out


def build_coordinated_graph(instance: NetworkInstance, side: SideState, caps: np.ndarray,
                            users, r_min: float) -> WeightedGraph:
    """Conflict graph of (eRRH, user, file, rate) associations with rate >= r_min."""
    users = [u for u in sorted(users) if side.wants[u]]
    payloads, weights = [], []
    for e in range(instance.num_errhs):
        rates = sorted({float(caps[u, e]) for u in users
                        if caps[u, e] > 0 and caps[u, e] >= r_min})
        for u in users:
            for f in sorted(side.wants[u] & instance.caches[e]):
                for r in rates:
                    if r > caps[u, e]:
                        break
                    payloads.append(CoordVertex(e, u, f, r))
                    weights.append(r / instance.file_size)
    return WeightedGraph(payloads, weights, Semantics.CONFLICT,
                         predicate=lambda a, b: coord_conflict(a, b, side))


def coordinated_d2d(instance: NetworkInstance, side: SideState, caps: np.ndarray, rng,
                    graphs: Optional[dict] = None) -> tuple:
    floor = instance.rate_threshold
    txs = {k: TransmitterInfo(side.has[k], floor) for k in range(instance.num_users)}
    csm = channel.build_csm(instance)
    g = build_d2d_conflict_graph(instance, side, csm, txs, side.wanting_users())
    if graphs is not None:
        graphs["d2d"] = g
    prim = primary_weights(instance, side, caps,
                           {(v.receiver, v.file) for v in g.payloads})
    alive = list(range(len(g)))
    chosen = []
    while alive:
        assoc = {}
        for v in alive:
            key = (g.payloads[v].receiver, g.payloads[v].file)
            assoc.setdefault(key, []).append(v)
        keys = sorted(assoc)
        top = keys[pick_max({j: prim[k] for j, k in enumerate(keys)}, rng)]
        cands = assoc[top]
        v = pick_max({c: g.payloads[c].rate / instance.file_size for c in cands}, rng)
        chosen.append(v)
        alive = [u for u in alive if u != v and not g.adjacent(u, v)]
    picked = [g.payloads[v] for v in chosen]
    return finalize_d2d(instance, plans_from_vertices(instance, picked, txs), txs), chosen


def coordinated_schedule(instance: NetworkInstance, side: SideState, rng=None,
                         trace: bool = False) -> SlotDecision:
    graphs: Optional[dict] = {} if trace else None
    p_full = channel.full_power(instance)
    caps = channel.errh_capacities(instance, p_full)
    d2d, d2d_ids = coordinated_d2d(instance, side, caps, rng, graphs)

    busy = set()
    for p in d2d:
        busy |= p.users | {p.source}
    r_min = min((p.rate for p in d2d), default=instance.rate_threshold)
    rest = [u for u in side.wanting_users() if u not in busy]
    g = build_coordinated_graph(instance, side, caps, rest, max(r_min, instance.rate_threshold))
    if len(g) == 0 and d2d:
        # the D2D rate floor can exceed every eRRH link; fall back to the QoS floor
        g = build_coordinated_graph(instance, side, caps, rest, instance.rate_threshold)
    single = False
    if len(g) == 0 and instance.num_errhs > 1 and not instance.fixed:
        # nothing meets the floor with every eRRH on: let one eRRH go alone
        g = build_coordinated_graph(instance, side, channel.interference_free_capacities(instance),
                                    rest, instance.rate_threshold)
        single = True
    if graphs is not None:
        graphs["coordinated"] = g
    ids = greedy_max_weight_independent_set(g, "original", rng)
    chosen = [g.payloads[v] for v in ids]
    per_errh: dict = {}
    for v in chosen:
        per_errh.setdefault(v.errh, (v.rate, {}))[1][v.user] = v.file
    if single and per_errh:
        e = max(per_errh, key=lambda e: (len(per_errh[e][1]) * per_errh[e][0], -e))
        per_errh = {e: per_errh[e]}
    powers = np.zeros(instance.num_errhs)
    plans = {}
    for e, (rate, targets) in sorted(per_errh.items()):
        powers[e] = instance.errh_max_power
        plans[e] = make_plan(e, True, targets, rate, instance.file_size,
                             power=instance.errh_max_power)
    decision = SlotDecision("coordinated", plans, d2d, powers,
                            DecisionRules(rate_floor=instance.rate_threshold),
                            graphs=graphs or {})
    if trace:
        decision.selections = {"d2d": list(d2d_ids), "coordinated": list(ids)}
    if decision.empty() and not side.complete():
        raise StallError("coordinated: no transmission meets the rate floor")
    return decision
