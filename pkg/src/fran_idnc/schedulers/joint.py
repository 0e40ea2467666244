"""Joint rate-aware scheduling: eRRH plans by greedy clique search with power
re-optimisation, then D2D plans by greedy independent-set search."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .. import channel
from ..graphs import (Semantics, WeightedGraph, greedy_max_weight_clique,
                      greedy_max_weight_independent_set)
from ..model import NetworkInstance, SideState
from ..nc import decoded_file, enumerate_idnc_combinations, to_mask
from ..power import optimize_powers
from .d2d import (TransmitterInfo, build_d2d_conflict_graph, finalize_d2d,
                  plans_from_vertices)
from .decision import DecisionRules, SlotDecision, StallError, make_plan

SHORTLIST = 4


@dataclass(frozen=True)
class ErrhVertex:
    errh: int
    files: frozenset
    rate: float
    targets: tuple         # ((user, decoded file), ...)
    mask: int              # bitmask of targeted users

    @property
    def users(self) -> list:
        return [u for u, _ in self.targets]


def errh_compatible(a: ErrhVertex, b: ErrhVertex) -> bool:
    return a.errh != b.errh and not (a.mask & b.mask)


def build_ia_idnc_graph(instance: NetworkInstance, side: SideState, capacities: np.ndarray,
                        rate_floor: Optional[float] = None,
                        max_size: Optional[int] = None) -> WeightedGraph:
    """Compatibility graph of per-eRRH (combination, rate) schedules.

    Candidate rates of a combination are the capacities (at least the floor)
    of the users it instantly serves; the vertex targets every such user able
    to sustain the rate. Schedules with the same eRRH, rate and targeted set
    are kept once, with the smallest combination. Weight = |targets| * rate / B.
    """
    floor = instance.rate_threshold if rate_floor is None else rate_floor
    size = instance.max_combination_size if max_size is None else max_size
    B = instance.file_size
    payloads, weights, seen = [], [], set()
    for e in range(instance.num_errhs):
        caps = capacities[:, e]
        pool = [u for u in side.wanting_users() if caps[u] > 0 and caps[u] >= floor]
        if not pool:
            continue
        combos = enumerate_idnc_combinations(instance.caches[e], side, size, users=pool)
        combos.sort(key=lambda c: (len(c), sorted(c)))
        for combo in combos:
            served = []
            for u in pool:
                f = decoded_file(combo, u, side)
                if f is not None:
                    served.append((u, f))
            for r in sorted({float(caps[u]) for u, _ in served}):
                targets = tuple((u, f) for u, f in served if caps[u] >= r)
                mask = to_mask(u for u, _ in targets)
                key = (e, r, mask)
                if key in seen:
                    continue
                seen.add(key)
                payloads.append(ErrhVertex(e, combo, r, targets, mask))
                weights.append(len(targets) * r / B)
    return WeightedGraph(payloads, weights, Semantics.COMPATIBILITY, predicate=errh_compatible)


def settle_rates(instance: NetworkInstance, chosen: list, powers: np.ndarray,
                 floor: float) -> list:
    """Fix each chosen eRRH schedule at ``powers``: adopt the weakest
    capacity among its targets, first dropping targets below ``floor``.
    Returns [(vertex, rate, kept targets)] for the plans that survive."""
    caps = channel.errh_capacities(instance, powers)
    out = []
    for v in chosen:
        if powers[v.errh] <= 0:
            continue
        kept = [(u, f) for u, f in v.targets if caps[u, v.errh] > 0]
        rate = min((caps[u, v.errh] for u, _ in kept), default=0.0)
        if rate < floor:
            kept = [(u, f) for u, f in kept if caps[u, v.errh] >= floor]
            rate = min((caps[u, v.errh] for u, _ in kept), default=0.0)
        if kept and rate > 0:
            out.append((v, float(rate), kept))
    return out


def _schedule_value(instance, chosen, powers, floor) -> float:
    return sum(len(kept) * rate for _, rate, kept in settle_rates(instance, chosen, powers, floor))


def _optimize(instance: NetworkInstance, chosen: list, quick: bool = False) -> np.ndarray:
    if instance.fixed:
        p = np.zeros(instance.num_errhs)
        p[[v.errh for v in chosen]] = instance.errh_max_power
        return p
    sched = {v.errh: v.users for v in chosen}
    p, _ = optimize_powers(sched, instance.errh_gains, instance.errh_max_power,
                           instance.noise_power, instance.file_size, quick=quick)
    return p


def select_errh_plans(instance: NetworkInstance, side: SideState, rng,
                      shortlist: int = SHORTLIST, trace: Optional[dict] = None):
    """Stage 1. Returns (plans by eRRH, power vector)."""
    floor = instance.rate_threshold
    p_full = channel.full_power(instance)
    g = build_ia_idnc_graph(instance, side, channel.errh_capacities(instance, p_full))
    single = False
    if len(g) == 0 and instance.num_errhs > 1 and not instance.fixed:
        # nothing meets the floor with everybody on: let one eRRH go alone
        g = build_ia_idnc_graph(instance, side, channel.interference_free_capacities(instance))
        single = True
    if trace is not None:
        trace["ia_idnc"] = g
    if len(g) == 0:
        return {}, np.zeros(instance.num_errhs)

    if single or instance.fixed:
        reweigh = None
    else:
        def reweigh(selected, cand):
            if not selected:
                return {v: g.weights[v] for v in cand}
            base = [g.payloads[s] for s in selected]
            # one candidate per (eRRH, targeted set), heaviest first
            order = sorted(cand, key=lambda v: (-g.weights[v], v))
            picked, keys = [], set()
            for v in order:
                key = (g.payloads[v].errh, g.payloads[v].mask)
                if key in keys:
                    continue
                keys.add(key)
                picked.append(v)
                if len(picked) == shortlist:
                    break
            scores = {}
            for v in picked:
                trial = base + [g.payloads[v]]
                scores[v] = _schedule_value(instance, trial, _optimize(instance, trial, quick=True),
                                            floor)
            return scores

    if single:
        best = max(range(len(g)), key=lambda v: (g.weights[v], -v))
        clique = [best]
    else:
        clique = greedy_max_weight_clique(g, reweigh=reweigh, rng=rng)
    if trace is not None and not single:
        trace["ia_idnc_selected"] = list(clique)
    chosen = [g.payloads[v] for v in clique]
    powers = _optimize(instance, chosen)
    plans = {}
    for v, rate, kept in settle_rates(instance, chosen, powers, floor):
        if rate < floor:
            continue
        plans[v.errh] = make_plan(v.errh, True, dict(kept), rate, instance.file_size,
                                  files=frozenset(f for _, f in kept), power=powers[v.errh])
    final = np.zeros(instance.num_errhs)
    for e in plans:
        final[e] = powers[e]
    return plans, final


def joint_d2d_transmitters(instance: NetworkInstance, side: SideState, errh_plans: dict) -> dict:
    """Free users may relay at no less than the slowest eRRH's rate; users
    served by a faster eRRH may relay inside its idle time."""
    floor = instance.rate_threshold
    B = instance.file_size
    served = {}
    for e, p in errh_plans.items():
        for u, f in p.targets:
            served[u] = (e, f)
    t_star = max((p.duration for p in errh_plans.values()), default=0.0)
    slow_rate = min((p.rate for p in errh_plans.values() if p.duration == t_star), default=0.0)
    out = {}
    for k in range(instance.num_users):
        if k not in served:
            out[k] = TransmitterInfo(side.has[k], max(floor, slow_rate))
            continue
        e, f = served[k]
        budget = t_star - errh_plans[e].duration
        if budget > 0:
            out[k] = TransmitterInfo(side.has[k] | {f}, max(floor, B / budget),
                                     budget=budget, host_errh=e)
    return out


def joint_schedule(instance: NetworkInstance, side: SideState, rng=None,
                   trace: bool = False, shortlist: int = SHORTLIST) -> SlotDecision:
    graphs: dict = {} if trace else None
    picks: dict = {}
    errh_plans, powers = select_errh_plans(instance, side, rng, shortlist,
                                           picks if trace else None)
    if graphs is not None and "ia_idnc" in picks:
        graphs["ia_idnc"] = picks["ia_idnc"]
    txs = joint_d2d_transmitters(instance, side, errh_plans)
    targeted = set()
    for p in errh_plans.values():
        targeted |= p.users
    receivers = [u for u in side.wanting_users() if u not in targeted]
    csm = channel.build_csm(instance)
    g = build_d2d_conflict_graph(instance, side, csm, txs, receivers)
    if graphs is not None:
        graphs["d2d"] = g
    ids = greedy_max_weight_independent_set(g, "modified", rng)
    chosen = [g.payloads[v] for v in ids]
    d2d = finalize_d2d(instance, plans_from_vertices(instance, chosen, txs), txs)
    decision = SlotDecision("joint", errh_plans, d2d, powers,
                            DecisionRules(rate_floor=instance.rate_threshold,
                                          d2d_within_errh=True),
                            graphs=graphs or {})
    if trace:
        decision.selections = {"d2d": list(ids)}
        if "ia_idnc_selected" in picks:
            decision.selections["ia_idnc"] = picks["ia_idnc_selected"]
    if decision.empty() and not side.complete():
        raise StallError("joint: no eRRH or D2D transmission meets the rate floor")
    return decision
