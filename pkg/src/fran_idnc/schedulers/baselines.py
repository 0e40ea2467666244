"""Reference schemes: RA-IDNC with one common rate, rate-blind classical IDNC,
uncoded unicast and broadcast variants, and RLNC generations."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .. import channel
from ..graphs import greedy_max_weight_clique, greedy_max_weight_independent_set
from ..graphs import Semantics, WeightedGraph
from ..model import Delivery, NetworkInstance, SideState
from ..nc import decoded_file, enumerate_idnc_combinations, to_mask
from .d2d import (D2DVertex, TransmitterInfo, build_d2d_conflict_graph, finalize_d2d,
                  plans_from_vertices)
from .decision import DecisionRules, SlotDecision, StallError, make_plan
from .joint import ErrhVertex, errh_compatible

NO_FLOOR = DecisionRules()


def _powers_for(instance: NetworkInstance, plans: dict) -> np.ndarray:
    p = np.zeros(instance.num_errhs)
    for e in plans:
        p[e] = instance.errh_max_power
    return p


def _full_caps(instance: NetworkInstance) -> np.ndarray:
    # all eRRHs on: a safe lower bound for whichever subset ends up active
    return channel.errh_capacities(instance, channel.full_power(instance))


def _targeted(plans: dict) -> set:
    out: set = set()
    for p in plans.values():
        out |= p.users
    return out


def _free_d2d(instance, side, errh_plans, floor, rng, rates="row", same_rate=True,
              mode="clamp", weight_mode="modified", only_rate=None, rate_aware=True):
    """D2D among users the eRRHs did not target."""
    busy = _targeted(errh_plans)
    txs = {k: TransmitterInfo(side.has[k], floor)
           for k in range(instance.num_users) if k not in busy}
    receivers = [u for u in side.wanting_users() if u not in busy]
    csm = channel.build_csm(instance)
    if only_rate is not None:
        csm = np.where(csm >= only_rate, only_rate, 0.0)
    g = build_d2d_conflict_graph(instance, side, csm, txs, receivers, rates=rates,
                                 same_rate=same_rate, rate_aware=rate_aware)
    ids = greedy_max_weight_independent_set(g, weight_mode, rng)
    chosen = [g.payloads[v] for v in ids]
    return finalize_d2d(instance, plans_from_vertices(instance, chosen, txs), txs, mode), g, ids


def _decision(scheme, instance, side, plans, d2d, rules, **kw) -> SlotDecision:
    d = SlotDecision(scheme, plans, d2d, _powers_for(instance, plans), rules, **kw)
    if d.empty() and not side.complete():
        raise StallError(f"{scheme}: nothing can be scheduled")
    return d


def _combos(instance, side, e, pool):
    combos = enumerate_idnc_combinations(instance.caches[e], side,
                                         instance.max_combination_size, users=pool)
    combos.sort(key=lambda c: (len(c), sorted(c)))
    return combos


# ------------------------------------------------------------------ RA-IDNC

def _common_rate_plan(instance, side, caps, floor):
    """Best common rate and its eRRH schedules: (rate, [ErrhVertex]) or (None, [])."""
    B = instance.file_size
    wanting = side.wanting_users()
    served = {}   # eRRH -> [(combo, [(u, f)])]
    for e in range(instance.num_errhs):
        pool = [u for u in wanting if caps[u, e] > 0 and caps[u, e] >= floor]
        rows = []
        for c in _combos(instance, side, e, pool):
            s = [(u, decoded_file(c, u, side)) for u in pool]
            rows.append((c, [(u, f) for u, f in s if f is not None]))
        served[e] = rows
    rates = sorted({float(caps[u, e]) for e in served for _, s in served[e] for u, _ in s})
    best = (0.0, None, [])
    for r in rates:
        payloads, weights, seen = [], [], set()
        for e, rows in served.items():
            for c, s in rows:
                t = tuple((u, f) for u, f in s if caps[u, e] >= r)
                m = to_mask(u for u, _ in t)
                if t and (e, m) not in seen:
                    seen.add((e, m))
                    payloads.append(ErrhVertex(e, c, r, t, m))
                    weights.append(len(t))
        g = WeightedGraph(payloads, weights, Semantics.COMPATIBILITY, predicate=errh_compatible)
        clique = greedy_max_weight_clique(g, rng=None)
        value = g.total_weight(clique) * r / B
        if value > best[0]:
            best = (value, r, [g.payloads[v] for v in clique])
    return best[1], best[2]


def ra_idnc_schedule(instance: NetworkInstance, side: SideState, rng=None,
                     trace: bool = False) -> SlotDecision:
    """Every eRRH and D2D transmitter uses one common rate, chosen to
    maximise (number of targeted users) * rate."""
    floor = instance.rate_threshold
    B = instance.file_size
    common, chosen = _common_rate_plan(instance, side, _full_caps(instance), floor)
    if common is None and instance.num_errhs > 1 and not instance.fixed:
        # nothing meets the floor with every eRRH on: let one eRRH go alone
        common, chosen = _common_rate_plan(instance, side,
                                           channel.interference_free_capacities(instance), floor)
        chosen = sorted(chosen, key=lambda v: (-len(v.targets), v.errh))[:1]
    plans = {}
    for v in chosen:
        plans[v.errh] = make_plan(v.errh, True, dict(v.targets), common, B,
                                  files=frozenset(f for _, f in v.targets),
                                  power=instance.errh_max_power)
    if common is None:
        d2d, g, ids = _free_d2d(instance, side, plans, floor, rng, rates="link", mode="clamp")
    else:
        d2d, g, ids = _free_d2d(instance, side, plans, common, rng, rates="link", mode="fixed",
                           only_rate=common)
    return _decision("ra-idnc", instance, side, plans, d2d, DecisionRules(rate_floor=floor),
                     graphs={"d2d": g} if trace else {},
                     selections={"d2d": ids} if trace else {})


# ------------------------------------------------------------ classical IDNC

def classical_idnc_schedule(instance: NetworkInstance, side: SideState, rng=None,
                            trace: bool = False) -> SlotDecision:
    """Combinations chosen by how many users they serve, ignoring rates;
    each transmission then runs at its slowest target's capacity."""
    B = instance.file_size
    caps = _full_caps(instance)
    wanting = side.wanting_users()
    payloads, weights = [], []
    for e in range(instance.num_errhs):
        pool = [u for u in wanting if caps[u, e] > 0]
        for c in _combos(instance, side, e, pool):
            t = tuple((u, decoded_file(c, u, side)) for u in pool
                      if decoded_file(c, u, side) is not None)
            r = min(caps[u, e] for u, _ in t)
            payloads.append(ErrhVertex(e, c, float(r), t, to_mask(u for u, _ in t)))
            weights.append(len(t))
    g = WeightedGraph(payloads, weights, Semantics.COMPATIBILITY, predicate=errh_compatible)
    plans = {}
    clique = greedy_max_weight_clique(g, rng=None)
    for v in (g.payloads[i] for i in clique):
        plans[v.errh] = make_plan(v.errh, True, dict(v.targets), v.rate, B, files=v.files,
                                  power=instance.errh_max_power)
    d2d, g2, ids = _free_d2d(instance, side, plans, 0.0, rng, rates="link", same_rate=False,
                             mode="clamp", rate_aware=False)
    return _decision("classical-idnc", instance, side, plans, d2d, NO_FLOOR,
                     graphs={"ia_idnc": g, "d2d": g2} if trace else {},
                     selections={"ia_idnc": clique, "d2d": ids} if trace else {})


# ----------------------------------------------------------- uncoded unicast

def uncoded_unicast_schedule(instance: NetworkInstance, side: SideState, rng=None,
                             trace: bool = False) -> SlotDecision:
    """Each eRRH serves its single best remaining user with one wanted file;
    untargeted users may be served by uncoded D2D unicast."""
    B = instance.file_size
    caps = _full_caps(instance)
    pairs = []
    for e in range(instance.num_errhs):
        for u in side.wanting_users():
            if caps[u, e] > 0 and side.wants[u] & instance.caches[e]:
                pairs.append((-float(caps[u, e]), e, u))
    pairs.sort()
    plans, used = {}, set()
    for negc, e, u in pairs:
        if e in plans or u in used:
            continue
        f = min(side.wants[u] & instance.caches[e])
        plans[e] = make_plan(e, True, {u: f}, -negc, B, power=instance.errh_max_power)
        used.add(u)
    busy = _targeted(plans)
    txs = {k: TransmitterInfo(side.has[k], 0.0)
           for k in range(instance.num_users) if k not in busy}
    receivers = [u for u in side.wanting_users() if u not in busy]
    csm = channel.build_csm(instance)
    payloads, weights = [], []
    for k in sorted(txs):
        for i in receivers:
            if i != k and i in instance.zones[k] and csm[k, i] > 0:
                common = side.has[k] & side.wants[i]
                if common:
                    payloads.append(D2DVertex(k, float(csm[k, i]), i, min(common)))
                    weights.append(csm[k, i] / B)
    g = WeightedGraph(payloads, weights, Semantics.CONFLICT, predicate=_unicast_conflict)
    ids = greedy_max_weight_independent_set(g, "original", rng)
    chosen = [g.payloads[v] for v in ids]
    d2d = finalize_d2d(instance, plans_from_vertices(instance, chosen, txs), txs, "clamp")
    return _decision("uncoded-unicast", instance, side, plans, d2d, NO_FLOOR,
                     graphs={"d2d": g} if trace else {},
                     selections={"d2d": ids} if trace else {})


def _unicast_conflict(a: D2DVertex, b: D2DVertex) -> bool:
    return (a.transmitter == b.transmitter or a.receiver == b.receiver
            or a.transmitter == b.receiver or b.transmitter == a.receiver)


# ---------------------------------------------------------- uncoded broadcast

def _errh_broadcast(instance, side, caps, eligible) -> dict:
    """Each eRRH in turn sends the cached file wanted by most still-untargeted
    users, at the slowest of their capacities."""
    B = instance.file_size
    left = {u for u in eligible if side.wants[u]}
    plans = {}
    for e in range(instance.num_errhs):
        best = None
        for f in sorted(instance.caches[e]):
            users = sorted(u for u in left if f in side.wants[u] and caps[u, e] > 0)
            if users and (best is None or len(users) > len(best[1])):
                best = (f, users)
        if best is None:
            continue
        f, users = best
        rate = min(caps[u, e] for u in users)
        plans[e] = make_plan(e, True, {u: f for u in users}, float(rate), B,
                             power=instance.errh_max_power)
        left -= set(users)
    return plans


def broadcast_fran_schedule(instance: NetworkInstance, side: SideState, rng=None,
                            trace: bool = False) -> SlotDecision:
    plans = _errh_broadcast(instance, side, _full_caps(instance), range(instance.num_users))
    return _decision("uncoded-broadcast-fran", instance, side, plans, [], NO_FLOOR)


REDRAWS = 64


def broadcast_d2d_schedule(instance: NetworkInstance, side: SideState, rng=None,
                           trace: bool = False) -> SlotDecision:
    """Randomly chosen users broadcast the held file missing at most of their
    neighbours; the eRRHs broadcast to everybody else. A draw that leaves
    nothing to send (e.g. every wanting user picked as a transmitter) is
    redrawn, up to ``REDRAWS`` times."""
    rng = np.random.default_rng(0) if rng is None else rng
    for _ in range(REDRAWS):
        d2d, plans = _broadcast_d2d_draw(instance, side, rng)
        if d2d or plans:
            break
    return _decision("uncoded-broadcast-d2d", instance, side, plans, d2d, NO_FLOOR)


def _broadcast_d2d_draw(instance: NetworkInstance, side: SideState, rng) -> tuple:
    n = instance.num_users
    coin = rng.random(n) < 0.5
    order = rng.permutation(n)
    txs = {int(k) for k in order if coin[k]}
    csm = channel.build_csm(instance)
    taken: set = set()
    groups: dict = {}
    for k in (int(k) for k in order):
        if k not in txs:
            continue
        nbrs = [i for i in sorted(instance.zones[k])
                if i not in txs and i not in taken and side.wants[i] and csm[k, i] > 0]
        best = None
        for f in sorted(side.has[k]):
            users = [i for i in nbrs if f in side.wants[i]]
            if users and (best is None or len(users) > len(best[1])):
                best = (f, users)
        if best is None:
            continue
        f, users = best
        groups[k] = (min(float(csm[k, i]) for i in users), {i: f for i in users})
        taken |= set(users)
    infos = {k: TransmitterInfo(side.has[k], 0.0) for k in groups}
    d2d = finalize_d2d(instance, groups, infos, "clamp")
    # a selected transmitter cannot receive, whether or not a neighbour gains
    busy = set(txs)
    for p in d2d:
        busy |= p.users
    plans = _errh_broadcast(instance, side, _full_caps(instance),
                            [u for u in range(n) if u not in busy])
    return d2d, plans


# ---------------------------------------------------------------------- RLNC

@dataclass
class RLNCScheduler:
    """Random linear network coding per eRRH over each user's generation.

    A user is attached to its strongest eRRH that caches some of its wanted
    files; its generation is the wanted files in that cache and stays fixed
    until decoded. Each slot every eRRH sends one coded packet at the slowest
    capacity of its attached users; a user decodes its whole generation after
    as many receptions as the generation has files.
    """

    home: dict = field(default_factory=dict)        # user -> eRRH
    generation: dict = field(default_factory=dict)  # user -> frozenset
    received: dict = field(default_factory=dict)    # user -> [rates]

    def __call__(self, instance: NetworkInstance, side: SideState, rng=None,
                 trace: bool = False) -> SlotDecision:
        B = instance.file_size
        caps = _full_caps(instance)
        for u in side.wanting_users():
            gen = self.generation.get(u)
            if gen is not None and gen <= side.wants[u]:
                continue
            opts = [e for e in range(instance.num_errhs)
                    if caps[u, e] > 0 and side.wants[u] & instance.caches[e]]
            if not opts:
                self.generation.pop(u, None)
                continue
            e = max(opts, key=lambda e: (caps[u, e], -e))
            self.home[u] = e
            self.generation[u] = frozenset(side.wants[u] & instance.caches[e])
            self.received[u] = []
        attached: dict = {}
        for u, e in self.home.items():
            if u in self.generation and side.wants[u]:
                attached.setdefault(e, []).append(u)
        plans, extra = {}, []
        for e, users in sorted(attached.items()):
            users = sorted(users)
            rate = float(min(caps[u, e] for u in users))
            files = frozenset().union(*(self.generation[u] for u in users))
            plans[e] = make_plan(e, True, {u: None for u in users}, rate, B, files=files,
                                 power=instance.errh_max_power)
            for u in users:
                self.received[u].append(rate)
                if len(self.received[u]) >= len(self.generation[u]):
                    for f, r in zip(sorted(self.generation[u]), self.received[u]):
                        extra.append(Delivery(u, f, r))
                    del self.generation[u], self.home[u], self.received[u]
        return _decision("rlnc", instance, side, plans, [],
                         DecisionRules(coded_generations=True), extra_deliveries=extra)
