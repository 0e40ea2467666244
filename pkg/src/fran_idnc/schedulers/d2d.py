"""D2D conflict graph and the helpers that turn an independent set into plans."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .. import channel
from ..graphs import Semantics, WeightedGraph
from ..model import NetworkInstance, SideState
from .decision import make_plan


@dataclass(frozen=True)
class D2DVertex:
    transmitter: int
    rate: float
    receiver: int
    file: int


@dataclass
class TransmitterInfo:
    """What a candidate D2D transmitter may send and how fast it must be."""

    files: frozenset
    floor: float
    budget: Optional[float] = None      # idle time (s) for idle-time transmitters
    host_errh: Optional[int] = None


def cc_conflict(a: D2DVertex, b: D2DVertex, side: SideState, same_rate: bool = True) -> bool:
    """True when the two associations cannot be served in the same slot."""
    if a.transmitter == b.transmitter:
        if same_rate and a.rate != b.rate:
            return True                                        # one rate per transmitter
        if a.receiver == b.receiver:
            return True
        return a.file != b.file and not (a.file in side.has[b.receiver]
                                         and b.file in side.has[a.receiver])   # XOR not decodable
    if a.receiver == b.receiver:
        return True                                            # one transmitter per receiver
    return a.transmitter == b.receiver or b.transmitter == a.receiver   # half-duplex


def build_d2d_conflict_graph(instance: NetworkInstance, side: SideState, csm: np.ndarray,
                             transmitters: dict, receivers, rates: str = "row",
                             same_rate: bool = True, rate_aware: bool = True) -> WeightedGraph:
    """Conflict graph over (transmitter, rate, receiver, file) associations.

    ``transmitters`` maps user -> TransmitterInfo. ``rates`` selects the
    candidate rates of a vertex: "row" uses every value of the transmitter's
    CSM row between the floor and the link capacity, "link" uses the link
    capacity alone. Vertex weight is the number of zone members wanting a
    file the transmitter holds, times rate / B (times 1 / B when
    ``rate_aware`` is off).
    """
    B = instance.file_size
    receivers = [i for i in sorted(set(receivers)) if side.wants[i]]
    payloads, weights = [], []
    for k in sorted(transmitters):
        info = transmitters[k]
        zone = [i for i in receivers if i in instance.zones[k] and i != k]
        if not zone:
            continue
        demand = sum(1 for i in instance.zones[k] if side.wants[i] & info.files)
        row = sorted({float(csm[k, i]) for i in zone if csm[k, i] > 0})
        for i in zone:
            cap = float(csm[k, i])
            if cap <= 0 or cap < info.floor:
                continue
            if rates == "row":
                cands = [r for r in row if info.floor <= r <= cap]
            else:
                cands = [cap]
            if info.budget is not None:
                cands = [r for r in cands if r * info.budget >= B * (1 - 1e-12)]
            for f in sorted(info.files & side.wants[i]):
                for r in cands:
                    payloads.append(D2DVertex(k, r, i, f))
                    weights.append(demand * (r if rate_aware else 1.0) / B)
    return WeightedGraph(payloads, weights, Semantics.CONFLICT,
                         predicate=lambda a, b: cc_conflict(a, b, side, same_rate))


def plans_from_vertices(instance: NetworkInstance, vertices, transmitters: dict) -> dict:
    """Group selected associations per transmitter: {k: (rate, {receiver: file})}."""
    out: dict = {}
    for v in vertices:
        rate, targets = out.setdefault(v.transmitter, (v.rate, {}))
        targets[v.receiver] = v.file
        if v.rate < rate:            # only when rates may differ (classical IDNC)
            out[v.transmitter] = (v.rate, targets)
    return out


def finalize_d2d(instance: NetworkInstance, groups: dict, transmitters: dict,
                 mode: str = "clamp") -> list:
    """Re-evaluate the selected links under their mutual interference.

    ``mode="clamp"`` lowers each transmitter's rate to the weakest kept
    receiver, dropping receivers (and then transmitters) below the floor or
    the idle-time budget. ``mode="fixed"`` keeps the rate and drops the
    receivers that can no longer sustain it.
    """
    B = instance.file_size
    if not groups:
        return []
    csm = channel.build_csm(instance, list(groups))
    plans = []
    for k in sorted(groups):
        rate, targets = groups[k]
        info = transmitters[k]
        floor = info.floor
        if info.budget is not None:
            floor = max(floor, B / info.budget)
        if mode == "fixed":
            keep = {i: f for i, f in targets.items() if csm[k, i] >= rate * (1 - 1e-12)}
            new_rate = rate
        else:
            keep = {i: f for i, f in targets.items()
                    if csm[k, i] > 0 and csm[k, i] >= floor * (1 - 1e-12)}
            new_rate = min([rate] + [float(csm[k, i]) for i in keep])
        if not keep or new_rate <= 0:
            continue
        if info.budget is not None and new_rate * info.budget < B * (1 - 1e-12):
            continue
        plans.append(make_plan(k, False, keep, new_rate, B, host_errh=info.host_errh))
    return plans
