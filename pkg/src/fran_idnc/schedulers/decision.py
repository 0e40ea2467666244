"""Slot decisions and the constraint checker every scheme must pass."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .. import channel
from ..model import Delivery, NetworkInstance, SideState
from ..nc import decoded_file

RTOL = 1e-9


class ConstraintViolation(AssertionError):
    pass


class StallError(RuntimeError):
    """No transmission can be scheduled although users still want files."""


@dataclass(frozen=True)
class TransmissionPlan:
    """One transmitter's action in a slot.

    ``targets`` maps each targeted user to the file it decodes, or to None
    for a coded reception that does not yet release a file (RLNC).
    ``host_errh`` marks a D2D plan sent in the idle time of that eRRH.
    """

    source: int
    from_errh: bool
    files: frozenset
    rate: float
    targets: tuple            # ((user, file | None), ...) sorted by user
    duration: float
    power: float = 0.0
    host_errh: Optional[int] = None

    @property
    def users(self) -> frozenset:
        return frozenset(u for u, _ in self.targets)


def make_plan(source: int, from_errh: bool, targets: dict, rate: float, file_size: float,
              files=None, power: float = 0.0, host_errh=None) -> TransmissionPlan:
    if files is None:
        files = frozenset(f for f in targets.values() if f is not None)
    return TransmissionPlan(source=source, from_errh=from_errh, files=frozenset(files),
                            rate=float(rate), targets=tuple(sorted(targets.items())),
                            duration=file_size / rate, power=power, host_errh=host_errh)


@dataclass(frozen=True)
class DecisionRules:
    """Which of the optional constraints a scheme promises to respect."""

    rate_floor: float = 0.0          # R_th in bits/s, 0 when the scheme ignores it
    d2d_within_errh: bool = False    # free D2D durations bounded by the longest eRRH one
    coded_generations: bool = False  # RLNC: receptions need not decode a file


@dataclass
class SlotDecision:
    scheme: str
    errh_plans: dict                          # eRRH -> TransmissionPlan
    d2d_plans: list
    powers: np.ndarray
    rules: DecisionRules
    extra_deliveries: list = field(default_factory=list)   # RLNC released files
    graphs: dict = field(default_factory=dict)              # filled when tracing
    selections: dict = field(default_factory=dict)          # graph name -> chosen vertex ids

    @property
    def errh_time(self) -> float:
        return max((p.duration for p in self.errh_plans.values()), default=0.0)

    @property
    def t_max(self) -> float:
        d2d = max((p.duration for p in self.d2d_plans if p.host_errh is None), default=0.0)
        return max(self.errh_time, d2d)

    def plans(self) -> list:
        return list(self.errh_plans.values()) + list(self.d2d_plans)

    def served_users(self) -> set:
        out: set = set()
        for p in self.plans():
            out |= p.users
        return out

    def d2d_transmitters(self) -> set:
        return {p.source for p in self.d2d_plans}

    def empty(self) -> bool:
        return not self.errh_plans and not self.d2d_plans

    def deliveries(self) -> list:
        out = [Delivery(u, f, p.rate) for p in self.plans() for u, f in p.targets
               if f is not None]
        return out + list(self.extra_deliveries)


def _fail(msg: str) -> None:
    raise ConstraintViolation(msg)


def _ge(a: float, b: float) -> bool:
    return a >= b * (1.0 - RTOL)


def check_decision(decision: SlotDecision, instance: NetworkInstance, side: SideState) -> None:
    """Raise ConstraintViolation unless the decision is feasible for the
    Has/Wants state at slot start."""
    rules = decision.rules
    p = np.asarray(decision.powers, dtype=float)
    B = instance.file_size
    if p.shape != (instance.num_errhs,):
        _fail(f"power vector shape {p.shape}")
    if np.any(p < 0) or np.any(p > instance.errh_max_power * (1 + RTOL)):
        _fail(f"C5: powers {p} outside [0, {instance.errh_max_power}]")
    caps = channel.errh_capacities(instance, p)

    seen: dict = {}
    decoded_by_errh: dict = {}
    for e, plan in decision.errh_plans.items():
        if not plan.from_errh or plan.source != e:
            _fail(f"eRRH plan keyed {e} has source {plan.source}")
        if not plan.targets:
            _fail(f"eRRH {e} plan has no targets")
        if not plan.files <= instance.caches[e]:
            _fail(f"C4: eRRH {e} sends {sorted(plan.files)} outside its cache")
        if p[e] <= 0:
            _fail(f"eRRH {e} transmits at zero power")
        if not _ge(plan.rate, rules.rate_floor) or plan.rate <= 0:
            _fail(f"C6: eRRH {e} rate {plan.rate} below floor {rules.rate_floor}")
        for u, f in plan.targets:
            if u in seen:
                _fail(f"C1: user {u} targeted by {seen[u]} and eRRH {e}")
            seen[u] = ("errh", e)
            if not _ge(caps[u, e], plan.rate):
                _fail(f"eRRH {e} rate {plan.rate} above capacity {caps[u, e]} of user {u}")
            _check_reception(plan, u, f, side, rules, f"eRRH {e}")
            if f is not None:
                decoded_by_errh[u] = (e, f)

    t_star = decision.errh_time
    transmitters = [pl.source for pl in decision.d2d_plans]
    if len(set(transmitters)) != len(transmitters):
        _fail("a user carries two D2D plans")
    csm = channel.build_csm(instance, transmitters) if transmitters else None
    for plan in decision.d2d_plans:
        k = plan.source
        if plan.from_errh:
            _fail("D2D plan flagged as eRRH")
        if not plan.targets:
            _fail(f"D2D transmitter {k} has no targets")
        avail = side.has[k]
        if plan.host_errh is not None:
            host = decision.errh_plans.get(plan.host_errh)
            if host is None or k not in host.users:
                _fail(f"idle-time transmitter {k} not served by eRRH {plan.host_errh}")
            if k in decoded_by_errh:
                avail = avail | {decoded_by_errh[k][1]}
            budget = t_star - host.duration
            if not _ge(plan.rate * budget, B):
                _fail(f"C3: transmitter {k} needs {B / plan.rate} s, idle time {budget} s")
        elif k in seen:
            _fail(f"half-duplex: free transmitter {k} is also targeted")
        if not plan.files <= avail:
            _fail(f"C4: transmitter {k} sends {sorted(plan.files)} it does not hold")
        if not _ge(plan.rate, rules.rate_floor) or plan.rate <= 0:
            _fail(f"C7: D2D rate {plan.rate} of {k} below floor {rules.rate_floor}")
        if (rules.d2d_within_errh and plan.host_errh is None and decision.errh_plans
                and plan.duration > t_star * (1 + RTOL)):
            _fail(f"free D2D {k} lasts {plan.duration} s beyond {t_star} s")
        for u, f in plan.targets:
            if u in seen:
                _fail(f"C2: user {u} targeted by {seen[u]} and D2D {k}")
            seen[u] = ("d2d", k)
            if u not in instance.zones[k]:
                _fail(f"user {u} outside the zone of {k}")
            if not _ge(csm[k, u], plan.rate):
                _fail(f"D2D {k} rate {plan.rate} above capacity {csm[k, u]} of user {u}")
            _check_reception(plan, u, f, side, rules, f"D2D {k}")
    for k in transmitters:
        if seen.get(k, ("errh",))[0] == "d2d":
            _fail(f"half-duplex: user {k} transmits and receives D2D")


def _check_reception(plan: TransmissionPlan, u: int, f, side: SideState,
                     rules: DecisionRules, who: str) -> None:
    if not side.wants[u]:
        _fail(f"{who} targets user {u} with nothing left to receive")
    if rules.coded_generations:
        if f is not None and f not in side.wants[u]:
            _fail(f"{who} releases file {f} that user {u} does not want")
        return
    got = decoded_file(plan.files, u, side)
    if got is None or got != f:
        _fail(f"{who}: user {u} cannot instantly decode file {f} from {sorted(plan.files)}")
