"""Per-slot schedulers keyed by scheme id."""

from .baselines import (RLNCScheduler, broadcast_d2d_schedule, broadcast_fran_schedule,
                        classical_idnc_schedule, ra_idnc_schedule, uncoded_unicast_schedule)
from .coordinated import coordinated_schedule
from .decision import (ConstraintViolation, DecisionRules, SlotDecision, StallError,
                       TransmissionPlan, check_decision)
from .joint import build_ia_idnc_graph, joint_schedule
from .d2d import build_d2d_conflict_graph

_STATELESS = {
    "joint": joint_schedule,
    "coordinated": coordinated_schedule,
    "classical-idnc": classical_idnc_schedule,
    "uncoded-unicast": uncoded_unicast_schedule,
    "uncoded-broadcast-fran": broadcast_fran_schedule,
    "uncoded-broadcast-d2d": broadcast_d2d_schedule,
    "ra-idnc": ra_idnc_schedule,
}

SCHEMES = ("joint", "coordinated", "rlnc", "classical-idnc", "uncoded-unicast",
           "uncoded-broadcast-fran", "uncoded-broadcast-d2d", "ra-idnc")


def make_scheduler(scheme: str):
    """Fresh per-episode scheduler: callable(instance, side, rng, trace=False)."""
    if scheme == "rlnc":
        return RLNCScheduler()
    try:
        return _STATELESS[scheme]
    except KeyError:
        raise ValueError(f"unknown scheme {scheme!r}; known: {', '.join(SCHEMES)}") from None
