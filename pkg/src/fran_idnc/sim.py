"""Episode engine and Monte Carlo aggregation."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import channel
from .model import (NetworkInstance, ScenarioConfig, SideState, apply_deliveries,
                    generate_scenario, redraw_user_positions)
from .schedulers import StallError, check_decision, make_scheduler

MAX_SLOTS = 10_000
MAX_OUTAGES = 200      # consecutive slots with nothing schedulable before giving up


@dataclass
class SlotRecord:
    decision: object       # None for an outage slot
    t_max: float
    unserved: tuple


@dataclass
class EpisodeResult:
    scheme: str
    seed: object
    completion: list                 # per user, seconds (nan if never completed)
    total_time: float                # T_o
    slots: list = field(default_factory=list)
    stalled: bool = False
    final_side: Optional[SideState] = None
    stall_reason: str = ""

    @property
    def num_slots(self) -> int:
        return len(self.slots)


def slot_rngs(seed, t: int):
    """Per-slot generators: fading draws and tie-breaks. Keyed on (seed, slot)
    only, so every scheme sees the same channel sequence."""
    base = list(seed) if isinstance(seed, (list, tuple)) else [int(seed)]
    return np.random.default_rng(base + [t, 0]), np.random.default_rng(base + [t, 1])


def run_episode(instance: NetworkInstance, side: SideState, scheme: str, seed=0,
                check: bool = True, trace: bool = False, config: Optional[ScenarioConfig] = None,
                max_slots: int = MAX_SLOTS, observer=None) -> EpisodeResult:
    """Run ``scheme`` slot by slot until every Wants set is empty.

    When the scheduler finds nothing that meets the rate floor but the
    channel changes between slots, the slot is an outage: nobody is served
    and it lasts B / R_th (the time of one transmission at the floor). A
    deterministic channel, or ``MAX_OUTAGES`` outages in a row, ends the
    episode with ``stalled=True``.

    ``observer(t, instance, side, decision)``, if given, sees every scheduled
    slot before its deliveries are applied.
    """
    schedule = make_scheduler(scheme)
    n = side.num_users
    completion = [0.0 if not side.wants[u] else math.nan for u in range(n)]
    clock = 0.0
    slots: list = []
    res = EpisodeResult(scheme, seed, completion, 0.0, slots)
    t = 0
    outages = 0
    varying = (instance.fading and not instance.fixed) or (
        config is not None and config.redraw_positions_per_slot)
    while not side.complete():
        if t >= max_slots:
            res.stalled, res.stall_reason = True, f"slot limit {max_slots} reached"
            break
        fade_rng, tie_rng = slot_rngs(seed, t)
        if config is not None and config.redraw_positions_per_slot:
            instance = redraw_user_positions(instance, config, fade_rng)
        inst = channel.draw_gains(instance, fade_rng)
        try:
            decision = schedule(inst, side, tie_rng, trace=trace)
        except StallError as exc:
            outages += 1
            if not varying or instance.rate_threshold <= 0 or outages > MAX_OUTAGES:
                res.stalled, res.stall_reason = True, str(exc)
                break
            t_max = instance.file_size / instance.rate_threshold
            unserved = tuple(side.wanting_users())
            side = apply_deliveries(side, [], t_max, unserved)
            clock += t_max
            slots.append(SlotRecord(None, t_max, unserved))
            t += 1
            continue
        outages = 0
        if check:
            check_decision(decision, inst, side)
        if observer is not None:
            observer(t, inst, side, decision)
        served = decision.served_users()
        unserved = tuple(u for u in range(n) if side.wants[u] and u not in served)
        t_max = decision.t_max
        side = apply_deliveries(side, decision.deliveries(), t_max, unserved)
        clock += t_max
        for u in range(n):
            if not side.wants[u] and math.isnan(completion[u]):
                completion[u] = clock
        slots.append(SlotRecord(decision, t_max, unserved))
        t += 1
    res.final_side = side
    res.total_time = math.nan if res.stalled else max(completion, default=0.0)
    return res


@dataclass
class Summary:
    scheme: str
    iterations: int
    completed: int
    stalled: int
    mean: float
    std: float
    ci95: tuple
    mean_slots: float
    totals: list           # per-iteration T_o (nan when stalled), in seed order
    episodes: list = field(default_factory=list)   # kept only on request, slot logs dropped


def summarize(scheme: str, results: Sequence[EpisodeResult]) -> Summary:
    totals = [r.total_time for r in results]
    done = np.array([x for x in totals if not math.isnan(x)])
    slots = [r.num_slots for r in results if not r.stalled]
    if len(done):
        mean = float(done.mean())
        std = float(done.std(ddof=1)) if len(done) > 1 else 0.0
        half = 1.96 * std / math.sqrt(len(done))
    else:
        mean = std = half = math.nan
    return Summary(scheme, len(results), len(done), len(results) - len(done), mean, std,
                   (mean - half, mean + half), float(np.mean(slots)) if slots else math.nan,
                   totals)


def paired_difference_ci(a: Sequence[float], b: Sequence[float]) -> tuple:
    """Mean and 95% normal CI of b - a over iterations where both completed."""
    d = np.array([y - x for x, y in zip(a, b) if not (math.isnan(x) or math.isnan(y))])
    if len(d) == 0:
        return math.nan, (math.nan, math.nan)
    mean = float(d.mean())
    half = 1.96 * float(d.std(ddof=1)) / math.sqrt(len(d)) if len(d) > 1 else 0.0
    return mean, (mean - half, mean + half)


def _episode(args):
    config, scheme, seed = args
    inst, side = generate_scenario(config, seed)
    return run_episode(inst, side, scheme, seed, check=False, config=config)


def monte_carlo(config: ScenarioConfig, schemes: Sequence[str], iterations: int,
                base_seed: int = 0, threads: int = 1, keep_episodes: bool = False) -> dict:
    """{scheme: Summary}; iteration i of every scheme uses seed base_seed + i."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    out = {}
    for scheme in schemes:
        jobs = [(config, scheme, base_seed + i) for i in range(iterations)]
        if threads > 1:
            with ThreadPoolExecutor(threads) as pool:
                results = list(pool.map(_episode, jobs))
        else:
            results = [_episode(j) for j in jobs]
        out[scheme] = summarize(scheme, results)
        if keep_episodes:
            for r in results:
                r.slots = []
            out[scheme].episodes = results
    return out
