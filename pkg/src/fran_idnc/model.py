"""Scenario and side-information state for a D2D-aided fog RAN.

Users, files and eRRHs are indexed from 0. File sets are frozensets of
file indices; rates are bits/s over the configured bandwidth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np


@dataclass
class ScenarioConfig:
    """Scalar parameters of a randomly generated scenario.

    Power and noise levels are spectral densities (dBm/Hz) and the rate
    threshold is a spectral efficiency (bits/s/Hz); both are converted to
    absolute units over ``bandwidth_hz`` when an instance is built.
    """

    num_errhs: int = 3
    num_users: int = 12
    num_files: int = 15
    file_size_bits: float = 1e6
    cache_ratio: float = 0.6
    rate_threshold: float = 0.05
    errh_power_dbm_hz: float = -42.60
    user_power_dbm_hz: float = -42.60
    noise_dbm_hz: float = -174.0
    bandwidth_hz: float = 1e6
    cell_radius_m: float = 900.0
    coverage_radius_m: float = 50.0
    errh_positions: Optional[Sequence[Sequence[float]]] = None
    has_fraction: tuple[float, float] = (0.45, 0.55)
    fading: bool = True
    min_distance_m: float = 1.0
    redraw_positions_per_slot: bool = False
    max_combination_size: int = 4

    def validate(self) -> None:
        for name in ("num_errhs", "num_users", "num_files", "file_size_bits",
                     "bandwidth_hz", "cell_radius_m", "coverage_radius_m",
                     "max_combination_size"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0.0 <= self.cache_ratio <= 1.0:
            raise ValueError(f"cache_ratio must lie in [0, 1], got {self.cache_ratio}")
        if self.rate_threshold < 0:
            raise ValueError("rate_threshold must be non-negative")
        size = cache_size(self.cache_ratio, self.num_files)
        if size < 1:
            raise ValueError("cache_ratio * num_files must be at least 1")
        if size * self.num_errhs < self.num_files:
            raise ValueError(
                f"caches of {size} files on {self.num_errhs} eRRHs cannot cover "
                f"{self.num_files} files")
        lo, hi = self.has_fraction
        if not 0.0 <= lo <= hi <= 1.0:
            raise ValueError(f"bad has_fraction {self.has_fraction}")


def cache_size(ratio: float, num_files: int) -> int:
    # round-half-up; Python's round() is banker's rounding
    return int(math.floor(ratio * num_files + 0.5))


def dbm_per_hz_to_watts(dbm_hz: float, bandwidth_hz: float) -> float:
    return 10.0 ** ((dbm_hz - 30.0) / 10.0) * bandwidth_hz


@dataclass(frozen=True)
class NetworkInstance:
    """Static scenario. Gains are |h|^2 (linear); rates are bits/s.

    When ``fixed_errh_capacity`` / ``fixed_d2d_capacity`` are set the channel
    model is bypassed and those matrices are used verbatim (replay scenarios).
    """

    num_errhs: int
    num_users: int
    num_files: int
    file_size: float
    cache_ratio: float
    rate_threshold: float
    errh_max_power: float
    user_power: float
    noise_power: float
    bandwidth: float
    cell_radius: float
    coverage_radius: float
    errh_positions: np.ndarray
    user_positions: np.ndarray
    caches: tuple[frozenset, ...]
    zones: tuple[frozenset, ...]
    errh_pathgain: np.ndarray      # N x K mean gains (path loss only)
    d2d_pathgain: np.ndarray       # N x N
    errh_gains: np.ndarray         # N x K gains for the current slot
    d2d_gains: np.ndarray          # N x N, [k, i] = transmitter k -> receiver i
    fading: bool = False
    max_combination_size: int = 4
    fixed_errh_capacity: Optional[np.ndarray] = None   # N x K bits/s
    fixed_d2d_capacity: Optional[np.ndarray] = None    # N x N bits/s
    name: str = ""

    @property
    def fixed(self) -> bool:
        return self.fixed_errh_capacity is not None

    @property
    def files(self) -> frozenset:
        return frozenset(range(self.num_files))


@dataclass
class SideState:
    """Per-user Has/Wants sets plus the completion-time accumulators."""

    has: list
    wants: list
    initial_wants_size: list
    delay: list
    inv_rate_sum: list
    recv_count: list

    @classmethod
    def from_has(cls, has_sets: Sequence[Iterable[int]], num_files: int) -> "SideState":
        frame = frozenset(range(num_files))
        has = [frozenset(h) for h in has_sets]
        for h in has:
            if not h <= frame:
                raise ValueError(f"Has set {sorted(h)} outside frame of {num_files} files")
        wants = [frame - h for h in has]
        n = len(has)
        return cls(has=has, wants=wants,
                   initial_wants_size=[len(w) for w in wants],
                   delay=[0.0] * n, inv_rate_sum=[0.0] * n, recv_count=[0] * n)

    @property
    def num_users(self) -> int:
        return len(self.has)

    def wanting_users(self) -> list:
        return [u for u, w in enumerate(self.wants) if w]

    def complete(self) -> bool:
        return not any(self.wants)

    def copy(self) -> "SideState":
        return SideState(list(self.has), list(self.wants), list(self.initial_wants_size),
                         list(self.delay), list(self.inv_rate_sum), list(self.recv_count))


@dataclass(frozen=True)
class Delivery:
    user: int
    file: int
    rate: float


def apply_deliveries(state: SideState, delivered: Iterable[Delivery], t_max: float,
                     idle_or_unserved: Iterable[int]) -> SideState:
    """Move delivered files from Wants to Has and charge ``t_max`` of delay to
    every unserved user that still wants something."""
    new = state.copy()
    for d in delivered:
        if d.file in new.has[d.user]:
            raise AssertionError(f"user {d.user} already has file {d.file}")
        if d.file not in new.wants[d.user]:
            raise AssertionError(f"user {d.user} does not want file {d.file}")
        if not d.rate > 0:
            raise AssertionError(f"non-positive delivery rate {d.rate}")
        new.has[d.user] = new.has[d.user] | {d.file}
        new.wants[d.user] = new.wants[d.user] - {d.file}
        new.recv_count[d.user] += 1
        new.inv_rate_sum[d.user] += 1.0 / d.rate
    for u in set(idle_or_unserved):
        # the Wants test uses the state at slot start
        if state.wants[u]:
            new.delay[u] += t_max
    return new


def harmonic_rate(state: SideState, user: int) -> float:
    if state.recv_count[user] == 0:
        return 0.0
    return state.recv_count[user] / state.inv_rate_sum[user]


def anticipated_completion(state: SideState, user: int, file_size: float) -> float:
    """B * |W_0| / harmonic-mean rate + accumulated delay.

    Returns ``math.inf`` when the user still wants files but has not received
    any instantly decodable transmission yet.
    """
    if state.recv_count[user] == 0:
        if state.wants[user] or state.initial_wants_size[user]:
            return math.inf
        return state.delay[user]
    r = harmonic_rate(state, user)
    return file_size * state.initial_wants_size[user] / r + state.delay[user]


# ---------------------------------------------------------------- generation

def default_errh_positions(num_errhs: int, cell_radius: float) -> np.ndarray:
    """First eRRH at the cell centre, the others evenly spaced on a ring of
    radius ``cell_radius / 2``."""
    pos = np.zeros((num_errhs, 2))
    ring = num_errhs - 1
    for j in range(ring):
        a = 2.0 * math.pi * j / ring
        pos[j + 1] = (0.5 * cell_radius * math.cos(a), 0.5 * cell_radius * math.sin(a))
    return pos


def in_hexagon(points: np.ndarray, radius: float) -> np.ndarray:
    """Pointy-top regular hexagon of circumradius ``radius`` centred at 0."""
    x = np.abs(points[:, 0])
    y = np.abs(points[:, 1])
    half_w = radius * math.sqrt(3.0) / 2.0
    return (x <= half_w) & (y <= radius - x / math.sqrt(3.0))


def sample_hexagon(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    out = np.empty((0, 2))
    half_w = radius * math.sqrt(3.0) / 2.0
    while len(out) < n:
        cand = np.column_stack([rng.uniform(-half_w, half_w, 2 * n),
                                rng.uniform(-radius, radius, 2 * n)])
        out = np.vstack([out, cand[in_hexagon(cand, radius)]])
    return out[:n]


def generate_caches(rng: np.random.Generator, num_errhs: int, num_files: int,
                    size: int) -> tuple:
    if size * num_errhs < num_files:
        raise ValueError("caches cannot cover the frame")
    order = rng.permutation(num_files)
    caches = [set() for _ in range(num_errhs)]
    for j, f in enumerate(order):
        caches[j % num_errhs].add(int(f))
    for c in caches:
        rest = [f for f in range(num_files) if f not in c]
        extra = rng.choice(rest, size=size - len(c), replace=False) if size > len(c) else []
        c.update(int(f) for f in extra)
    return tuple(frozenset(c) for c in caches)


def generate_has_sets(rng: np.random.Generator, num_users: int, num_files: int,
                      fraction: tuple[float, float]) -> list:
    lo = math.ceil(fraction[0] * num_files - 1e-9)
    hi = math.floor(fraction[1] * num_files + 1e-9)
    hi = max(hi, lo)
    sets = []
    for _ in range(num_users):
        k = int(rng.integers(lo, hi + 1))
        sets.append(frozenset(int(f) for f in rng.choice(num_files, size=k, replace=False)))
    return sets


def coverage_zones(user_positions: np.ndarray, radius: float) -> tuple:
    d = np.linalg.norm(user_positions[:, None, :] - user_positions[None, :, :], axis=-1)
    n = len(user_positions)
    return tuple(frozenset(j for j in range(n) if j != i and d[i, j] <= radius)
                 for i in range(n))


def instance_from_positions(config: ScenarioConfig, errh_positions: np.ndarray,
                            user_positions: np.ndarray, caches: tuple) -> NetworkInstance:
    from . import channel

    errh_pg, d2d_pg = channel.path_gains(errh_positions, user_positions,
                                         config.min_distance_m)
    bw = config.bandwidth_hz
    return NetworkInstance(
        num_errhs=config.num_errhs, num_users=config.num_users,
        num_files=config.num_files, file_size=float(config.file_size_bits),
        cache_ratio=config.cache_ratio,
        rate_threshold=config.rate_threshold * bw,
        errh_max_power=dbm_per_hz_to_watts(config.errh_power_dbm_hz, bw),
        user_power=dbm_per_hz_to_watts(config.user_power_dbm_hz, bw),
        noise_power=dbm_per_hz_to_watts(config.noise_dbm_hz, bw),
        bandwidth=bw, cell_radius=config.cell_radius_m,
        coverage_radius=config.coverage_radius_m,
        errh_positions=errh_positions, user_positions=user_positions,
        caches=caches,
        zones=coverage_zones(user_positions, config.coverage_radius_m),
        errh_pathgain=errh_pg, d2d_pathgain=d2d_pg,
        errh_gains=errh_pg.copy(), d2d_gains=d2d_pg.copy(),
        fading=config.fading, max_combination_size=config.max_combination_size,
    )


def generate_scenario(config: ScenarioConfig, seed) -> tuple[NetworkInstance, SideState]:
    """Random scenario: users uniform in the hexagonal cell, random caches
    covering the frame, and Has sets of roughly half the frame."""
    config.validate()
    rng = np.random.default_rng(seed)
    if config.errh_positions is not None:
        errh_pos = np.asarray(config.errh_positions, dtype=float).reshape(config.num_errhs, 2)
    else:
        errh_pos = default_errh_positions(config.num_errhs, config.cell_radius_m)
    user_pos = sample_hexagon(rng, config.num_users, config.cell_radius_m)
    caches = generate_caches(rng, config.num_errhs, config.num_files,
                             cache_size(config.cache_ratio, config.num_files))
    has = generate_has_sets(rng, config.num_users, config.num_files, config.has_fraction)
    inst = instance_from_positions(config, errh_pos, user_pos, caches)
    return inst, SideState.from_has(has, config.num_files)


def redraw_user_positions(instance: NetworkInstance, config: ScenarioConfig,
                          rng: np.random.Generator) -> NetworkInstance:
    user_pos = sample_hexagon(rng, instance.num_users, instance.cell_radius)
    fresh = instance_from_positions(config, instance.errh_positions, user_pos, instance.caches)
    return replace(fresh, rate_threshold=instance.rate_threshold,
                   file_size=instance.file_size)


def fixed_instance(*, caches: Sequence[Iterable[int]], errh_capacity, d2d_capacity,
                   num_files: int, file_size: float, rate_threshold: float = 0.0,
                   errh_max_power: float = 1.0, user_power: float = 1.0,
                   bandwidth: float = 1.0, max_combination_size: int = 4,
                   zones: Optional[Sequence[Iterable[int]]] = None,
                   name: str = "") -> NetworkInstance:
    """Instance whose capacities are given directly (bits/s), bypassing the
    channel model. Coverage zones default to the non-zero pattern of the
    D2D capacity matrix."""
    ec = np.asarray(errh_capacity, dtype=float)
    dc = np.asarray(d2d_capacity, dtype=float).copy()
    n, k = ec.shape
    if dc.shape != (n, n):
        raise ValueError(f"d2d capacity must be {n}x{n}, got {dc.shape}")
    np.fill_diagonal(dc, 0.0)
    if zones is None:
        zone_sets = tuple(frozenset(int(j) for j in np.flatnonzero(dc[i] > 0)) for i in range(n))
    else:
        zone_sets = tuple(frozenset(z) for z in zones)
        for i in range(n):
            for j in range(n):
                if j not in zone_sets[i]:
                    dc[i, j] = 0.0
    cache_sets = tuple(frozenset(c) for c in caches)
    if len(cache_sets) != k:
        raise ValueError(f"{len(cache_sets)} caches for {k} eRRHs")
    return NetworkInstance(
        num_errhs=k, num_users=n, num_files=num_files, file_size=float(file_size),
        cache_ratio=max(len(c) for c in cache_sets) / num_files,
        rate_threshold=float(rate_threshold), errh_max_power=errh_max_power,
        user_power=user_power, noise_power=1.0, bandwidth=bandwidth,
        cell_radius=0.0, coverage_radius=0.0,
        errh_positions=np.zeros((k, 2)), user_positions=np.zeros((n, 2)),
        caches=cache_sets, zones=zone_sets,
        errh_pathgain=np.ones((n, k)), d2d_pathgain=np.ones((n, n)),
        errh_gains=np.ones((n, k)), d2d_gains=np.ones((n, n)),
        fading=False, max_combination_size=max_combination_size,
        fixed_errh_capacity=ec, fixed_d2d_capacity=dc, name=name,
    )
