"""Local eRRH power allocation for a fixed user-to-eRRH schedule.

Objective: sum over scheduled eRRHs of |targeted| / B times the minimum
log2(1 + SINR) over that eRRH's targeted users. It is non-convex and
non-smooth (min of logs), so the search is derivative-free: a few starting
points, then cyclic coordinate ascent with a grid scan plus successively
finer local grids per coordinate.
"""

from __future__ import annotations

import itertools
from typing import Mapping, Sequence

import numpy as np

GRID_POINTS = 33
ZOOMS = 4


class _Objective:
    """Batched evaluator for one schedule."""

    def __init__(self, schedule: Mapping[int, Sequence[int]], gains: np.ndarray,
                 noise: float, file_size: float):
        self.errhs = sorted(e for e, users in schedule.items() if len(users))
        self.blocks = []
        for e in self.errhs:
            users = np.asarray(sorted(schedule[e]), dtype=int)
            self.blocks.append((e, gains[users], len(users) / file_size))
        self.noise = noise

    def __call__(self, p: np.ndarray) -> np.ndarray:
        """Objective for each row of ``p`` (M x K)."""
        p = np.atleast_2d(p)
        out = np.zeros(p.shape[0])
        for e, g, w in self.blocks:
            total = p @ g.T                                  # M x U received power
            signal = p[:, [e]] * g[:, e][None, :]
            sinr = signal / (self.noise + total - signal)
            out += w * np.log2(1.0 + sinr).min(axis=1)
        return out


def power_objective(powers, schedule: Mapping[int, Sequence[int]], gains: np.ndarray,
                    noise: float, file_size: float = 1.0) -> float:
    """Weighted sum of per-eRRH bottleneck spectral efficiencies."""
    return float(_Objective(schedule, gains, noise, file_size)(np.asarray(powers, float))[0])


def _coordinate_ascent(f: _Objective, p: np.ndarray, p_max: float, tol: float,
                       max_sweeps: int, zooms: int = ZOOMS) -> tuple[np.ndarray, float, int]:
    p = p.copy()
    best = float(f(p)[0])
    grid = np.linspace(0.0, p_max, GRID_POINTS)
    step = grid[1] - grid[0]
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        start = best
        for e in f.errhs:
            trial = np.repeat(p[None, :], GRID_POINTS + 1, axis=0)
            trial[:GRID_POINTS, e] = grid
            vals = f(trial)
            j = int(np.argmax(vals))
            if vals[j] > best:
                p, best = trial[j].copy(), float(vals[j])
            # zoom in around the current coordinate with finer grids
            width = step
            for _ in range(zooms):
                local = np.linspace(max(0.0, p[e] - width), min(p_max, p[e] + width),
                                    GRID_POINTS)
                trial = np.repeat(p[None, :], GRID_POINTS, axis=0)
                trial[:, e] = local
                vals = f(trial)
                j = int(np.argmax(vals))
                if vals[j] > best:
                    p, best = trial[j].copy(), float(vals[j])
                width = 2.0 * width / (GRID_POINTS - 1)
        if best - start <= tol * max(abs(start), 1e-300):
            break
    return p, best, sweeps


def optimize_powers(schedule: Mapping[int, Sequence[int]], gains: np.ndarray, p_max: float,
                    noise: float, file_size: float = 1.0, tol: float = 1e-6,
                    max_sweeps: int = 50, quick: bool = False) -> tuple[np.ndarray, float]:
    """Power vector (W) and objective for ``schedule`` {eRRH: users}.

    eRRHs without users are pinned to zero power. The result is never worse
    than every scheduled eRRH at ``p_max``. ``quick`` trades accuracy for
    speed (one start, at most three sweeps, coarser refinement), for scoring
    many candidate schedules.
    """
    num_errhs = gains.shape[1]
    f = _Objective(schedule, gains, noise, file_size)
    if not f.errhs:
        return np.zeros(num_errhs), 0.0
    uniform = np.zeros(num_errhs)
    uniform[f.errhs] = p_max
    if len(f.errhs) == 1:
        # no interference: the objective is increasing in the own power
        return uniform, float(f(uniform)[0])

    if quick:
        p, v, _ = _coordinate_ascent(f, uniform, p_max, tol, min(max_sweeps, 3), zooms=1)
        return np.clip(p, 0.0, p_max), v

    # starting points: a coarse lattice over the scheduled coordinates
    levels = np.linspace(0.0, p_max, 5)
    lattice = np.zeros((len(levels) ** len(f.errhs), num_errhs))
    for row, combo in enumerate(itertools.product(levels, repeat=len(f.errhs))):
        lattice[row, f.errhs] = combo
    vals = f(lattice)
    starts = [uniform]
    j = int(np.argmax(vals))
    if not np.array_equal(lattice[j], uniform):
        starts.append(lattice[j])

    best_p, best_v = uniform, float(f(uniform)[0])
    for s in starts:
        p, v, _ = _coordinate_ascent(f, s, p_max, tol, max_sweeps)
        if v > best_v:
            best_p, best_v = p, v
    return np.clip(best_p, 0.0, p_max), best_v
