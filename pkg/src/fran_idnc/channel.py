"""Path loss, fading, SINR and achievable rates."""

from __future__ import annotations

from dataclasses import replace
from typing import Iterable, Optional

import numpy as np

from .model import NetworkInstance


def path_loss_db(distance_km, min_distance_km: float = 1e-3):
    """148 + 40 log10(d[km]); distances below ``min_distance_km`` are clamped."""
    d = np.maximum(np.asarray(distance_km, dtype=float), min_distance_km)
    out = 148.0 + 40.0 * np.log10(d)
    return float(out) if out.ndim == 0 else out


def path_gains(errh_positions: np.ndarray, user_positions: np.ndarray,
               min_distance_m: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Linear mean gains: N x K (eRRH -> user) and N x N (user -> user)."""
    d_e = np.linalg.norm(user_positions[:, None, :] - errh_positions[None, :, :], axis=-1)
    d_u = np.linalg.norm(user_positions[:, None, :] - user_positions[None, :, :], axis=-1)
    min_km = min_distance_m / 1000.0
    g_e = 10.0 ** (-path_loss_db(d_e / 1000.0, min_km) / 10.0)
    g_u = 10.0 ** (-path_loss_db(d_u / 1000.0, min_km) / 10.0)
    np.fill_diagonal(g_u, 0.0)
    return g_e, g_u


def draw_gains(instance: NetworkInstance, rng: np.random.Generator) -> NetworkInstance:
    """New slot: path gain times unit-mean exponential fading (Rayleigh)."""
    if instance.fixed or not instance.fading:
        return instance
    n, k = instance.errh_pathgain.shape
    chi_e = rng.exponential(1.0, size=(n, k))
    chi_u = rng.exponential(1.0, size=(n, n))
    return replace(instance, errh_gains=instance.errh_pathgain * chi_e,
                   d2d_gains=instance.d2d_pathgain * chi_u)


# ------------------------------------------------------------------ eRRH links

def errh_sinr_matrix(powers, gains: np.ndarray, noise: float) -> np.ndarray:
    """N x K SINR of every user from every eRRH, all eRRHs transmitting at
    ``powers``. An eRRH at zero power has SINR 0 and adds no interference."""
    p = np.asarray(powers, dtype=float)
    rx = gains * p[None, :]
    total = rx.sum(axis=1, keepdims=True)
    return rx / (noise + total - rx)


def errh_rate(powers, gains: np.ndarray, errh: int, user: int, noise: float,
              bandwidth: float = 1.0) -> float:
    p = np.asarray(powers, dtype=float)
    signal = p[errh] * gains[user, errh]
    interference = float(np.dot(p, gains[user])) - signal
    return bandwidth * float(np.log2(1.0 + signal / (noise + interference)))


def errh_capacities(instance: NetworkInstance, powers) -> np.ndarray:
    """N x K achievable rates (bits/s) at the given eRRH powers."""
    p = np.asarray(powers, dtype=float)
    if instance.fixed:
        return instance.fixed_errh_capacity * (p > 0)[None, :]
    sinr = errh_sinr_matrix(p, instance.errh_gains, instance.noise_power)
    return instance.bandwidth * np.log2(1.0 + sinr)


def interference_free_capacities(instance: NetworkInstance) -> np.ndarray:
    """N x K rates when each eRRH transmits alone at full power."""
    if instance.fixed:
        return instance.fixed_errh_capacity.copy()
    snr = instance.errh_max_power * instance.errh_gains / instance.noise_power
    return instance.bandwidth * np.log2(1.0 + snr)


def full_power(instance: NetworkInstance) -> np.ndarray:
    return np.full(instance.num_errhs, instance.errh_max_power)


# ------------------------------------------------------------------- D2D links

def d2d_rate(active_transmitters: Iterable[int], gains: np.ndarray, transmitter: int,
             receiver: int, user_power: float, noise: float, zones,
             bandwidth: float = 1.0) -> float:
    if receiver not in zones[transmitter] or receiver == transmitter:
        return 0.0
    interference = sum(user_power * gains[k, receiver]
                       for k in active_transmitters if k != transmitter)
    snr = user_power * gains[transmitter, receiver] / (noise + interference)
    return bandwidth * float(np.log2(1.0 + snr))


def zone_mask(instance: NetworkInstance) -> np.ndarray:
    n = instance.num_users
    m = np.zeros((n, n), dtype=bool)
    for k, z in enumerate(instance.zones):
        for i in z:
            m[k, i] = True
    np.fill_diagonal(m, False)
    return m


def build_csm(instance: NetworkInstance,
              active_transmitters: Optional[Iterable[int]] = None) -> np.ndarray:
    """Capacity status matrix r[k, i] (bits/s).

    With ``active_transmitters=None`` every link is evaluated interference
    free; otherwise the interference of all listed transmitters (other than
    the row's own) is included.
    """
    mask = zone_mask(instance)
    if instance.fixed:
        return instance.fixed_d2d_capacity * mask
    q, n0 = instance.user_power, instance.noise_power
    g = instance.d2d_gains
    if active_transmitters is None:
        interference = np.zeros((1, instance.num_users))
        sinr = q * g / (n0 + interference)
    else:
        act = np.zeros(instance.num_users)
        act[list(active_transmitters)] = 1.0
        total = (q * g * act[:, None]).sum(axis=0)            # per receiver
        own = q * g * act[:, None]                             # row k's own share
        sinr = q * g / (n0 + total[None, :] - own)
    r = instance.bandwidth * np.log2(1.0 + sinr)
    return r * mask
