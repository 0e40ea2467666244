"""Instantly decodable XOR combinations over the users' side information."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional, Sequence

from .model import SideState


@dataclass(frozen=True)
class Combination:
    files: frozenset
    source: int
    from_errh: bool = True


def is_instantly_decodable(files: Iterable[int], user: int, side: SideState) -> bool:
    files = frozenset(files)
    wanted = files & side.wants[user]
    return len(wanted) == 1 and (files - wanted) <= side.has[user]


def decoded_file(files: Iterable[int], user: int, side: SideState) -> Optional[int]:
    files = frozenset(files)
    if not is_instantly_decodable(files, user, side):
        return None
    (f,) = files & side.wants[user]
    return f


def xor_decode(received: int, files: Iterable[int], has_payloads: dict) -> int:
    """Recover the one unknown payload: XOR the received word with every
    known payload of the combination."""
    out = received
    for f in files:
        if f in has_payloads:
            out ^= has_payloads[f]
    return out


def targeted_users(files: Iterable[int], adopted_rate: float, capacities: Sequence[float],
                   side: SideState, candidates: Optional[Iterable[int]] = None) -> set:
    """Users with non-empty Wants that decode ``files`` and whose capacity from
    the source is at least ``adopted_rate``. ``candidates`` restricts the pool
    (the transmitter's coverage zone for D2D)."""
    files = frozenset(files)
    pool = range(side.num_users) if candidates is None else candidates
    return {u for u in pool
            if side.wants[u] and capacities[u] >= adopted_rate
            and is_instantly_decodable(files, u, side)}


def to_mask(files: Iterable[int]) -> int:
    m = 0
    for f in files:
        m |= 1 << f
    return m


def from_mask(mask: int) -> frozenset:
    out = []
    f = 0
    while mask:
        if mask & 1:
            out.append(f)
        mask >>= 1
        f += 1
    return frozenset(out)


def enumerate_idnc_combinations(source_files: Iterable[int], side: SideState,
                                max_size: int, users: Optional[Iterable[int]] = None) -> list:
    """Every file subset of ``source_files`` (size <= ``max_size``) in which each
    file is the single wanted file of at least one user holding all the others.

    Such subsets are exactly the file sets of cliques in the association
    compatibility graph. Invalidity is inherited by supersets (adding a file
    can only remove witnesses), so the depth-first search prunes there.
    Returned as frozensets, ordered by the search.
    """
    pool = [u for u in (range(side.num_users) if users is None else users) if side.wants[u]]
    src = sorted(set(source_files))
    want = [to_mask(side.wants[u]) for u in pool]
    # files that some user in the pool wants at all
    wanted_any = 0
    for w in want:
        wanted_any |= w
    src = [f for f in src if wanted_any >> f & 1]
    out: list = []

    def valid(mask: int) -> bool:
        covered = 0
        for w in want:
            x = w & mask
            if x and x & (x - 1) == 0:
                covered |= x
        return covered == mask

    def dfs(start: int, mask: int, size: int) -> None:
        for j in range(start, len(src)):
            m = mask | (1 << src[j])
            if not valid(m):
                continue
            out.append(from_mask(m))
            if size + 1 < max_size:
                dfs(j + 1, m, size + 1)

    dfs(0, 0, 0)
    return out


def brute_force_combinations(source_files: Iterable[int], side: SideState,
                             max_size: Optional[int] = None) -> set:
    """Exhaustive reference: all subsets whose every file is decoded by some
    wanting user."""
    src = sorted(set(source_files))
    wanting = side.wanting_users()
    limit = len(src) if max_size is None else max_size
    found = set()
    for k in range(1, limit + 1):
        for subset in combinations(src, k):
            s = frozenset(subset)
            decoded = {decoded_file(s, u, side) for u in wanting}
            if s <= decoded:
                found.add(s)
    return found
