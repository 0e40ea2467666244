import numpy as np
from hypothesis import given, settings, strategies as st

from fran_idnc.model import SideState
from fran_idnc.nc import (brute_force_combinations, decoded_file, enumerate_idnc_combinations,
                          is_instantly_decodable, targeted_users, xor_decode)

# Example labels: f1..f4 -> 0..3, u1..u6 -> 0..5
EXAMPLE_HAS = [{0, 1, 2, 3}, {0, 3}, {0, 1, 2}, {0, 1, 2}, {0, 1}, {2, 3}]


def example_side():
    return SideState.from_has(EXAMPLE_HAS, 4)


def test_decodability_examples():
    side = example_side()
    assert decoded_file({0, 3}, 5, side) == 0            # f1+f4 gives u6 f1
    assert is_instantly_decodable({3}, 2, side)
    assert not is_instantly_decodable({1, 2}, 1, side)   # u2 wants both


def test_targeted_users_example():
    side = example_side()
    caps_e2 = [5, 5, 5, 1, 2.5, 2.5]
    assert targeted_users({2, 3}, 5, caps_e2, side) == {1, 2}
    assert targeted_users({2, 3}, 99, caps_e2, side) == set()


def test_singleton_serves_every_zone_member_wanting_it():
    side = SideState.from_has([set(), {1}, {0}], 2)
    assert targeted_users({0}, 0.0, [1, 1, 1], side, candidates=[0, 1]) == {0, 1}


def test_example_errh2_combination_is_enumerated():
    combos = enumerate_idnc_combinations({1, 2, 3}, example_side(), 4)
    assert frozenset({2, 3}) in combos


def test_xor_decode_recovers_payload():
    rng = np.random.default_rng(0)
    payload = {f: int(rng.integers(1 << 30)) for f in range(4)}
    word = payload[0] ^ payload[3]
    assert xor_decode(word, {0, 3}, {3: payload[3]}) == payload[0]


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 5), st.integers(2, 6), st.integers(0, 2 ** 32 - 1))
def test_enumeration_matches_brute_force(n, f, seed):
    rng = np.random.default_rng(seed)
    has = [set(np.flatnonzero(rng.random(f) < 0.5).tolist()) for _ in range(n)]
    side = SideState.from_has(has, f)
    cache = set(np.flatnonzero(rng.random(f) < 0.7).tolist())
    for size in (1, 2, f):
        got = enumerate_idnc_combinations(cache, side, size)
        assert len(got) == len(set(got))
        assert set(got) == brute_force_combinations(cache, side, size)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_every_combination_decodes_by_xor(seed):
    rng = np.random.default_rng(seed)
    f = 5
    has = [set(np.flatnonzero(rng.random(f) < 0.5).tolist()) for _ in range(4)]
    side = SideState.from_has(has, f)
    payload = {x: int(rng.integers(1 << 30)) for x in range(f)}
    for combo in enumerate_idnc_combinations(range(f), side, f):
        word = 0
        for x in combo:
            word ^= payload[x]
        for u in range(4):
            got = decoded_file(combo, u, side)
            if got is not None:
                known = {x: payload[x] for x in side.has[u]}
                assert xor_decode(word, combo, known) == payload[got]
