import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fran_idnc import channel
from fran_idnc.graphs import is_independent_set, is_maximal_clique
from fran_idnc.model import ScenarioConfig, SideState, fixed_instance, generate_scenario
from fran_idnc.scenario import bundled, load_fixed
from fran_idnc.schedulers import (SCHEMES, ConstraintViolation, StallError, TransmissionPlan,
                                  build_ia_idnc_graph, check_decision, classical_idnc_schedule,
                                  coordinated_schedule, joint_schedule, make_scheduler,
                                  ra_idnc_schedule, uncoded_unicast_schedule)
from fran_idnc.schedulers.d2d import D2DVertex, cc_conflict
from fran_idnc.sim import run_episode
from oracles import optimal_completion_time, random_tiny_instance


@pytest.fixture
def example():
    return load_fixed(bundled("example1.yaml"))


def test_example_joint_slots(example):
    res = run_episode(example.instance, example.side, "joint", seed=0)
    assert [s.t_max for s in res.slots] == [4.0, 4.0]
    first = res.slots[0].decision
    assert {p.rate for p in first.errh_plans.values()} == {2.5, 5.0}


def test_ia_idnc_graph_has_four_user_clique(example):
    inst, side = example.instance, example.side
    g = build_ia_idnc_graph(inst, side, channel.errh_capacities(inst, channel.full_power(inst)))
    found = False
    for a in range(len(g)):
        for b in g.neighbors(a):
            if len(g.payloads[a].targets) + len(g.payloads[b].targets) == 4:
                found = found or is_maximal_clique(g, [a, b])
    assert found


def test_single_file_single_errh_vertices():
    inst = fixed_instance(caches=[{0}], errh_capacity=[[1.0], [2.0]], d2d_capacity=np.zeros((2, 2)),
                          num_files=1, file_size=1.0)
    side = SideState.from_has([set(), set()], 1)
    g = build_ia_idnc_graph(inst, side, inst.fixed_errh_capacity)
    assert sorted((v.rate, v.users) for v in g.payloads) == [(1.0, [0, 1]), (2.0, [1])]


def test_d2d_example_is_independent(example):
    side = example.side
    vs = [D2DVertex(0, 5.0, 3, 3), D2DVertex(0, 5.0, 4, 3), D2DVertex(2, 1.5, 1, 1)]
    assert not any(cc_conflict(a, b, side) for a in vs for b in vs if a is not b)


def test_same_link_different_rates_conflict(example):
    side = example.side
    assert cc_conflict(D2DVertex(0, 5.0, 4, 3), D2DVertex(0, 2.0, 4, 3), side)


def test_all_complete_needs_no_plans(example):
    side = SideState.from_has([set(range(4))] * 6, 4)
    for scheme in SCHEMES:
        d = make_scheduler(scheme)(example.instance, side, np.random.default_rng(0))
        assert d.empty()


def test_unknown_scheme():
    with pytest.raises(ValueError):
        make_scheduler("nope")


def test_ra_idnc_common_rate():
    inst = fixed_instance(caches=[{0}, {1}], errh_capacity=[[5, 0], [0, 2.5], [0, 2.5]],
                          d2d_capacity=np.zeros((3, 3)), num_files=2, file_size=10.0)
    side = SideState.from_has([{1}, {0}, {0}], 2)
    d = ra_idnc_schedule(inst, side, np.random.default_rng(0))
    assert {p.rate for p in d.errh_plans.values()} == {2.5}
    assert len(d.errh_plans) == 2


def test_classical_idnc_rate_is_slowest_target(example):
    d = classical_idnc_schedule(example.instance, example.side, np.random.default_rng(0))
    caps = example.instance.fixed_errh_capacity
    for e, p in d.errh_plans.items():
        assert p.rate == min(caps[u, e] for u in p.users)


def test_unicast_one_user_per_errh():
    inst, side = generate_scenario(ScenarioConfig(num_users=10), 4)
    d = uncoded_unicast_schedule(inst, side, np.random.default_rng(0))
    assert len(d.errh_plans) == 3
    assert all(len(p.targets) == 1 for p in d.errh_plans.values())


def test_coordinated_prefers_d2d_for_weak_users():
    inst = fixed_instance(caches=[{0}], errh_capacity=[[5.0], [0.01], [5.0]],
                          d2d_capacity=[[0, 5, 0], [0, 0, 0], [0, 0, 0]], num_files=1,
                          file_size=10.0)
    side = SideState.from_has([{0}, set(), set()], 1)
    d = coordinated_schedule(inst, side, np.random.default_rng(0))
    assert any(1 in p.users for p in d.d2d_plans)
    assert 2 in d.errh_plans[0].users


def test_coordinated_without_d2d_is_pure_errh(example):
    inst = dataclasses.replace(example.instance,
                               fixed_d2d_capacity=np.zeros((6, 6)),
                               zones=tuple(frozenset() for _ in range(6)))
    d = coordinated_schedule(inst, example.side, np.random.default_rng(0))
    assert not d.d2d_plans and d.errh_plans


def test_stall_on_unreachable_users():
    inst = fixed_instance(caches=[{0}], errh_capacity=[[0.5]], d2d_capacity=np.zeros((1, 1)),
                          num_files=1, file_size=10.0, rate_threshold=1.0)
    side = SideState.from_has([set()], 1)
    with pytest.raises(StallError):
        joint_schedule(inst, side)


def test_checker_catches_rate_above_capacity(example):
    d = joint_schedule(example.instance, example.side, np.random.default_rng(0))
    e, plan = next(iter(d.errh_plans.items()))
    d.errh_plans[e] = dataclasses.replace(plan, rate=plan.rate * 10, duration=plan.duration / 10)
    with pytest.raises(ConstraintViolation):
        check_decision(d, example.instance, example.side)


def test_checker_catches_half_duplex(example):
    d = joint_schedule(example.instance, example.side, np.random.default_rng(0))
    plan = d.d2d_plans[0]
    victim = next(iter(plan.users))
    bad = TransmissionPlan(source=victim, from_errh=False, files=frozenset(), rate=plan.rate,
                           targets=(), duration=plan.duration)
    d.d2d_plans.append(bad)
    with pytest.raises(ConstraintViolation):
        check_decision(d, example.instance, example.side)


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_proposed_schemes_not_below_optimum(seed):
    inst, side = random_tiny_instance(np.random.default_rng(seed), max_users=3, max_files=3)
    opt = optimal_completion_time(inst, side)
    for scheme in ("joint", "coordinated"):
        assert run_episode(inst, side, scheme, seed).total_time >= opt * (1 - 1e-9)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from(SCHEMES))
def test_every_scheme_passes_checker(seed, scheme):
    cfg = ScenarioConfig(num_users=8, num_files=8)
    inst, side = generate_scenario(cfg, seed % 1000)
    res = run_episode(inst, side, scheme, seed % 1000, check=True, config=cfg, max_slots=15,
                      trace=True)
    for rec in res.slots:
        if rec.decision is None:
            continue
        for name, ids in rec.decision.selections.items():
            g = rec.decision.graphs[name]
            if g.semantics.name == "CONFLICT":
                assert is_independent_set(g, ids)
