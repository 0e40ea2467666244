"""Acceptance suite: one PASS/FAIL line per criterion at its stated tolerance."""

import dataclasses
import math
import time

import numpy as np
import pytest

from fran_idnc.cli import ExperimentSpec, run_experiment
from fran_idnc.graphs import (ORACLE_CAP, Semantics, exhaustive_clique_oracle,
                              exhaustive_is_oracle, is_maximal_clique,
                              is_maximal_independent_set)
from fran_idnc.model import ScenarioConfig, generate_scenario
from fran_idnc.power import optimize_powers, power_objective
from fran_idnc.scenario import bundled, load_fixed
from fran_idnc.schedulers import SCHEMES, ConstraintViolation, check_decision
from fran_idnc.sim import paired_difference_ci, run_episode
from oracles import optimal_completion_time, random_tiny_instance


def verdict(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


# 1 -------------------------------------------------------------------------

def test_c1_example_golden(report):
    t0 = time.perf_counter()
    sc = load_fixed(bundled("example1.yaml"))
    res = run_episode(sc.instance, sc.side, "joint", seed=0)
    dt = time.perf_counter() - t0
    ok = (not res.stalled and res.num_slots == 2 and res.total_time == 8.0 and dt < 1.0)
    report(f"C1 example golden: {verdict(ok)}  slots={res.num_slots} T_o={res.total_time} s "
           f"(want 2, 8.0) runtime={dt:.2f}s (<1)")
    assert ok


# 2 -------------------------------------------------------------------------

def test_c2_bruteforce_bound(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    below, matched, n = [], 0, 60
    for i in range(n):
        inst, side = random_tiny_instance(rng)
        opt = optimal_completion_time(inst, side)
        got = {s: run_episode(inst, side, s, seed=i).total_time for s in ("joint", "coordinated")}
        for s, t in got.items():
            if not t >= opt * (1 - 1e-9):
                below.append((i, s, t, opt))
        matched += math.isclose(got["joint"], opt, rel_tol=1e-9)
    dt = time.perf_counter() - t0
    ok = not below and dt < 120
    report(f"C2 brute-force bound (hard): {verdict(ok)}  {n} instances, "
           f"{len(below)} below optimum, runtime={dt:.1f}s (<120)")
    frac = matched / n
    report(f"C2 joint matches optimum (smoke bar, informational): {verdict(frac >= 0.5)}  "
           f"{matched}/{n} = {frac:.0%} (bar 50%)")
    assert ok, below


# 3 -------------------------------------------------------------------------

def test_c3_constraint_checker(report):
    t0 = time.perf_counter()
    cfg = ScenarioConfig(num_users=12, num_files=15, num_errhs=3)
    per_scheme = 125
    violations, graphs_checked, not_maximal = [], 0, []
    total = 0
    for scheme in SCHEMES:
        got = []
        seed = 0
        while len(got) < per_scheme:
            inst, side = generate_scenario(cfg, 50_000 + seed)

            def observe(t, i, sd, d):
                if len(got) >= per_scheme:
                    return
                got.append(d)
                try:
                    check_decision(d, i, sd)
                except ConstraintViolation as exc:
                    violations.append((scheme, seed, t, str(exc)))

            run_episode(inst, side, scheme, 50_000 + seed, check=False, trace=True,
                        config=cfg, observer=observe, max_slots=60)
            seed += 1
        total += len(got)
        for d in got:
            for name, ids in d.selections.items():
                g = d.graphs[name]
                if len(g) == 0 or len(g) > ORACLE_CAP:
                    continue
                graphs_checked += 1
                if g.semantics is Semantics.COMPATIBILITY:
                    good = is_maximal_clique(g, ids)
                    _, best = exhaustive_clique_oracle(g)
                else:
                    good = is_maximal_independent_set(g, ids)
                    _, best = exhaustive_is_oracle(g)
                if not good or g.total_weight(ids) > best * (1 + 1e-12):
                    not_maximal.append((scheme, name))
    dt = time.perf_counter() - t0
    ok = total >= 1000 and not violations and not not_maximal and dt < 180
    report(f"C3 constraint checker: {verdict(ok)}  {total} decisions, "
           f"{len(violations)} violations, {graphs_checked} graphs vs oracle, "
           f"{len(not_maximal)} non-maximal, runtime={dt:.1f}s (<180)")
    assert ok, (violations[:3], not_maximal[:3])


# 4, 6, 8 -------------------------------------------------------------------

ORDER_SPEC = dict(scenario=ScenarioConfig(num_users=12, num_files=15, file_size_bits=1e6),
                  schemes=SCHEMES, iterations=200, base_seed=0)


@pytest.fixture(scope="module")
def ordering_runs():
    runs = []
    for _ in range(2):
        t0 = time.perf_counter()
        code, text, summ = run_experiment(ExperimentSpec(**ORDER_SPEC), stream=None,
                                          keep_episodes=True)
        runs.append((time.perf_counter() - t0, text, {s: v for (_, s), v in summ.items()}))
    return runs


def test_c4_scheme_ordering(report, ordering_runs):
    dt, _, res = ordering_runs[0]
    lines, ok = [], dt < 600
    chain = [("joint", "coordinated"), ("coordinated", "ra-idnc"),
             ("ra-idnc", "rlnc"), ("ra-idnc", "uncoded-broadcast-fran")]
    for a, b in chain:
        diff, (lo, hi) = paired_difference_ci(res[a].totals, res[b].totals)
        good = diff > 0 and lo > 0
        ok &= good
        lines.append(f"{a}<{b}: diff={diff:.4g} ci=[{lo:.4g},{hi:.4g}] {verdict(good)}")
    ref = max(res[s].mean for s in ("joint", "coordinated", "ra-idnc", "rlnc",
                                    "uncoded-broadcast-fran"))
    for s in ("classical-idnc", "uncoded-broadcast-d2d"):
        ratio = res[s].mean / ref
        ok &= ratio >= 10
        lines.append(f"{s}/max(above)={ratio:.3g} (>=10) {verdict(ratio >= 10)}")
    means = "; ".join(f"{s}={res[s].mean:.4g}" for s in SCHEMES)
    report(f"C4 scheme ordering: {verdict(ok)}  runtime={dt:.0f}s (<600)")
    for line in lines:
        report(f"    {line}")
    report(f"    mean T_o [s]: {means}")
    assert ok


def test_c6_completion_identity(report, ordering_runs):
    _, _, res = ordering_runs[0]
    B = ORDER_SPEC["scenario"].file_size_bits
    checked = holding = 0
    worst = 0.0
    for summ in res.values():
        for ep in summ.episodes:
            st = ep.final_side
            for u, t in enumerate(ep.completion):
                if math.isnan(t) or st.initial_wants_size[u] == 0:
                    continue
                lhs = B * st.initial_wants_size[u] * st.inv_rate_sum[u] / st.recv_count[u] \
                    + st.delay[u]
                rel = abs(lhs - t) / t
                worst = max(worst, rel)
                checked += 1
                holding += rel <= 1e-9
    ok = checked > 0 and holding == checked
    report(f"C6 completion-time identity: {verdict(ok)}  holds for {holding}/{checked} "
           f"completed users at rel 1e-9; worst rel error {worst:.3g}")
    assert ok


def test_c8_determinism(report, ordering_runs):
    (_, a, _), (_, b, _) = ordering_runs
    ok = a == b
    report(f"C8 determinism: {verdict(ok)}  CSV {len(a)} bytes, identical={ok}")
    assert ok


# 5 -------------------------------------------------------------------------

def test_c5_linearity_in_b(report):
    t0 = time.perf_counter()
    base = ScenarioConfig(fading=False, cell_radius_m=500.0)
    worst, bad = 0.0, []
    for scheme in SCHEMES:
        for seed in (0, 1, 2):
            t = []
            for B in (1e6, 2e6):
                cfg = dataclasses.replace(base, file_size_bits=B)
                inst, side = generate_scenario(cfg, seed)
                t.append(run_episode(inst, side, scheme, seed, config=cfg).total_time)
            rel = abs(t[1] - 2 * t[0]) / (2 * t[0]) if t[0] > 0 else math.nan
            if not rel <= 1e-12:
                bad.append((scheme, seed, t))
            else:
                worst = max(worst, rel)
    dt = time.perf_counter() - t0
    ok = not bad and dt < 60
    report(f"C5 linearity in B: {verdict(ok)}  {3 * len(SCHEMES) - len(bad)}/"
           f"{3 * len(SCHEMES)} episodes exact (worst rel {worst:.2g}), runtime={dt:.1f}s (<60)")
    assert ok, bad


# 7 -------------------------------------------------------------------------

def test_c7_power_optimizer(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(77)
    p_max, noise = 0.055, 3.98e-15
    shortfalls = []
    for _ in range(100):
        k = int(rng.integers(2, 4))
        n = int(rng.integers(k, 9))
        d_km = rng.uniform(0.02, 0.9, size=(n, k))
        gains = 10 ** (-(148 + 40 * np.log10(d_km)) / 10) * rng.exponential(size=(n, k))
        users = rng.permutation(n)
        cuts = np.sort(rng.choice(np.arange(1, n), size=k - 1, replace=False))
        sched = {e: sorted(part.tolist()) for e, part in enumerate(np.split(users, cuts))}
        p, obj = optimize_powers(sched, gains, p_max, noise)
        uniform = power_objective(np.full(k, p_max), sched, gains, noise)
        rand = max(power_objective(rng.uniform(0, p_max, k), sched, gains, noise)
                   for _ in range(100))
        ref = max(uniform, rand)
        feasible = np.all(p >= 0) and np.all(p <= p_max)
        if not feasible or obj < ref * (1 - 1e-6):
            shortfalls.append((obj, uniform, rand))
    dt = time.perf_counter() - t0
    ok = not shortfalls and dt < 60
    report(f"C7 power optimizer: {verdict(ok)}  100 schedules, {len(shortfalls)} below "
           f"max(uniform, best of 100 random) at rel 1e-6, runtime={dt:.1f}s (<60)")
    assert ok, shortfalls[:3]
