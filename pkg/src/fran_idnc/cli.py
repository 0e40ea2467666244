"""Command line: Monte Carlo sweeps, fixed-scenario replay, graph dumps."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import channel
from .graphs import write_graph
from .model import ScenarioConfig
from .scenario import ConfigError, bundled, config_from_dict, load_fixed, read_yaml
from .schedulers import SCHEMES, make_scheduler
from .sim import monte_carlo, run_episode, slot_rngs

CSV_COLUMNS = ("scheme", "sweep_var", "sweep_value", "iterations", "completed", "stalled",
               "mean_T_o_s", "std_T_o_s", "ci95_lo", "ci95_hi", "mean_slots")

# sweep variable -> ScenarioConfig field
SWEEP_FIELDS = {"users": "num_users", "files": "num_files", "file-size": "file_size_bits"}


@dataclass
class ExperimentSpec:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    schemes: tuple = SCHEMES
    sweep_var: Optional[str] = None
    sweep_values: tuple = ()
    iterations: int = 100
    base_seed: int = 0
    out: Optional[str] = None
    threads: int = 1

    def validate(self) -> None:
        if not self.schemes:
            raise ConfigError("scheme list is empty")
        unknown = [s for s in self.schemes if s not in SCHEMES]
        if unknown:
            raise ConfigError(f"unknown scheme(s): {', '.join(unknown)}; "
                              f"choose from {', '.join(SCHEMES)}")
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        if self.sweep_var is not None:
            if self.sweep_var not in SWEEP_FIELDS:
                raise ConfigError(f"sweep variable must be one of {', '.join(SWEEP_FIELDS)}")
            vals = list(self.sweep_values)
            if not vals:
                raise ConfigError("sweep has no values")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ConfigError("sweep values must be strictly increasing")

    def points(self) -> list:
        """[(sweep value or None, ScenarioConfig)] with each point validated."""
        if self.sweep_var is None:
            pts = [(None, self.scenario)]
        else:
            name = SWEEP_FIELDS[self.sweep_var]
            cast = float if name == "file_size_bits" else int
            pts = [(v, dataclasses.replace(self.scenario, **{name: cast(v)}))
                   for v in self.sweep_values]
        for _, cfg in pts:
            try:
                cfg.validate()
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        return pts


def _fmt(x) -> str:
    if isinstance(x, float):
        return "nan" if math.isnan(x) else repr(x)
    return str(x)


def run_experiment(spec: ExperimentSpec, stream=None, keep_episodes: bool = False) -> tuple:
    """Returns (exit code, CSV text, {(sweep value, scheme): Summary}).
    Exit code 1 when some (point, scheme) had every iteration stall."""
    spec.validate()
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    code = 0
    summaries = {}
    for value, cfg in spec.points():
        res = monte_carlo(cfg, spec.schemes, spec.iterations, spec.base_seed, spec.threads,
                          keep_episodes=keep_episodes)
        for scheme in spec.schemes:
            s = summaries[(value, scheme)] = res[scheme]
            if s.completed == 0:
                code = 1
            writer.writerow([_fmt(x) for x in (
                scheme, spec.sweep_var or "none", "" if value is None else value,
                s.iterations, s.completed, s.stalled, s.mean, s.std,
                s.ci95[0], s.ci95[1], s.mean_slots)])
            label = "" if value is None else f"{spec.sweep_var}={value} "
            print(f"{label}{scheme:24s} T_o={s.mean:.6g} s  ci95=[{s.ci95[0]:.6g}, "
                  f"{s.ci95[1]:.6g}]  slots={s.mean_slots:.4g}  stalled={s.stalled}/"
                  f"{s.iterations}", file=stream)
    text = buf.getvalue()
    if spec.out:
        Path(spec.out).parent.mkdir(parents=True, exist_ok=True)
        with open(spec.out, "w", newline="") as fh:
            fh.write(text)
    return code, text, summaries


def _csv_list(cast):
    def parse(s: str):
        try:
            return tuple(cast(x) for x in s.split(",") if x.strip())
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad list {s!r}") from None
    return parse


def spec_from_args(args) -> ExperimentSpec:
    spec = ExperimentSpec()
    scen: dict = {}
    if args.config:
        data = read_yaml(args.config)
        exp = dict(data.get("experiment") or {})
        scen = dict(data.get("scenario") or {})
        if "schemes" in exp:
            spec.schemes = tuple(exp.pop("schemes"))
        if "sweep" in exp:
            sw = exp.pop("sweep") or {}
            spec.sweep_var = sw.get("var")
            spec.sweep_values = tuple(sw.get("values") or ())
        for key in ("iterations", "base_seed", "out", "threads"):
            if key in exp:
                setattr(spec, key, exp.pop(key))
        if exp:
            raise ConfigError(f"unknown experiment key(s): {', '.join(sorted(exp))}")
    if args.rth is not None:
        scen["rate_threshold"] = args.rth
    if args.no_fading:
        scen["fading"] = False
    spec.scenario = config_from_dict(scen)
    if args.scheme is not None:
        spec.schemes = args.scheme
    flagged = [(v, vals) for v, vals in (("users", args.users), ("files", args.files),
                                          ("file-size", args.file_size_bits)) if vals]
    if sum(len(vals) > 1 for _, vals in flagged) > 1:
        raise ConfigError("only one of --users, --files, --file-size-bits may list several values")
    for var, vals in flagged:
        if len(vals) == 1:
            # a single value fixes the parameter instead of sweeping it
            spec.scenario = dataclasses.replace(
                spec.scenario, **{SWEEP_FIELDS[var]: type(getattr(
                    spec.scenario, SWEEP_FIELDS[var]))(vals[0])})
            if spec.sweep_var == var:
                spec.sweep_var, spec.sweep_values = None, ()
        else:
            spec.sweep_var, spec.sweep_values = var, vals
    for key in ("iterations", "out", "threads"):
        if getattr(args, key) is not None:
            setattr(spec, key, getattr(args, key))
    if args.seed is not None:
        spec.base_seed = args.seed
    spec.validate()
    return spec


def _replay_target(path: Optional[str]):
    return load_fixed(path or bundled("example1.yaml"))


def replay(path: Optional[str], scheme: str = "joint", seed: int = 0, stream=None):
    sc = _replay_target(path)
    res = run_episode(sc.instance, sc.side, scheme, seed)
    u, f, e = sc.users, sc.files, sc.errhs
    for t, rec in enumerate(res.slots, 1):
        print(f"slot {t}: t_max = {rec.t_max:g} s", file=stream)
        if rec.decision is None:
            print("  outage", file=stream)
            continue
        for plan in rec.decision.plans():
            src = e[plan.source] if plan.from_errh else u[plan.source]
            combo = "+".join(f[x] for x in sorted(plan.files))
            tg = ", ".join(f"{u[v]}<-{f[x]}" if x is not None else u[v]
                           for v, x in plan.targets)
            print(f"  {src}: {combo} @ {plan.rate:g} bits/s for {plan.duration:g} s -> {tg}",
                  file=stream)
        if rec.unserved:
            print(f"  unserved: {', '.join(u[v] for v in rec.unserved)}", file=stream)
    if res.stalled:
        print(f"stalled: {res.stall_reason}", file=stream)
        return res
    print(f"T_o = {res.total_time:g} s over {res.num_slots} slots", file=stream)
    return res


def dump_graphs(path: Optional[str], out_dir: str, seed: int = 0, stream=None) -> list:
    """Write the first-slot IA-IDNC and D2D graphs of the joint scheme as GraphML."""
    sc = _replay_target(path)
    fade, tie = slot_rngs(seed, 0)
    inst = channel.draw_gains(sc.instance, fade)
    decision = make_scheduler("joint")(inst, sc.side, tie, trace=True)
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    written = []
    for name, g in sorted(decision.graphs.items()):
        p = Path(out_dir) / f"{name}.graphml"
        write_graph(g, p)
        written.append(p)
        print(f"{p}: {len(g)} vertices, {len(g.edges())} edges", file=stream)
    return written


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fran-idnc", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Monte Carlo sweep, CSV output")
    run.add_argument("--config", help="YAML experiment file; flags override it")
    run.add_argument("--scheme", type=_csv_list(str), help=f"comma list from {','.join(SCHEMES)}")
    run.add_argument("--users", type=_csv_list(int))
    run.add_argument("--files", type=_csv_list(int))
    run.add_argument("--file-size-bits", type=_csv_list(float))
    run.add_argument("--rth", type=float, help="rate threshold, bits/s/Hz")
    run.add_argument("--iterations", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--out", help="CSV path (stdout if omitted)")
    run.add_argument("--no-fading", action="store_true")
    run.add_argument("--threads", type=int)

    rp = sub.add_parser("replay", help="single episode on a fixed scenario, with slot trace")
    rp.add_argument("scenario", nargs="?", help="fixed scenario YAML (default: bundled example)")
    rp.add_argument("--scheme", default="joint", choices=SCHEMES)
    rp.add_argument("--seed", type=int, default=0)

    dg = sub.add_parser("dump-graphs", help="GraphML of the first-slot scheduling graphs")
    dg.add_argument("scenario", nargs="?")
    dg.add_argument("--out", default="graphs")
    dg.add_argument("--seed", type=int, default=0)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            spec = spec_from_args(args)
            code, text, _ = run_experiment(spec, stream=sys.stderr if not spec.out else sys.stdout)
            if not spec.out:
                sys.stdout.write(text)
            return code
        if args.command == "replay":
            return 1 if replay(args.scenario, args.scheme, args.seed).stalled else 0
        dump_graphs(args.scenario, args.out, args.seed)
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
