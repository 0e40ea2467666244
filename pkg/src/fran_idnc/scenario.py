"""YAML scenario and experiment files."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .model import NetworkInstance, ScenarioConfig, SideState, fixed_instance


class ConfigError(ValueError):
    pass


@dataclass
class FixedScenario:
    instance: NetworkInstance
    side: SideState
    users: list
    files: list
    errhs: list
    expected: dict


def bundled(name: str) -> Path:
    return Path(str(resources.files("fran_idnc") / "data" / name))


def read_yaml(path) -> dict:
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def _index(labels: list, what: str) -> dict:
    if len(set(labels)) != len(labels):
        raise ConfigError(f"duplicate {what} labels")
    return {str(x): i for i, x in enumerate(labels)}


def _lookup(table: dict, key, what: str) -> int:
    try:
        return table[str(key)]
    except KeyError:
        raise ConfigError(f"unknown {what} {key!r}") from None


def parse_fixed(data: dict, name: str = "") -> FixedScenario:
    """Scenario with explicit caches, Has sets and capacity tables."""
    if "fixed" not in data:
        raise ConfigError("missing 'fixed' section")
    fx = data["fixed"]
    for key in ("files", "errhs", "users", "caches", "has", "errh_capacity", "file_size_bits"):
        if key not in fx:
            raise ConfigError(f"fixed.{key} is required")
    files, errhs, users = (list(map(str, fx[k])) for k in ("files", "errhs", "users"))
    fi, ei, ui = _index(files, "file"), _index(errhs, "eRRH"), _index(users, "user")
    n, k = len(users), len(errhs)
    caches = [set() for _ in range(k)]
    for e, fs in fx["caches"].items():
        caches[_lookup(ei, e, "eRRH")] = {_lookup(fi, f, "file") for f in fs}
    has = [set() for _ in range(n)]
    for u, fs in fx["has"].items():
        has[_lookup(ui, u, "user")] = {_lookup(fi, f, "file") for f in (fs or [])}
    ec = np.zeros((n, k))
    for u, row in fx["errh_capacity"].items():
        for e, r in row.items():
            ec[_lookup(ui, u, "user"), _lookup(ei, e, "eRRH")] = float(r)
    dc = np.zeros((n, n))
    for u, row in (fx.get("d2d_capacity") or {}).items():
        for v, r in row.items():
            dc[_lookup(ui, u, "user"), _lookup(ui, v, "user")] = float(r)
    if np.any(ec < 0) or np.any(dc < 0):
        raise ConfigError("capacities must be non-negative")
    inst = fixed_instance(caches=caches, errh_capacity=ec, d2d_capacity=dc,
                          num_files=len(files), file_size=float(fx["file_size_bits"]),
                          rate_threshold=float(fx.get("rate_threshold", 0.0)),
                          bandwidth=float(fx.get("bandwidth_hz", 1.0)),
                          max_combination_size=int(fx.get("max_combination_size", len(files))),
                          name=name or str(data.get("name", "")))
    side = SideState.from_has(has, len(files))
    return FixedScenario(inst, side, users, files, errhs, dict(data.get("expected") or {}))


def load_fixed(path) -> FixedScenario:
    return parse_fixed(read_yaml(path), Path(path).stem)


def config_from_dict(d: dict) -> ScenarioConfig:
    """ScenarioConfig from a mapping; unknown keys are rejected by name."""
    names = {f.name for f in dataclasses.fields(ScenarioConfig)}
    bad = sorted(set(d) - names)
    if bad:
        raise ConfigError(f"unknown scenario field(s): {', '.join(bad)}")
    kw = dict(d)
    if "has_fraction" in kw:
        kw["has_fraction"] = tuple(kw["has_fraction"])
    cfg = ScenarioConfig(**kw)
    try:
        cfg.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg
