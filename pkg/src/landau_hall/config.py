"""Scenario configuration: TOML (or an emitted JSON manifest) with strict key checking."""

from __future__ import annotations

import copy
import json
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

SCENARIOS = {
    "verify": "verify-solutions",
    "evolve": "evolve-oracle",
    "lorentz": "lorentz-check",
    "resistivity": "resistivity-scan",
    "fourier": "fourier-check",
    "general": "general-solution",
}

# the tolerance that --tolerance overrides, per scenario
PRIMARY_TOLERANCE = {
    "verify-solutions": "residual",
    "evolve-oracle": "overlap_defect",
    "lorentz-check": "lorentz",
    "resistivity-scan": "integer",
    "fourier-check": "fourier",
    "general-solution": "general_residual",
}

_NUM = (int, float)
_LIST_NUM = ("list", _NUM)
_LIST_INT = ("list", int)
_LIST_STR = ("list", str)

# section -> key -> (type, default)
SCHEMA: dict[str, dict[str, tuple]] = {
    "params": {
        "mass": (_NUM, 1.0), "charge": (_NUM, 1.0), "light_speed": (_NUM, 1.0),
        "hbar": (_NUM, 1.0), "field_B": (_NUM, 1.0), "field_E": (_NUM, 1.0),
    },
    "grid": {"nx": (int, 256), "ny": (int, 256)},
    "evolver": {
        "steps_per_period": (int, 2000), "periods": (_NUM, 1.0),
        "scheme": (str, "split-step2"), "checkpoints": (int, 20),
    },
    "tolerances": {
        "residual": (_NUM, 1e-5), "control_min": (_NUM, 1e-2),
        "overlap_defect": (_NUM, 1e-3), "ratio_min": (_NUM, 3.0), "ratio_max": (_NUM, 5.0),
        "lorentz": (_NUM, 1e-3), "momentum": (_NUM, 1e-6),
        "integer": (_NUM, 1e-9), "phase": (_NUM, 1e-8),
        "fourier": (_NUM, 1e-6),
        "general_residual": (_NUM, 1e-4), "series": (_NUM, 1e-3),
    },
    "verify": {
        "families": (_LIST_STR, ["psi", "psibar", "zeta", "zetabar"]),
        "orders": (_LIST_INT, [0, 1, 2]),
        "times": (_LIST_NUM, [0.0, 0.3, 0.7]),
        "fields": (_LIST_NUM, [0.0, 1.0]),
        "psi_delta_y_steps": (int, 5),
        "psibar_delta_x": (_NUM, 0.7),
        "control_shift": (_NUM, 0.5),
    },
    "evolve": {"compare_half_step": (bool, True)},
    "lorentz": {
        "x0": (_NUM, -3.0), "y0": (_NUM, 0.0),
        "kinetic_x": (_NUM, 0.0), "kinetic_y": (_NUM, 0.0),
    },
    "resistivity": {
        "l": (_LIST_NUM, [1, 2, 3, 4, 5]), "k": (_NUM, 1),
        "controls": (_LIST_NUM, [1.01]), "rho_long_samples": (int, 16), "workers": (int, 1),
    },
    "fourier": {
        "orders": (_LIST_INT, [0, 1, 2, 3]), "shifts": (_LIST_NUM, [0.0, 0.25, 1.0]),
        "points": (int, 4096), "half_width": (_NUM, 14.0),
    },
    "general": {
        "delta_x": (_NUM, 0.1), "delta_t": (_NUM, 0.05), "order": (int, 6), "time": (_NUM, 0.4),
        "width_x": (_NUM, 24.0), "width_y": (_NUM, 8.0),
        # experiment hook: zeta-branch coefficients as [n, j, j', re, im] rows
        "c": (("list", list), []),
    },
}

TOP_LEVEL = {"scenario": str, "output_dir": str}


class ConfigError(Exception):
    """Malformed or inconsistent configuration; the message names the offending key."""


@dataclass
class ScenarioConfig:
    scenario: str
    sections: dict = field(default_factory=dict)
    output_dir: str | None = None

    def __getitem__(self, section: str) -> dict:
        return self.sections[section]

    @property
    def tolerances(self) -> dict:
        return self.sections["tolerances"]

    def to_dict(self) -> dict:
        out = {"scenario": self.scenario}
        out.update(copy.deepcopy(self.sections))
        return out


def _check_type(where: str, value, kind):
    if isinstance(kind, tuple) and len(kind) == 2 and kind[0] == "list":
        if not isinstance(value, list):
            raise ConfigError(f"{where}: expected a list")
        return [_check_type(f"{where}[{i}]", v, kind[1]) for i, v in enumerate(value)]
    if kind is _NUM or kind == _NUM:
        if isinstance(value, bool) or not isinstance(value, _NUM):
            raise ConfigError(f"{where}: expected a number")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer")
        return value
    if not isinstance(value, kind):
        raise ConfigError(f"{where}: expected {kind.__name__}")
    return value


def build(raw: dict, scenario: str | None = None) -> ScenarioConfig:
    """Validate a raw mapping and fill defaults. Unknown sections or keys are errors."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration root must be a table")
    for key, value in raw.items():
        if key in TOP_LEVEL:
            if not isinstance(value, TOP_LEVEL[key]):
                raise ConfigError(f"{key}: expected {TOP_LEVEL[key].__name__}")
        elif key in SCHEMA:
            if not isinstance(value, dict):
                raise ConfigError(f"{key}: expected a table")
        else:
            raise ConfigError(f"unknown key {key!r}")
    declared = raw.get("scenario")
    if declared is not None and declared not in PRIMARY_TOLERANCE:
        raise ConfigError(f"scenario: unknown scenario {declared!r}")
    if scenario is not None and declared is not None and declared != scenario:
        raise ConfigError(f"scenario: config declares {declared!r} but {scenario!r} was requested")
    chosen = scenario or declared
    if chosen is None:
        raise ConfigError("scenario: missing")
    sections = {}
    for name, keys in SCHEMA.items():
        given = raw.get(name, {})
        for key in given:
            if key not in keys:
                raise ConfigError(f"unknown key {name}.{key!r}")
        sections[name] = {
            key: _check_type(f"{name}.{key}", given[key], kind) if key in given else copy.deepcopy(default)
            for key, (kind, default) in keys.items()
        }
    for key, value in sections["tolerances"].items():
        if not value > 0:
            raise ConfigError(f"tolerances.{key}: must be positive")
    for key in ("nx", "ny"):
        if sections["grid"][key] < 16:
            raise ConfigError(f"grid.{key}: need at least 16 points")
    if sections["evolver"]["scheme"] not in ("split-step2", "crank-nicolson"):
        raise ConfigError("evolver.scheme: expected 'split-step2' or 'crank-nicolson'")
    for key in ("steps_per_period", "checkpoints"):
        if sections["evolver"][key] < 1:
            raise ConfigError(f"evolver.{key}: must be at least 1")
    if not sections["evolver"]["periods"] > 0:
        raise ConfigError("evolver.periods: must be positive")
    for fam in sections["verify"]["families"]:
        if fam not in ("psi", "psibar", "zeta", "zetabar"):
            raise ConfigError(f"verify.families: unknown family {fam!r}")
    for i, row in enumerate(sections["general"]["c"]):
        if len(row) != 5 or any(isinstance(v, bool) or not isinstance(v, _NUM) for v in row):
            raise ConfigError(f"general.c[{i}]: expected [n, j, j_prime, re, im]")
    if not sections["resistivity"]["l"]:
        raise ConfigError("resistivity.l: must be nonempty")
    return ScenarioConfig(chosen, sections, raw.get("output_dir"))


def load(path, scenario: str | None = None) -> ScenarioConfig:
    """Read TOML, or a JSON manifest written by a previous run (its ``config`` member is used)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if path.suffix == ".json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(doc, dict) or "config" not in doc:
            raise ConfigError(f"{path}: manifest lacks the 'config' key")
        raw = doc["config"]
    else:
        try:
            raw = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: invalid TOML ({exc})") from exc
    return build(raw, scenario)


def default_config_path(scenario: str) -> Path:
    return Path(str(resources.files("landau_hall") / "configs" / f"{scenario}.toml"))


def load_default(scenario: str) -> ScenarioConfig:
    return load(default_config_path(scenario), scenario)
