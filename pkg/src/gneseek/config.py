"""Run configurations: one YAML file describes a game, a network schedule,
algorithm parameters and output locations.

Unknown keys are rejected everywhere so silently ignored typos cannot skew
an experiment.  Numeric fields accept ints where floats are expected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from .dynamics import AlgorithmParams
from .errors import ConfigError
from .games import (
    GameSpec,
    build_cournot,
    build_demand_response,
    build_quadratic,
)
from .network import NetworkSchedule

_TOP_KEYS = {"name", "seed", "game", "network", "params", "output"}
_GAME_KEYS = {
    "family", "constrained",
    # cournot
    "n_players", "cap", "cost_base", "cost_step", "demand_intercept",
    "n_shared", "shared_supply",
    # demand-response
    "chi", "boxes", "k", "price_slope", "price_base", "cut",
    # quadratic
    "curvature", "target", "couple", "phi_scale", "a_row", "b_rows",
}
_NETWORK_KEYS = {"mode", "edge_prob", "graph_count", "dwell"}
_PARAM_KEYS = {"alpha", "beta", "gamma", "step", "horizon", "deadband",
               "stop_tol", "record_every"}
_OUTPUT_KEYS = {"dir", "prefix"}

_DEFAULT_HORIZONS = {"cournot": 30.0, "demand-response": 50.0, "quadratic": 50.0}


@dataclass
class OutputConfig:
    dir: str = "out"
    prefix: str = "run"


@dataclass
class RunConfig:
    """Validated configuration: fully constructed module objects plus seed."""

    name: str
    seed: int
    game: GameSpec
    schedule: NetworkSchedule
    params: AlgorithmParams
    output: OutputConfig = field(default_factory=OutputConfig)


def _require_mapping(obj, path: str) -> dict:
    if obj is None:
        return {}
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(obj).__name__}")
    return obj


def _check_keys(section: dict, allowed: set, path: str) -> None:
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {', '.join(map(repr, unknown))}")


def _number(section: dict, key: str, path: str, default=None):
    if key not in section:
        if default is None:
            raise ConfigError(f"{path}.{key}: required")
        return default
    val = section[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number, got {val!r}")
    return float(val)


def _build_game(section: dict) -> GameSpec:
    _check_keys(section, _GAME_KEYS, "game")
    family = section.get("family")
    if family not in ("cournot", "demand-response", "quadratic"):
        raise ConfigError(
            f"game.family: expected cournot | demand-response | quadratic, "
            f"got {family!r}"
        )
    kwargs = {k: v for k, v in section.items() if k not in ("family",)}
    try:
        if family == "cournot":
            return build_cournot(**{
                **{"constrained": True},
                **{k: v for k, v in kwargs.items()
                   if k in ("constrained", "n_players", "cap", "cost_base",
                            "cost_step", "demand_intercept", "n_shared",
                            "shared_supply")},
            })
        if family == "demand-response":
            allowed = ("constrained", "chi", "boxes", "k", "price_slope",
                       "price_base", "cut")
            return build_demand_response(**{k: v for k, v in kwargs.items()
                                            if k in allowed})
        allowed = ("curvature", "target", "couple", "phi_scale", "boxes",
                   "a_row", "b_rows")
        return build_quadratic(**{k: v for k, v in kwargs.items() if k in allowed})
    except TypeError as exc:
        raise ConfigError(f"game: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"game: {exc}") from exc


def _build_schedule(section: dict, n_players: int, seed: int) -> NetworkSchedule:
    _check_keys(section, _NETWORK_KEYS, "network")
    mode = section.get("mode", "static")
    if mode not in ("static", "switching"):
        raise ConfigError(f"network.mode: expected static | switching, got {mode!r}")
    edge_prob = _number(section, "edge_prob", "network", default=0.4)
    graph_count = int(_number(section, "graph_count", "network", default=8.0))
    dwell = _number(section, "dwell", "network", default=0.1)
    try:
        return NetworkSchedule.random(
            n_players, mode=mode, edge_prob=edge_prob,
            graph_count=graph_count, dwell=dwell, seed=seed,
        )
    except ValueError as exc:
        raise ConfigError(f"network: {exc}") from exc


def _build_params(section: dict, family: str) -> AlgorithmParams:
    _check_keys(section, _PARAM_KEYS, "params")
    horizon_default = _DEFAULT_HORIZONS.get(family, 50.0)
    try:
        return AlgorithmParams(
            alpha=_number(section, "alpha", "params"),
            beta=_number(section, "beta", "params"),
            gamma=_number(section, "gamma", "params"),
            step_h=_number(section, "step", "params", default=1e-3),
            horizon_T=_number(section, "horizon", "params",
                              default=horizon_default),
            deadband=_number(section, "deadband", "params", default=1e-9),
            stop_tol=_number(section, "stop_tol", "params", default=1e-6),
            record_every=int(_number(section, "record_every", "params",
                                     default=10.0)),
        )
    except ValueError as exc:
        raise ConfigError(f"params: {exc}") from exc


def load_config(path) -> RunConfig:
    """Parse and validate a YAML run configuration."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: YAML parse error: {exc}") from exc
    raw = _require_mapping(raw, str(path))
    _check_keys(raw, _TOP_KEYS, "top level")

    seed_val = raw.get("seed", 0)
    if isinstance(seed_val, bool) or not isinstance(seed_val, int):
        raise ConfigError(f"seed: expected an integer, got {seed_val!r}")

    game_section = _require_mapping(raw.get("game"), "game")
    if not game_section:
        raise ConfigError("game: section required")
    game = _build_game(game_section)
    schedule = _build_schedule(_require_mapping(raw.get("network"), "network"),
                               game.n_players, seed_val)
    params_section = _require_mapping(raw.get("params"), "params")
    if not params_section:
        raise ConfigError("params: section required (alpha, beta, gamma)")
    params = _build_params(params_section, game_section.get("family", ""))

    out_section = _require_mapping(raw.get("output"), "output")
    _check_keys(out_section, _OUTPUT_KEYS, "output")
    output = OutputConfig(
        dir=str(out_section.get("dir", "out")),
        prefix=str(out_section.get("prefix", path.stem)),
    )
    name = str(raw.get("name", path.stem))
    return RunConfig(name=name, seed=seed_val, game=game, schedule=schedule,
                     params=params, output=output)
