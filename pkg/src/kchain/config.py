"""Run configuration: strict schema, YAML parsing, overrides, rendering.

Configs are nested mappings with three sections (network, chain, run) plus a
name.  Parsing is strict: any key outside the schema aborts with a message
naming the offender, because a silently ignored typo in a physics parameter
is the worst failure mode a simulation CLI can have.  All physical values
are expressed in units of J.
"""

from __future__ import annotations

import copy

import yaml

from .chain import ChainParams
from .cosim import Scenario
from .errors import KchainError
from .oscillators import build_all_to_all, build_zigzag


class ConfigError(KchainError, ValueError):
    """Malformed or unknown configuration content."""


_TOP_KEYS = {"name", "network", "chain", "run"}
_NETWORK_KEYS = {
    "all_to_all": {"kind", "n", "k_tilde", "omega", "normalize_by_n"},
    "zigzag": {"kind", "n", "k1", "k2", "omega", "normalize_by_n",
               "delay_sign"},
}
_CHAIN_KEYS = {"n", "jx", "jy", "g_amp", "boundary"}
_RUN_KEYS = {"model", "classical_dt", "quantum_dt", "t_end", "snapshot_every",
             "seed", "classical_model", "kappa1", "kappa2", "initial_state"}
_INITIAL_STATE_KEYS = {"kind", "mode", "index", "select", "site", "window",
                       "pattern", "prepare_at"}


def validate_config(cfg: dict) -> None:
    """Reject any key outside the schema; raise ConfigError naming it."""
    if not isinstance(cfg, dict):
        raise ConfigError(f"config must be a mapping, got {type(cfg).__name__}")
    for key in cfg:
        if key not in _TOP_KEYS:
            raise ConfigError(f"unknown top-level key {key!r}")
    for section in ("network", "chain", "run"):
        if section not in cfg:
            raise ConfigError(f"missing config section {section!r}")
    net = cfg["network"]
    kind = net.get("kind")
    if kind not in _NETWORK_KEYS:
        raise ConfigError(f"unknown network.kind {kind!r} "
                          f"(expected one of {sorted(_NETWORK_KEYS)})")
    for key in net:
        if key not in _NETWORK_KEYS[kind]:
            raise ConfigError(f"unknown key 'network.{key}' for kind {kind!r}")
    for key in cfg["chain"]:
        if key not in _CHAIN_KEYS:
            raise ConfigError(f"unknown key 'chain.{key}'")
    run = cfg["run"]
    for key in run:
        if key not in _RUN_KEYS:
            raise ConfigError(f"unknown key 'run.{key}'")
    init = run.get("initial_state", {})
    if not isinstance(init, dict):
        raise ConfigError("run.initial_state must be a mapping")
    for key in init:
        if key not in _INITIAL_STATE_KEYS:
            raise ConfigError(f"unknown key 'run.initial_state.{key}'")


def scenario_from_config(cfg: dict) -> Scenario:
    """Build a runnable Scenario from a validated config mapping."""
    validate_config(cfg)
    net_cfg = cfg["network"]
    n = int(net_cfg["n"])
    omega = net_cfg["omega"]
    scale = 1.0 / n if net_cfg.get("normalize_by_n", False) else 1.0
    if net_cfg["kind"] == "all_to_all":
        network = build_all_to_all(n, float(net_cfg["k_tilde"]) * scale, omega)
    else:
        network = build_zigzag(n, float(net_cfg["k1"]) * scale,
                               float(net_cfg["k2"]) * scale, omega,
                               delay_sign=float(net_cfg.get("delay_sign", -1.0)))
    chain_cfg = cfg["chain"]
    chain = ChainParams(n=int(chain_cfg["n"]), jx=float(chain_cfg["jx"]),
                        jy=float(chain_cfg["jy"]),
                        g_amp=float(chain_cfg["g_amp"]),
                        boundary=chain_cfg.get("boundary", "open"))
    run = cfg["run"]
    return Scenario(
        name=cfg.get("name", "custom"),
        network=network,
        chain=chain,
        model=run["model"],
        classical_dt=float(run["classical_dt"]),
        quantum_dt=float(run["quantum_dt"]),
        t_end=float(run["t_end"]),
        snapshot_every=float(run["snapshot_every"]),
        seed=int(run.get("seed", 1)),
        initial_state=dict(run.get("initial_state", {})),
        classical_model=run.get("classical_model", "kuramoto"),
        kappa1=run.get("kappa1"),
        kappa2=run.get("kappa2"),
        source_config=copy.deepcopy(cfg),
    )


def render_config(cfg: dict) -> str:
    """YAML text whose parse returns an equal mapping (round-trip safe)."""
    return yaml.safe_dump(cfg, sort_keys=True, default_flow_style=False)


def parse_config_text(text: str) -> dict:
    """Parse YAML config text; syntax errors carry line/column."""
    try:
        cfg = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = (f" at line {mark.line + 1}, column {mark.column + 1}"
                 if mark is not None else "")
        raise ConfigError(f"config parse error{where}: {exc}") from exc
    validate_config(cfg)
    return cfg


def _parse_override_value(text: str):
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse override value {text!r}") from exc


def apply_overrides(cfg: dict, assignments: list[str]) -> dict:
    """Apply dotted-key overrides like network.k1=0.0; strict on unknowns."""
    out = copy.deepcopy(cfg)
    for item in assignments:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        path, _, raw = item.partition("=")
        keys = path.strip().split(".")
        node = out
        for key in keys[:-1]:
            if not isinstance(node, dict) or key not in node:
                raise ConfigError(f"unknown override key {path!r}")
            node = node[key]
        if not isinstance(node, dict):
            raise ConfigError(f"unknown override key {path!r}")
        node[keys[-1]] = _parse_override_value(raw.strip())
    validate_config(out)
    return out
