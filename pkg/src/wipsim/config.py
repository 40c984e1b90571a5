"""Flat key-value config files.

Format: one `key = value` per line, `#` comments, blank lines ignored.
Repeated keys are allowed (course files list cones that way). Values are
floats, comma-separated float lists, or bare words depending on the key.
Each loader has a *_pairs variant taking pre-parsed pairs, used by the
run-log reader to rebuild configs embedded in log headers.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path

from .errors import ConfigError
from .mapping import AccelMapConfig, MappingConfig, PiecewiseMapConfig, default_mapping
from .model import RobotParams, default_params
from .synthesis import GainSet

__all__ = [
    "read_pairs",
    "parse_pairs",
    "as_float",
    "as_floats",
    "load_params",
    "load_params_pairs",
    "dump_params",
    "load_mapping",
    "load_mapping_pairs",
    "dump_mapping",
    "load_gains",
    "load_gains_pairs",
    "dump_gains",
    "load_qr",
]


def parse_pairs(text: str, source: str = "<string>") -> list[tuple[str, str]]:
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        pairs.append((key.strip(), value.strip()))
    return pairs


def read_pairs(path) -> list[tuple[str, str]]:
    path = Path(path)
    return parse_pairs(path.read_text(), source=str(path))


def as_float(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: expected a number, got {value!r}") from exc


def as_floats(key: str, value: str) -> list[float]:
    try:
        return [float(v) for v in value.split(",")]
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: expected comma-separated numbers, got {value!r}") from exc


def load_params_pairs(pairs: list[tuple[str, str]]) -> RobotParams:
    """Robot parameters; missing keys fall back to the shipped defaults."""
    values = dataclasses.asdict(default_params())
    known = set(values)
    for key, value in pairs:
        if key not in known:
            raise ConfigError(f"unknown robot parameter {key!r}")
        values[key] = as_float(key, value)
    return RobotParams(**values)


def load_params(path) -> RobotParams:
    return load_params_pairs(read_pairs(path))


def dump_params(p: RobotParams) -> str:
    lines = ["# robot parameters, SI units"]
    lines += [f"{k} = {v!r}" for k, v in dataclasses.asdict(p).items()]
    return "\n".join(lines) + "\n"


_PIECEWISE_KEYS = ("deadband", "swp", "max_in", "alpha1", "alpha2")
_ACC_KEYS = ("deadband", "slope", "max_tilt")


def load_mapping_pairs(pairs: list[tuple[str, str]],
                       base: MappingConfig | None = None) -> MappingConfig:
    """Mapping config; unspecified keys keep the base preset's values."""
    base = base if base is not None else default_mapping()
    mode = base.mode
    vel = {k: getattr(base.vel, k) for k in _PIECEWISE_KEYS}
    yaw = {k: getattr(base.yaw, k) for k in _PIECEWISE_KEYS}
    acc = {k: getattr(base.acc, k) for k in _ACC_KEYS}
    scalars = {"theta_H_max": base.theta_H_max, "k_spring": base.k_spring,
               "accel_filter_cutoff_hz": base.accel_filter_cutoff_hz}
    for key, value in pairs:
        if key == "mode":
            if value not in ("velocity", "acceleration"):
                raise ConfigError(f"mode must be velocity or acceleration, got {value!r}")
            mode = value
        elif key.startswith("vel.") and key[4:] in vel:
            vel[key[4:]] = as_float(key, value)
        elif key.startswith("yaw.") and key[4:] in yaw:
            yaw[key[4:]] = as_float(key, value)
        elif key.startswith("acc.") and key[4:] in acc:
            acc[key[4:]] = as_float(key, value)
        elif key in scalars:
            scalars[key] = as_float(key, value)
        else:
            raise ConfigError(f"unknown mapping key {key!r}")
    return MappingConfig(mode=mode, vel=PiecewiseMapConfig(**vel),
                         yaw=PiecewiseMapConfig(**yaw), acc=AccelMapConfig(**acc), **scalars)


def load_mapping(path, base: MappingConfig | None = None) -> MappingConfig:
    return load_mapping_pairs(read_pairs(path), base)


def dump_mapping(cfg: MappingConfig) -> str:
    lines = [f"mode = {cfg.mode}"]
    for section, obj, keys in (("vel", cfg.vel, _PIECEWISE_KEYS),
                               ("yaw", cfg.yaw, _PIECEWISE_KEYS),
                               ("acc", cfg.acc, _ACC_KEYS)):
        lines += [f"{section}.{k} = {getattr(obj, k)!r}" for k in keys]
    lines.append(f"theta_H_max = {cfg.theta_H_max!r}")
    lines.append(f"k_spring = {cfg.k_spring!r}")
    lines.append(f"accel_filter_cutoff_hz = {cfg.accel_filter_cutoff_hz!r}")
    return "\n".join(lines) + "\n"


def load_gains_pairs(pairs: list[tuple[str, str]]) -> GainSet:
    values: dict = {}
    for key, value in pairs:
        if key == "K":
            k = as_floats(key, value)
            if len(k) != 4:
                raise ConfigError(f"K must have 4 entries, got {len(k)}")
            values["K"] = tuple(k)
        elif key in ("K_p", "K_d", "K_p_yaw", "K_d_yaw"):
            values[key] = as_float(key, value)
        elif key == "k_sign":
            sign = int(as_float(key, value))
            if sign not in (-1, 1):
                raise ConfigError("k_sign must be +1 or -1")
            values["k_sign"] = sign
        else:
            raise ConfigError(f"unknown gain key {key!r}")
    if "K" not in values:
        raise ConfigError("gain file must define K")
    return GainSet(**values)


def load_gains(path) -> GainSet:
    return load_gains_pairs(read_pairs(path))


def dump_gains(g: GainSet) -> str:
    lines = [
        "K = " + ",".join(repr(k) for k in g.K),
        f"K_p = {g.K_p!r}",
        f"K_d = {g.K_d!r}",
        f"K_p_yaw = {g.K_p_yaw!r}",
        f"K_d_yaw = {g.K_d_yaw!r}",
        f"k_sign = {g.k_sign}",
    ]
    return "\n".join(lines) + "\n"


def load_qr(path) -> tuple[list[float], float]:
    """Cost weights: `Q_diag = q1,q2,q3,q4` and `R = r`."""
    q_diag = None
    r = None
    for key, value in read_pairs(path):
        if key == "Q_diag":
            q_diag = as_floats(key, value)
            if len(q_diag) != 4:
                raise ConfigError("Q_diag must have 4 entries")
        elif key == "R":
            r = as_float(key, value)
        else:
            raise ConfigError(f"unknown cost key {key!r}")
    if q_diag is None or r is None:
        raise ConfigError("cost file must define Q_diag and R")
    if r <= 0.0:
        raise ConfigError("R must be positive")
    return q_diag, r
