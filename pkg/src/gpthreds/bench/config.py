"""Flat ``key=value`` configuration for benchmark runs.

Values are layered: built-in defaults, then per-objective defaults, then a
config file, then explicit command-line flags. Every key has a fixed type
taken from its default.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

from ..gp import AlgoParams
from ..kernel import Family, KernelSpec
from ..threds import RunConfig
from .objectives import Objective, make_objective

__all__ = [
    "DEFAULTS",
    "OBJECTIVE_DEFAULTS",
    "ConfigError",
    "build_run_config",
    "config_hash",
    "dump_config",
    "load_config_file",
    "parse_config_lines",
    "resolve_config",
]


class ConfigError(ValueError):
    """Unknown key or malformed value."""


DEFAULTS: dict[str, object] = {
    "run.T": 1000,
    "run.max_epochs": 0,  # 0 means no limit
    "algo.delta0": 1e-3,
    "algo.c": 0.2,
    "algo.L": 1.0,
    "algo.alpha": 1.0,
    "gp.B": 0.5,
    "gp.R": 0.01,
    "gp.lambda": 0.01,
    "range.a": 0.0,
    "range.b": 1.0,
    "kernel.family": "se",
    "kernel.lengthscale": 0.2,
    "kernel.nu": 2.5,
    "gamma.c": 1.0,
    "beta.appendix_factor2": False,
    "search.strategy": "rwt",
    "search.p": 0.4,
    "baseline.grid_max": 6400,
    "noise.sd": 0.1,
    "output.timing": True,
    "gpsample.dim": 1,
    "gpsample.norm": 1.0,
    "gpsample.centres": 20,
    "gpsample.seed": 0,
}

OBJECTIVE_DEFAULTS: dict[str, dict[str, object]] = {
    "branin": {"gp.B": 0.5, "range.a": 0.5, "range.b": 1.2},
    "rosenbrock": {"gp.B": 2.0, "range.a": 3.0, "range.b": 12.0},
    "gpsample": {"gp.B": 1.0, "range.a": 0.0, "range.b": 1.0},
    # B covers the sup norm 0.8 of the normalised tent; L is its slope 4 / 1.25
    "piecewise": {"gp.B": 1.0, "range.a": 0.0, "range.b": 1.25, "algo.L": 3.2},
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _coerce(key: str, raw) -> object:
    if key not in DEFAULTS:
        raise ConfigError(f"unknown config key {key!r}")
    kind = type(DEFAULTS[key])
    if not isinstance(raw, str):
        raw = str(raw)
    text = raw.strip()
    try:
        if kind is bool:
            low = text.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(text)
        if kind is int:
            value = float(text)
            if value != int(value):
                raise ValueError(text)
            return int(value)
        if kind is float:
            return float(text)
    except ValueError:
        raise ConfigError(f"bad value {raw!r} for {key} (expected {kind.__name__})") from None
    return text


def parse_config_lines(lines) -> dict[str, object]:
    """Parse ``key=value`` lines; blank lines and ``#`` comments are skipped."""
    out = {}
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {num}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = _coerce(key, value)
    return out


def load_config_file(path) -> dict[str, object]:
    return parse_config_lines(Path(path).read_text().splitlines())


def resolve_config(objective: str, overrides: dict | None = None) -> dict[str, object]:
    """Defaults, then the objective's defaults, then ``overrides`` (validated)."""
    conf = dict(DEFAULTS)
    conf.update(OBJECTIVE_DEFAULTS.get(objective, {}))
    for key, value in (overrides or {}).items():
        conf[key] = _coerce(key, value)
    return conf


def dump_config(conf: dict) -> str:
    """Canonical text form: sorted ``key=value`` lines with round-trip floats."""
    return "".join(f"{k}={conf[k]!r}\n" if isinstance(conf[k], float) else f"{k}={conf[k]}\n" for k in sorted(conf))


def config_hash(conf: dict) -> str:
    """Git blob hash of the canonical config text."""
    data = dump_config(conf).encode()
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def build_objective(name: str, conf: dict) -> Objective:
    if name == "gpsample":
        return make_objective(
            name,
            dim=conf["gpsample.dim"],
            rkhs_norm=conf["gpsample.norm"],
            n_centres=conf["gpsample.centres"],
            lengthscale=conf["kernel.lengthscale"],
            seed=conf["gpsample.seed"],
        )
    return make_objective(name)


def build_run_config(conf: dict, objective: Objective, seed: int = 0) -> RunConfig:
    """Validated :class:`RunConfig` from a resolved flat config."""
    try:
        params = AlgoParams(
            B=conf["gp.B"],
            R=conf["gp.R"],
            lam=conf["gp.lambda"],
            L=conf["algo.L"],
            alpha=conf["algo.alpha"],
            c=conf["algo.c"],
            delta0=conf["algo.delta0"],
            p=conf["search.p"],
            T=conf["run.T"],
            a=conf["range.a"],
            b=conf["range.b"],
            beta_factor2=conf["beta.appendix_factor2"],
        )
        kernel = KernelSpec(
            Family.parse(conf["kernel.family"]),
            conf["kernel.lengthscale"],
            objective.dim,
            conf["kernel.nu"],
        )
        return RunConfig(
            params=params,
            kernel=kernel,
            gamma_scale=conf["gamma.c"],
            seed=seed,
            strategy=conf["search.strategy"],
            objective=objective.name,
            noise_sd=conf["noise.sd"],
            timing=conf["output.timing"],
            max_epochs=conf["run.max_epochs"] or None,
        )
    except ValueError as err:
        raise ConfigError(str(err)) from err
