"""Flat key=value run configuration and signal descriptions.

Config files hold one ``key = value`` pair per line; ``#`` starts a
comment. CLI flags override file values, which override the defaults
below. Signal descriptions for the simulator use dotted keys
(mean.component.1, noise.coef.0, ...), still one pair per line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

from .errors import InputError, InvalidSpecError
from .signals import MeanSpec, NoiseModel, OscillatoryComponent, Trend

AUTO = "auto"


@dataclass
class RunConfig:
    """Settings shared by detect/profile/tune runs.

    Bandwidths m, m_tilde, m_prime are positive integers or "auto"
    (minimum-volatility selection). grid_factor=1 reproduces the
    reference mesh 1/(n^{3/2} ln n); the default trades mesh density
    for tractable single-machine runs. sampling_rate_hz only affects
    reporting (Hz = omega * rate / (2 pi)).
    """

    alpha: float = 0.05
    beta: float = 0.05
    m: int | str = AUTO
    m_tilde: int | str = AUTO
    m_prime: int | str = AUTO
    K: int = 1000
    K0: int = 1000
    delta0: float = 0.1
    grid_factor: float = 0.05
    seed: int = 1
    sampling_rate_hz: float | None = None
    burn_in: int = 200
    workers: int = 1

    def validate(self) -> None:
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise InputError(f"{name} must lie in (0, 1), got {v}")
        for name in ("m", "m_tilde", "m_prime"):
            v = getattr(self, name)
            if v != AUTO and (not isinstance(v, int) or v < 1):
                raise InputError(f"{name} must be 'auto' or a positive integer")
        if not (0.0 < self.delta0 < math.pi):
            raise InputError(f"delta0 must lie in (0, pi), got {self.delta0}")
        if not (0.0 < self.grid_factor <= 1.0):
            raise InputError(f"grid_factor must lie in (0, 1], got {self.grid_factor}")
        if self.K < 100 or self.K0 < 100:
            raise InputError("K and K0 must be >= 100")
        if self.workers < 1:
            raise InputError("workers must be >= 1")

    def bandwidth(self, name: str) -> int | None:
        """None when the bandwidth is left to the tuning scan."""
        v = getattr(self, name)
        return None if v == AUTO else int(v)


_INT_KEYS = {"K", "K0", "seed", "burn_in", "workers", "n"}
_FLOAT_KEYS = {"alpha", "beta", "delta0", "grid_factor", "sampling_rate_hz"}
_BANDWIDTH_KEYS = {"m", "m_tilde", "m_prime"}


def parse_config_file(path) -> dict:
    """Raw key -> string mapping from a flat key=value file."""
    raw = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise InputError(f"{path}: expected key = value at line {lineno}")
        key, value = stripped.split("=", 1)
        raw[key.strip()] = value.strip()
    return raw


def coerce_value(key: str, value: str):
    try:
        if key in _BANDWIDTH_KEYS:
            return AUTO if value == AUTO else int(value)
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except ValueError:
        raise InputError(f"config key {key}: cannot parse {value!r}") from None
    return value


def build_run_config(file_values: dict | None = None, overrides: dict | None = None) -> RunConfig:
    """Defaults <- config file <- CLI overrides, then validate."""
    cfg = RunConfig()
    known = {f.name for f in fields(RunConfig)}
    for source in (file_values or {}), (overrides or {}):
        for key, value in source.items():
            if key not in known:
                continue
            setattr(cfg, key, coerce_value(key, value) if isinstance(value, str) else value)
    cfg.validate()
    return cfg


def _parse_component(text: str) -> OscillatoryComponent:
    omega = None
    segments = None
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        key, _, value = part.partition("=")
        key = key.strip()
        if key == "omega":
            omega = float(value)
        elif key == "segments":
            segments = []
            for seg in value.split(","):
                b, a, c = seg.split(":")
                segments.append((int(b), float(a), float(c)))
        else:
            raise InputError(f"unknown component field {key!r}")
    if omega is None or not segments:
        raise InputError("component needs omega=... and segments=b:Acos:Bsin,...")
    return OscillatoryComponent(omega, tuple(segments))


def _parse_trend(text: str) -> Trend:
    kind, _, arg = text.partition(":")
    kind = kind.strip()
    if kind == "zero":
        return Trend.zero()
    if kind == "linear":
        return Trend.linear(float(arg))
    if kind == "poly":
        return Trend.polynomial([float(c) for c in arg.split(",")])
    raise InputError(f"unknown trend {text!r}")


def parse_signal_config(raw: dict):
    """Extract (MeanSpec, NoiseModel | None, n, seed) from raw key=values."""
    if "n" not in raw:
        raise InputError("simulation config needs n = <length>")
    n = int(raw["n"])
    seed = int(raw.get("seed", "1"))
    comps = []
    for key in sorted(k for k in raw if k.startswith("mean.component.")):
        try:
            comps.append(_parse_component(raw[key]))
        except (ValueError, InvalidSpecError) as exc:
            raise InputError(f"bad {key}: {exc}") from exc
    trend = _parse_trend(raw["mean.trend"]) if "mean.trend" in raw else Trend.zero()
    mean = MeanSpec(components=tuple(comps), trend=trend)

    kind = raw.get("noise", "none").strip()
    if kind.lower() == "none":
        return mean, None, n, seed
    if kind.upper() in ("M1", "M2", "M3", "M4"):
        noise = NoiseModel.named(kind)
    elif kind == "custom":
        breaks = tuple(float(s) for s in raw.get("noise.breaks", "").split(",") if s.strip())
        n_pieces = len(breaks) + 1
        exprs = []
        for j in range(n_pieces):
            key = f"noise.coef.{j}"
            if key not in raw:
                raise InputError(f"custom noise needs {key}")
            exprs.append(raw[key])
        innovation = raw.get("noise.innovation", "standard_normal")
        df = 5.0
        if innovation.startswith("student_t"):
            _, _, dfs = innovation.partition(":")
            df = float(dfs) if dfs else 5.0
            innovation = "student_t"
        try:
            noise = NoiseModel.custom(breaks, exprs, innovation, df)
        except InvalidSpecError as exc:
            raise InputError(str(exc)) from exc
    else:
        raise InputError(f"unknown noise kind {kind!r}")
    return mean, noise, n, seed
