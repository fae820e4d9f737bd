"""Flat ``key=value`` run configuration.

Example::

    # long-time DNLS run
    equation=dnlse
    scheme=rtransform_strang
    M=200
    tau=0.0075
    T=1.8375
    initial=paper_dnlse
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, fields, replace

from .presets import PRESETS

__all__ = ["ConfigError", "RunConfig", "parse_config", "load_config", "format_config", "EQUATION_SCHEMES"]

EQUATION_SCHEMES = {
    "cubic_nls": ("lie", "strang"),
    "dnlse": ("rtransform_strang", "cn", "rk4"),
}

REQUIRED = ("equation", "scheme", "M", "tau", "T")

DEFAULT_INITIAL = {"cubic_nls": "gaussian", "dnlse": "paper_dnlse"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    equation: str
    scheme: str
    M: int
    tau: float
    T: float
    mu: float = 1.0
    delta: float = 1.0
    initial: str = ""
    record_interval: int = 10
    output: str = ""
    snapshot: str = ""
    coeffs: str = ""

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.tau))

    @property
    def final_time(self) -> float:
        return self.n_steps * self.tau

    def with_(self, **changes) -> "RunConfig":
        return replace(self, **changes)

    def physics_key(self) -> str:
        """Hash of everything that determines the numerical result (not output paths)."""
        text = format_config(self, include_outputs=False)
        return hashlib.sha256(text.encode()).hexdigest()[:20]


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_OUTPUT_KEYS = ("output", "snapshot", "coeffs")


def _convert(key, raw, lineno):
    kind = _FIELD_TYPES[key]
    if kind == "int":
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(f"line {lineno}: {key} must be an integer, got {raw!r}") from None
        if key == "M" and not 4 <= value <= 700:
            raise ConfigError(f"line {lineno}: M must lie in [4, 700]")
        if key == "record_interval" and value < 1:
            raise ConfigError(f"line {lineno}: record_interval must be positive")
        return value
    if kind == "float":
        try:
            value = float(raw)
        except ValueError:
            raise ConfigError(f"line {lineno}: {key} must be a number, got {raw!r}") from None
        if not math.isfinite(value):
            raise ConfigError(f"line {lineno}: {key} must be finite, got {raw!r}")
        if key == "tau" and value <= 0:
            raise ConfigError(f"line {lineno}: tau must be positive")
        if key == "T" and value < 0:
            raise ConfigError(f"line {lineno}: T must be non-negative")
        return value
    return raw


def parse_config(text: str) -> RunConfig:
    values: dict = {}
    lines: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _convert(key, raw, lineno)
        lines[key] = lineno

    missing = [k for k in REQUIRED if k not in values]
    if missing:
        raise ConfigError("missing required keys: " + ", ".join(missing))

    def where(key):
        return f"line {lines[key]}: " if key in lines else ""

    eq = values["equation"]
    if eq not in EQUATION_SCHEMES:
        raise ConfigError(f"{where('equation')}equation must be one of {sorted(EQUATION_SCHEMES)}, got {eq!r}")
    if values["scheme"] not in EQUATION_SCHEMES[eq]:
        raise ConfigError(
            f"{where('scheme')}scheme {values['scheme']!r} is not available for {eq} "
            f"(choose from {', '.join(EQUATION_SCHEMES[eq])})"
        )
    values.setdefault("initial", DEFAULT_INITIAL[eq])
    if values["initial"] not in PRESETS:
        raise ConfigError(f"{where('initial')}unknown initial preset {values['initial']!r}")
    return RunConfig(**values)


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def format_config(cfg: RunConfig, include_outputs: bool = True) -> str:
    out = []
    for f in fields(RunConfig):
        value = getattr(cfg, f.name)
        if f.name in _OUTPUT_KEYS and (not include_outputs or not value):
            continue
        if isinstance(value, float):
            value = repr(value)
        out.append(f"{f.name}={value}")
    return "\n".join(out) + "\n"
