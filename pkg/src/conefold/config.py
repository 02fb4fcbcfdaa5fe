"""Run configuration: a flat key=value text file overridable by CLI flags."""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    input: str = ""
    out: str = "out"
    radius: float = 0.3          # germ trust radius, |w| <= radius
    samples: int = 6             # continuation samples per half-axis
    grid: int = 41               # dehn-map grid resolution per axis
    curve_tol: float = 1e-6      # extraneous-factor sampling tolerance
    newton_tol: float = 1e-12
    germ: str = "curve"          # continuation | curve | synthetic:<a3>
    seed: int = 0

    def validate(self):
        if self.radius <= 0 or self.radius > 0.5:
            raise ConfigError(f"trust radius {self.radius} outside (0, 0.5]")
        for name in ("curve_tol", "newton_tol"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.samples < 2:
            raise ConfigError("need at least 2 samples per half-axis")
        g = self.germ
        if g not in ("continuation", "curve") and not g.startswith("synthetic:"):
            raise ConfigError(f"unknown germ backend {g!r}")
        if g.startswith("synthetic:"):
            try:
                float(g.split(":", 1)[1])
            except ValueError:
                raise ConfigError(f"bad synthetic germ coefficient in {g!r}") from None
        return self


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def load_config(path=None, overrides=None):
    """Build a RunConfig from an optional key=value file plus overrides."""
    cfg = RunConfig()
    if path:
        text = Path(path).read_text(encoding="utf-8")
        for ln, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, val = line.partition("=")
            key = key.strip()
            if not sep or key not in _FIELD_TYPES:
                raise ConfigError(f"bad config line {ln}: {raw!r}")
            _assign(cfg, key, val.strip())
    for key, val in (overrides or {}).items():
        if val is not None:
            _assign(cfg, key, val)
    return cfg.validate()


def _assign(cfg, key, val):
    want = _FIELD_TYPES[key]
    if want in ("float", float):
        val = float(val)
    elif want in ("int", int):
        val = int(val)
    setattr(cfg, key, val)
