"""Sweep configuration, loaded from TOML.

Example::

    name = "hartogs-normal"
    quantities = ["MK", "normalizers"]

    [domain]
    kind = "hartogs"      # or "product"
    n = 1
    m = 1

    [curve]
    schedule = "normal"   # or "default" (cone curve)
    alpha = 1.0
    N = 2

    [grid]
    log_d = [-20, -40, -60]
    epsilon = [0.1, 0.3]
    delta = [0.05, 0.2]
    xi = [["1", "0"], ["0", "1"]]   # complex entries as strings or numbers
    # (epsilon, delta, log_d) rungs along which the bracket must tighten
    ladder = [[0.3, 0.2, -20], [0.1, 0.05, -60]]

    [engine]
    dmax = 20

    [output]
    csv = "out/hartogs-normal.csv"
    json = "out/hartogs-normal.json"
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from flatlab.errors import ConfigError
from flatlab.geometry import ConeCurve, HartogsFlat, ProductDiscBall
from flatlab.hartogs import EngineConfig
from flatlab.profile import Profile

__all__ = ["SweepConfig", "QUANTITIES", "load_config", "parse_config"]

QUANTITIES = ("J", "R", "S", "MF", "MK", "kernel", "normalizers")


def _complex_vector(raw, where):
    try:
        return tuple(complex(str(v).replace(" ", "")) for v in raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: cannot parse {raw!r} as a complex vector") from exc


@dataclass(frozen=True)
class SweepConfig:
    name: str
    domain_kind: str
    n: int
    m: int
    r1: float
    r2: float
    curve_schedule: str
    alpha: float
    N: float
    direction: tuple
    log_d: tuple
    epsilon: tuple
    delta: tuple
    xi: tuple
    quantities: tuple
    engine: EngineConfig = field(default_factory=EngineConfig)
    ladder: tuple = ()
    samples: int = 10_000
    seed: int = 0
    workers: int = 1
    csv_path: str | None = None
    json_path: str | None = None

    def __post_init__(self):
        if self.domain_kind not in ("hartogs", "product"):
            raise ConfigError(f"domain.kind must be 'hartogs' or 'product', got {self.domain_kind!r}")
        if self.n < 1 or self.m < 1:
            raise ConfigError("n and m must be positive integers")
        if any(not math.isfinite(x) for x in self.log_d):
            raise ConfigError("grid.log_d must be finite")
        if any(b >= a for a, b in zip(self.log_d, self.log_d[1:])):
            raise ConfigError("grid.log_d must be strictly decreasing")
        if self.domain_kind == "hartogs" and any(x >= 0 for x in self.log_d):
            raise ConfigError("grid.log_d must be negative")
        for label, vals in (("epsilon", self.epsilon), ("delta", self.delta)):
            if not vals or any(not 0 < v < 1 for v in vals):
                raise ConfigError(f"grid.{label} values must lie in (0, 1)")
        if not self.xi:
            raise ConfigError("grid.xi must list at least one vector")
        for v in self.xi:
            if len(v) != self.n + 1:
                raise ConfigError(f"xi {v} must have {self.n + 1} entries")
            if not any(v):
                raise ConfigError("xi vectors must be nonzero")
        bad = set(self.quantities) - set(QUANTITIES)
        if bad:
            raise ConfigError(f"unknown quantities {sorted(bad)}; choose from {QUANTITIES}")
        for rung in self.ladder:
            eps, delta, log_d = rung
            if eps not in self.epsilon or delta not in self.delta or log_d not in self.log_d:
                raise ConfigError(f"ladder rung {rung} is not on the sweep grid")
        if self.samples < 1 or self.workers < 1:
            raise ConfigError("samples and workers must be positive")

    def domain(self):
        if self.domain_kind == "product":
            return ProductDiscBall(self.n)
        return HartogsFlat(Profile(self.m), n=self.n, r1=self.r1, r2=self.r2)

    def curve(self) -> ConeCurve:
        return ConeCurve(
            alpha=self.alpha, N=self.N, direction=self.direction, schedule=self.curve_schedule
        )

    def xi_arrays(self):
        return [np.array(v, dtype=complex) for v in self.xi]


def parse_config(data: dict) -> SweepConfig:
    """Build a SweepConfig from a parsed TOML table."""
    try:
        dom = data.get("domain", {})
        cur = data.get("curve", {})
        grid = data["grid"]
        out = data.get("output", {})
        n = int(dom.get("n", 1))
        xi_raw = grid.get("xi", [[1] + [0] * n])
        engine = EngineConfig(**data.get("engine", {}))
        direction = cur.get("direction", [1.0] + [0.0] * (n - 1))

        def path(key):
            p = out.get(key)
            return None if p is None else str(p)

        return SweepConfig(
            name=str(data.get("name", "sweep")),
            domain_kind=str(dom.get("kind", "hartogs")),
            n=n,
            m=int(dom.get("m", 1)),
            r1=float(dom.get("r1", 1.0)),
            r2=float(dom.get("r2", 1.0)),
            curve_schedule=str(cur.get("schedule", "normal")),
            alpha=float(cur.get("alpha", 1.0)),
            N=float(cur.get("N", 2.0)),
            direction=_complex_vector(direction, "curve.direction"),
            log_d=tuple(float(x) for x in grid.get("log_d", [0.0])),
            epsilon=tuple(float(x) for x in grid.get("epsilon", [0.1])),
            delta=tuple(float(x) for x in grid.get("delta", [0.05])),
            xi=tuple(_complex_vector(v, "grid.xi") for v in xi_raw),
            quantities=tuple(data.get("quantities", ["MK", "normalizers"])),
            engine=engine,
            ladder=tuple(tuple(float(x) for x in rung) for rung in grid.get("ladder", [])),
            samples=int(data.get("samples", 10_000)),
            seed=int(data.get("seed", 0)),
            workers=int(data.get("workers", 1)),
            csv_path=path("csv"),
            json_path=path("json"),
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid sweep config: {exc}") from exc


def load_config(path) -> SweepConfig:
    """Read a TOML file; relative output paths are taken relative to the working directory."""
    path = Path(path)
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(data)
