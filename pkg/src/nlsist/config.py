"""Run configuration shared by the CLI and the verification suites."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass

from .spectral import UniformGrid

__all__ = ["RunConfig", "COMMANDS", "SUITES", "resolve_threads"]

COMMANDS = ("scatter", "invert", "evolve", "asym", "oracle", "verify", "decay-fit")
SUITES = ("roundtrip", "conservation", "operators", "delta", "decay")


@dataclass(frozen=True)
class RunConfig:
    """Everything a single run needs; defaults are the reference resolution."""

    command: str = "verify"
    input: str | None = None
    output: str | None = None
    suite: str | None = None
    t: float = 0.0
    x_min: float = -40.0
    x_max: float = 40.0
    nx: int = 4096
    z_half_width: float = 40.0
    nz: int = 4096
    tol: float = 1e-10
    dt: float = 0.05
    threads: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}; expected one of {COMMANDS}")
        if self.suite is not None and self.suite not in SUITES:
            raise ValueError(f"unknown suite {self.suite!r}; expected one of {SUITES}")
        for name in ("nx", "nz"):
            v = getattr(self, name)
            if int(v) != v or v < 16:
                raise ValueError(f"{name} must be an integer >= 16, got {v}")
        for name in ("tol", "dt", "z_half_width"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        if self.t < 0:
            raise ValueError("t must be >= 0")
        if self.threads is not None and self.threads < 1:
            raise ValueError("threads must be >= 1")

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - names)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**d)

    def to_dict(self):
        return dataclasses.asdict(self)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    @property
    def xgrid(self):
        return UniformGrid(self.x_min, (self.x_max - self.x_min) / (self.nx - 1), self.nx)

    @property
    def zgrid(self):
        return UniformGrid.symmetric(self.z_half_width, self.nz)


def resolve_threads(flag=None, env=None):
    """Thread count: the flag wins over ``NLS_THREADS``; ``None`` means library default."""
    if flag is not None:
        return int(flag)
    env = os.environ if env is None else env
    raw = env.get("NLS_THREADS")
    if raw in (None, ""):
        return None
    value = int(raw)
    if value < 1:
        raise ValueError("NLS_THREADS must be >= 1")
    return value
