"""Verification suites, their report type and the log-log slope fit."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .config import SUITES, RunConfig
from .spectral import SampledFn, UniformGrid, cauchy_boundary, hilbert

__all__ = [
    "Check",
    "VerifyReport",
    "verify_suite",
    "fit_slope",
    "band_limited_samples",
    "box_norm2",
    "gaussian_norm2",
]


def fit_slope(table):
    """Least-squares slope of ``log err`` against ``log t``.

    Examples
    --------
    >>> fit_slope([(1, 1), (10, 0.1), (100, 0.01)])
    -1.0
    """
    rows = [(float(t), float(e)) for t, e in table]
    if len(rows) < 3:
        raise ValueError(f"need at least 3 rows, got {len(rows)}")
    t = np.array([r[0] for r in rows])
    e = np.array([r[1] for r in rows])
    if np.any(~np.isfinite(e)) or np.any(e <= 0):
        raise ValueError("errors must be finite and positive")
    if np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise ValueError("t must be positive and strictly increasing")
    slope = np.polyfit(np.log(t), np.log(e), 1)[0]
    return float(np.round(slope, 12))


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    threshold: float
    passed: bool

    def to_dict(self):
        return {"name": self.name, "value": self.value, "threshold": self.threshold,
                "pass": self.passed}


@dataclass(frozen=True)
class VerifyReport:
    """Named checks; the suite passes iff every check passes."""

    suite: str
    checks: tuple = field(default_factory=tuple)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def to_dict(self):
        return {"suite": self.suite, "checks": [c.to_dict() for c in self.checks],
                "pass": self.passed}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    def summary(self):
        lines = [f"suite {self.suite}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            lines.append(
                f"  [{'pass' if c.passed else 'FAIL'}] {c.name}: {c.value:.6g} "
                f"(threshold {c.threshold:.6g})"
            )
        return "\n".join(lines)


def _le(name, value, threshold):
    value = float(value)
    return Check(name, value, float(threshold), bool(value <= threshold))


def band_limited_samples(grid, rng, packets=6):
    """Random sum of Gaussian wave packets: decaying and numerically band-limited."""
    z = grid.points
    half = 0.5 * (grid.max - grid.min)
    mid = 0.5 * (grid.max + grid.min)
    out = np.zeros(grid.n, dtype=complex)
    for _ in range(packets):
        c = mid + rng.uniform(-0.4, 0.4) * half
        w = rng.uniform(1.0, 3.0)
        k = rng.uniform(-5.0, 5.0)
        amp = rng.normal() + 1j * rng.normal()
        out += amp * np.exp(-(((z - c) / w) ** 2) + 1j * k * z)
    return SampledFn(grid, out)


def box_norm2(amplitude=1.0, length=1.0):
    """``||q||_2^2`` of the box potential on the line."""
    return abs(amplitude) ** 2 * length


def gaussian_norm2(amplitude, width=1.0):
    """``||q||_2^2`` of ``A exp(-(x/w)^2)`` on the line."""
    return abs(amplitude) ** 2 * width * np.sqrt(np.pi / 2)


def _operators(cfg):
    rng = np.random.default_rng(cfg.seed)
    grid = UniformGrid.symmetric(cfg.z_half_width, cfg.nz)
    worst_id = worst_norm = worst_h = 0.0
    worst_line = 0.0
    for _ in range(20):
        h = band_limited_samples(grid, rng)
        nh = h.l2_norm()
        plus = cauchy_boundary(h, "plus", threads=cfg.threads)
        minus = cauchy_boundary(h, "minus", threads=cfg.threads)
        worst_id = max(worst_id, SampledFn(grid, plus.values - minus.values - h.values).l2_norm() / nh)
        worst_norm = max(worst_norm, plus.l2_norm() - nh, minus.l2_norm() - nh)
        hv = hilbert(h, threads=cfg.threads)
        worst_h = max(worst_h, SampledFn(grid, hv.values + plus.values + minus.values).l2_norm())
        for side in ("plus", "minus"):
            ln = cauchy_boundary(h, side, threads=cfg.threads, kernel="line")
            worst_line = max(worst_line, ln.l2_norm() - nh)
    return [
        _le("jump identity ||(C+ - C-)h - h|| / ||h||", worst_id, 1e-10),
        _le("contraction max(||C+-h|| - ||h||)", worst_norm, 1e-12),
        _le("hilbert identity ||Hh + (C+ + C-)h||", worst_h, 1e-12),
        _le("line-kernel contraction max(||C+-h|| - ||h||)", worst_line, 1e-12),
    ]


def _conservation(cfg):
    from .scattering import Potential, scattering_coefficients, trace_integral

    checks = []
    cases = [
        ("box A=1 L=1", Potential.box(cfg.xgrid, 1.0, 0.0, 1.0), box_norm2(1.0, 1.0)),
        ("gaussian A=0.5", Potential.gaussian(cfg.xgrid, 0.5), gaussian_norm2(0.5)),
    ]
    for label, q, norm2 in cases:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            r = scattering_coefficients(q, cfg.zgrid).r
        rel = abs(trace_integral(r) - norm2) / norm2
        checks.append(_le(f"{label}: |trace - ||q||^2| / ||q||^2", rel, 1e-3))
    return checks


def roundtrip_error(cfg, window=(-2.0, 3.0)):
    """Sup error of ``R^-1(R(q0))`` against the box samples on ``window``."""
    from .inverse import reconstruct_potential
    from .scattering import Potential, scattering_coefficients

    q = Potential.box(cfg.xgrid, 1.0, 0.0, 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        r = scattering_coefficients(q, cfg.zgrid).r
    x = cfg.xgrid.points
    inside = (x >= window[0]) & (x <= window[1])
    rec = reconstruct_potential(r, x[inside], t=0.0, tol=cfg.tol, threads=cfg.threads)
    return float(np.max(np.abs(rec.q - q.values[inside])))


def _roundtrip(cfg):
    coarse = roundtrip_error(cfg)
    fine = roundtrip_error(cfg.replace(nx=2 * cfg.nx, nz=2 * cfg.nz))
    ratio = coarse / fine if fine > 0 else np.inf
    return [
        _le("box sup error on [-2, 3]", coarse, 1e-3),
        Check("error reduction when grids double", float(ratio), 2.0, bool(ratio >= 2.0)),
    ]


def delta_checks(rng, z0s=(-1.0, 0.0, 2.0), points=100, grid=None):
    """Worst deviations of the delta identities for ``r = 0.5 exp(-z^2)``."""
    from .asymptotics import delta

    grid = grid or UniformGrid.symmetric(10.0, 4001)
    r = SampledFn.from_function(grid, lambda z: 0.5 * np.exp(-z * z))
    rho = float(np.max(np.abs(r.values)))
    lo, hi = np.sqrt(1 - rho**2), 1 / np.sqrt(1 - rho**2)
    sym = bound = unimod = jump = 0.0
    for z0 in z0s:
        zc = z0 + rng.uniform(-4, 4, points) + 1j * rng.uniform(-3, 3, points)
        zc = np.where(zc.imag == 0, zc + 1e-3j, zc)
        d = delta(r, z0, zc)
        dc = delta(r, z0, np.conj(zc))
        sym = max(sym, np.max(np.abs(d * np.conj(dc) - 1)))
        mags = np.abs(d)
        bound = max(bound, np.max(np.maximum(lo - mags, mags - hi)), np.max(np.maximum(lo - 1 / mags, 1 / mags - hi)))
        # half-plane contraction: |delta| <= 1 above, |1/delta| <= 1 below
        bound = max(bound, np.max(np.where(zc.imag > 0, mags - 1, 1 / mags - 1)))
        xr = z0 + rng.uniform(1e-3, 6.0, points)
        unimod = max(unimod, np.max(np.abs(np.abs(delta(r, z0, xr, "plus")) - 1)))
        xl = z0 - rng.uniform(1e-3, 6.0, points)
        dp, dm = delta(r, z0, xl, "plus"), delta(r, z0, xl, "minus")
        jump = max(jump, np.max(np.abs(dp - dm * (1 - np.abs(r(xl)) ** 2))))
    return {"symmetry": sym, "bounds": max(bound, 0.0), "unimodularity": unimod, "jump": jump}


def _delta(cfg):
    res = delta_checks(np.random.default_rng(cfg.seed))
    return [
        _le("symmetry |delta(z) conj(delta(conj z)) - 1|", res["symmetry"], 1e-6),
        _le("two-sided and half-plane bounds (violation)", res["bounds"], 1e-6),
        _le("unimodularity for z > z0", res["unimodularity"], 1e-6),
        _le("jump delta+ = delta- (1 - |r|^2)", res["jump"], 1e-6),
    ]


def _decay(cfg):
    from .oracle import compare_asymptotics
    from .scattering import Potential

    q0 = Potential.gaussian(cfg.xgrid, 0.3)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        table = compare_asymptotics(q0, [100, 200, 400, 800], zgrid=cfg.zgrid, dt=cfg.dt,
                                    threads=cfg.threads)
    errs = np.array(table.errors)
    worst_step = float(np.max(errs[1:] / errs[:-1]))
    checks = [Check(f"sup error at t = {t:g}", float(e), np.inf, True) for t, e in table.rows()]
    checks.append(Check("errors strictly decreasing (max ratio)", worst_step, 1.0, bool(worst_step < 1.0)))
    checks.append(_le("log-log slope", table.slope, -0.6))
    return checks


_SUITES = {
    "roundtrip": _roundtrip,
    "conservation": _conservation,
    "operators": _operators,
    "delta": _delta,
    "decay": _decay,
}


def verify_suite(name, cfg=None):
    """Run the named suite and return a :class:`VerifyReport`."""
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; expected one of {SUITES}")
    cfg = cfg or RunConfig(command="verify", suite=name)
    return VerifyReport(name, tuple(_SUITES[name](cfg)))
