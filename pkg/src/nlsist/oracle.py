"""Split-step Fourier integrator for ``i q_t + q_xx - 2|q|^2 q = 0``.

Independent of the scattering machinery: used to check the inverse map and
the long-time formula.  The x-grid is treated as one period; decaying data
emulate the line as long as nothing reaches the ends of the box.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from .spectral import SampledFn, TruncationWarning, UniformGrid, _workers

__all__ = [
    "FieldState",
    "StepperConfig",
    "ResolutionWarning",
    "DecayTable",
    "split_step_evolve",
    "spectral_tail",
    "compare_asymptotics",
    "cushion_half_width",
    "oracle_spacing",
    "resample",
]


class ResolutionWarning(UserWarning):
    """The spectrum of the field is not resolved by the x-grid."""

    def __init__(self, message, magnitude=None):
        super().__init__(message)
        self.magnitude = magnitude


@dataclass(frozen=True, eq=False)
class FieldState:
    """Field samples ``q`` on a periodic x-grid at time ``t``."""

    grid: UniformGrid
    q: np.ndarray = field(repr=False)
    t: float = 0.0

    def __post_init__(self):
        q = np.asarray(self.q, dtype=complex)
        if q.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {q.shape}")
        if not np.all(np.isfinite(q)):
            raise ValueError("field contains NaN or Inf")
        if not math.isfinite(self.t):
            raise ValueError("t must be finite")
        q = q.copy()
        q.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "t", float(self.t))

    @classmethod
    def from_samples(cls, samples, t=0.0):
        return cls(samples.grid, samples.values, t)

    @property
    def samples(self):
        return SampledFn(self.grid, self.q)

    def l2_norm(self):
        return float(np.sqrt(self.grid.step * np.sum(np.abs(self.q) ** 2)))

    def to_dict(self):
        d = self.samples.to_dict()
        d["t"] = self.t
        return d

    @classmethod
    def from_dict(cls, d):
        s = SampledFn.from_dict(d)
        return cls(s.grid, s.values, float(d.get("t", 0.0)))

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class StepperConfig:
    """Time step of the (fixed) Strang split-step scheme."""

    dt: float = 1e-3
    scheme: str = "strang"

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.scheme != "strang":
            raise ValueError("only the Strang split-step scheme is available")


def spectral_tail(q, fraction=0.1):
    """Largest ``|q^|`` over the outer ``fraction`` of frequency bins, relative to the peak."""
    spec = np.abs(np.fft.fftshift(np.fft.fft(q)))
    peak = spec.max()
    if peak == 0:
        return 0.0
    n = spec.size
    k = max(1, int(fraction * n / 2))
    return float(max(spec[:k].max(), spec[-k:].max()) / peak)


def _check(q, tail_tol, edge_tol, when):
    tail = spectral_tail(q)
    if tail > tail_tol:
        warnings.warn(
            ResolutionWarning(
                f"{when}: spectral tail {tail:.2e} of peak exceeds {tail_tol:.0e}; "
                "refine the x-grid",
                tail,
            ),
            stacklevel=3,
        )
    peak = np.abs(q).max()
    if peak > 0:
        edge = max(abs(q[0]), abs(q[-1])) / peak
        if edge > edge_tol:
            warnings.warn(
                TruncationWarning(
                    f"{when}: field reaches the box ends ({edge:.2e} of peak); "
                    "widen the periodic domain",
                    edge,
                ),
                stacklevel=3,
            )


def split_step_evolve(q0, t_final, cfg=None, threads=None, tail_tol=1e-8, edge_tol=1e-6):
    """Advance ``q0`` to ``t_final`` with Strang splitting.

    Half a nonlinear rotation ``q -> q exp(-2i|q|^2 dt/2)``, a full free step
    ``q^ -> exp(-i xi^2 dt) q^``, another half rotation.  The step is shrunk
    so that an integer number of steps lands on ``t_final``.  Consecutive
    half rotations are fused.  Warns (:class:`ResolutionWarning`) when the
    spectral tail exceeds ``tail_tol`` of the peak at the start or end.
    """
    cfg = cfg or StepperConfig()
    t_final = float(t_final)
    span = t_final - q0.t
    if span < 0:
        raise ValueError(f"t_final = {t_final} is before the initial time {q0.t}")
    q = np.array(q0.q, dtype=complex)
    _check(q, tail_tol, edge_tol, "initial field")
    if span == 0 or not np.any(q):
        return FieldState(q0.grid, q, t_final)
    steps = max(1, math.ceil(span / cfg.dt - 1e-9))
    dt = span / steps
    xi = 2 * np.pi * scipy.fft.fftfreq(q0.grid.n, q0.grid.step)
    free = np.exp(-1j * xi * xi * dt)
    workers = _workers(threads)
    q *= np.exp(-1j * np.abs(q) ** 2 * dt)
    for k in range(steps):
        q = scipy.fft.ifft(scipy.fft.fft(q, workers=workers) * free, workers=workers)
        rot = dt if k == steps - 1 else 2 * dt
        q *= np.exp(-1j * np.abs(q) ** 2 * rot)
    _check(q, tail_tol, edge_tol, f"field at t = {t_final:g}")
    return FieldState(q0.grid, q, t_final)


def _cutoff(r, level):
    # largest |z| with |r(z)| > level * sup|r|
    mag = np.abs(r.values)
    if mag.max() == 0:
        return 0.0
    return float(np.abs(r.grid.points[mag > level * mag.max()]).max())


def cushion_half_width(r, t_max, window, level=1e-7):
    """Periodic half-width that keeps radiation out of ``|x| <= window`` up to ``t_max``.

    Spectral content at ``z`` travels with speed ``2|z|``; beyond the largest
    ``|z|`` with ``|r(z)| > level * sup|r|`` the reflection is negligible.
    A box holding that front plus the window sees no wrap-around.
    """
    return float(window + 2.0 * t_max * _cutoff(r, level))


def oracle_spacing(r, level=1e-7):
    """Spacing whose Nyquist frequency is twice the largest ``|z|`` carried by ``r``."""
    zc = _cutoff(r, level)
    return math.inf if zc == 0 else float(np.pi / (2.0 * zc))


def resample(f, x):
    """Band-limited (trigonometric) interpolation of decaying samples ``f`` at ``x``.

    Frequencies above the Nyquist limit of the spacing of ``x`` are dropped,
    so that coarser output grids do not inherit the spectral tail a linear
    interpolant would create.  Points outside the grid of ``f`` get zero.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape, dtype=complex)
    g = f.grid
    inside = (x >= g.min) & (x <= g.max)
    if not np.any(inside):
        return out
    dx = np.min(np.diff(x)) if x.size > 1 else g.step
    xi = 2 * np.pi * np.fft.fftfreq(g.n, g.step)
    coef = np.fft.fft(f.values) / g.n
    keep = np.abs(xi) < np.pi / max(dx, g.step)
    xi, coef = xi[keep], coef[keep]
    xs = x[inside] - g.min
    for start in range(0, xs.size, 512):
        chunk = xs[start:start + 512]
        out_idx = np.nonzero(inside)[0][start:start + 512]
        out[out_idx] = np.exp(1j * np.outer(chunk, xi)) @ coef
    return out


@dataclass(frozen=True)
class DecayTable:
    """Rows ``(t, sup_err)`` and the fitted log-log slope.

    ``slope`` is ``-inf`` (the exact-match sentinel) when every error is zero.
    """

    times: tuple
    errors: tuple
    slope: float

    def rows(self):
        return list(zip(self.times, self.errors))

    def to_csv(self):
        lines = ["t,sup_err"] + [f"{t!r},{e!r}" for t, e in self.rows()]
        return "\n".join(lines) + "\n"


def compare_asymptotics(q0, times, zgrid=None, window=None, dx=None, half_width=None,
                        dt=0.02, dt_initial=2e-3, t_initial=5.0, threads=None):
    """Sup error between the oracle field and the long-time formula at each ``t``.

    ``q0`` is a :class:`~nlsist.scattering.Potential`.  ``r`` is computed on
    ``zgrid`` (default: 4096 points on ``[-40, 40]``).  The comparison
    window is ``|x| <= sqrt(t)`` unless ``window`` (a callable of ``t``) is
    given.  The oracle runs on a periodic box of half-width ``half_width``
    (default from :func:`cushion_half_width`) and spacing ``dx`` (default:
    :func:`oracle_spacing`, but never finer than the potential's grid), with
    step ``dt_initial`` up to ``t_initial`` and ``dt`` afterwards.
    """
    from .asymptotics import q_asymptotic
    from .scattering import scattering_coefficients
    from .verify import fit_slope

    times = [float(t) for t in times]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("times must be strictly increasing")
    if times and times[0] < 10:
        raise ValueError("compare_asymptotics needs t >= 10")
    if window is None:
        window = np.sqrt
    xgrid = q0.grid
    if not np.any(q0.values):
        return DecayTable(tuple(times), tuple(0.0 for _ in times), -math.inf)
    if zgrid is None:
        zgrid = UniformGrid.symmetric(40.0, 4096)
    r = scattering_coefficients(q0, zgrid).r
    w_max = window(times[-1])
    if half_width is None:
        half_width = cushion_half_width(r, times[-1], w_max)
    dx = max(xgrid.step, oracle_spacing(r)) if dx is None else float(dx)
    n = int(scipy.fft.next_fast_len(int(np.ceil(2 * half_width / dx))))
    box = UniformGrid(-(n // 2) * dx, dx, n)
    x = box.points
    state = FieldState(box, resample(q0.samples, x), 0.0)
    if t_initial > 0:
        state = split_step_evolve(state, min(t_initial, times[0]), StepperConfig(dt_initial), threads)
    errors = []
    for t in times:
        state = split_step_evolve(state, t, StepperConfig(dt), threads)
        inside = np.abs(x) <= window(t)
        q_as = q_asymptotic(r, x[inside], t)
        errors.append(float(np.max(np.abs(state.q[inside] - q_as))))
    slope = fit_slope(list(zip(times, errors))) if len(times) >= 3 else float("nan")
    return DecayTable(tuple(times), tuple(errors), slope)
