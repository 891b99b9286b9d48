"""Uniform grids, sampled functions and Cauchy/Hilbert operators on the real line.

Fourier convention (continuum normalised)::

    f^(xi) = (2 pi)^(-1/2) * integral f(z) exp(-i xi z) dz

Under this convention the Cauchy boundary operators are Fourier multipliers:
``C+`` keeps the frequencies ``xi >= 0`` and ``C-`` is ``C+ - 1``.  The zero
bin goes entirely to ``C+`` and, for even ``n``, the Nyquist bin to ``C-``.
"""

from __future__ import annotations

import functools
import json
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.fft

__all__ = [
    "UniformGrid",
    "SampledFn",
    "SampledMatrixFn",
    "TruncationWarning",
    "SIGMA",
    "SIGMA3",
    "ad_sigma",
    "exp_ad_sigma",
    "fourier_pair",
    "cauchy_boundary",
    "cauchy_projector",
    "hilbert",
    "cauchy_offcontour",
    "check_decay",
    "DEFAULT_DECAY_TOL",
]

DEFAULT_DECAY_TOL = 1e-6

_MATRIX_KEYS = ("11", "12", "21", "22")


class TruncationWarning(UserWarning):
    """A sampled function is not numerically supported inside its grid.

    ``magnitude`` holds the measured endpoint magnitude relative to the peak.
    """

    def __init__(self, message, magnitude=None):
        super().__init__(message)
        self.magnitude = magnitude


@dataclass(frozen=True)
class UniformGrid:
    """Uniform grid ``min + k*step`` for ``0 <= k < n``."""

    min: float
    step: float
    n: int

    def __post_init__(self):
        if not (np.isfinite(self.min) and np.isfinite(self.step)):
            raise ValueError("grid min and step must be finite")
        if self.step <= 0:
            raise ValueError(f"grid step must be positive, got {self.step}")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"grid needs n >= 2 points, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "min", float(self.min))
        object.__setattr__(self, "step", float(self.step))

    @classmethod
    def symmetric(cls, half_width, n):
        """Grid on ``[-half_width, half_width]`` including both endpoints."""
        if half_width <= 0:
            raise ValueError("half_width must be positive")
        step = 2.0 * half_width / (n - 1)
        return cls(-step * (n - 1) / 2.0, step, n)

    @property
    def max(self):
        return self.min + (self.n - 1) * self.step

    @property
    def points(self):
        return self.min + self.step * np.arange(self.n)

    def point(self, k):
        if not 0 <= k < self.n:
            raise IndexError(k)
        return self.min + k * self.step

    def dual(self):
        """Frequency grid paired with this grid by the discrete transform."""
        dxi = 2.0 * np.pi / (self.n * self.step)
        return UniformGrid(-(self.n // 2) * dxi, dxi, self.n)

    def refined(self, factor=2):
        """Same interval with ``factor`` times as many intervals."""
        return UniformGrid(self.min, self.step / factor, (self.n - 1) * factor + 1)

    def to_dict(self):
        return {"min": self.min, "step": self.step, "n": self.n}

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["min"]), float(d["step"]), int(d["n"]))


def _finite_complex(values, name="values"):
    arr = np.asarray(values, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


@dataclass(frozen=True, eq=False)
class SampledFn:
    """Complex scalar function sampled on a :class:`UniformGrid`."""

    grid: UniformGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = _finite_complex(self.values)
        if vals.shape != (self.grid.n,):
            raise ValueError(
                f"expected {self.grid.n} samples, got array of shape {vals.shape}"
            )
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, grid, func):
        return cls(grid, func(grid.points))

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.n, dtype=complex))

    @property
    def points(self):
        return self.grid.points

    def with_values(self, values):
        return SampledFn(self.grid, values)

    def l2_norm(self):
        return float(np.sqrt(self.grid.step * np.sum(np.abs(self.values) ** 2)))

    def sup_norm(self):
        return float(np.max(np.abs(self.values)))

    def integral(self):
        """Trapezoid rule over the grid."""
        v = self.values
        return complex(self.grid.step * (v.sum() - 0.5 * (v[0] + v[-1])))

    def __call__(self, z):
        """Linear interpolation; zero outside the grid."""
        z = np.asarray(z, dtype=float)
        x = self.grid.points
        re = np.interp(z, x, self.values.real, left=0.0, right=0.0)
        im = np.interp(z, x, self.values.imag, left=0.0, right=0.0)
        return re + 1j * im

    def to_dict(self):
        return {
            "grid": self.grid.to_dict(),
            "re": self.values.real.tolist(),
            "im": self.values.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        grid = UniformGrid.from_dict(d["grid"])
        re = np.asarray(d["re"], dtype=float)
        im = np.asarray(d["im"], dtype=float)
        if re.shape != im.shape:
            raise ValueError("'re' and 'im' have different lengths")
        return cls(grid, re + 1j * im)

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class SampledMatrixFn:
    """2x2 complex matrix function sampled on a grid; ``values`` has shape (n, 2, 2)."""

    grid: UniformGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = _finite_complex(self.values)
        if vals.shape != (self.grid.n, 2, 2):
            raise ValueError(
                f"expected shape {(self.grid.n, 2, 2)}, got {vals.shape}"
            )
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def identity(cls, grid):
        return cls(grid, np.broadcast_to(np.eye(2, dtype=complex), (grid.n, 2, 2)))

    def entry(self, i, j):
        """Entry (i, j), 1-based as in matrix notation, as a :class:`SampledFn`."""
        return SampledFn(self.grid, self.values[:, i - 1, j - 1])

    def l2_norm(self):
        return float(np.sqrt(self.grid.step * np.sum(np.abs(self.values) ** 2)))

    def to_dict(self):
        out = {"grid": self.grid.to_dict()}
        for key in _MATRIX_KEYS:
            i, j = int(key[0]) - 1, int(key[1]) - 1
            out[key] = {
                "re": self.values[:, i, j].real.tolist(),
                "im": self.values[:, i, j].imag.tolist(),
            }
        return out

    @classmethod
    def from_dict(cls, d):
        grid = UniformGrid.from_dict(d["grid"])
        vals = np.empty((grid.n, 2, 2), dtype=complex)
        for key in _MATRIX_KEYS:
            i, j = int(key[0]) - 1, int(key[1]) - 1
            vals[:, i, j] = np.asarray(d[key]["re"]) + 1j * np.asarray(d[key]["im"])
        return cls(grid, vals)

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


# Pauli-type constants.  ``SIGMA`` generates the ZS-AKNS phase e^{i x z sigma}.
SIGMA = np.diag([0.5, -0.5]).astype(complex)
SIGMA3 = np.diag([1.0, -1.0]).astype(complex)


def ad_sigma(a):
    """Commutator ``[sigma, A]``: zero diagonal, off-diagonal (b, c) -> (b, -c).

    Works on a single 2x2 matrix or on a stack with trailing shape (2, 2).
    """
    a = np.asarray(a, dtype=complex)
    out = np.zeros_like(a)
    out[..., 0, 1] = a[..., 0, 1]
    out[..., 1, 0] = -a[..., 1, 0]
    return out


def exp_ad_sigma(theta, a):
    """``exp(theta ad sigma) A = e^{theta sigma} A e^{-theta sigma}``.

    ``theta`` may be complex and may broadcast against the leading axes of ``a``.
    """
    a = np.asarray(a, dtype=complex)
    theta = np.asarray(theta)
    out = a.copy()
    out[..., 0, 1] = a[..., 0, 1] * np.exp(theta)
    out[..., 1, 0] = a[..., 1, 0] * np.exp(-theta)
    return out


def _workers(threads):
    return None if threads is None else int(threads)


def fourier_pair(f, direction="forward", grid=None, threads=None):
    """Continuum-normalised Fourier transform of sampled data.

    Parameters
    ----------
    f : SampledFn
        Input samples.
    direction : {"forward", "inverse"}
        ``forward`` maps z-samples to xi-samples on ``f.grid.dual()``.
        ``inverse`` maps xi-samples back to physical space.
    grid : UniformGrid, optional
        Output grid for ``inverse``.  Defaults to ``f.grid.dual()``, which is
        the grid the forward transform came from whenever that grid was
        FFT-centred (``min == -(n//2)*step``).

    Returns
    -------
    SampledFn
    """
    if direction not in ("forward", "inverse"):
        raise ValueError(f"direction must be 'forward' or 'inverse', not {direction!r}")
    src = f.grid
    if direction == "forward":
        out = src.dual()
        phase_k = np.exp(-1j * out.min * src.step * np.arange(src.n))
        spec = scipy.fft.fft(f.values * phase_k, workers=_workers(threads))
        vals = src.step / np.sqrt(2 * np.pi) * np.exp(-1j * out.points * src.min) * spec
        return SampledFn(out, vals)

    out = grid if grid is not None else src.dual()
    if out.n != src.n or not np.isclose(out.step * src.step * src.n, 2 * np.pi):
        raise ValueError("output grid is not dual to the input grid")
    pre = f.values * np.exp(1j * src.points * out.min)
    body = scipy.fft.ifft(pre, workers=_workers(threads)) * src.n
    vals = src.step / np.sqrt(2 * np.pi) * np.exp(1j * src.min * out.step * np.arange(out.n)) * body
    return SampledFn(out, vals)


def check_decay(values, tol=DEFAULT_DECAY_TOL, what="function", axis=0):
    """Warn with :class:`TruncationWarning` when endpoint samples are not small.

    Returns the endpoint magnitude relative to the peak.
    """
    v = np.abs(np.asarray(values))
    peak = v.max()
    if peak == 0:
        return 0.0
    ends = max(np.take(v, 0, axis=axis).max(), np.take(v, -1, axis=axis).max())
    rel = float(ends / peak)
    if tol is not None and rel > tol:
        warnings.warn(
            TruncationWarning(
                f"{what} does not decay at the grid ends: "
                f"endpoint/peak = {rel:.3e} > {tol:.1e}",
                magnitude=rel,
            ),
            stacklevel=3,
        )
    return rel


def _plus_mask(n):
    return scipy.fft.fftfreq(n) >= 0


@functools.lru_cache(maxsize=16)
def _line_kernel(n):
    """FFT of the discrete line Hilbert kernel ``2/(pi m)`` (odd m), zero-padded."""
    size = scipy.fft.next_fast_len(2 * n)
    m = np.arange(size)
    m = np.where(m < size // 2, m, m - size)
    kern = np.zeros(size)
    odd = m % 2 != 0
    kern[odd] = 2.0 / (np.pi * m[odd])
    return size, scipy.fft.fft(kern)


def cauchy_projector(values, side, axis=-1, threads=None, kernel="periodic"):
    """C+/C- applied to raw sample arrays along ``axis`` (no validation).

    ``kernel="periodic"`` multiplies the DFT by the indicator of the
    non-negative frequencies: an exact orthogonal projection that treats the
    samples as one period.  ``kernel="line"`` uses ``C+ = 1/2 + (i/2) Hd``
    where ``Hd`` is the discrete Hilbert transform of the sinc interpolant on
    the whole line (kernel ``2/(pi m)`` on odd offsets), applied as a
    zero-padded convolution; it carries no periodisation error for decaying
    data, which is what the Riemann-Hilbert solver needs.  In both cases
    ``C- = C+ - 1``.
    """
    if side not in ("plus", "minus"):
        raise ValueError(f"side must be 'plus' or 'minus', not {side!r}")
    workers = _workers(threads)
    if kernel == "periodic":
        spec = scipy.fft.fft(values, axis=axis, workers=workers)
        shape = [1] * np.ndim(values)
        n = np.shape(values)[axis]
        shape[axis] = n
        mask = _plus_mask(n).reshape(shape)
        spec = spec * mask if side == "plus" else -spec * ~mask
        return scipy.fft.ifft(spec, axis=axis, workers=workers)
    if kernel != "line":
        raise ValueError(f"kernel must be 'periodic' or 'line', not {kernel!r}")
    vals = np.moveaxis(np.asarray(values, dtype=complex), axis, -1)
    n = vals.shape[-1]
    size, kern_hat = _line_kernel(n)
    conv = scipy.fft.ifft(
        scipy.fft.fft(vals, n=size, workers=workers) * kern_hat, workers=workers
    )[..., :n]
    out = 0.5 * vals + 0.5j * conv
    if side == "minus":
        out = out - vals
    return np.moveaxis(out, -1, axis)


def cauchy_boundary(h, side, decay_tol=DEFAULT_DECAY_TOL, threads=None, kernel="periodic"):
    """Boundary value ``C+ h`` or ``C- h`` of the Cauchy integral of ``h``.

    Computed spectrally as a Hardy-space projection, so that
    ``C+ h - C- h == h`` on the grid up to round-off.  See
    :func:`cauchy_projector` for the two kernels.

    Issues :class:`TruncationWarning` if ``|h|`` at the grid ends exceeds
    ``decay_tol`` times its peak (pass ``decay_tol=None`` to skip the check).
    """
    check_decay(h.values, decay_tol, "cauchy_boundary input")
    return SampledFn(h.grid, cauchy_projector(h.values, side, threads=threads, kernel=kernel))


def hilbert(h, decay_tol=DEFAULT_DECAY_TOL, threads=None, kernel="periodic"):
    """Hilbert transform with the ``ds/(i pi)`` kernel, ``H = -(C+ + C-)``."""
    check_decay(h.values, decay_tol, "hilbert input")
    plus = cauchy_projector(h.values, "plus", threads=threads, kernel=kernel)
    # C- = C+ - 1, so -(C+ + C-) = h - 2 C+
    return SampledFn(h.grid, h.values - 2.0 * plus)


def _tail_integral(s_end, z, direction):
    """integral over the tail beyond ``s_end`` of ``(s_end/s)**2 / (s - z) ds``.

    ``direction`` is +1 for ``(s_end, +inf)`` and -1 for ``(-inf, s_end)``.
    Models an algebraic ``1/s^2`` tail; vanishes when the samples already decay.
    """
    # 1/(s^2 (s-z)) = 1/(z^2 (s-z)) - 1/(z^2 s) - 1/(z s^2)
    S = s_end
    if direction > 0:
        # int_S^inf = -(1/z^2) log((S - z)/S) - 1/(z S)
        return S * S * (-np.log((S - z) / S) / z**2 - 1.0 / (z * S))
    # int_-inf^S: substitute s -> -s with S' = -S, z' = -z: integrand becomes
    # S'^2/s^2 * 1/(-s - z) = -S'^2/s^2 * 1/(s - z')
    Sp, zp = -S, -z
    return -Sp * Sp * (-np.log((Sp - zp) / Sp) / zp**2 - 1.0 / (zp * Sp))


def cauchy_offcontour(h, z, decay_tol=DEFAULT_DECAY_TOL, tail_correction=True):
    """Cauchy integral ``(1/2 pi i) int h(s)/(s - z) ds`` at ``Im z != 0``.

    Trapezoid rule on the grid.  With ``tail_correction`` the parts of the
    line beyond the grid are added assuming ``h(s) ~ h(end) (end/s)^2``.
    """
    z = complex(z)
    if not np.isfinite(z):
        raise ValueError("z must be finite")
    if z.imag == 0:
        raise ValueError("cauchy_offcontour needs Im z != 0; use cauchy_boundary on the line")
    check_decay(h.values, decay_tol, "cauchy_offcontour input")
    s = h.grid.points
    g = h.values / (s - z)
    total = h.grid.step * (g.sum() - 0.5 * (g[0] + g[-1]))
    if tail_correction:
        if s[-1] > 0:
            total += h.values[-1] * _tail_integral(s[-1], z, +1)
        if s[0] < 0:
            total += h.values[0] * _tail_integral(s[0], z, -1)
    return complex(total / (2j * np.pi))
