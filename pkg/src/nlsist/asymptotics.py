"""Stationary point, nu, alpha, the scalar delta function and the long-time formula.

All integrals against ``phi = log(1 - |r|^2)`` treat ``phi`` as piecewise
linear between the nodes of the reflection grid (with ``r`` itself
interpolated linearly at off-grid points such as ``z0``).  Products of a
piecewise-linear density with ``1/(s - z)`` are integrated exactly, so the
Cauchy integral defining ``delta`` has no quadrature error beyond the
interpolation of ``phi`` and the truncation of the grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.interpolate

from .spectral import DEFAULT_DECAY_TOL
from .special import arg_gamma_imag

__all__ = [
    "AsymptoticParams",
    "DeltaEval",
    "stationary_point",
    "nu",
    "alpha",
    "asymptotic_params",
    "delta",
    "delta_boundary_product",
    "q_asymptotic",
    "oscillatory_decay_probe",
]

# width of the window on which phi(z0) is subtracted in the arg(alpha) integral
_LOCAL_WIDTH = 1.0


@dataclass(frozen=True)
class AsymptoticParams:
    """``nu``, ``alpha`` and the three summands of ``arg alpha`` at ``z0``."""

    z0: float
    nu: float
    alpha: complex
    arg_breakdown: tuple

    def to_dict(self):
        return {
            "z0": self.z0,
            "nu": self.nu,
            "alpha": {"re": self.alpha.real, "im": self.alpha.imag},
            "arg_breakdown": list(self.arg_breakdown),
        }


@dataclass(frozen=True)
class DeltaEval:
    z: complex
    value: complex
    side: str


def stationary_point(x, t):
    """``z0 = x / (2 t)``."""
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    return x / (2.0 * t)


def _r_at(r, z0):
    z0 = np.asarray(z0, dtype=float)
    if np.any(z0 < r.grid.min) or np.any(z0 > r.grid.max):
        raise ValueError("z0 lies outside the reflection grid")
    return r(z0)


def _phi(values):
    mod2 = np.abs(values) ** 2
    if np.any(mod2 >= 1):
        raise ValueError(f"|r| reaches {np.sqrt(mod2.max()):.12g}; need |r| < 1")
    return np.log1p(-mod2)


def nu(r, z0):
    """``nu(z0) = -(1/2 pi) log(1 - |r(z0)|^2)``; vectorised over ``z0``."""
    val = -_phi(_r_at(r, z0)) / (2.0 * np.pi)
    return float(val) if np.ndim(val) == 0 else val


def _nodes(r, z0, extra=()):
    """Nodes of the piecewise-linear ``phi`` on ``[r.grid.min, z0]``.

    Grid points below ``z0`` plus ``z0`` itself and any extra break points.
    """
    s = r.grid.points
    keep = s < z0
    pts = [s[keep], [z0], [e for e in extra if r.grid.min < e < z0]]
    nodes = np.unique(np.concatenate([np.asarray(p, dtype=float) for p in pts]))
    vals = _phi(r(nodes))
    return nodes, vals


def _arg_integral(r, z0):
    """``int_{-inf}^{z0} log(z0 - s) dphi(s)``.

    Integrating by parts against ``phi - phi(z0)`` on ``(z0 - 1, z0)`` and
    against ``phi`` further left gives the singularity-free form

        int_{-inf}^{z0-1} phi/(z0 - s) ds + int_{z0-1}^{z0} (phi - phi(z0))/(z0 - s) ds

    (all boundary terms vanish: ``log 1 = 0`` at ``z0 - 1`` and
    ``(phi - phi(z0)) log(z0 - s) -> 0`` at ``z0``).  Each linear piece is
    integrated in closed form.
    """
    split = z0 - _LOCAL_WIDTH
    s, f = _nodes(r, z0, extra=(split,))
    if s.size < 2:
        return 0.0
    a, b = s[:-1], s[1:]
    fa, fb = f[:-1], f[1:]
    m = (fb - fa) / (b - a)
    # phi(s) = p + m (s - z0) on each piece
    p = fa + m * (z0 - a)
    kappa = np.where(a >= split - 1e-15 * max(1.0, abs(split)), f[-1], 0.0)
    da, db = z0 - a, z0 - b
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.log(da) - np.where(db > 0, np.log(np.where(db > 0, db, 1.0)), 0.0)
    coef = p - kappa
    # last piece ends at z0: its coefficient vanishes exactly (p = phi(z0))
    coef[-1] = 0.0
    return float(np.sum(coef * logs - m * (b - a)))


def asymptotic_params(r, z0, decay_tol=DEFAULT_DECAY_TOL):
    """``nu``, ``alpha`` and the breakdown of ``arg alpha`` at a single ``z0``."""
    z0 = float(z0)
    rz = complex(_r_at(r, z0))
    n = nu(r, z0)
    if n == 0.0:
        return AsymptoticParams(z0, 0.0, 0j, (0.0, 0.0, 0.0))
    _check_left(r, decay_tol)
    integral = _arg_integral(r, z0) / np.pi
    gamma_term = 0.25 * np.pi + float(arg_gamma_imag(n))
    arg_r = float(np.angle(rz))
    arg = integral + gamma_term + arg_r
    amp = np.sqrt(n / 2.0)
    return AsymptoticParams(z0, n, complex(amp * np.exp(1j * arg)), (integral, gamma_term, arg_r))


def _check_left(r, decay_tol):
    v = np.abs(r.values)
    peak = v.max()
    if peak > 0 and v[0] > decay_tol * peak:
        raise ValueError(
            f"r does not decay at the left grid end (|r| = {v[0]:.3e}); "
            "the integral over (-inf, z0] is not covered"
        )


def alpha(r, z0, decay_tol=DEFAULT_DECAY_TOL):
    """``alpha(z0)`` with ``|alpha|^2 = nu/2``."""
    return asymptotic_params(r, z0, decay_tol).alpha


def _cauchy_pieces(s, f, z, side):
    """``int_{s_0}^{s_N} f(s)/(s - z) ds`` for piecewise-linear ``f`` (vectorised in ``z``).

    Uses the node form ``sum_i l_i (m_{i-1} - m_i)(z - s_i)`` plus the two end
    terms, where ``l_i = log(s_i - z)``.  Real ``z`` on ``(s_0, s_N)`` gets the
    principal value (``side="pv"``) and the end term at ``s_N`` must not
    coincide with ``z``.
    """
    z = np.asarray(z)[:, None]
    h = np.diff(s)
    m = np.diff(f) / h
    diff = s[None, :] - z
    if side == "pv":
        with np.errstate(divide="ignore"):
            ell = np.log(np.abs(diff))
    else:
        ell = np.log(diff.astype(complex))
    dm = np.concatenate([[0.0], m]) - np.concatenate([m, [0.0]])
    dm = dm[None, :] * (z - s[None, :])
    inner = np.where(dm[:, 1:-1] == 0, 0.0, dm[:, 1:-1] * np.where(np.isfinite(ell[:, 1:-1]), ell[:, 1:-1], 0.0))
    c_last = f[-1] + m[-1] * (z[:, 0] - s[-1])
    c_first = f[0] + m[0] * (z[:, 0] - s[0])
    # z on an end node: the end term is f_end log 0, a truncation artefact of size f_end
    ends = np.where(np.isfinite(ell[:, [0, -1]]), ell[:, [0, -1]], 0.0)
    total = c_last * ends[:, 1] - c_first * ends[:, 0] + inner.sum(axis=1) + np.sum(m * h)
    return total


def delta(r, z0, z, side="off"):
    """Scalar ``delta(z) = exp(C_(-inf, z0) log(1 - |r|^2))``.

    ``side="off"`` evaluates at ``z`` off the cut ``(-inf, z0]`` (any complex
    ``z`` not real-and-below ``z0``).  ``side="plus"``/``"minus"`` give the
    boundary values ``exp(P/(2 pi i) +- phi(z)/2)`` at real ``z`` with ``P``
    the principal value integral; for real ``z > z0`` both sides coincide.
    Accepts scalar or array ``z``; returns a :class:`DeltaEval` for scalars
    and an array of values otherwise.
    """
    if side not in ("plus", "minus", "off"):
        raise ValueError(f"side must be plus, minus or off, not {side!r}")
    z0 = float(z0)
    rho = float(np.max(np.abs(r.values))) if r.values.size else 0.0
    if rho >= 1:
        raise ValueError(f"sup|r| = {rho:.12g} must be < 1")
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    s, f = _nodes(r, z0)
    if side == "off":
        on_cut = (zz.imag == 0) & (zz.real <= z0)
        if np.any(on_cut):
            raise ValueError("z lies on the cut (-inf, z0]; use side='plus' or 'minus'")
        if s.size < 2:
            vals = np.ones_like(zz)
        else:
            vals = np.exp(_cauchy_pieces(s, f, zz, "off") / (2j * np.pi))
    else:
        if np.any(zz.imag != 0):
            raise ValueError("boundary values need real z")
        x = zz.real
        if np.any(x == z0) and f[-1] != 0:
            raise ValueError("delta is singular at z = z0")
        if s.size < 2:
            vals = np.ones_like(zz)
        else:
            pv = _cauchy_pieces(s, f, x, "pv")
            below = x < z0
            jump = np.zeros_like(x)
            if np.any(below):
                jump[below] = _phi(r(x[below]))
            sign = 1.0 if side == "plus" else -1.0
            vals = np.exp(pv / (2j * np.pi) + sign * 0.5 * jump)
    if np.ndim(z) == 0:
        return DeltaEval(complex(z), complex(vals[0]), side)
    return vals


def delta_boundary_product(r, z0, z, power=1):
    """``Delta(z)^power`` with ``Delta = delta_+ delta_-`` on the real line.

    ``Delta = exp(-i P / pi)`` with ``P`` the principal value integral, so
    ``|Delta| = 1`` by construction.
    """
    s, f = _nodes(r, float(z0))
    x = np.atleast_1d(np.asarray(z, dtype=float))
    if s.size < 2:
        return np.ones(x.shape, dtype=complex)
    pv = _cauchy_pieces(s, f, x, "pv")
    return np.exp(-1j * power * pv / np.pi)


def q_asymptotic(r, x, t, decay_tol=DEFAULT_DECAY_TOL):
    """Leading long-time term ``t^{-1/2} alpha(z0) exp(i x^2/(4t) - i nu(z0) log 2t)``.

    Vectorised over ``x``.
    """
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(xs.shape, dtype=complex)
    for k, xk in enumerate(xs):
        p = asymptotic_params(r, stationary_point(xk, t), decay_tol)
        out[k] = p.alpha * np.exp(1j * xk * xk / (4 * t) - 1j * p.nu * np.log(2 * t)) / np.sqrt(t)
    return complex(out[0]) if np.ndim(x) == 0 else out


def oscillatory_decay_probe(f, r, t, sign=1, points_per_wavelength=8, decay_tol=1e-12,
                            spline_points=8001):
    """``int f(z) Delta(z)^{+-1} exp(-+ i t z^2) dz`` with ``z0 = 0``.

    The integrand is resampled on a uniform grid fine enough to resolve the
    chirp (``points_per_wavelength`` samples per local period at the ends of
    the support of ``f``).  ``Delta`` is evaluated as ``exp(-i P/pi)``; the
    logarithmic end term of ``P`` at ``z0`` is added exactly and the smooth
    remainder is interpolated from ``spline_points`` direct evaluations.
    ``f`` is interpolated by a cubic spline and ``r`` linearly.

    Raises ``ValueError`` if ``f`` does not decay to ``decay_tol`` of its
    peak at the grid ends (the quadrature width check).
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if t < 0:
        raise ValueError("t must be >= 0")
    fv = np.abs(f.values)
    peak = fv.max()
    if peak == 0:
        return 0j
    if max(fv[0], fv[-1]) > decay_tol * peak:
        raise ValueError(
            f"f is not negligible at the grid ends ({max(fv[0], fv[-1]) / peak:.2e} of peak)"
        )
    support = np.nonzero(fv > decay_tol * peak)[0]
    lo = f.grid.point(max(support[0] - 1, 0))
    hi = f.grid.point(min(support[-1] + 1, f.grid.n - 1))
    zmax = max(abs(lo), abs(hi))
    # finest needed spacing: local period pi/(t |z|) of exp(i t z^2)
    h = min(f.grid.step, np.pi / (max(t, 1e-300) * zmax * points_per_wavelength)) if t > 0 else f.grid.step
    n = int(np.ceil((hi - lo) / h)) + 1
    zs = np.linspace(lo, hi, n)
    fz = scipy.interpolate.CubicSpline(f.grid.points, f.values)(zs)
    if np.all(r.values == 0):
        dz = np.ones_like(fz)
    else:
        dz = _delta_on_dense(r, zs, sign, spline_points, lo, hi)
    integrand = fz * dz * np.exp(-1j * sign * t * zs * zs)
    return complex(np.trapezoid(integrand, zs))


def _delta_on_dense(r, zs, power, spline_points, lo, hi):
    s, f = _nodes(r, 0.0)
    if s.size < 2:
        return np.ones(zs.shape, dtype=complex)
    m_last = (f[-1] - f[-2]) / (s[-1] - s[-2])

    def end_term(x):
        with np.errstate(divide="ignore"):
            return (f[-1] + m_last * x) * np.log(np.abs(x))

    knots = np.linspace(lo, hi, spline_points)
    knots = knots[knots != 0.0]
    smooth = _cauchy_pieces(s, f, knots, "pv") - end_term(knots)
    spline = scipy.interpolate.CubicSpline(knots, smooth)
    # Delta is bounded but has no limit at z0 = 0; nudge that single node
    ze = np.where(zs == 0.0, 1e-3 * (zs[1] - zs[0]), zs)
    pv = spline(ze) + end_term(ze)
    return np.exp(-1j * power * pv / np.pi)
