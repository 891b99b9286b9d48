"""Complex log-gamma by the Lanczos approximation (g = 7, 9 terms)."""

from __future__ import annotations

import numpy as np

__all__ = ["log_gamma", "arg_gamma_imag"]

_G = 7.0
_COEF = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)
_EULER = 0.57721566490153286
_ZETA3 = 1.2020569031595943
_ZETA5 = 1.0369277551433699


def _lanczos(z):
    # log Gamma(z) for Re z >= 1/2
    z = z - 1.0
    acc = np.full_like(z, _COEF[0])
    for k in range(1, len(_COEF)):
        acc = acc + _COEF[k] / (z + k)
    t = z + _G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * np.log(t) - t + np.log(acc)


def log_gamma(z):
    """Continuous branch of ``log Gamma(z)`` for complex ``z`` off the poles.

    Uses the reflection formula for ``Re z < 1/2``.  The imaginary part is the
    branch that is continuous in the upper and lower half planes (the same
    one as ``scipy.special.loggamma``).
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty_like(z)
    right = z.real >= 0.5
    out[right] = _lanczos(z[right])
    left = ~right
    if np.any(left):
        zl = z[left]
        if np.any((zl.imag == 0) & (zl.real == np.round(zl.real))):
            raise ValueError("log_gamma has poles at the non-positive integers")
        # work in the closed upper half plane, conjugate back afterwards
        lower = zl.imag < 0
        zu = np.where(lower, np.conj(zl), zl)
        # analytic log sin(pi z) for Im z >= 0, branch fixed by continuity
        # with the right half plane
        log_sin = -1j * np.pi * zu - np.log(2.0) + 0.5j * np.pi + np.log1p(-np.exp(2j * np.pi * zu))
        ref = np.log(np.pi) - log_sin - _lanczos(1.0 - zu)
        out[left] = np.where(lower, np.conj(ref), ref)
    return out[0] if scalar else out


def arg_gamma_imag(nu):
    """``arg Gamma(i nu)`` for ``nu > 0``, continuous in ``nu``.

    Tends to ``-pi/2 - gamma nu`` as ``nu -> 0``; small ``nu`` uses the series.
    """
    nu = np.asarray(nu, dtype=float)
    if np.any(nu <= 0):
        raise ValueError("arg Gamma(i nu) needs nu > 0")
    small = nu < 1e-2
    series = -0.5 * np.pi - _EULER * nu + _ZETA3 * nu**3 / 3 - _ZETA5 * nu**5 / 5
    full = log_gamma(1j * np.where(small, 1.0, nu)).imag
    return np.where(small, series, full)
