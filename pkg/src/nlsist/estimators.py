"""Estimator-style wrappers (``fit``/``transform``/``predict``) and input validation.

These are thin adapters over the functional API so that the pipeline can be
driven with the familiar scikit-learn conventions (``get_params``,
``set_params``, trailing-underscore fitted attributes).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .asymptotics import q_asymptotic
from .inverse import reconstruct_potential
from .scattering import Potential, scattering_coefficients
from .spectral import SampledFn, UniformGrid

__all__ = [
    "as_sampled",
    "as_points",
    "DirectScattering",
    "InverseScattering",
    "LongTimeAsymptotics",
]


def as_sampled(X, grid=None, name="X"):
    """Coerce ``X`` to a :class:`SampledFn`.

    Accepts a ``SampledFn``, a ``Potential``, or a 1-D array of samples
    together with ``grid``.
    """
    if isinstance(X, Potential):
        return X.samples
    if isinstance(X, SampledFn):
        if grid is not None and X.grid != grid:
            raise ValueError(f"{name} lives on a different grid than requested")
        return X
    if grid is None:
        raise TypeError(f"{name}: raw arrays need a grid")
    arr = np.asarray(X)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    return SampledFn(grid, arr)


def as_points(x, name="x"):
    """Finite 1-D float array of evaluation points."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


class DirectScattering(TransformerMixin, BaseEstimator):
    """Potential -> reflection coefficient on a symmetric z-grid.

    Parameters
    ----------
    z_half_width : float
        Half-width of the spectral grid.
    nz : int
        Number of spectral points.
    consistency_tol : float
        Allowed disagreement between the two matching points.
    """

    def __init__(self, z_half_width=40.0, nz=4096, consistency_tol=1e-6):
        self.z_half_width = z_half_width
        self.nz = nz
        self.consistency_tol = consistency_tol

    def fit(self, X, y=None, grid=None):
        q = Potential(as_sampled(X, grid))
        zgrid = UniformGrid.symmetric(self.z_half_width, self.nz)
        self.scattering_ = scattering_coefficients(q, zgrid, self.consistency_tol)
        self.reflection_ = self.scattering_.r
        self.x_grid_ = q.grid
        return self

    def transform(self, X, grid=None):
        """Reflection samples of ``X`` (refits on the new potential)."""
        check_is_fitted(self, "reflection_")
        if X is None:
            return self.reflection_.values.copy()
        q = Potential(as_sampled(X, grid or self.x_grid_))
        zgrid = UniformGrid.symmetric(self.z_half_width, self.nz)
        return scattering_coefficients(q, zgrid, self.consistency_tol).r.values


class InverseScattering(BaseEstimator):
    """Reflection coefficient -> ``q(x, t)`` via the Riemann-Hilbert solver.

    Parameters
    ----------
    t : float
        Time at which the potential is reconstructed.
    tol : float
        Relative residual tolerance of the singular integral equation.
    method : {"auto", "neumann", "krylov"}
    """

    def __init__(self, t=0.0, tol=1e-10, method="auto"):
        self.t = t
        self.tol = tol
        self.method = method

    def fit(self, r, y=None, grid=None):
        self.reflection_ = as_sampled(r, grid, "r")
        return self

    def predict(self, x):
        check_is_fitted(self, "reflection_")
        res = reconstruct_potential(self.reflection_, as_points(x), t=self.t, tol=self.tol,
                                    method=self.method)
        return res.q


class LongTimeAsymptotics(BaseEstimator):
    """Reflection coefficient -> leading long-time term of ``q(x, t)``."""

    def __init__(self, t=100.0):
        self.t = t

    def fit(self, r, y=None, grid=None):
        self.reflection_ = as_sampled(r, grid, "r")
        return self

    def predict(self, x):
        check_is_fitted(self, "reflection_")
        return np.asarray(q_asymptotic(self.reflection_, as_points(x), self.t))
