"""Inverse scattering: the singular integral equation ``(1 - C_w) mu = I``.

For the NLS jump factorisation only one entry of each factor is non-zero,

    w-[1,2] = r e^{i theta},     w+[2,1] = -conj(r) e^{-i theta},

so the rows of ``mu`` decouple.  Writing row ``i`` as ``(u, v)`` the operator
acts as ``C_w (u, v) = (C-(v w+[2,1]), C+(u w-[1,2]))``.  The solver iterates
on the correction ``nu = mu - I`` with right-hand side ``C_w I``; residuals are
reported relative to ``||C_w I||_2``.  Cauchy operators use the aperiodic
("line") discrete kernel so that no periodisation error enters ``mu``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

from .spectral import (
    SampledFn,
    SampledMatrixFn,
    UniformGrid,
    cauchy_projector,
)

__all__ = [
    "JumpData",
    "MuSolution",
    "ReconstructionResult",
    "SolverError",
    "evolve_reflection",
    "build_jump",
    "apply_Cw",
    "solve_mu",
    "reconstruct_potential",
    "KRYLOV_THRESHOLD",
]

logger = logging.getLogger(__name__)

KRYLOV_THRESHOLD = 0.7
# whole-line discrete Hilbert kernel; see spectral.cauchy_projector
KERNEL = "line"


class SolverError(RuntimeError):
    """Iteration budget exhausted before the residual tolerance was met."""

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)


def _check_subunitary(r):
    rho = float(np.max(np.abs(r.values)))
    if rho >= 1:
        raise ValueError(f"sup|r| = {rho:.12g} must be < 1")
    return rho


def evolve_reflection(r0, t):
    """``r(z, t) = exp(-i z^2 t) r0(z)``."""
    t = float(t)
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    if t < 0:
        raise ValueError("backward evolution (t < 0) is not supported")
    z = r0.grid.points
    return SampledFn(r0.grid, np.exp(-1j * z * z * t) * r0.values)


@dataclass(frozen=True, eq=False)
class JumpData:
    """Phase ``theta = x z - t z^2`` and the factor pair ``(w-, w+)``."""

    r: SampledFn
    x: float
    t: float
    theta: SampledFn
    w_minus: SampledMatrixFn
    w_plus: SampledMatrixFn

    @property
    def grid(self):
        return self.r.grid

    @property
    def rho(self):
        return float(np.max(np.abs(self.r.values)))

    @property
    def alpha(self):
        """The non-zero entry ``w-[1,2] = r e^{i theta}``."""
        return self.w_minus.values[:, 0, 1]

    @property
    def beta(self):
        """The non-zero entry ``w+[2,1] = -conj(r) e^{-i theta}``."""
        return self.w_plus.values[:, 1, 0]

    def jump_matrix(self):
        """``v = (I - w-)^{-1} (I + w+)`` as an (n, 2, 2) array."""
        eye = np.eye(2)
        return np.linalg.solve(eye - self.w_minus.values, eye + self.w_plus.values)


def build_jump(r, x, t):
    """Jump data of the time-dependent RHP at ``(x, t)``."""
    _check_subunitary(r)
    x, t = float(x), float(t)
    if not (np.isfinite(x) and np.isfinite(t)):
        raise ValueError("x and t must be finite")
    if t < 0:
        raise ValueError("t must be >= 0")
    z = r.grid.points
    theta = x * z - t * z * z
    e = np.exp(1j * theta)
    n = r.grid.n
    wm = np.zeros((n, 2, 2), dtype=complex)
    wp = np.zeros((n, 2, 2), dtype=complex)
    wm[:, 0, 1] = r.values * e
    wp[:, 1, 0] = -np.conj(r.values) * np.conj(e)
    return JumpData(
        r, x, t, SampledFn(r.grid, theta),
        SampledMatrixFn(r.grid, wm), SampledMatrixFn(r.grid, wp),
    )


def apply_Cw(h, jd, threads=None, kernel=None):
    """``C_w h = C+(h w-) + C-(h w+)`` for a sampled 2x2 matrix function ``h``.

    ``kernel`` defaults to the one used by :func:`solve_mu` (``"line"``).
    """
    kernel = kernel or KERNEL
    if h.grid != jd.grid:
        raise ValueError("h and the jump data live on different grids")
    hm = np.matmul(h.values, jd.w_minus.values)
    hp = np.matmul(h.values, jd.w_plus.values)
    out = cauchy_projector(hm, "plus", axis=0, threads=threads, kernel=kernel)
    out += cauchy_projector(hp, "minus", axis=0, threads=threads, kernel=kernel)
    return SampledMatrixFn(h.grid, out)


def _apply_rows(u, v, alpha, beta, threads):
    """Row form of ``C_w``: (u, v) -> (C-(v beta), C+(u alpha)), batched on leading axes."""
    return (
        cauchy_projector(v * beta, "minus", threads=threads, kernel=KERNEL),
        cauchy_projector(u * alpha, "plus", threads=threads, kernel=KERNEL),
    )


def _l2(a, step, axis=-1):
    return np.sqrt(step * np.sum(np.abs(a) ** 2, axis=axis))


@dataclass(frozen=True, eq=False)
class MuSolution:
    mu: SampledMatrixFn
    residual: float
    iterations: int
    method: str
    ratios: tuple = ()
    m_plus: SampledMatrixFn | None = None
    m_minus: SampledMatrixFn | None = None


def _neumann(alpha, beta, step, tol, maxiter, threads):
    """Batched Neumann iteration for rows of ``nu = mu - I``.

    ``alpha``/``beta`` have shape (B, n).  Returns (u, v) of shape (B, 2, n),
    the final relative residuals (B, 2), iterations and the ratio history.
    """
    B, n = alpha.shape
    a = alpha[:, None, :]
    b = beta[:, None, :]
    # C_w I: row 1 -> (0, C+ alpha), row 2 -> (C- beta, 0)
    u0 = np.zeros((B, 2, n), dtype=complex)
    v0 = np.zeros((B, 2, n), dtype=complex)
    v0[:, 0] = cauchy_projector(alpha, "plus", threads=threads, kernel=KERNEL)
    u0[:, 1] = cauchy_projector(beta, "minus", threads=threads, kernel=KERNEL)
    scale = np.sqrt(_l2(u0, step) ** 2 + _l2(v0, step) ** 2)
    safe = np.where(scale > 0, scale, 1.0)
    u, v = u0.copy(), v0.copy()
    history = []
    prev = None
    resid = np.zeros((B, 2))
    for it in range(1, maxiter + 1):
        cu, cv = _apply_rows(u, v, a, b, threads)
        nu_u, nu_v = u0 + cu, v0 + cv
        # residual of the current iterate: ||nu - C_w I - C_w nu||
        resid = np.sqrt(_l2(u - nu_u, step) ** 2 + _l2(v - nu_v, step) ** 2) / safe
        resid = np.where(scale > 0, resid, 0.0)
        if prev is not None:
            with np.errstate(invalid="ignore", divide="ignore"):
                ratio = np.where(prev > 0, resid / prev, 0.0)
            history.append(float(np.max(ratio)))
        u, v = nu_u, nu_v
        if np.all(resid <= tol):
            return u, v, resid, it, history
        prev = resid
    raise SolverError(
        f"Neumann series did not reach {tol:.1e} in {maxiter} iterations "
        f"(worst residual {resid.max():.2e})",
        history,
    )


def _krylov(alpha, beta, step, tol, maxiter, threads, restart=40):
    """Restarted GMRES, one system per (x, row)."""
    B, n = alpha.shape
    u_out = np.zeros((B, 2, n), dtype=complex)
    v_out = np.zeros((B, 2, n), dtype=complex)
    resid = np.zeros((B, 2))
    iters = 0
    for j in range(B):
        al, be = alpha[j], beta[j]

        def matvec(vec, al=al, be=be):
            uu, vv = vec[:n], vec[n:]
            cu = cauchy_projector(vv * be, "minus", threads=threads, kernel=KERNEL)
            cv = cauchy_projector(uu * al, "plus", threads=threads, kernel=KERNEL)
            return np.concatenate([uu - cu, vv - cv])

        op = spla.LinearOperator((2 * n, 2 * n), matvec=matvec, dtype=complex)
        rhs_rows = (
            np.concatenate([np.zeros(n), cauchy_projector(al, "plus", threads=threads, kernel=KERNEL)]),
            np.concatenate([cauchy_projector(be, "minus", threads=threads, kernel=KERNEL), np.zeros(n)]),
        )
        for row, rhs in enumerate(rhs_rows):
            norm_rhs = np.linalg.norm(rhs)
            if norm_rhs == 0:
                continue
            count = [0]

            def cb(_, count=count):
                count[0] += 1

            sol, info = spla.gmres(
                op, rhs, rtol=tol, atol=0.0, restart=restart, maxiter=maxiter,
                callback=cb, callback_type="pr_norm",
            )
            true_res = np.linalg.norm(op.matvec(sol) - rhs) / norm_rhs
            if info != 0 or true_res > tol:
                raise SolverError(
                    f"GMRES stopped at relative residual {true_res:.2e} (info={info})"
                )
            iters = max(iters, count[0])
            u_out[j, row], v_out[j, row] = sol[:n], sol[n:]
            resid[j, row] = true_res
    return u_out, v_out, resid, iters


def _solve_batch(alpha, beta, step, rho, tol, maxiter, method, threads):
    if method == "auto":
        method = "krylov" if rho > KRYLOV_THRESHOLD else "neumann"
    if method == "neumann":
        u, v, resid, it, hist = _neumann(alpha, beta, step, tol, maxiter, threads)
    elif method == "krylov":
        u, v, resid, it = _krylov(alpha, beta, step, tol, maxiter, threads)
        hist = []
    else:
        raise ValueError(f"unknown method {method!r}")
    return u, v, resid, it, hist, method


def _assemble_mu(u, v):
    """Stack row corrections into ``mu = I + nu`` with shape (n, 2, 2)."""
    n = u.shape[-1]
    mu = np.empty((n, 2, 2), dtype=complex)
    mu[:, 0, 0] = 1 + u[0]
    mu[:, 0, 1] = v[0]
    mu[:, 1, 0] = u[1]
    mu[:, 1, 1] = 1 + v[1]
    return mu


def solve_mu(jd, tol=1e-10, maxiter=500, method="auto", boundary_values=False, threads=None):
    """Solve ``(1 - C_w) mu = I``.

    Parameters
    ----------
    jd : JumpData
    tol : float
        Residual tolerance, relative to ``||C_w I||_2``.
    method : {"auto", "neumann", "krylov"}
        ``auto`` uses the Neumann series for ``rho <= 0.7`` and restarted
        GMRES above it.
    boundary_values : bool
        Also compute ``m+- = I + C+-(mu (w+ + w-))``.

    Raises
    ------
    SolverError
        If the tolerance is not reached; ``history`` holds the residual ratios.
    """
    rho = _check_subunitary(jd.r)
    step = jd.grid.step
    u, v, resid, it, hist, used = _solve_batch(
        jd.alpha[None, :], jd.beta[None, :], step, rho, tol, maxiter, method, threads
    )
    mu = _assemble_mu(u[0], v[0])
    m_plus = m_minus = None
    if boundary_values:
        prod = np.matmul(mu, jd.w_plus.values + jd.w_minus.values)
        m_plus = np.eye(2) + cauchy_projector(prod, "plus", axis=0, threads=threads, kernel=KERNEL)
        m_minus = np.eye(2) + cauchy_projector(prod, "minus", axis=0, threads=threads, kernel=KERNEL)
        m_plus = SampledMatrixFn(jd.grid, m_plus)
        m_minus = SampledMatrixFn(jd.grid, m_minus)
    return MuSolution(
        SampledMatrixFn(jd.grid, mu), float(resid.max()), it, used, tuple(hist),
        m_plus, m_minus,
    )


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    """Reconstructed ``q(x, t)`` at the requested ``xs``.

    ``m1`` holds the residue matrix ``m_1(x)`` per point, shape (len(xs), 2, 2).
    """

    xs: np.ndarray
    t: float
    q: np.ndarray
    m1: np.ndarray = field(repr=False)
    residuals: np.ndarray = field(repr=False)

    @property
    def Q(self):
        """``Q = -i ad sigma (m_1)`` per point."""
        out = np.zeros_like(self.m1)
        out[:, 0, 1] = -1j * self.m1[:, 0, 1]
        out[:, 1, 0] = 1j * self.m1[:, 1, 0]
        return out

    def grid(self):
        """The uniform grid carrying ``xs``, or ``None`` if ``xs`` is not uniform."""
        xs = self.xs
        if xs.size < 2:
            return None
        step = xs[1] - xs[0]
        if step <= 0 or not np.allclose(np.diff(xs), step, rtol=1e-9, atol=1e-12):
            return None
        return UniformGrid(float(xs[0]), float(step), xs.size)

    def q_values(self):
        """The reconstruction as a :class:`SampledFn` (uniform ``xs`` only)."""
        g = self.grid()
        if g is None:
            raise ValueError("xs is not a uniform grid")
        return SampledFn(g, self.q)

    def to_dict(self):
        g = self.grid()
        return {
            "grid": None if g is None else g.to_dict(),
            "re": self.q.real.tolist(),
            "im": self.q.imag.tolist(),
            "t": self.t,
            "xs": self.xs.tolist(),
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["x", "re(q)", "im(q)"])
        for x, q in zip(self.xs, self.q):
            writer.writerow([repr(float(x)), repr(float(q.real)), repr(float(q.imag))])
        return buf.getvalue()


def _trapz_last(values, step):
    return step * (values.sum(axis=-1) - 0.5 * (values[..., 0] + values[..., -1]))


def reconstruct_potential(
    r, xs, t=0.0, tol=1e-10, maxiter=500, method="auto", batch=64, threads=None
):
    """Recover ``q(x, t)`` from reflection data ``r`` (given at ``t = 0``).

    For every ``x`` the jump is built from ``r`` and ``theta = x z - t z^2``,
    ``mu`` is solved for, and

        m_1 = -(1/(2 pi i)) int mu (w+ + w-) dz,     q = -i (m_1)[1,2].

    The same integral also gives ``Q = (ad sigma / 2 pi) int mu (w+ + w-) dz``;
    both routes are checked against each other.
    """
    rho = _check_subunitary(r)
    t = float(t)
    if t < 0:
        raise ValueError("t must be >= 0")
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    z = r.grid.points
    step = r.grid.step
    m1 = np.zeros((xs.size, 2, 2), dtype=complex)
    resid = np.zeros(xs.size)
    for start in range(0, xs.size, batch):
        xb = xs[start:start + batch]
        e = np.exp(1j * (xb[:, None] * z[None, :] - t * z * z))
        alpha = r.values * e
        beta = -np.conj(r.values) * np.conj(e)
        u, v, res, _, _, _ = _solve_batch(alpha, beta, step, rho, tol, maxiter, method, threads)
        # mu (w+ + w-): row i -> (mu_i2 beta, mu_i1 alpha)
        mu11, mu12 = 1 + u[:, 0], v[:, 0]
        mu21, mu22 = u[:, 1], 1 + v[:, 1]
        integ = np.empty((xb.size, 2, 2), dtype=complex)
        integ[:, 0, 0] = _trapz_last(mu12 * beta, step)
        integ[:, 0, 1] = _trapz_last(mu11 * alpha, step)
        integ[:, 1, 0] = _trapz_last(mu22 * beta, step)
        integ[:, 1, 1] = _trapz_last(mu21 * alpha, step)
        m1[start:start + xb.size] = -integ / (2j * np.pi)
        resid[start:start + xb.size] = res.max(axis=1)
        q_res = -1j * m1[start:start + xb.size, 0, 1]
        q_q = integ[:, 0, 1] / (2 * np.pi)
        if np.max(np.abs(q_res - q_q)) > 1e-12 * max(1.0, np.max(np.abs(q_q))):
            raise RuntimeError("residue and Q-integral routes disagree")
    q = -1j * m1[:, 0, 1]
    return ReconstructionResult(xs, t, q, m1, resid)
