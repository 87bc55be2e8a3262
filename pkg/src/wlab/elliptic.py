"""Discrete W-elliptic problems: lambda u - sum_j d_{x_j}(a_j d_{W_j} u) = f."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import BoundViolation, IncompatibleRHS, NonConvergence
from .grid import (DiagonalField, _shape, apply_ln, axis_increments, norm_h1w,
                   norm_l2)
from .wstructure import AxisW, WSpec

COMPAT_TOL = 1e-10


def operator_diagonal(a: DiagonalField, w: WSpec) -> np.ndarray:
    """Diagonal of -apply_ln, used as the Jacobi preconditioner."""
    N, d = a.N, a.d
    out = np.zeros((N,) * d)
    for j in range(d):
        c = N * a[j] / axis_increments(w, j, N, d)
        out += c + np.roll(c, 1, axis=j)
    return out


def pcg(apply_A: Callable, b: np.ndarray, diag: np.ndarray, tol: float, max_iter: int,
        x0: np.ndarray | None = None, project: bool = False):
    """Jacobi-preconditioned conjugate gradients for an SPD operator.

    Stops when ||b - A x|| <= tol ||b||. With ``project=True`` every search
    direction is kept orthogonal to constants (the lambda = 0 gauge).

    Returns ``(x, iterations, relative_residual)``; raises NonConvergence.
    """
    bnorm = np.sqrt(np.vdot(b, b))
    if bnorm == 0.0:
        return np.zeros_like(b), 0, 0.0
    x = np.zeros_like(b) if x0 is None else x0.copy()
    r = b - apply_A(x) if x0 is not None else b.copy()
    if project:
        r -= r.mean()
    z = r / diag
    if project:
        z -= z.mean()
    p = z.copy()
    rz = np.vdot(r, z)
    res = np.sqrt(np.vdot(r, r)) / bnorm
    k = 0
    while res > tol:
        if k >= max_iter:
            raise NonConvergence(k, float(res))
        Ap = apply_A(p)
        alpha = rz / np.vdot(p, Ap)
        x += alpha * p
        r -= alpha * Ap
        if project:
            r -= r.mean()
        k += 1
        res = np.sqrt(np.vdot(r, r)) / bnorm
        z = r / diag
        if project:
            z -= z.mean()
        rz_new = np.vdot(r, z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    if project:
        x -= x.mean()
    return x, k, float(res)


@dataclass
class EllipticProblem:
    w: WSpec
    a: DiagonalField
    lam: float
    f: np.ndarray
    tol: float = 1e-10
    max_iter: int | None = None

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        self.f = np.asarray(self.f, dtype=float)
        if self.a.coeffs.shape[1:] != self.f.shape:
            raise ValueError("coefficient field and right-hand side disagree in shape")
        if self.w.d != self.f.ndim:
            raise ValueError(f"WSpec has {self.w.d} axes, f has {self.f.ndim}")

    @property
    def iter_cap(self) -> int:
        return self.max_iter if self.max_iter is not None else 50 * self.f.shape[0]


@dataclass
class EllipticSolution:
    u: np.ndarray
    iterations: int
    final_residual: float
    norms: dict = field(default_factory=dict)


def _finish(u, it, res, problem: EllipticProblem) -> EllipticSolution:
    fn = norm_l2(problem.f)
    norms = {"l2": norm_l2(u), "h1w": norm_h1w(u, problem.w), "f_l2": fn}
    norms["h1w_ratio"] = norms["h1w"] / fn if fn > 0 else 0.0
    return EllipticSolution(u, it, res, norms)


def solve(problem: EllipticProblem) -> EllipticSolution:
    """Unique solution for lambda > 0, with the a-priori L2 bound certified."""
    if not problem.lam > 0:
        raise ValueError("solve needs lambda > 0; use solve_neumann for lambda = 0")
    lam, a, w = problem.lam, problem.a, problem.w
    u, it, res = pcg(lambda v: lam * v - apply_ln(v, a, w), problem.f,
                     lam + operator_diagonal(a, w), problem.tol, problem.iter_cap)
    sol = _finish(u, it, res, problem)
    bound = sol.norms["f_l2"] / lam * (1 + 10 * problem.tol)
    if sol.norms["l2"] > bound:
        raise BoundViolation(f"||u|| = {sol.norms['l2']:.17g} exceeds ||f||/lambda bound {bound:.17g}")
    return sol


def solve_neumann(problem: EllipticProblem, compat_tol: float = COMPAT_TOL) -> EllipticSolution:
    """Mean-zero solution of -apply_ln(u) = f; rejects f whose mean is not zero."""
    f = problem.f
    mean = float(f.mean())
    fn = norm_l2(f)
    if abs(mean) > compat_tol * fn:
        raise IncompatibleRHS(mean, compat_tol * fn)
    a, w = problem.a, problem.w
    u, it, res = pcg(lambda v: -apply_ln(v, a, w), f - mean, operator_diagonal(a, w),
                     problem.tol, problem.iter_cap, project=True)
    return _finish(u, it, res, problem)


def solve_shifted(shift: np.ndarray, a: DiagonalField, w: WSpec, rhs: np.ndarray,
                  tol: float = 1e-10, max_iter: int | None = None,
                  x0: np.ndarray | None = None):
    """Solve shift(x) u - apply_ln(u) = rhs for a positive site-wise shift."""
    cap = max_iter if max_iter is not None else 50 * rhs.shape[0]
    return pcg(lambda v: shift * v - apply_ln(v, a, w), rhs,
               shift + operator_diagonal(a, w), tol, cap, x0=x0)


def dual_norm(f: np.ndarray, w: WSpec, tol: float = 1e-12) -> float:
    """H^{-1}_W norm: ||u||_{1,W,N} for the Riesz problem u - apply_ln(u) = f with a = 1."""
    f = np.asarray(f, dtype=float)
    N, d = _shape(f)
    if not np.any(f):
        return 0.0
    a = DiagonalField.constant(N, d)
    sol = solve(EllipticProblem(w, a, 1.0, f, tol=tol))
    return sol.norms["h1w"]


class Manufactured1D:
    """Closed-form 1-d solution u = c + b W(x) + int_(0,x] W(dy) int_0^y g(z) dz.

    ``g`` is piecewise constant on ``breaks`` (shifted to mean zero) and ``b``
    makes u periodic, so that d_x d_W u = g exactly. With a constant
    coefficient ``a0`` the right-hand side is f = lam u - a0 g.
    """

    def __init__(self, axis: AxisW, breaks: Sequence[float], values: Sequence[float],
                 lam: float = 1.0, a0: float = 1.0, c: float = 0.0):
        self.axis = axis
        self.breaks = np.asarray(breaks, dtype=float)
        if self.breaks[0] != 0.0 or self.breaks[-1] != 1.0 or np.any(np.diff(self.breaks) <= 0):
            raise ValueError("breaks must increase from 0 to 1")
        v = np.asarray(values, dtype=float)
        widths = np.diff(self.breaks)
        self.values = v - np.dot(v, widths)
        self.lam, self.a0, self.c = lam, a0, c
        # F at the breakpoints and G = int_0^y F at the breakpoints
        self._F = np.concatenate([[0.0], np.cumsum(self.values * widths)])
        self._G = np.concatenate(
            [[0.0], np.cumsum(self._F[:-1] * widths + 0.5 * self.values * widths**2)])
        jump_term = sum(beta * self.F(dl) for dl, beta in axis.jumps)
        self.b = -(axis.alpha * self._G[-1] + jump_term) / axis.total

    def _piece(self, x):
        x = np.asarray(x, dtype=float)
        k = np.searchsorted(self.breaks, x, side="right") - 1
        return x, np.clip(k, 0, len(self.values) - 1)

    def g(self, x):
        x, k = self._piece(x)
        return self.values[k]

    def F(self, x):
        x, k = self._piece(x)
        return self._F[k] + self.values[k] * (x - self.breaks[k])

    def G(self, x):
        x, k = self._piece(x)
        t = x - self.breaks[k]
        return self._G[k] + self._F[k] * t + 0.5 * self.values[k] * t**2

    def u(self, x):
        """Solution at points x in [0, 1)."""
        x = np.asarray(x, dtype=float)
        out = self.c + self.b * self.axis(x) + self.axis.alpha * self.G(x)
        for dl, beta in self.axis.jumps:
            if dl > 0:
                out = out + beta * self.F(dl) * (x >= dl)
        return out

    def rhs(self, x):
        return self.lam * self.u(x) - self.a0 * self.g(x)
