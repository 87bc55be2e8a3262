"""Discrete W-calculus on the torus T^d_N.

Grid functions are plain ``numpy`` arrays of shape ``(N,) * d`` (C order, so the
flat view is row-major with axis strides). Index arithmetic wraps on every axis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .wstructure import WSpec, increments


def _shape(f) -> tuple[int, int]:
    f = np.asarray(f)
    N = f.shape[0]
    if f.ndim == 0 or any(n != N for n in f.shape):
        raise ValueError(f"grid function must have shape (N,)*d, got {f.shape}")
    return N, f.ndim


def _check_same(f, g):
    if np.shape(f) != np.shape(g):
        raise ValueError(f"shape mismatch: {np.shape(f)} vs {np.shape(g)}")


def axis_increments(w: WSpec, j: int, N: int, d: int) -> np.ndarray:
    """Increments of W_j broadcastable against a grid function."""
    shape = [1] * d
    shape[j] = N
    return increments(w, j, N).reshape(shape)


@dataclass
class DiagonalField:
    """Per-axis, per-site coefficients a_j(x); ``coeffs`` has shape ``(d,) + (N,)*d``."""

    coeffs: np.ndarray
    theta: float | None = None

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        d = self.coeffs.shape[0]
        if self.coeffs.ndim != d + 1:
            raise ValueError(f"coeffs must have shape (d,)+(N,)*d, got {self.coeffs.shape}")
        _shape(self.coeffs[0])
        if self.theta is not None:
            lo, hi = 1.0 / self.theta, self.theta
            tol = 1e-12 * self.theta
            if self.coeffs.min() < lo - tol or self.coeffs.max() > hi + tol:
                raise ValueError(
                    f"coefficients outside [{lo}, {hi}]: "
                    f"range [{self.coeffs.min()}, {self.coeffs.max()}]")

    @property
    def d(self) -> int:
        return self.coeffs.shape[0]

    @property
    def N(self) -> int:
        return self.coeffs.shape[1]

    def __getitem__(self, j):
        return self.coeffs[j]

    @classmethod
    def constant(cls, N: int, d: int, value=1.0, theta: float | None = None):
        vals = np.broadcast_to(np.asarray(value, dtype=float), (d,))
        coeffs = np.empty((d,) + (N,) * d)
        for j in range(d):
            coeffs[j] = vals[j]
        return cls(coeffs, theta)


def diff_x(f: np.ndarray, j: int) -> np.ndarray:
    """Forward difference N[f(x+e_j) - f(x)]."""
    N, _ = _shape(f)
    return N * (np.roll(f, -1, axis=j) - f)


def diff_w(f: np.ndarray, j: int, w: WSpec) -> np.ndarray:
    """W_j-difference [f(x+e_j) - f(x)] / [W_j((x_j+1)/N) - W_j(x_j/N)]."""
    N, d = _shape(f)
    return (np.roll(f, -1, axis=j) - f) / axis_increments(w, j, N, d)


def inner_n(f, g) -> float:
    _check_same(f, g)
    N, d = _shape(f)
    return float(np.sum(np.multiply(f, g)) / N**d)


def inner_wj(f, g, j: int, w: WSpec) -> float:
    """N^{1-d} sum_x f g [W_j((x_j+1)/N) - W_j(x_j/N)]."""
    _check_same(f, g)
    N, d = _shape(f)
    return float(np.sum(np.multiply(f, g) * axis_increments(w, j, N, d)) / N ** (d - 1))


def inner_h1w(f, g, w: WSpec) -> float:
    N, d = _shape(f)
    out = inner_n(f, g)
    for j in range(d):
        out += inner_wj(diff_w(f, j, w), diff_w(g, j, w), j, w)
    return out


def norm_l2(f) -> float:
    return float(np.sqrt(inner_n(f, f)))


def norm_h1w(f, w: WSpec) -> float:
    return float(np.sqrt(inner_h1w(f, f, w)))


def grad_energy(f, w: WSpec, a: DiagonalField | None = None) -> float:
    """sum_j <a_j dW_j f, dW_j f>_{W_j,N} (the Dirichlet part of the bilinear form)."""
    N, d = _shape(f)
    out = 0.0
    for j in range(d):
        g = diff_w(f, j, w)
        out += inner_wj(g if a is None else a[j] * g, g, j, w)
    return out


def apply_ln(f: np.ndarray, a: DiagonalField, w: WSpec) -> np.ndarray:
    """sum_j d_{x_j}(a_j d_{W_j} f), outer difference taken backward.

    The backward outer difference is the adjoint pairing of the forward
    W-difference, which makes the operator symmetric and equal to the
    random-walk generator (see :func:`apply_generator`).
    """
    N, d = _shape(f)
    if a.coeffs.shape[1:] != np.shape(f):
        raise ValueError(f"field shape {a.coeffs.shape} does not match {np.shape(f)}")
    out = np.zeros(np.shape(f))
    for j in range(d):
        flux = a[j] * diff_w(f, j, w)
        out += N * (flux - np.roll(flux, 1, axis=j))
    return out


def apply_generator(f: np.ndarray, a: DiagonalField, w: WSpec) -> np.ndarray:
    """Random-walk generator sum_j N^2 {xi_+ [f(x+e_j)-f(x)] + xi_- [f(x-e_j)-f(x)]}."""
    N, d = _shape(f)
    out = np.zeros(np.shape(f))
    for j in range(d):
        xi = a[j] / (N * axis_increments(w, j, N, d))
        xi_back = np.roll(xi, 1, axis=j)
        out += N**2 * (xi * (np.roll(f, -1, axis=j) - f)
                       + xi_back * (np.roll(f, 1, axis=j) - f))
    return out


def dense_ln(a: DiagonalField, w: WSpec) -> np.ndarray:
    """Explicit N^d x N^d matrix of ``apply_ln`` assembled bond by bond (row-major sites)."""
    N, d = a.N, a.d
    n = N**d
    if n > 4096:
        raise ValueError(f"dense oracle limited to N^d <= 4096, got {n}")
    M = np.zeros((n, n))
    idx = np.arange(n).reshape((N,) * d)
    for j in range(d):
        nb = np.roll(idx, -1, axis=j).ravel()
        c = (a[j] * N / axis_increments(w, j, N, d)).ravel()
        for x, y, cx in zip(idx.ravel(), nb, c):
            M[x, y] += cx
            M[y, x] += cx
            M[x, x] -= cx
            M[y, y] -= cx
    return M


def project_mean_zero(f: np.ndarray) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    return f - f.mean()


def _cell(x: np.ndarray, N: int) -> np.ndarray:
    i = np.floor(x * N).astype(np.int64)
    i = np.where((i + 1) / N <= x, i + 1, i)
    i = np.where(i / N > x, i - 1, i)
    return i


def w_interpolate(f: np.ndarray, w: WSpec, x) -> np.ndarray | float:
    """Tensor-product W-interpolation of grid function ``f`` at points ``x`` in [0,1)^d.

    ``x`` is a length-d point or an ``(m, d)`` array of points. Along axis j the
    weight of the right node is (W_j(x_j) - W_j(i/N)) / (W_j((i+1)/N) - W_j(i/N)).
    """
    N, d = _shape(f)
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    if pts.shape[1] != d:
        raise ValueError(f"points must have {d} coordinates")
    lo = np.empty(pts.shape, dtype=np.int64)
    s = np.empty(pts.shape)
    for j in range(d):
        ax = w.axes[j]
        i = _cell(pts[:, j], N)
        left = ax(i / N)
        lo[:, j] = i
        s[:, j] = (ax(pts[:, j]) - left) / (ax((i + 1) / N) - left)
    out = np.zeros(len(pts))
    for corner in np.ndindex(*(2,) * d):
        c = np.asarray(corner)
        weight = np.prod(np.where(c == 1, s, 1.0 - s), axis=1)
        ids = tuple(((lo[:, j] + c[j]) % N) for j in range(d))
        out += weight * f[ids]
    if np.ndim(x) == 1:
        return float(out[0])
    return out


def grid_points(N: int, d: int) -> np.ndarray:
    """Macroscopic coordinates x/N of all sites, shape ``(N^d, d)`` in row-major order."""
    axes = np.meshgrid(*[np.arange(N) / N] * d, indexing="ij")
    return np.stack([a.ravel() for a in axes], axis=1)


def sample(func, N: int, d: int) -> np.ndarray:
    """Evaluate ``func(*coords)`` at the sites x/N; coords are broadcast grids."""
    coords = np.meshgrid(*[np.arange(N) / N] * d, indexing="ij")
    return np.broadcast_to(np.asarray(func(*coords), dtype=float), (N,) * d).copy()
