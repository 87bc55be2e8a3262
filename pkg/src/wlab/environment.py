"""Random coefficient fields a_j(T_x omega) and homogenization experiments."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numba as nb
import numpy as np

from .elliptic import EllipticProblem, solve
from .errors import WlabError
from .grid import DiagonalField, diff_w, grid_points, inner_wj, norm_l2, sample, w_interpolate
from .rng import DOMAIN_ENVIRONMENT, key, uniform
from .wstructure import WSpec

LAWS = ("two-point", "uniform", "constant")


@dataclass(frozen=True)
class EnvironmentSpec:
    """Law of the i.i.d. site coefficients.

    ``two-point``: theta with probability p, 1/theta otherwise.
    ``uniform``: uniform on [1/theta, theta].
    ``constant``: ``value`` everywhere (must lie in [1/theta, theta]).
    """

    theta: float = 2.0
    law: str = "two-point"
    p: float = 0.5
    seed: int = 0
    d: int = 1
    value: float = 1.0

    def __post_init__(self):
        if not self.theta >= 1.0:
            raise ValueError(f"theta must be >= 1, got {self.theta}")
        if self.law not in LAWS:
            raise ValueError(f"unknown law {self.law!r}; choose from {LAWS}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.law == "constant" and not (1 / self.theta <= self.value <= self.theta):
            raise ValueError(f"constant value {self.value} outside [1/theta, theta]")

    @property
    def mean(self) -> float:
        th = self.theta
        if self.law == "two-point":
            return self.p * th + (1 - self.p) / th
        if self.law == "uniform":
            return 0.5 * (th + 1 / th)
        return self.value

    def with_seed(self, seed: int) -> "EnvironmentSpec":
        return EnvironmentSpec(self.theta, self.law, self.p, seed, self.d, self.value)


@nb.njit(cache=True)
def _site_uniforms(k, coords):
    # coords: (n, d) nonnegative ints below 2^21; packed into one counter
    out = np.empty(coords.shape[0])
    for i in range(coords.shape[0]):
        c = np.uint64(0)
        for j in range(coords.shape[1]):
            c |= np.uint64(coords[i, j]) << np.uint64(21 * j)
        out[i] = uniform(k, c)
    return out


def site_uniforms(seed: int, axis: int, coords: np.ndarray) -> np.ndarray:
    """Uniforms attached to lattice sites of Z^d (same site, same value, for any N)."""
    coords = np.ascontiguousarray(coords, dtype=np.int64)
    if coords.min() < 0 or coords.max() >= 1 << 21:
        raise ValueError("site coordinates must lie in [0, 2^21)")
    return _site_uniforms(key(seed, axis, DOMAIN_ENVIRONMENT), coords)


def sample_field(env: EnvironmentSpec, N: int) -> DiagonalField:
    """a^N_j(x) = a_j(T_x omega) for x in {0..N-1}^d, from a site-indexed stream."""
    d = env.d
    coords = np.stack(np.meshgrid(*[np.arange(N)] * d, indexing="ij"), axis=-1).reshape(-1, d)
    coeffs = np.empty((d,) + (N,) * d)
    th = env.theta
    for j in range(d):
        if env.law == "constant":
            coeffs[j] = env.value
            continue
        u = site_uniforms(env.seed, j, coords)
        if env.law == "two-point":
            vals = np.where(u < env.p, th, 1.0 / th)
        else:
            vals = 1.0 / th + (th - 1.0 / th) * u
        coeffs[j] = vals.reshape((N,) * d)
    return DiagonalField(coeffs, theta=th)


def homogenized_matrix(env: EnvironmentSpec) -> np.ndarray:
    """diag(E[a_j]): the expectation of the coefficient law on every axis."""
    return np.diag(np.full(env.d, env.mean))


@dataclass
class HomogenizationReport:
    seed: int
    records: list = field(default_factory=list)
    matrix: np.ndarray | None = None
    reference_N: int = 0

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.records])


def h_convergence_experiment(env: EnvironmentSpec, w: WSpec, lam: float,
                             f: Callable, N_schedule: Sequence[int],
                             reference_N: int | None = None,
                             reference_matrix: np.ndarray | None = None,
                             tol: float = 1e-10) -> HomogenizationReport:
    """Compare u_N (random A^N, same omega) against u_0 (constant matrix) for each N.

    ``f`` is evaluated at the grid points as ``f(*coords)``. The reference u_0
    is solved at ``reference_N`` (default twice the finest N) with
    ``reference_matrix`` (default :func:`homogenized_matrix`) and compared
    through its W-interpolant at the coarse grid points.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    Ns = list(N_schedule)
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValueError(f"N schedule must increase, got {Ns}")
    d = env.d
    A = homogenized_matrix(env) if reference_matrix is None else np.asarray(reference_matrix)
    Nr = reference_N or 2 * Ns[-1]
    a0 = DiagonalField.constant(Nr, d, np.diag(A))
    u0 = solve(EllipticProblem(w, a0, lam, sample(f, Nr, d), tol=tol)).u
    u0_norm2 = norm_l2(u0) ** 2
    u0_energy = sum(A[j, j] * inner_wj(diff_w(u0, j, w), diff_w(u0, j, w), j, w)
                    for j in range(d))
    report = HomogenizationReport(env.seed, matrix=A, reference_N=Nr)
    for N in Ns:
        aN = sample_field(env, N)
        try:
            sol = solve(EllipticProblem(w, aN, lam, sample(f, N, d), tol=tol))
        except WlabError as exc:
            exc.N = N
            raise
        uN = sol.u
        u0_at = w_interpolate(u0, w, grid_points(N, d)).reshape((N,) * d)
        energy = sum(inner_wj(aN[j] * diff_w(uN, j, w), diff_w(uN, j, w), j, w)
                     for j in range(d))
        report.records.append({
            "N": N,
            "l2_gap": norm_l2(uN - u0_at),
            "norm_gap": abs(norm_l2(uN) ** 2 - u0_norm2),
            "energy_gap": abs(energy - u0_energy),
            "iterations": sol.iterations,
        })
    return report


def homogenization_study(env: EnvironmentSpec, seeds: Sequence[int], w: WSpec, lam: float,
                         f: Callable, N_schedule: Sequence[int], **kw) -> list[HomogenizationReport]:
    """One report per seed, in seed order."""
    return [h_convergence_experiment(env.with_seed(s), w, lam, f, N_schedule, **kw)
            for s in seeds]
