"""Implicit-Euler integration of d_t rho = sum_j d_{x_j}(a_j d_{W_j} Phi(rho))."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .elliptic import solve_shifted
from .errors import NewtonDivergence, RangeViolation
from .grid import DiagonalField, apply_ln, diff_w, inner_n, inner_wj
from .wstructure import WSpec

RANGE_EPS = 1e-9


@dataclass(frozen=True)
class PhiSpec:
    """Polynomial nonlinearity Phi(alpha) = sum_k coeffs[k] alpha^k on [l, r].

    ``B`` bounds the derivative, B^-1 < Phi' < B on [l, r]; when omitted it is
    taken 1% above the sampled extremes.
    """

    coeffs: tuple[float, ...] = (0.0, 1.0)
    l: float = 0.0
    r: float = 1.0
    B: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if not self.r > self.l:
            raise ValueError(f"need l < r, got [{self.l}, {self.r}]")
        xs = np.linspace(self.l, self.r, 2001)
        dphi = self.deriv(xs)
        if dphi.min() <= 0:
            raise ValueError("Phi must be strictly increasing on [l, r]")
        B = self.B
        if B is None:
            B = 1.01 * max(dphi.max(), 1.0 / dphi.min())
            object.__setattr__(self, "B", float(B))
        if not (dphi.min() > 1.0 / B and dphi.max() < B):
            raise ValueError(f"Phi' range [{dphi.min()}, {dphi.max()}] violates bound B={B}")

    @classmethod
    def quadratic(cls, b: float) -> "PhiSpec":
        """Phi(alpha) = alpha + b alpha^2 on [0, 1], the exclusion-process nonlinearity."""
        if not b > -0.5:
            raise ValueError(f"b must exceed -1/2, got {b}")
        return cls((0.0, 1.0, float(b)))

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, self.coeffs)

    def deriv(self, x):
        dc = np.polynomial.polynomial.polyder(self.coeffs) if len(self.coeffs) > 1 else [0.0]
        return np.polynomial.polynomial.polyval(x, dc)


@dataclass
class ParabolicTrajectory:
    times: np.ndarray
    states: list
    newton_iters: list = field(default_factory=list)
    dt: float = 0.0
    masses: np.ndarray | None = None
    certification: np.ndarray | None = None

    @property
    def mass_drift(self) -> float:
        m = self.masses
        return float(np.max(np.abs(m - m[0]))) if m is not None and len(m) else 0.0

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def step(rho: np.ndarray, dt: float, a: DiagonalField, w: WSpec, phi: PhiSpec,
         tol: float = 1e-10, max_newton: int = 25, cg_tol: float = 1e-12,
         t: float | None = None) -> tuple[np.ndarray, int]:
    """One implicit-Euler step rho+ - dt apply_ln(Phi(rho+)) = rho, solved by Newton.

    The Newton correction delta solves (I - dt L Phi'(x)) delta = -F. Writing
    v = Phi'(x) delta turns it into the SPD problem (1/(dt Phi')) v - L v = -F/dt.
    Returns ``(rho_plus, newton_iterations)``.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    x = np.array(rho, dtype=float)
    k = 0
    while True:
        F = x - dt * apply_ln(phi(x), a, w) - rho
        res = float(np.max(np.abs(F)))
        if res <= tol:
            break
        if k >= max_newton or not np.isfinite(res):
            raise NewtonDivergence(k, res, t)
        D = phi.deriv(x)
        if D.min() <= 0:
            raise NewtonDivergence(k, res, t)
        v, _, _ = solve_shifted(1.0 / (dt * D), a, w, -F / dt, tol=cg_tol)
        delta = v / D
        # exact Newton corrections satisfy mean(delta) = -mean(F)
        delta += -F.mean() - delta.mean()
        x += delta
        k += 1
    lo, hi = float(x.min()), float(x.max())
    if lo < phi.l - RANGE_EPS or hi > phi.r + RANGE_EPS:
        raise RangeViolation(lo, hi, phi.l, phi.r, t)
    return x, k


def default_dt(T: float) -> float:
    return T / 100.0


def integrate(gamma: np.ndarray, T: float, a: DiagonalField, w: WSpec, phi: PhiSpec,
              dt: float | None = None, tol: float = 1e-10,
              tests: Sequence[np.ndarray] = (), store_every: int = 1) -> ParabolicTrajectory:
    """Implicit-Euler trajectory on [0, T] with weak-form certification.

    For each test function H the certification residual
    |<rho(t_m),H> - <gamma,H> - sum_steps dt <Phi(rho), apply_ln(H)>| is recorded
    at every stored time (shape ``(n_stored, n_tests)``).
    """
    gamma = np.asarray(gamma, dtype=float)
    if gamma.min() < phi.l - RANGE_EPS or gamma.max() > phi.r + RANGE_EPS:
        raise RangeViolation(float(gamma.min()), float(gamma.max()), phi.l, phi.r, 0.0)
    if dt is None:
        dt = default_dt(T)
    M = max(1, int(np.ceil(T / dt - 1e-9)))
    dt = T / M
    LH = [apply_ln(np.asarray(H, dtype=float), a, w) for H in tests]
    H0 = np.array([inner_n(gamma, H) for H in tests])
    flux = np.zeros(len(tests))

    times, states, masses, cert = [0.0], [gamma.copy()], [gamma.mean()], [np.zeros(len(tests))]
    iters = []
    rho = gamma.copy()
    for m in range(1, M + 1):
        t = m * dt
        rho, k = step(rho, dt, a, w, phi, tol=tol, t=t)
        iters.append(k)
        if tests:
            p = phi(rho)
            flux += dt * np.array([inner_n(p, lh) for lh in LH])
        if m % store_every == 0 or m == M:
            times.append(t)
            states.append(rho.copy())
            masses.append(rho.mean())
            if tests:
                cur = np.array([inner_n(rho, H) for H in tests])
                cert.append(np.abs(cur - H0 - flux))
            else:
                cert.append(np.zeros(0))
    return ParabolicTrajectory(np.array(times), states, iters, dt, np.array(masses),
                               np.array(cert))


def energy(traj: ParabolicTrajectory, w: WSpec) -> dict:
    """Q_j = sum_m (t_m - t_{m-1}) ||d_{W_j} rho(t_m)||^2_{W_j,N}, and Q = sum_j Q_j."""
    d = np.ndim(traj.states[0])
    Q = np.zeros(d)
    for m in range(1, len(traj.states)):
        h = traj.times[m] - traj.times[m - 1]
        for j in range(d):
            g = diff_w(traj.states[m], j, w)
            Q[j] += h * inner_wj(g, g, j, w)
    return {"Q_j": Q.tolist(), "Q": float(Q.sum())}


def energy_sup(traj: ParabolicTrajectory, w: WSpec, tests: Sequence[np.ndarray]) -> dict:
    """Energy from the variational form, maximized over the span of ``tests``.

    Per stored time and axis, sup_H {2<d_x d_W H, rho> - ||d_W H||^2_W} over H in
    span(tests) is the quadratic maximum b^T M^+ b.
    """
    d = np.ndim(traj.states[0])
    N = np.shape(traj.states[0])[0]
    Q = np.zeros(d)
    for j in range(d):
        dW = [diff_w(np.asarray(H, float), j, w) for H in tests]
        Lj = [N * (g - np.roll(g, 1, axis=j)) for g in dW]
        M = np.array([[inner_wj(g, h, j, w) for h in dW] for g in dW])
        Mp = np.linalg.pinv(M, rcond=1e-12, hermitian=True)
        for m in range(1, len(traj.states)):
            h = traj.times[m] - traj.times[m - 1]
            b = np.array([inner_n(lj, traj.states[m]) for lj in Lj])
            Q[j] += h * float(b @ Mp @ b)
    return {"Q_j": Q.tolist(), "Q": float(Q.sum())}
