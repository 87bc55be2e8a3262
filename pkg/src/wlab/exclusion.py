"""Exclusion process with conductances in a random environment.

A bond {x, x+e_j} exchanges its occupations at rate
N^2 xi_{x,x+e_j} c_{x,x+e_j}(eta) with xi = a_j(x) / (N [W_j((x_j+1)/N) - W_j(x_j/N)])
and c = 1 + b (eta(x-e_j) + eta(x+2e_j)). Time is macroscopic (the N^2 is in
the rates).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _kmc
from .environment import EnvironmentSpec, homogenized_matrix, sample_field
from .grid import DiagonalField, axis_increments, inner_n, sample
from .parabolic import PhiSpec, integrate
from .rng import DOMAIN_DYNAMICS, DOMAIN_INITIAL, key, uniforms
from .wstructure import WSpec

MAX_ENUM_SITES = 20


@dataclass
class RateTable:
    """Base rates ``xi[j][x]`` of bond (x, x+e_j), stored once per bond."""

    xi: np.ndarray
    b: float

    @property
    def d(self) -> int:
        return self.xi.shape[0]

    @property
    def N(self) -> int:
        return self.xi.shape[1]


def build_rates(w: WSpec, a: DiagonalField, b: float) -> RateTable:
    if not b > -0.5:
        raise ValueError(f"b must exceed -1/2, got {b}")
    N, d = a.N, a.d
    xi = np.stack([a[j] / (N * axis_increments(w, j, N, d)) for j in range(d)])
    return RateTable(xi, float(b))


def _shift(x, j, k, N):
    y = list(x)
    y[j] = (y[j] + k) % N
    return tuple(y)


def jump_rate(eta: np.ndarray, x, j: int, rates: RateTable) -> float:
    """Rate of the swap across bond (x, x+e_j) in configuration ``eta``."""
    N = rates.N
    x = tuple(int(c) for c in np.atleast_1d(x))
    y = _shift(x, j, 1, N)
    if eta[x] == eta[y]:
        return 0.0
    c = 1.0 + rates.b * (eta[_shift(x, j, -1, N)] + eta[_shift(x, j, 2, N)])
    return N**2 * rates.xi[(j,) + x] * c


def _neighbours(N: int, d: int) -> np.ndarray:
    """nbr[s, j, :] = flat indices of s-2e_j, s-e_j, s+e_j, s+2e_j."""
    idx = np.arange(N**d).reshape((N,) * d)
    nbr = np.empty((N**d, d, 4), dtype=np.int64)
    for j in range(d):
        for o, k in enumerate((-2, -1, 1, 2)):
            nbr[:, j, o] = np.roll(idx, -k, axis=j).ravel()
    return nbr


def _kernel_args(rates: RateTable):
    N, d = rates.N, rates.d
    base = np.ascontiguousarray(
        (N**2 * np.moveaxis(rates.xi, 0, -1)).reshape(-1), dtype=float)
    return _neighbours(N, d), base


@dataclass
class SimOutput:
    times: np.ndarray
    values: np.ndarray          # (n_samples, n_tests): <pi^N_t, H>
    counts: np.ndarray          # particle number at each sample time
    snapshots: np.ndarray | None = None
    events: int = 0


def pair_tests(snaps: np.ndarray, tests: Sequence[np.ndarray]) -> np.ndarray:
    """<pi, H> = N^-d sum_x H(x/N) eta(x) for flat snapshots (..., n_sites)."""
    if not len(tests):
        return np.zeros(snaps.shape[:-1] + (0,))
    Hs = np.stack([np.asarray(H, float).ravel() for H in tests], axis=1)
    return snaps.astype(float) @ Hs / snaps.shape[-1]


def run_replicas(etas: np.ndarray, rates: RateTable, seed: int, samples: Sequence[float],
                 first_replica: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Simulate independent replicas; replica r uses the dynamics stream (seed, r).

    ``etas`` is ``(R,) + (N,)*d``; returns flat snapshots ``(R, n_samples, N^d)``
    and per-replica event counts.
    """
    samples = np.asarray(samples, dtype=float)
    if np.any(np.diff(samples) < 0) or (samples.size and samples[0] < 0):
        raise ValueError("sample times must be nonnegative and nondecreasing")
    R = etas.shape[0]
    flat = np.ascontiguousarray(etas.reshape(R, -1), dtype=np.uint8)
    nbr, base = _kernel_args(rates)
    keys = np.array([key(seed, first_replica + r, DOMAIN_DYNAMICS) for r in range(R)],
                    dtype=np.uint64)
    snaps = np.zeros((R, samples.size, flat.shape[1]), dtype=np.uint8)
    events = np.zeros(R, dtype=np.int64)
    _kmc.run_many(flat, nbr, base, rates.b, rates.d, keys, samples, snaps, events)
    return snaps, events


def simulate(eta0: np.ndarray, rates: RateTable, T: float, seed: int,
             samples: Sequence[float], tests: Sequence[np.ndarray] = (),
             replica: int = 0, keep_snapshots: bool = False) -> SimOutput:
    """Exact event-driven trajectory on [0, T], observed at ``samples``."""
    samples = np.asarray(samples, dtype=float)
    if samples.size and (samples.min() < 0 or samples.max() > T):
        raise ValueError(f"sample times must lie in [0, {T}]")
    eta0 = np.asarray(eta0, dtype=np.uint8)
    snaps, events = run_replicas(eta0[None], rates, seed, samples, first_replica=replica)
    snaps = snaps[0]
    return SimOutput(samples, pair_tests(snaps, tests), snaps.sum(axis=1).astype(np.int64),
                     snaps.reshape((-1,) + eta0.shape) if keep_snapshots else None,
                     int(events[0]))


def sample_initial(profile: np.ndarray, seed: int, R: int) -> np.ndarray:
    """R independent configurations with P(eta(x) = 1) = profile(x), one stream per replica."""
    profile = np.asarray(profile, dtype=float)
    if profile.min() < 0 or profile.max() > 1:
        raise ValueError("density profile must take values in [0, 1]")
    n = profile.size
    counters = np.arange(n, dtype=np.uint64)
    out = np.empty((R,) + profile.shape, dtype=np.uint8)
    for r in range(R):
        u = uniforms(key(seed, r, DOMAIN_INITIAL), counters)
        out[r] = (u < profile.ravel()).reshape(profile.shape)
    return out


# -- enumeration-scale checks ------------------------------------------------

def _enum(rates: RateTable):
    N, d = rates.N, rates.d
    n = N**d
    if n > MAX_ENUM_SITES:
        raise ValueError(f"enumeration limited to {MAX_ENUM_SITES} sites, got {n}")
    states = np.arange(2**n, dtype=np.int64)
    bits = ((states[:, None] >> np.arange(n)) & 1).astype(np.int64)
    return n, states, bits


def _bond_table(rates: RateTable):
    """(s, s2, s_minus, s_plus2, base_rate) per bond, flat site indices."""
    N, d = rates.N, rates.d
    nbr, base = _kernel_args(rates)
    out = []
    for s in range(N**d):
        for j in range(d):
            out.append((s, nbr[s, j, 2], nbr[s, j, 1], nbr[s, j, 3], base[s * d + j]))
    return out


def generator_matrix(rates: RateTable) -> np.ndarray:
    """Dense generator on {0,1}^{T^d_N}; state index has bit s = eta at flat site s."""
    n, states, bits = _enum(rates)
    if n > 12:
        raise ValueError("dense generator limited to 12 sites")
    Q = np.zeros((2**n, 2**n))
    for s, s2, sm, sp, base in _bond_table(rates):
        act = bits[:, s] != bits[:, s2]
        r = np.where(act, base * (1.0 + rates.b * (bits[:, sm] + bits[:, sp])), 0.0)
        tgt = states ^ (1 << s) ^ (1 << s2)
        np.add.at(Q, (states[act], tgt[act]), r[act])
    Q[np.diag_indices_from(Q)] = -Q.sum(axis=1)
    return Q


def check_detailed_balance(rates: RateTable, alpha: float) -> dict:
    """max |nu_a(eta) r(eta -> s eta) - nu_a(s eta) r(s eta -> eta)| over all pairs."""
    n, states, bits = _enum(rates)
    k = bits.sum(axis=1)
    nu = alpha**k * (1 - alpha) ** (n - k)
    worst = 0.0
    worst_rel = 0.0
    for s, s2, sm, sp, base in _bond_table(rates):
        act = bits[:, s] != bits[:, s2]
        tgt = states ^ (1 << s) ^ (1 << s2)
        fwd = base * (1.0 + rates.b * (bits[:, sm] + bits[:, sp]))
        bwd = base * (1.0 + rates.b * (bits[tgt, sm] + bits[tgt, sp]))
        lhs = nu[act] * fwd[act]
        rhs = nu[tgt[act]] * bwd[act]
        if lhs.size:
            v = np.abs(lhs - rhs)
            worst = max(worst, float(v.max()))
            worst_rel = max(worst_rel, float((v / np.maximum(lhs, 1e-300)).max()))
    return {"alpha": alpha, "b": rates.b, "sites": n, "max_violation": worst,
            "max_relative_violation": worst_rel}


# -- hydrodynamic comparison -----------------------------------------------

@dataclass
class HydroReport:
    times: np.ndarray
    raw: np.ndarray             # (R, n_times, n_tests)
    mean: np.ndarray            # (n_times, n_tests)
    stderr: np.ndarray
    pde: np.ndarray
    gap: np.ndarray
    density: np.ndarray | None = None   # (n_times, N^d) replica-mean occupation
    pde_states: list = field(default_factory=list)
    events: np.ndarray | None = None

    @property
    def max_gap(self) -> float:
        return float(self.gap.max())

    def passes(self, floor: float, k: float = 3.0) -> np.ndarray:
        return self.gap <= np.maximum(floor, k * self.stderr)


def hydro_compare(gamma: Callable | np.ndarray, env: EnvironmentSpec, w: WSpec, b: float,
                  N: int, R: int, times: Sequence[float], tests: Sequence[np.ndarray],
                  seed: int = 0, dt: float | None = None) -> HydroReport:
    """Replica-averaged <pi^N_t, H> against <rho(t), H>_N from the parabolic integrator.

    The particle system runs in the sampled environment A^N; the PDE uses
    the homogenized matrix and Phi(a) = a + b a^2.
    """
    d = env.d
    profile = sample(gamma, N, d) if callable(gamma) else np.asarray(gamma, dtype=float)
    times = np.asarray(times, dtype=float)
    rates = build_rates(w, sample_field(env, N), b)
    etas = sample_initial(profile, seed, R)
    snaps, events = run_replicas(etas, rates, seed, times)
    raw = pair_tests(snaps, tests)
    mean = raw.mean(axis=0)
    stderr = raw.std(axis=0, ddof=1) / np.sqrt(R) if R > 1 else np.zeros_like(mean)

    A = homogenized_matrix(env)
    a_hom = DiagonalField.constant(N, d, np.diag(A))
    phi = PhiSpec.quadratic(b)
    T = float(times.max())
    if dt is None:
        dt = T / 400
    # integrate in pieces so that each sample time is hit exactly
    pde = np.empty_like(mean)
    rho = profile.copy()
    t_prev = 0.0
    states = []
    for m, t in enumerate(times):
        if t > t_prev:
            span = t - t_prev
            traj = integrate(rho, span, a_hom, w, phi, dt=span / max(1, int(np.ceil(span / dt - 1e-9))))
            rho = traj.final
        states.append(rho.copy())
        pde[m] = [inner_n(rho, H) for H in tests]
        t_prev = t
    return HydroReport(times, raw, mean, stderr, pde, np.abs(mean - pde),
                       snaps.mean(axis=0), states, events)
