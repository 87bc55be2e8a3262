"""Exact-identity checks that any installation should pass in well under a second."""
from __future__ import annotations

import numpy as np

from .elliptic import EllipticProblem, solve
from .exclusion import build_rates, check_detailed_balance
from .grid import (DiagonalField, apply_generator, apply_ln, dense_ln, diff_w, inner_n,
                   inner_wj, project_mean_zero)
from .wstructure import AxisW, WSpec, increments


def _random_case(rng, N, d):
    w = WSpec(tuple(AxisW(rng.uniform(0.5, 2.0),
                          ((rng.uniform(0, 1), rng.uniform(0.1, 1.0)),)) for _ in range(d)))
    a = DiagonalField(rng.uniform(0.5, 2.0, (d,) + (N,) * d), theta=2.0)
    return w, a


def run_selftest(seed: int = 0) -> list[dict]:
    rng = np.random.default_rng(seed)
    results = []

    def record(name, value, limit):
        results.append({"check": name, "value": float(value), "limit": float(limit),
                        "passed": bool(value <= limit)})

    worst = 0.0
    for d in (1, 2):
        w, a = _random_case(rng, 8, d)
        f, g = rng.standard_normal((2,) + (8,) * d)
        lhs = inner_n(apply_ln(f, a, w), g)
        rhs = -sum(inner_wj(a[j] * diff_w(f, j, w), diff_w(g, j, w), j, w) for j in range(d))
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), 1e-300))
    record("summation_by_parts", worst, 1e-12)

    w, a = _random_case(rng, 8, 2)
    M = dense_ln(a, w)
    record("operator_symmetry", np.abs(M - M.T).max() / np.abs(M).max(), 1e-14)
    record("operator_nonpositive", np.linalg.eigvalsh(M).max() / np.abs(M).max(), 1e-12)
    f = rng.standard_normal((8, 8))
    diff = apply_ln(f, a, w) - apply_generator(f, a, w)
    record("generator_identity", np.abs(diff).max() / np.abs(apply_ln(f, a, w)).max(), 1e-12)

    record("increment_telescoping",
           abs(increments(w, 0, 37).sum() - w.axes[0].total) / w.axes[0].total, 1e-14)
    f = rng.standard_normal(16)
    p = project_mean_zero(f)
    record("projector_idempotent", np.abs(project_mean_zero(p) - p).max(), 1e-15)

    N = 64
    x = np.arange(N) / N
    f = np.sin(2 * np.pi * x)
    u = solve(EllipticProblem(WSpec.identity(1), DiagonalField.constant(N, 1), 1.0, f)).u
    exact = f / (1 + 4 * N**2 * np.sin(np.pi / N) ** 2)
    record("elliptic_spectral_oracle", np.abs(u - exact).max() / np.abs(exact).max(), 1e-8)

    worst = 0.0
    for b in (-0.25, 0.0, 0.5):
        rates = build_rates(WSpec.with_jumps([[(0.3, 0.5)]]), DiagonalField.constant(5, 1), b)
        for alpha in (0.2, 0.5, 0.8):
            worst = max(worst, check_detailed_balance(rates, alpha)["max_violation"])
    record("detailed_balance", worst, 1e-14)
    return results
