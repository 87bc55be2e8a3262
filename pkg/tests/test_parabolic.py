import numpy as np
import pytest

from conftest import random_field, random_w
from wlab.config import make_test_functions
from wlab.errors import RangeViolation
from wlab.grid import DiagonalField, norm_l2
from wlab.parabolic import PhiSpec, energy, energy_sup, integrate, step
from wlab.wstructure import WSpec

ID1 = WSpec.identity(1)


def test_phi_spec():
    phi = PhiSpec.quadratic(0.5)
    assert phi(0.5) == pytest.approx(0.625)
    assert phi.deriv(1.0) == pytest.approx(2.0)
    assert phi.B > 2.0
    with pytest.raises(ValueError):
        PhiSpec.quadratic(-0.5)
    with pytest.raises(ValueError):
        PhiSpec((0.0, 1.0), B=0.5)


def test_constant_state_is_fixed():
    a = DiagonalField.constant(32, 1)
    rho, k = step(np.full(32, 0.3), 0.01, a, ID1, PhiSpec.quadratic(0.5))
    np.testing.assert_allclose(rho, 0.3, atol=1e-15)
    assert k <= 1


def test_linear_step_factor():
    N = 32
    dt = 1e-3
    g = 0.5 + 0.2 * np.sin(2 * np.pi * np.arange(N) / N)
    rho, _ = step(g, dt, DiagonalField.constant(N, 1), ID1, PhiSpec.quadratic(0.0))
    factor = 1 / (1 + dt * 4 * N**2 * np.sin(np.pi / N) ** 2)
    np.testing.assert_allclose(rho, 0.5 + 0.2 * factor * np.sin(2 * np.pi * np.arange(N) / N),
                               atol=1e-10)


def test_mass_drift_thousand_steps(rng):
    N = 64
    w = WSpec.with_jumps([[(0.4, 0.5)]])
    a = random_field(rng, N, 1)
    g = np.clip(0.5 + 0.3 * rng.standard_normal(N), 0.05, 0.95)
    traj = integrate(g, 0.1, a, w, PhiSpec.quadratic(0.5), dt=1e-4, store_every=50)
    assert traj.mass_drift <= 1e-10


def _semigroup_error(N, T, dt):
    x = np.arange(N) / N
    g = 0.5 + 0.3 * np.sin(2 * np.pi * x)
    traj = integrate(g, T, DiagonalField.constant(N, 1), ID1, PhiSpec.quadratic(0.0), dt=dt)
    mu = 4 * N**2 * np.sin(np.pi / N) ** 2
    exact = 0.5 + 0.3 * np.exp(-mu * T) * np.sin(2 * np.pi * x)
    return norm_l2(traj.final - exact)


def test_semigroup_first_order():
    errs = [_semigroup_error(64, 0.02, dt) for dt in (1e-3, 5e-4, 2.5e-4)]
    orders = np.log2(np.array(errs[:-1]) / errs[1:])
    assert np.all(orders >= 0.9), orders


def test_range_preservation(rng):
    N = 32
    for i in range(50):
        g = rng.uniform(0, 1, N)
        w = random_w(rng, 1)
        a = random_field(rng, N, 1)
        traj = integrate(g, 0.01, a, w, PhiSpec.quadratic(float(rng.uniform(-0.4, 1.0))),
                         dt=1e-3, store_every=10)
        assert traj.final.min() >= -1e-9 and traj.final.max() <= 1 + 1e-9


def test_range_violation_reported():
    with pytest.raises(RangeViolation):
        integrate(np.full(8, 1.5), 0.1, DiagonalField.constant(8, 1), ID1,
                  PhiSpec.quadratic(0.0))


def test_contraction(rng):
    N, T = 32, 0.05
    w = WSpec.with_jumps([[(0.3, 0.5)]])
    a = random_field(rng, N, 1)
    phi = PhiSpec.quadratic(0.5)
    g1 = 0.5 + 0.2 * np.sin(2 * np.pi * np.arange(N) / N)
    v = rng.uniform(-1, 1, N)
    r1 = integrate(g1, T, a, w, phi, dt=1e-3).final

    def rate(eps):
        r2 = integrate(g1 + eps * v, T, a, w, phi, dt=1e-3).final
        return np.log(norm_l2(r1 - r2) / (eps * norm_l2(v))) / T

    # C fitted once on the smallest perturbation, then checked on larger ones
    C = rate(1e-4)
    for eps in (1e-3, 1e-2, 1e-1):
        c = rate(eps)
        assert abs(c - C) <= 0.1 * abs(C) + 1.0
        assert c <= C + np.log(2) / T


def test_certification_residual(rng):
    N = 32
    w = WSpec.with_jumps([[(0.6, 0.25)]])
    a = random_field(rng, N, 1)
    tests = make_test_functions("axis-sinusoids", N, 1, 2)
    g = 0.5 + 0.3 * np.cos(2 * np.pi * np.arange(N) / N)
    traj = integrate(g, 0.05, a, w, PhiSpec.quadratic(0.5), dt=1e-3, tests=tests)
    assert traj.certification.shape == (len(traj.times), len(tests))
    assert traj.certification.max() <= 1e-8


def test_energy_constant_is_zero():
    traj = integrate(np.full(16, 0.4), 0.1, DiagonalField.constant(16, 1), ID1,
                     PhiSpec.quadratic(0.0))
    assert energy(traj, ID1)["Q"] == 0.0


def test_energy_of_frozen_w_profile():
    # a stored trajectory equal to W restricted to the grid at all times
    N, T = 16, 0.5
    w = WSpec.with_jumps([[(0.55, 0.7)]])
    ax = w.axes[0]
    x = np.arange(N) / N
    prof = ax(x)

    class Frozen:
        times = np.linspace(0, T, 6)
        states = [prof] * 6

    inc = ax((np.arange(N) + 1) / N) - ax(x)
    wrap = (prof[0] - prof[-1]) ** 2 / inc[-1]
    Q = energy(Frozen, w)["Q"]
    assert Q == pytest.approx(T * (inc[:-1].sum() + wrap), rel=1e-12)


def test_energy_sup_approaches_norm_form(rng):
    N = 16
    w = WSpec.with_jumps([[(0.3, 0.5)]])
    g = rng.uniform(0.2, 0.8, N)
    traj = integrate(g, 0.01, DiagonalField.constant(N, 1), w, PhiSpec.quadratic(0.0), dt=2e-3)
    Q = energy(traj, w)["Q"]
    sups = []
    for kmax in (1, 3, 8):
        tests = make_test_functions("axis-sinusoids", N, 1, kmax)
        sups.append(energy_sup(traj, w, tests)["Q"])
    assert all(s <= Q * (1 + 1e-10) for s in sups)
    assert sups[0] <= sups[1] * (1 + 1e-12) <= sups[2] * (1 + 1e-12)
    assert sups[-1] == pytest.approx(Q, rel=1e-8)


def test_two_dimensional_run(rng):
    N = 12
    w = random_w(rng, 2)
    a = random_field(rng, N, 2)
    g = rng.uniform(0.1, 0.9, (N, N))
    traj = integrate(g, 0.01, a, w, PhiSpec.quadratic(-0.25), dt=2e-3)
    assert traj.mass_drift <= 1e-10
    assert all(k <= 10 for k in traj.newton_iters)
