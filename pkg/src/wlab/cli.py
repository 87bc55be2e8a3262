"""``wlab`` command line: run one declarative experiment and write CSV/JSON artifacts."""
from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import (ConfigError, ExperimentConfig, manufactured, profile_function,
                     test_set)
from .elliptic import EllipticProblem, solve, solve_neumann
from .environment import homogenization_study, sample_field
from .errors import WlabError
from .exclusion import hydro_compare
from .grid import (DiagonalField, grid_points, norm_l2, sample, w_interpolate)
from .io import write_csv
from .parabolic import energy, integrate
from .selftest import run_selftest


def _versions() -> dict:
    import numba
    return {"wlab": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "numba": numba.__version__}


def _field(cfg: ExperimentConfig, N: int, seed: int) -> DiagonalField:
    return sample_field(cfg.env_spec(seed), N)


def _run_elliptic(cfg: ExperimentConfig, out: Path) -> dict:
    w = cfg.w_spec()
    neumann = cfg.kind == "neumann" or cfg.lam == 0
    src = cfg.source
    f_fn = profile_function(src, w, cfg.lam)
    exact = manufactured(src, w, cfg.lam) if src["kind"] == "manufactured" else None
    seed = cfg.seeds[0]
    ref = None
    if exact is None:
        Nr = 2 * cfg.N_schedule[-1]
        prob = EllipticProblem(w, _field(cfg, Nr, seed), cfg.lam, sample(f_fn, Nr, cfg.d), cfg.tol)
        ref = (solve_neumann(prob) if neumann else solve(prob)).u
    rows = []
    for N in cfg.N_schedule:
        prob = EllipticProblem(w, _field(cfg, N, seed), cfg.lam, sample(f_fn, N, cfg.d), cfg.tol)
        sol = solve_neumann(prob) if neumann else solve(prob)
        if exact is not None:
            target = exact.u(np.arange(N) / N)
            if neumann:
                target = target - target.mean()
        else:
            target = w_interpolate(ref, w, grid_points(N, cfg.d)).reshape((N,) * cfg.d)
        rows.append([N, norm_l2(sol.u - target), sol.norms["h1w"], sol.iterations,
                     sol.final_residual])
    write_csv(out / "convergence.csv", ["N", "l2_error", "h1w_norm", "iterations", "residual"], rows)
    return {"files": ["convergence.csv"]}


def _run_parabolic(cfg: ExperimentConfig, out: Path) -> dict:
    w = cfg.w_spec()
    N, d = cfg.grid_N, cfg.d
    a = _field(cfg, N, cfg.seeds[0])
    gamma = sample(profile_function(cfg.initial, w), N, d)
    tests = [f for _, f in test_set(cfg, N)]
    traj = integrate(gamma, cfg.T, a, w, cfg.phi_spec(), dt=cfg.dt, tol=cfg.tol, tests=tests)
    rows = []
    for t, rho in zip(traj.times, traj.states):
        for idx in np.ndindex(*rho.shape):
            rows.append([t, *idx, rho[idx]])
    write_csv(out / "snapshots.csv", ["t"] + [f"i{j}" for j in range(d)] + ["value"], rows)
    en = energy(traj, w)
    summary = {"mass_drift": traj.mass_drift,
               "max_newton_iters": int(max(traj.newton_iters, default=0)),
               "energy": {"Q_j": en["Q_j"], "Q": en["Q"]},
               "dt": traj.dt, "steps": len(traj.newton_iters),
               "max_certification_residual": float(traj.certification.max(initial=0.0))}
    (out / "summary.json").write_text(json.dumps(summary, indent=2))
    return {"files": ["snapshots.csv", "summary.json"]}


def _run_homogenize(cfg: ExperimentConfig, out: Path) -> dict:
    w = cfg.w_spec()
    env = cfg.env_spec(cfg.seeds[0])
    f_fn = profile_function(cfg.source, w, cfg.lam)
    reports = homogenization_study(env, cfg.seeds, w, cfg.lam, f_fn, cfg.N_schedule, tol=cfg.tol)
    rows = []
    for rep in reports:
        for r in rep.records:
            rows.append([rep.seed, r["N"], r["l2_gap"], r["norm_gap"], r["energy_gap"]])
    write_csv(out / "homogenization.csv", ["seed", "N", "l2_gap", "norm_gap", "energy_gap"], rows)
    summary = {"homogenized_matrix": reports[0].matrix.tolist(),
               "reference_N": reports[0].reference_N,
               "final_over_initial_l2_gap": [r.column("l2_gap")[-1] / r.column("l2_gap")[0]
                                             for r in reports]}
    (out / "summary.json").write_text(json.dumps(summary, indent=2))
    return {"files": ["homogenization.csv", "summary.json"]}


def _run_hydro(cfg: ExperimentConfig, out: Path) -> dict:
    w = cfg.w_spec()
    N, d = cfg.grid_N, cfg.d
    named = test_set(cfg, N)
    tests = [f for _, f in named]
    seed = cfg.seeds[0]
    rep = hydro_compare(profile_function(cfg.initial, w), cfg.env_spec(seed), w, cfg.b, N,
                        cfg.replicas, cfg.sample_times, tests, seed=seed, dt=cfg.dt)
    raw_rows = []
    for r in range(rep.raw.shape[0]):
        for m, t in enumerate(rep.times):
            for k in range(len(tests)):
                raw_rows.append([r, t, k, rep.raw[r, m, k]])
    write_csv(out / "hydro_raw.csv", ["replica", "t", "test_id", "value"], raw_rows)
    agg = [[t, k, rep.mean[m, k], rep.stderr[m, k], rep.pde[m, k], rep.gap[m, k]]
           for m, t in enumerate(rep.times) for k in range(len(tests))]
    write_csv(out / "hydro.csv", ["t", "test_id", "mean", "stderr", "pde_value", "gap"], agg)
    files = ["hydro_raw.csv", "hydro.csv"]
    if cfg.density_dump:
        dens = [[t, s, rep.density[m, s]] for m, t in enumerate(rep.times)
                for s in range(rep.density.shape[1])]
        write_csv(out / "density.csv", ["t", "site", "mean_occupation"], dens)
        files.append("density.csv")
    summary = {"test_functions": [n for n, _ in named], "max_gap": rep.max_gap,
               "events_per_replica": float(rep.events.mean())}
    (out / "summary.json").write_text(json.dumps(summary, indent=2))
    return {"files": files + ["summary.json"]}


def _run_selftest(cfg: ExperimentConfig, out: Path) -> dict:
    res = run_selftest(cfg.seeds[0])
    write_csv(out / "selftest.csv", ["check", "value", "limit", "passed"],
              [[r["check"], r["value"], r["limit"], r["passed"]] for r in res])
    failed = [r["check"] for r in res if not r["passed"]]
    if failed:
        raise WlabError(f"selftest failed: {', '.join(failed)}")
    return {"files": ["selftest.csv"]}


RUNNERS = {"elliptic": _run_elliptic, "neumann": _run_elliptic, "parabolic": _run_parabolic,
           "homogenize": _run_homogenize, "hydro": _run_hydro, "selftest": _run_selftest}


def run(cfg: ExperimentConfig, out: str | Path | None = None) -> dict:
    """Execute ``cfg``; writes data files and ``manifest.json`` into the output directory."""
    out = Path(out or os.environ.get("WLAB_OUT") or cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    result = RUNNERS[cfg.kind](cfg, out)
    manifest = {"config": cfg.to_dict(), "seeds": cfg.seeds, "versions": _versions(),
                "wall_clock_seconds": time.perf_counter() - t0, "files": result["files"]}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return manifest


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="wlab", description=__doc__)
    parser.add_argument("subcommand", choices=sorted(RUNNERS))
    parser.add_argument("--config", help="JSON experiment file (defaults for selftest)")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--seed", type=int, help="override the seed list with one seed")
    parser.add_argument("--threads", type=int, help="worker threads for replica simulation")
    args = parser.parse_args(argv)
    try:
        if args.config:
            tree = json.loads(Path(args.config).read_text())
        elif args.subcommand == "selftest":
            tree = {}
        else:
            raise ConfigError("--config", "required for this subcommand")
        tree["kind"] = args.subcommand if "kind" not in tree else tree["kind"]
        if tree["kind"] != args.subcommand:
            raise ConfigError("kind", f"config is for {tree['kind']!r}, not {args.subcommand!r}")
        if args.seed is not None:
            tree["seeds"] = [args.seed]
        cfg = ExperimentConfig.from_dict(tree)
    except (ConfigError, json.JSONDecodeError, OSError, TypeError) as exc:
        print(f"wlab: config error: {exc}", file=sys.stderr)
        return 2
    if args.threads:
        import numba
        numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))
    try:
        run(cfg, args.out)
    except WlabError as exc:
        print(f"wlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
