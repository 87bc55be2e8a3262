import json

import numpy as np
import pytest

from wlab import config as wcfg
from wlab.cli import main, run
from wlab.config import ConfigError, ExperimentConfig, make_test_functions
from wlab.io import load_grid_csv, load_grid_raw, save_grid_csv, save_grid_raw


def _write(tmp_path, tree, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(tree))
    return str(p)


def test_config_round_trip():
    cfg = ExperimentConfig(kind="hydro", b=0.5, seeds=[3, 4], lam=2.0,
                           w=[{"alpha": 1.0, "jumps": [{"location": 0.3, "size": 0.5}]}])
    again = ExperimentConfig.from_dict(json.loads(cfg.dumps()))
    assert again == cfg
    assert "lambda" in cfg.to_dict() and "lam" not in cfg.to_dict()


@pytest.mark.parametrize("tree,field", [
    ({"kind": "bogus"}, "kind"),
    ({"d": 4}, "d"),
    ({"b": -0.5}, "b"),
    ({"N_schedule": [32, 16]}, "N_schedule"),
    ({"kind": "neumann", "lambda": 1.0}, "lambda"),
    ({"kind": "homogenize", "lambda": 0.0}, "lambda"),
    ({"w": [{"alpha": -1.0, "jumps": []}]}, "w"),
    ({"environment": {"law": "two-point", "p": 2.0}}, "environment"),
    ({"test_functions": {"families": ["wavelets"]}}, "test_functions"),
    ({"seeds": []}, "seeds"),
    ({"colour": "red"}, "colour"),
])
def test_validation_names_field(tree, field):
    with pytest.raises(ConfigError) as exc:
        ExperimentConfig.from_dict(tree)
    assert exc.value.field == field


def test_cli_config_error_exit_code(tmp_path, capsys):
    assert main(["elliptic", "--config", _write(tmp_path, {"d": 7}), "--out", str(tmp_path)]) == 2
    assert "d:" in capsys.readouterr().err
    assert main(["elliptic"]) == 2
    (tmp_path / "bad.json").write_text("{not json")
    assert main(["elliptic", "--config", str(tmp_path / "bad.json")]) == 2
    assert main(["hydro", "--config", _write(tmp_path, {"kind": "elliptic"})]) == 2


def test_elliptic_lambda_zero_incompatible(tmp_path, capsys):
    tree = {"kind": "elliptic", "lambda": 0.0, "source": {"kind": "constant", "value": 1.0}}
    code = main(["elliptic", "--config", _write(tmp_path, tree), "--out", str(tmp_path / "o")])
    assert code == 1
    assert "IncompatibleRHS" in capsys.readouterr().err


def test_elliptic_manufactured_run(tmp_path):
    tree = {"kind": "elliptic", "lambda": 1.0,
            "w": [{"alpha": 1.0, "jumps": [{"location": 0.6180339887498949, "size": 0.5}]}],
            "N_schedule": [32, 64, 128], "source": {"kind": "manufactured"}}
    assert main(["elliptic", "--config", _write(tmp_path, tree), "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "convergence.csv").read_bytes().split(b"\r\n")
    assert lines[0] == b"N,l2_error,h1w_norm,iterations,residual"
    errs = [float(l.split(b",")[1]) for l in lines[1:] if l]
    assert errs[1] / errs[0] <= 0.7 and errs[2] / errs[1] <= 0.7


def test_neumann_run(tmp_path):
    tree = {"kind": "neumann", "lambda": 0.0, "N_schedule": [16, 32],
            "environment": {"law": "two-point"}}
    assert main(["neumann", "--config", _write(tmp_path, tree), "--out", str(tmp_path)]) == 0
    assert (tmp_path / "convergence.csv").exists()


def test_parabolic_run(tmp_path):
    tree = {"kind": "parabolic", "b": 0.5, "N": 32, "T": 0.02, "dt": 0.002,
            "w": [{"alpha": 1.0, "jumps": [{"location": 0.5, "size": 0.5}]}]}
    assert main(["parabolic", "--config", _write(tmp_path, tree), "--out", str(tmp_path)]) == 0
    summ = json.loads((tmp_path / "summary.json").read_text())
    assert summ["mass_drift"] <= 1e-10 and summ["steps"] == 10
    assert summ["max_certification_residual"] <= 1e-8
    rows = (tmp_path / "snapshots.csv").read_text().splitlines()
    assert len(rows) == 1 + 11 * 32


def test_homogenize_run(tmp_path):
    tree = {"kind": "homogenize", "environment": {"law": "two-point"}, "seeds": [0, 1],
            "N_schedule": [8, 16]}
    assert main(["homogenize", "--config", _write(tmp_path, tree), "--out", str(tmp_path)]) == 0
    summ = json.loads((tmp_path / "summary.json").read_text())
    assert summ["homogenized_matrix"] == [[1.25]]
    assert len(summ["final_over_initial_l2_gap"]) == 2


def test_selftest(tmp_path):
    assert main(["selftest", "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "selftest.csv").read_text().splitlines()
    assert all(r.endswith(",1") for r in rows[1:])


def test_manifest(tmp_path):
    cfg = ExperimentConfig(kind="selftest", seeds=[5])
    man = run(cfg, tmp_path)
    disk = json.loads((tmp_path / "manifest.json").read_text())
    assert disk["seeds"] == [5] and disk["files"] == ["selftest.csv"]
    assert set(disk["versions"]) >= {"wlab", "numpy", "python"}
    assert disk["config"] == cfg.to_dict()
    assert man["wall_clock_seconds"] >= 0


def test_out_precedence(tmp_path, monkeypatch):
    monkeypatch.setenv("WLAB_OUT", str(tmp_path / "env"))
    run(ExperimentConfig(output=str(tmp_path / "cfg")))
    assert (tmp_path / "env" / "manifest.json").exists()
    run(ExperimentConfig(output=str(tmp_path / "cfg")), tmp_path / "flag")
    assert (tmp_path / "flag" / "manifest.json").exists()
    assert not (tmp_path / "cfg").exists()


def test_hydro_byte_identical(tmp_path):
    tree = {"kind": "hydro", "N": 32, "replicas": 8, "sample_times": [0.01, 0.02],
            "b": 0.5, "w": [{"alpha": 1.0, "jumps": [{"location": 0.3, "size": 0.5}]}],
            "density_dump": True, "environment": {"law": "two-point"}}
    p = _write(tmp_path, tree)
    for name in ("a", "b"):
        assert main(["hydro", "--config", p, "--out", str(tmp_path / name), "--seed", "4"]) == 0
    for f in ("hydro_raw.csv", "hydro.csv", "density.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    assert main(["hydro", "--config", p, "--out", str(tmp_path / "c"), "--seed", "5"]) == 0
    raw = [(tmp_path / n / "hydro_raw.csv").read_bytes() for n in ("a", "c")]
    assert raw[0] != raw[1]


@pytest.mark.parametrize("family,d,kmax,count", [
    ("constants", 1, 3, 1), ("constants", 2, 1, 1),
    ("axis-sinusoids", 1, 2, 4), ("axis-sinusoids", 2, 1, 4),
    ("products", 2, 1, 4), ("products", 1, 2, 4),
])
def test_test_function_counts(family, d, kmax, count):
    fs = make_test_functions(family, 8, d, kmax)
    assert len(fs) == count and all(f.shape == (8,) * d for f in fs)


def test_test_set_has_constant_first():
    cfg = ExperimentConfig(test_functions={"families": ["axis-sinusoids"], "kmax": 1})
    named = wcfg.test_set(cfg, 16)
    assert named[0][0] == "one" and len(named) == 3


def test_grid_io_round_trip(tmp_path, rng):
    f = rng.standard_normal((5, 5))
    save_grid_csv(tmp_path / "g.csv", f)
    save_grid_raw(tmp_path / "g.bin", f)
    assert np.array_equal(load_grid_csv(tmp_path / "g.csv"), f)
    assert np.array_equal(load_grid_raw(tmp_path / "g.bin"), f)
