import json
import shutil

import numpy as np
import pytest
import yaml

from meanfield import io, svg
from meanfield.cli import main
from meanfield.config import PRESETS, resolve
from meanfield.experiments import ConfigError

SMALL = {
    "particle-trace": {"m_grid": [5, 20], "n": 50, "iterations": 200, "snapshots": 4, "eval_size": 500},
    "teacher-student": {"d": 3, "m0": 2, "m_grid": [2, 8], "repetitions": 2, "iterations": 100,
                        "eval_size": 500},
    "implicit-bias-2d": {"m": 40, "n": 20, "repetitions": 2, "iterations": 100, "resolution": 64,
                         "eval_size": 500},
    "implicit-bias-highdim": {"m": 40, "d_fixed": 4, "n_fixed": 20, "n_grid": [10, 20], "d_grid": [3],
                              "repetitions": 2, "iterations": 100, "eval_size": 500},
    "certificate": {"m_grid": [5], "n": 50, "iterations": 200, "eval_size": 500, "n_probes": 50},
    "equivalence": {"horizon": 0.05},
}


def run_cli(tmp_path, experiment, cfg, *extra, name="out"):
    conf = tmp_path / f"{name}.yaml"
    conf.write_text(yaml.safe_dump(cfg))
    out = tmp_path / name
    code = main([experiment, "--config", str(conf), "--out", str(out), *extra])
    return code, out


@pytest.mark.parametrize("experiment", sorted(SMALL))
def test_experiments_run(tmp_path, capsys, experiment):
    code, out = run_cli(tmp_path, experiment, SMALL[experiment], "--seed", "3")
    assert code == 0
    json.loads(capsys.readouterr().out)
    files = list(out.iterdir())
    assert files
    for f in out.glob("*.csv"):
        config, columns, rows = io.read_csv(f)
        assert config["seed"] == 3 and config["experiment"] == experiment
        assert all(len(r) == len(columns) for r in rows)
    for f in out.glob("*.json"):
        assert json.loads(f.read_text())["config"]["seed"] == 3


def test_teacher_student_columns(tmp_path):
    code, out = run_cli(tmp_path, "teacher-student", SMALL["teacher-student"])
    assert code == 0
    _, cols, rows = io.read_csv(out / "runs.csv")
    assert cols[:4] == ["m", "repetition", "final_risk", "success"]
    for r in rows:
        assert int(r[3]) == int(float(r[2]) < 1e-3)
    assert io.read_csv(out / "aggregate.csv")[1] == ["m", "mean_risk", "success_rate"]


def test_highdim_errors_in_unit_interval(tmp_path):
    code, out = run_cli(tmp_path, "implicit-bias-highdim", SMALL["implicit-bias-highdim"])
    assert code == 0
    _, cols, rows = io.read_csv(out / "runs.csv")
    err = np.array([float(r[cols.index("test_error")]) for r in rows])
    assert np.all((err >= 0) & (err <= 1))


def test_particle_trace_starts_on_unit_circle(tmp_path):
    code, out = run_cli(tmp_path, "particle-trace", SMALL["particle-trace"])
    _, cols, rows = io.read_csv(out / "particles.csv")
    c = {k: i for i, k in enumerate(cols)}
    first = [r for r in rows if r[c["snapshot"]] == "0"]
    assert first
    for r in first:
        assert np.hypot(float(r[c["pos_x"]]), float(r[c["pos_y"]])) == pytest.approx(1.0, rel=1e-12)


def test_config_errors_exit_2(tmp_path):
    assert run_cli(tmp_path, "equivalence", {"bogus": 1}, name="a")[0] == 2
    assert run_cli(tmp_path, "equivalence", {"step": -1.0}, name="b")[0] == 2
    assert run_cli(tmp_path, "equivalence", {"m": 0}, name="c")[0] == 2
    assert run_cli(tmp_path, "particle-trace", {"d": 3}, name="d")[0] == 2
    bad = tmp_path / "bad.yaml"
    bad.write_text("- just\n- a list\n")
    assert main(["equivalence", "--config", str(bad), "--out", str(tmp_path / "x")]) == 2
    assert main(["equivalence", "--config", str(tmp_path / "missing.yaml")]) == 2


def test_divergence_exit_3(tmp_path):
    cfg = {**SMALL["particle-trace"], "step": 1e6, "m_grid": [5]}
    assert run_cli(tmp_path, "particle-trace", cfg)[0] == 3


def test_sweep_divergence_recorded_not_fatal(tmp_path):
    cfg = {**SMALL["teacher-student"], "step": 1e6}
    code, out = run_cli(tmp_path, "teacher-student", cfg)
    assert code == 0
    _, cols, rows = io.read_csv(out / "runs.csv")
    assert all(r[cols.index("diverged")] == "1" for r in rows)


def test_resolve_layers():
    cfg = resolve("teacher-student", "desk", {"m_grid": [4, 8]}, {"seed": 9})
    assert cfg["m_grid"] == [4, 8] and cfg["seed"] == 9 and cfg["d"] == 10
    assert resolve("teacher-student", "paper")["step"] == 0.005
    with pytest.raises(ConfigError):
        resolve("teacher-student", "desk", {"repetitions": 2.5})
    with pytest.raises(ConfigError):
        resolve("nope")
    with pytest.raises(ConfigError):
        resolve("equivalence", "desk", {"experiment": "certificate"})


def test_full_scale_presets():
    ts = PRESETS["teacher-student"]["paper"]
    assert (ts["iterations"], ts["batch"], ts["step"], ts["d"], ts["m0"]) == (10_000, 100, 0.005, 100, 10)
    assert ts["repetitions"] == 30
    hd = PRESETS["implicit-bias-highdim"]["paper"]
    assert hd["d_fixed"] == 15 and hd["n_fixed"] == 256 and hd["repetitions"] == 20
    assert PRESETS["implicit-bias-2d"]["paper"]["m"] == 1000
    assert 1000 in PRESETS["particle-trace"]["paper"]["m_grid"]


def test_csv_format(tmp_path):
    path = io.write_csv(tmp_path / "t.csv", ["a", "b"], [[0.1, 1], [1 / 3, True]], {"seed": 1})
    raw = path.read_bytes()
    assert raw.startswith(b'# config: {"seed": 1}\r\n')
    assert b"0.10000000000000001" in raw and b"0.33333333333333331" in raw
    _, cols, rows = io.read_csv(path)
    assert float(rows[1][0]) == 1 / 3


def test_svg_is_pure_function_of_csv(tmp_path):
    code, out = run_cli(tmp_path, "implicit-bias-2d", SMALL["implicit-bias-2d"])
    copy = tmp_path / "copy"
    copy.mkdir()
    for f in ("train_data.csv", "boundary_polylines.csv"):
        shutil.copy(out / f, copy / f)
    svg.boundary_svg(copy / "train_data.csv", copy / "boundary_polylines.csv", copy / "b.svg", 0, "both")
    assert (copy / "b.svg").read_bytes() == (out / "boundary_r0_both.svg").read_bytes()
    text = (copy / "b.svg").read_text()
    assert text.startswith("<svg") or text.startswith("<?xml")


@pytest.mark.parametrize("experiment", ["teacher-student", "implicit-bias-2d"])
def test_worker_count_does_not_change_numbers(tmp_path, experiment):
    _, a = run_cli(tmp_path, experiment, SMALL[experiment], "--workers", "1", name="w1")
    _, b = run_cli(tmp_path, experiment, SMALL[experiment], "--workers", "2", name="w2")
    csvs = sorted(p.name for p in a.glob("*.csv"))
    assert csvs
    for name in csvs:
        assert io.numeric_content(a / name) == io.numeric_content(b / name)


@pytest.mark.slow
def test_desk_sweep_trend(tmp_path):
    code, out = run_cli(tmp_path, "teacher-student", {"m_grid": [4, 64]})
    assert code == 0
    _, cols, rows = io.read_csv(out / "aggregate.csv")
    rate = {int(r[0]): float(r[2]) for r in rows}
    assert rate[64] >= rate[4]


@pytest.mark.slow
def test_particle_trace_recovery():
    from meanfield.experiments import teacher_student_trial

    cfg = PRESETS["particle-trace"]["desk"]
    kw = dict(d=2, m0=4, step=cfg["step"], iterations=cfg["iterations"], mode="full", n=cfg["n"],
              eval_size=2000)
    assert teacher_student_trial(0, 0, 100, **kw)["recovered"]
    assert not all(teacher_student_trial(0, r, 5, **kw)["recovered"] for r in range(10))


@pytest.mark.slow
def test_implicit_bias_reaches_zero_training_error():
    from meanfield.experiments import implicit_bias_trial

    c = PRESETS["implicit-bias-2d"]["desk"]
    res = implicit_bias_trial(0, 1, c["k"], 2, c["n"], c["m"], c["iterations"], c["step"],
                              c["output_step_factor"], 2000, 64)
    for mode in ("both", "output"):
        info = res["modes"][mode]
        assert info["train_error"] == 0.0
        assert 0.0 <= info["test_error"] <= 1.0
        g = info["grid"]
        assert np.all(np.isfinite(g.values[[0, 0, -1, -1], [0, -1, 0, -1]]))
