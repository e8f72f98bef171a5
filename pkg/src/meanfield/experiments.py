"""Experiment harnesses behind the ``mf`` command.

Every trial function is a module-level function of plain arguments so it can
run in a worker process. Randomness is keyed by (base seed, repetition,
role[, m]) through ``SeedSequence``, which makes results independent of the
number of workers and of task order.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io, svg
from .datagen import make_clusters, make_teacher
from .flow import FlowConfig, run_flow, run_sgd
from .kernel_regime import closed_form_gram, random_features
from .losses import Loss, empirical_risk
from .margins import extract_boundary, normalized_margin, turning_angle_variance
from .model import RELU, Ensemble, init_ensemble, predict, smooth, sphere_directions
from .potential import optimality_certificate
from .sphere import equivalence_check

log = logging.getLogger(__name__)

SUCCESS_RISK = 1e-3
RECOVERY_ANGLE = 0.1
RECOVERY_MASS = 1e-2


class ConfigError(ValueError):
    pass


def rng_for(*key):
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in key]))


def map_tasks(fn, tasks, workers=1):
    """Run ``fn(**task)`` for every task; results come back in task order."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(**t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, **t) for t in tasks]
        return [f.result() for f in futures]


# --- teacher-student ----------------------------------------------------------

def teacher_student_trial(seed, repetition, m, d, m0, step, iterations, mode="full", n=500,
                          batch=100, eval_size=10_000, snapshots=0, weight_law="sphere_sign",
                          certificate=False, n_probes=1000):
    """Train a width-m student on a teacher with m0 neurons under the square loss.

    The teacher and data depend on (seed, repetition) only, so every m in a
    sweep sees the same problem; the initialization also depends on m.
    ``final_risk`` is measured on ``eval_size`` fresh samples.
    """
    teacher = make_teacher(d, m0, int(np.random.SeedSequence([seed, repetition, 0]).generate_state(1)[0]),
                           weight_law)
    eval_set = teacher.sample(eval_size, rng_for(seed, repetition, 1))
    e0 = init_ensemble(m, d, rng_for(seed, repetition, 2, m))
    record = max(1, iterations // snapshots) if snapshots else max(1, iterations)
    cfg = FlowConfig(step, iterations, mode=mode, batch=batch, record_every=record,
                     seed=int(np.random.SeedSequence([seed, repetition, 3, m]).generate_state(1)[0]),
                     eval_size=eval_size)
    train = None
    if mode == "full":
        train = teacher.sample(n, rng_for(seed, repetition, 4))
        traj = run_flow(e0, train, Loss.SQUARE, RELU, cfg)
    else:
        traj = run_sgd(e0, teacher, Loss.SQUARE, RELU, cfg, eval_set=eval_set)
    with np.errstate(over="ignore", invalid="ignore"):
        final_risk = empirical_risk(traj.final, eval_set, Loss.SQUARE, RELU)
    out = {
        "repetition": repetition, "m": m, "final_risk": final_risk,
        "train_risk": traj.risks[-1] if train is not None else final_risk,
        "success": bool(np.isfinite(final_risk) and final_risk < SUCCESS_RISK),
        "diverged": traj.diverged, "message": traj.message,
        "W": traj.final.W, "teacher_theta1": teacher.theta1, "teacher_theta2": teacher.theta2,
        "recovered": teacher_recovered(traj.final, teacher.theta1, teacher.theta2),
    }
    if snapshots:
        out["times"] = traj.times
        out["snapshots"] = traj.snapshots
    if certificate:
        # J is taken against the training set for full-batch runs, else the eval set
        ds = train if train is not None else eval_set
        out["certificate"] = optimality_certificate(traj.final, ds, Loss.SQUARE, RELU,
                                                    n_probes=n_probes, seed=seed).to_dict()
    return out


def teacher_recovered(ens_or_W, theta1, theta2, angle_tol=RECOVERY_ANGLE, mass_frac=RECOVERY_MASS):
    """Every teacher neuron has a same-sign particle within ``angle_tol`` radians.

    Only particles with |w|^2 >= mass_frac * max_k |w_k|^2 count.
    """
    W = ens_or_W.W if isinstance(ens_or_W, Ensemble) else np.asarray(ens_or_W)
    if not np.all(np.isfinite(W)) or np.abs(W).max() > 1e150:
        return False
    r2 = np.sum(W * W, axis=1)
    live = r2 >= mass_frac * r2.max()
    B = W[live, 1:]
    a = W[live, 0]
    nb = np.linalg.norm(B, axis=1)
    ok = nb > 0
    B, a, nb = B[ok], a[ok], nb[ok]
    for k in range(theta1.shape[1]):
        u = theta1[:, k] / np.linalg.norm(theta1[:, k])
        ang = np.arccos(np.clip(B @ u / nb, -1.0, 1.0))
        if not np.any((np.sign(a) == np.sign(theta2[k])) & (ang < angle_tol)):
            return False
    return True


def run_particle_trace(cfg, out):
    if cfg["d"] != 2:
        raise ConfigError("particle-trace needs d = 2")
    tasks = [dict(seed=cfg["seed"], repetition=0, m=m, d=2, m0=cfg["m0"], step=cfg["step"],
                  iterations=cfg["iterations"], mode=cfg["mode"], n=cfg["n"], batch=cfg["batch"],
                  eval_size=cfg["eval_size"], snapshots=cfg["snapshots"])
             for m in cfg["m_grid"]]
    results = map_tasks(teacher_student_trial, tasks, cfg["workers"])
    prow, srow = [], []
    for res in results:
        for s, (t, W) in enumerate(zip(res["times"], res["snapshots"])):
            for j, w in enumerate(W):
                pos = abs(w[0]) * w[1:]
                prow.append([res["m"], s, t, j, pos[0], pos[1], int(np.sign(w[0])), float(w @ w)])
        srow.append([res["m"], res["final_risk"], int(res["success"]), int(res["recovered"]),
                     int(res["diverged"])])
    th1, th2 = results[0]["teacher_theta1"], results[0]["teacher_theta2"]
    cfg = {**cfg, "recovery_angle_rad": RECOVERY_ANGLE, "recovery_mass_fraction": RECOVERY_MASS}
    pfile = io.write_csv(out / "particles.csv",
                         ["m", "snapshot", "t", "particle", "pos_x", "pos_y", "sign", "r2"], prow, cfg)
    tfile = io.write_csv(out / "teacher.csv", ["neuron", "dir_x", "dir_y", "sign"],
                         [[k, th1[0, k], th1[1, k], int(np.sign(th2[k]))] for k in range(th1.shape[1])], cfg)
    io.write_csv(out / "summary.csv", ["m", "final_risk", "success", "recovered", "diverged"], srow, cfg)
    for res in results:
        last = len(res["times"]) - 1
        for s in (0, last):
            svg.particle_trace_svg(pfile, tfile, out / f"particles_m{res['m']}_s{s}.svg", res["m"], s)
    return {"diverged": any(r["diverged"] for r in results), "summary": srow}


def run_teacher_student_sweep(cfg, out):
    tasks = [dict(seed=cfg["seed"], repetition=r, m=m, d=cfg["d"], m0=cfg["m0"], step=cfg["step"],
                  iterations=cfg["iterations"], mode=cfg["mode"], n=cfg["n"], batch=cfg["batch"],
                  eval_size=cfg["eval_size"])
             for m in cfg["m_grid"] for r in range(cfg["repetitions"])]
    results = map_tasks(teacher_student_trial, tasks, cfg["workers"])
    rows = [[r["m"], r["repetition"], r["final_risk"], int(r["success"]), int(r["diverged"])]
            for r in results]
    agg = []
    for m in cfg["m_grid"]:
        sel = [r for r in results if r["m"] == m]
        risks = np.array([r["final_risk"] for r in sel])
        agg.append([m, float(np.mean(risks)), float(np.mean([r["success"] for r in sel]))])
    cfg = {**cfg, "success_risk": SUCCESS_RISK}
    io.write_csv(out / "runs.csv", ["m", "repetition", "final_risk", "success", "diverged"], rows, cfg)
    afile = io.write_csv(out / "aggregate.csv", ["m", "mean_risk", "success_rate"], agg, cfg)
    svg.curve_svg(afile, out / "success_rate.svg", "m", "success_rate")
    return {"diverged": False, "aggregate": agg}


# --- implicit bias ------------------------------------------------------------

def output_step(X, W, n, factor):
    """``factor`` times the stability bound 8n / lambda_max for output-only training."""
    S = np.maximum(X @ W[:, 1:].T, 0.0)
    lam = np.linalg.eigvalsh(S @ S.T / W.shape[0])[-1]
    return factor * 8.0 * n / lam


def implicit_bias_trial(seed, repetition, k, d, n, m, iterations, step_both, output_step_factor,
                        eval_size=10_000, resolution=0, max_resample=20):
    """Train both layers and the output layer alone from the same start on cluster data.

    Inputs carry an appended constant coordinate so ReLU units have a bias.
    A training set with a single class is resampled from the next key.
    """
    for attempt in range(max_resample):
        dist = make_clusters(k, d, int(np.random.SeedSequence([seed, repetition, 0, attempt]).generate_state(1)[0]),
                             bias=True)
        train = dist.sample(n, rng_for(seed, repetition, 1, attempt))
        if np.unique(train.ys).size == 2:
            break
        log.info("repetition %d attempt %d: single-class training set, resampling", repetition, attempt)
    else:
        raise RuntimeError("could not draw a two-class training set")
    test = dist.sample(eval_size, rng_for(seed, repetition, 2, attempt))
    e0 = init_ensemble(m, d + 1, rng_for(seed, repetition, 3, attempt))
    res = {"repetition": repetition, "attempt": attempt, "xs": train.xs, "ys": train.ys, "modes": {}}
    for mode in ("both", "output"):
        step = step_both if mode == "both" else output_step(train.xs, e0.W, n, output_step_factor)
        traj = run_flow(e0, train, Loss.LOGISTIC, RELU,
                        FlowConfig(step, iterations, record_every=max(1, iterations // 10), train=mode))
        ens = traj.final
        info = {
            "step": step,
            "train_error": float(np.mean(train.ys * predict(ens, train.xs) <= 0)),
            "test_error": float(np.mean(test.ys * predict(ens, test.xs) < 0)),
            "normalized_margin": normalized_margin(ens, train),
            "final_loss": traj.risks[-1],
            "diverged": traj.diverged,
        }
        if resolution:
            grid = extract_boundary(ens, RELU, resolution, bias=True)
            info["angle_variance"] = turning_angle_variance(grid.polylines)
            info["grid"] = grid
        res["modes"][mode] = info
    return res


def run_implicit_bias_2d(cfg, out):
    if cfg["d"] != 2:
        raise ConfigError("implicit-bias-2d needs d = 2")
    tasks = [dict(seed=cfg["seed"], repetition=r, k=cfg["k"], d=2, n=cfg["n"], m=cfg["m"],
                  iterations=cfg["iterations"], step_both=cfg["step"],
                  output_step_factor=cfg["output_step_factor"], eval_size=cfg["eval_size"],
                  resolution=cfg["resolution"])
             for r in range(cfg["repetitions"])]
    results = map_tasks(implicit_bias_trial, tasks, cfg["workers"])
    stats, data, grid_rows, poly_rows = [], [], [], []
    for res in results:
        r = res["repetition"]
        for x, y in zip(res["xs"], res["ys"]):
            data.append([r, x[0], x[1], y])
        for mode, info in res["modes"].items():
            stats.append([r, mode, info["train_error"], info["test_error"], info["angle_variance"],
                          info["normalized_margin"], info["step"]])
            g = info["grid"]
            for i, gx in enumerate(g.xs):
                for j, gy in enumerate(g.ys):
                    grid_rows.append([r, mode, gx, gy, g.values[i, j]])
            for p, line in enumerate(g.polylines):
                for q, (px, py) in enumerate(line):
                    poly_rows.append([r, mode, p, q, px, py])
    dfile = io.write_csv(out / "train_data.csv", ["repetition", "x_1", "x_2", "y"], data, cfg)
    io.write_csv(out / "stats.csv", ["repetition", "mode", "train_error", "test_error",
                                     "angle_variance", "normalized_margin", "step"], stats, cfg)
    io.write_csv(out / "boundary_grid.csv", ["repetition", "mode", "x", "y", "h"], grid_rows, cfg)
    pfile = io.write_csv(out / "boundary_polylines.csv",
                         ["repetition", "mode", "polyline", "vertex", "x", "y"], poly_rows, cfg)
    for res in results:
        for mode in ("both", "output"):
            svg.boundary_svg(dfile, pfile, out / f"boundary_r{res['repetition']}_{mode}.svg",
                             res["repetition"], mode)
    wins = sum(res["modes"]["both"]["angle_variance"] > res["modes"]["output"]["angle_variance"]
               for res in results)
    return {"diverged": False, "both_sharper": wins, "repetitions": len(results), "stats": stats}


def run_implicit_bias_highdim(cfg, out):
    def tasks_for(sweep, values):
        return [dict(seed=cfg["seed"], repetition=r, k=cfg["k"],
                     d=v if sweep == "d" else cfg["d_fixed"],
                     n=v if sweep == "n" else cfg["n_fixed"], m=cfg["m"],
                     iterations=cfg["iterations"], step_both=cfg["step"],
                     output_step_factor=cfg["output_step_factor"], eval_size=cfg["eval_size"])
                for v in values for r in range(cfg["repetitions"])]

    rows, means = [], []
    for sweep, values in (("n", cfg["n_grid"]), ("d", cfg["d_grid"])):
        tasks = tasks_for(sweep, values)
        results = map_tasks(implicit_bias_trial, tasks, cfg["workers"])
        for task, res in zip(tasks, results):
            v = task[sweep]
            for mode, info in res["modes"].items():
                rows.append([sweep, v, mode, res["repetition"], info["test_error"], info["train_error"]])
        for v in values:
            for mode in ("both", "output"):
                errs = [r[4] for r in rows if r[0] == sweep and r[1] == v and r[2] == mode]
                means.append([sweep, v, mode, float(np.mean(errs))])
    io.write_csv(out / "runs.csv", ["sweep_var", "value", "mode", "repetition", "test_error",
                                    "train_error"], rows, cfg)
    for sweep in ("n", "d"):
        sel = [r for r in means if r[0] == sweep]
        f = io.write_csv(out / f"mean_test_error_{sweep}.csv", ["sweep_var", "value", "mode",
                                                                 "mean_test_error"], sel, cfg)
        svg.curve_svg(f, out / f"mean_test_error_{sweep}.svg", "value", "mean_test_error", "mode")
    return {"diverged": False, "means": means}


# --- diagnostics --------------------------------------------------------------

def run_certificate(cfg, out):
    reports = []
    for m in cfg["m_grid"]:
        res = teacher_student_trial(cfg["seed"], 0, m, cfg["d"], cfg["m0"], cfg["step"],
                                    cfg["iterations"], mode="full", n=cfg["n"],
                                    eval_size=cfg["eval_size"], certificate=True,
                                    n_probes=cfg["n_probes"])
        if res["diverged"]:
            return {"diverged": True, "message": res["message"]}
        reports.append({"m": m, "final_risk": res["final_risk"], "train_risk": res["train_risk"],
                        "success": res["success"], **res["certificate"]})
    io.write_json(out / "certificate.json", {"runs": reports}, cfg)
    return {"diverged": False, "runs": reports}


def run_equivalence(cfg, out):
    rng = rng_for(cfg["seed"], 0)
    teacher = make_teacher(cfg["d"], cfg["m0"], cfg["seed"])
    train = teacher.sample(cfg["n"], rng)
    e0 = init_ensemble(cfg["m"], cfg["d"], rng)
    # spread the radii so the radial dynamics matter
    e0 = Ensemble(e0.W * rng.uniform(0.5, 1.5, size=(cfg["m"], 1)))
    probes = rng.standard_normal((cfg["n_probes"], cfg["d"]))
    act = smooth(cfg["tau"])
    gaps = {}
    for step in (cfg["step"], cfg["step"] / 2):
        gaps[step] = equivalence_check(e0, train, Loss.SQUARE, act, step, cfg["horizon"], probes)
    g1, g2 = gaps[cfg["step"]], gaps[cfg["step"] / 2]
    report = {"discrepancy": g1, "discrepancy_half_step": g2,
              "halving_ratio": g2 / g1 if g1 > 0 else 0.0}
    io.write_json(out / "equivalence.json", report, cfg)
    return {"diverged": False, **report}


def kernel_check(seed, d, pairs, widths):
    """Largest |empirical - closed form| over random unit pairs, per width."""
    rng = np.random.default_rng(seed)
    X = sphere_directions(rng, pairs, d)
    Y = sphere_directions(rng, pairs, d)
    exact = np.array([closed_form_gram(x[None], y[None])[0, 0] for x, y in zip(X, Y)])
    out = []
    for m in widths:
        rf = random_features(m, d, rng)
        emp = np.zeros(pairs)
        for start in range(0, m, 200_000):
            D = rf.directions[start:start + 200_000]
            emp += np.sum(np.maximum(X @ D.T, 0.0) * np.maximum(Y @ D.T, 0.0), axis=1)
        emp /= m
        out.append({"m": m, "max_abs": float(np.max(np.abs(emp - exact))),
                    "max_rel": float(np.max(np.abs(emp - exact) / exact))})
    return out


RUNNERS = {
    "particle-trace": run_particle_trace,
    "teacher-student": run_teacher_student_sweep,
    "implicit-bias-2d": run_implicit_bias_2d,
    "implicit-bias-highdim": run_implicit_bias_highdim,
    "certificate": run_certificate,
    "equivalence": run_equivalence,
}


def run(name, cfg, out):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    return RUNNERS[name](cfg, out)
