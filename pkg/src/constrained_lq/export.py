"""CSV and manifest writers.

Column layouts (stable; downstream plot scripts read them by name):

gains.csv        t, mode, c_t, q_t, s_norm, P_diag_<i>..., K_<i>_<j>..., d_<i>...
                 one row per control step t = 0..T-1 (P, s, q taken at t)
value_log.csv    t, min_eig_P, q_t, s_norm            rows t = 0..T
trajectory.csv   t, x_<i>..., u_<i>..., total_input, c_t, mode, residual, step_cost
                 rows t = 0..T; input/c_t/mode/residual cells are empty at t = T
summary.csv      metric, value
summary_steps.csv t, mean_total_input, mean_abs_soft_residual, soc_<class>...
bench.csv        solver, T, N, reps, median_s

Floats are written with ``repr`` so reruns are byte-identical.
"""
from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import json
import os

import numpy as np

from . import __version__
from .controller import min_eigenvalues

GAIN_FIXED = ["t", "mode", "c_t", "q_t", "s_norm"]
VALUE_LOG_HEADER = ["t", "min_eig_P", "q_t", "s_norm"]
TRAJECTORY_TAIL = ["total_input", "c_t", "mode", "residual", "step_cost"]
SUMMARY_HEADER = ["metric", "value"]
BENCH_HEADER = ["solver", "T", "N", "reps", "median_s"]


def _f(x):
    return repr(float(x))


def gain_header(n, m):
    return (GAIN_FIXED
            + [f"P_diag_{i}" for i in range(n)]
            + [f"K_{i}_{j}" for i in range(m) for j in range(n)]
            + [f"d_{i}" for i in range(m)])


def trajectory_header(n, m):
    return ["t"] + [f"x_{i}" for i in range(n)] + [f"u_{i}" for i in range(m)] + TRAJECTORY_TAIL


def write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def write_gains(path, schedule):
    n = schedule.P[0].shape[0]
    m = schedule.K[0].shape[0]
    rows = []
    for t in range(schedule.horizon):
        rows.append(
            [t, schedule.modes[t].label(), _f(schedule.targets[t]), _f(schedule.q[t]),
             _f(np.linalg.norm(schedule.s[t]))]
            + [_f(v) for v in np.diag(schedule.P[t])]
            + [_f(v) for v in schedule.K[t].ravel()]
            + [_f(v) for v in schedule.d[t]]
        )
    return write_rows(path, gain_header(n, m), rows)


def write_value_log(path, schedule):
    eigs = min_eigenvalues(schedule)
    rows = [[t, _f(eigs[t]), _f(schedule.q[t]), _f(np.linalg.norm(schedule.s[t]))]
            for t in range(len(schedule.P))]
    return write_rows(path, VALUE_LOG_HEADER, rows)


def write_trajectory(path, scenario, states, inputs, step_costs):
    sched = scenario.schedule
    T = scenario.horizon
    n, m = states.shape[1], inputs.shape[1]
    rows = []
    for t in range(T + 1):
        row = [t] + [_f(v) for v in states[t]]
        if t < T:
            total = float(np.sum(inputs[t]))
            row += [_f(v) for v in inputs[t]]
            row += [_f(total), _f(sched.targets[t]), sched.modes[t].label(),
                    _f(total - sched.targets[t])]
        else:
            row += [""] * m + ["", "", "", ""]
        row.append(_f(step_costs[t]))
        rows.append(row)
    return write_rows(path, trajectory_header(n, m), rows)


def write_summary(path, summary, extra=None):
    rows = [
        ["n_paths", summary.n_paths],
        ["mean_cost", _f(summary.mean_cost)],
        ["cost_std_error", _f(summary.cost_std_error)],
        ["max_abs_hard_residual", _f(summary.max_abs_hard_residual)],
        ["max_scaled_hard_residual", _f(summary.max_scaled_hard_residual)],
    ]
    for k, v in (extra or {}).items():
        rows.append([k, _f(v) if isinstance(v, (float, np.floating)) else v])
    return write_rows(path, SUMMARY_HEADER, rows)


def summary_steps_header(labels):
    return ["t", "mean_total_input", "mean_abs_soft_residual"] + [f"soc_{c}" for c in labels]


def write_summary_steps(path, summary):
    labels = list(summary.class_mean_soc)
    T = summary.mean_inputs.shape[0]
    rows = []
    for t in range(T + 1):
        if t < T:
            row = [t, _f(summary.mean_inputs[t].sum()), _f(summary.mean_abs_soft_residual[t])]
        else:
            row = [t, "", ""]
        row += [_f(summary.class_mean_soc[c][t]) for c in labels]
        rows.append(row)
    return write_rows(path, summary_steps_header(labels), rows)


def write_bench(path, results):
    rows = [[r["solver"], r["T"], r["N"], r["reps"], _f(r["median_s"])] for r in results]
    return write_rows(path, BENCH_HEADER, rows)


def write_metrics(path, metrics):
    with open(path, "w") as fh:
        json.dump(metrics, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def file_sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, command, args, outputs, scenario_path=None, seed=None):
    """Record inputs and outputs of one CLI run in ``manifest.json``."""
    manifest = {
        "command": command,
        "args": args,
        "scenario_path": scenario_path,
        "scenario_sha256": file_sha256(scenario_path) if scenario_path else None,
        "seed": seed,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "version": __version__,
        "outputs": sorted(os.path.relpath(p, out_dir) for p in outputs),
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return path
