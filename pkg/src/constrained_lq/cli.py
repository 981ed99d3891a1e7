"""Command-line entry point (``constrained-lq``).

Exit codes: 0 success, 1 config/validation error, 2 numerical failure,
3 verification failure.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import warnings

from . import __version__
from .bench import run_bench
from .config import load_config, scenario_from_config
from .controller import backward_pass, min_eigenvalues
from .demand_response import VARIANTS, DemoConfig, run_demo
from .errors import ConfigParseError, ConstrainedLQError, ValidationError
from .export import (write_bench, write_gains, write_manifest, write_metrics, write_summary,
                     write_summary_steps, write_trajectory, write_value_log)
from .simulator import monte_carlo, path_rng, rollout
from .verification import PSD_TOL, run_campaign

log = logging.getLogger("constrained_lq")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3


def _out(out_dir, name):
    return os.path.join(out_dir, name)


def _load(path):
    cfg = load_config(path)
    scenario = scenario_from_config(cfg)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        scenario.warn_capacity()
    for w in caught:
        log.warning("%s", w.message)
    return cfg, scenario


def cmd_synthesize(args):
    _, scenario = _load(args.scenario)
    os.makedirs(args.out, exist_ok=True)
    gains = backward_pass(scenario)
    outputs = [
        write_gains(_out(args.out, "gains.csv"), gains),
        write_value_log(_out(args.out, "value_log.csv"), gains),
    ]
    write_manifest(args.out, "synthesize", {"scenario": args.scenario}, outputs,
                   scenario_path=args.scenario, seed=scenario.seed)
    worst = min(min_eigenvalues(gains))
    print(f"synthesized {gains.horizon} steps; min eigenvalue of P_t = {worst:.3e}")
    if worst < -PSD_TOL:
        print("P_t lost positive semidefiniteness", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _write_paths(out_dir, scenario, gains, seed, n):
    outputs = []
    for i in range(n):
        rec = rollout(scenario, gains, rng=path_rng(seed, i))
        outputs.append(write_trajectory(_out(out_dir, f"path_{i:04d}.csv"), scenario,
                                        rec.states, rec.inputs, rec.step_costs))
    return outputs


def cmd_simulate(args):
    _, scenario = _load(args.scenario)
    os.makedirs(args.out, exist_ok=True)
    gains = backward_pass(scenario)
    summary = monte_carlo(scenario, gains, args.paths, args.seed)
    outputs = [
        write_gains(_out(args.out, "gains.csv"), gains),
        write_trajectory(_out(args.out, "mean_trajectory.csv"), scenario,
                         summary.mean_states, summary.mean_inputs, summary.mean_step_costs),
        write_summary(_out(args.out, "summary.csv"), summary),
        write_summary_steps(_out(args.out, "summary_steps.csv"), summary),
    ]
    if args.per_path:
        outputs += _write_paths(args.out, scenario, gains, args.seed, args.paths)
    write_manifest(args.out, "simulate", {"scenario": args.scenario, "paths": args.paths,
                                          "seed": args.seed, "per_path": args.per_path},
                   outputs, scenario_path=args.scenario, seed=args.seed)
    print(f"{summary.n_paths} paths: mean cost {summary.mean_cost:.6g} "
          f"(s.e. {summary.cost_std_error:.3g}), max scaled hard residual "
          f"{summary.max_scaled_hard_residual:.3e}")
    return EXIT_OK


def cmd_verify(args):
    report = run_campaign(args.count, args.seed)
    text = "\n".join(report.lines())
    print(text)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = _out(args.out, "verify_report.txt")
        with open(path, "w") as fh:
            fh.write(text + "\n")
        write_manifest(args.out, "verify", {"count": args.count, "seed": args.seed}, [path],
                       seed=args.seed)
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_bench(args):
    os.makedirs(args.out, exist_ok=True)
    results = run_bench(args.t_list, args.n_list, args.reps, args.oracle_max_kkt)
    path = write_bench(_out(args.out, "bench.csv"), results)
    write_manifest(args.out, "bench", {"t_list": args.t_list, "n_list": args.n_list,
                                       "reps": args.reps, "oracle_max_kkt": args.oracle_max_kkt},
                   [path])
    for r in results:
        print(f"{r['solver']:<14} T={r['T']:<5} N={r['N']:<4} median {r['median_s']:.4g} s")
    return EXIT_OK


def cmd_demo(args):
    os.makedirs(args.out, exist_ok=True)
    cfg = DemoConfig(seed=args.seed, eta=args.eta, peak_kw=args.peak)
    scenario, gains, path, summary, metrics = run_demo(args.variant, cfg, n_paths=args.paths)
    outputs = [
        write_gains(_out(args.out, "gains.csv"), gains),
        write_trajectory(_out(args.out, "trajectory.csv"), scenario,
                         path.states, path.inputs, path.step_costs),
        write_trajectory(_out(args.out, "mean_trajectory.csv"), scenario,
                         summary.mean_states, summary.mean_inputs, summary.mean_step_costs),
        write_summary(_out(args.out, "summary.csv"), summary),
        write_summary_steps(_out(args.out, "summary_steps.csv"), summary),
        write_metrics(_out(args.out, "metrics.json"), metrics.as_dict()),
    ]
    write_manifest(args.out, "demo", {"variant": args.variant, "eta": args.eta, "seed": args.seed,
                                      "peak_kw": args.peak, "paths": args.paths},
                   outputs, seed=args.seed)
    print(f"{args.variant}: max scaled hard residual {metrics.max_scaled_hard_residual:.3e}, "
          f"most negative total power {metrics.most_negative_total_power:.3f} kW")
    for label, err in metrics.terminal_soc_error.items():
        print(f"  class {label}: terminal SoC error {err:.3f} kWh, "
              f"free-step tracking error {metrics.tracking_error_free[label]:.3f} kWh")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="constrained-lq", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synthesize", help="backward pass; write gain schedule")
    s.add_argument("--scenario", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synthesize)

    s = sub.add_parser("simulate", help="synthesize and run Monte Carlo rollouts")
    s.add_argument("--scenario", required=True)
    s.add_argument("--paths", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--per-path", action="store_true", help="also write one CSV per path")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("verify", help="randomized DP-vs-QP campaign and invariants")
    s.add_argument("--count", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("bench", help="time backward pass vs dense KKT oracle")
    s.add_argument("--t-list", type=int, nargs="+", default=[100, 200])
    s.add_argument("--n-list", type=int, nargs="+", default=[20])
    s.add_argument("--reps", type=int, default=5)
    s.add_argument("--oracle-max-kkt", type=int, default=4000,
                   help="skip the oracle when its KKT system has more unknowns")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("demo", help="battery-fleet demand-response reproduction")
    s.add_argument("--variant", choices=VARIANTS, required=True)
    s.add_argument("--eta", type=float, default=1.0)
    s.add_argument("--seed", type=int, default=DemoConfig.seed)
    s.add_argument("--peak", type=float, default=DemoConfig.peak_kw, help="solar peak in kW")
    s.add_argument("--paths", type=int, default=100)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_demo)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConstrainedLQError, ArithmeticError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
