"""Time the backward pass over T and N grids and the dense KKT oracle on small grids.

    python3 scripts/bench_scaling.py --out runs/bench.csv
"""
import argparse

from constrained_lq.bench import run_bench
from constrained_lq.export import write_bench


def ratios(results, solver, key, fixed_key):
    rows = sorted((r for r in results if r["solver"] == solver), key=lambda r: (r[fixed_key], r[key]))
    for a, b in zip(rows, rows[1:]):
        if a[fixed_key] == b[fixed_key]:
            yield a, b, b["median_s"] / a["median_s"]


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--t-list", type=int, nargs="+", default=[50, 100, 200, 400])
    p.add_argument("--n-list", type=int, nargs="+", default=[10, 20, 40, 80, 160])
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--oracle-max-kkt", type=int, default=4000)
    p.add_argument("--out", default="runs/bench.csv")
    args = p.parse_args()

    results = run_bench(args.t_list, args.n_list, args.reps, args.oracle_max_kkt)
    write_bench(args.out, results)
    for solver in ("backward_pass", "kkt_oracle"):
        for a, b, r in ratios(results, solver, "T", "N"):
            print(f"{solver:<14} N={a['N']:<4} T {a['T']}->{b['T']}: x{r:.2f}")
    for a, b, r in ratios(results, "backward_pass", "N", "T"):
        print(f"backward_pass  T={a['T']:<4} N {a['N']}->{b['N']}: x{r:.2f}")


if __name__ == "__main__":
    main()
