"""Wall-time scaling of the backward pass against the dense KKT oracle."""
from __future__ import annotations

import statistics
import time

import numpy as np

from .controller import backward_pass
from .model import ConstraintSchedule, HARD, Scenario, sample_fleet
from .oracle import build_stacked_qp, solve_kkt


def bench_scenario(horizon, n_agents, seed=0):
    """All-Hard scalar battery fleet with a constant input-sum target."""
    sampled = sample_fleet(n_agents, seed)
    sched = ConstraintSchedule.uniform(HARD, np.full(horizon, 2.0 * n_agents))
    return Scenario(sampled.fleet, sampled.cost(horizon), sched, sampled.x0, seed)


def kkt_size(horizon, n_agents):
    """Unknowns in the stacked KKT system of :func:`bench_scenario`."""
    return 2 * horizon * n_agents + horizon * n_agents + horizon


def median_time(fn, reps):
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def time_backward_pass(horizon, n_agents, reps=5, seed=0):
    sc = bench_scenario(horizon, n_agents, seed)
    backward_pass(sc)  # warm-up
    return median_time(lambda: backward_pass(sc), reps)


def time_kkt(horizon, n_agents, reps=1, seed=0):
    """Median time to build and solve the stacked QP."""
    sc = bench_scenario(horizon, n_agents, seed)
    return median_time(lambda: solve_kkt(build_stacked_qp(sc)), reps)


def run_bench(t_list, n_list, reps=5, oracle_max_kkt=4000, oracle_reps=1, seed=0):
    """Time every (T, N) pair; the oracle only where its KKT system is small enough."""
    if not t_list or not n_list:
        raise ValueError("t_list and n_list must be non-empty")
    results = []
    for N in n_list:
        for T in t_list:
            results.append({"solver": "backward_pass", "T": T, "N": N, "reps": reps,
                            "median_s": time_backward_pass(T, N, reps, seed)})
            if kkt_size(T, N) <= oracle_max_kkt:
                results.append({"solver": "kkt_oracle", "T": T, "N": N, "reps": oracle_reps,
                                "median_s": time_kkt(T, N, oracle_reps, seed)})
    return results
