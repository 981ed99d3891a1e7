"""Acceptance criteria, one test each. Every test records a PASS/FAIL line that
is printed in the terminal summary under "acceptance criteria"."""
import numpy as np
import pytest

from constrained_lq.bench import bench_scenario, time_backward_pass, time_kkt
from constrained_lq.controller import backward_pass, min_eigenvalues, predicted_cost
from constrained_lq.demand_response import DemoConfig, demo_scenario, run_demo
from constrained_lq.instances import random_scenario
from constrained_lq.model import HARD, NONE, ConstraintSchedule, Mode
from constrained_lq.oracle import open_loop_compare, unconstrained_riccati
from constrained_lq.simulator import monte_carlo, rollout
from constrained_lq.verification import projection_defects

from conftest import PROJECTION_RECORD


def test_criterion_1_hard_exactness(record_criterion):
    sc = demo_scenario("hard")
    gs = backward_pass(sc)
    summary = monte_carlo(sc, gs, 100, base_seed=2025)
    worst = summary.max_scaled_hard_residual
    ok = worst <= 1e-9 and len(sc.schedule.hard_steps()) == 24
    record_criterion(1, "hard input-sum exactness, N=50 T=24, 100 noisy paths", ok,
                     f"max |1'u-c|/max(1,|c|) = {worst:.2e} (tol 1e-9)")
    assert ok


def test_criterion_2_oracle_equivalence(record_criterion):
    rng = np.random.default_rng(20251)
    worst = 0.0
    for _ in range(100):
        sc = random_scenario(rng, n_agents=(1, 5), horizon=(1, 10), modes="mixed")
        worst = max(worst, open_loop_compare(sc, backward_pass(sc)).max_dev)
    ok = worst <= 1e-8
    record_criterion(2, "DP vs stacked-KKT QP, 100 mixed instances", ok,
                     f"max deviation = {worst:.2e} (tol 1e-8)")
    assert ok


def test_criterion_3_psd_preservation(record_criterion):
    rng = np.random.default_rng(20252)
    hard = min(min(min_eigenvalues(backward_pass(random_scenario(rng, modes="hard"))))
               for _ in range(200))
    extended = {kind: min(min(min_eigenvalues(backward_pass(random_scenario(rng, modes=kind))))
                          for _ in range(100))
                for kind in ("soft", "none", "mixed")}
    ok = hard >= -1e-8
    record_criterion(3, "P_t PSD, 200 hard instances", ok,
                     f"min eigenvalue = {hard:.2e} (tol -1e-8); extended sweep "
                     + ", ".join(f"{k}: {v:.2e}" for k, v in extended.items()))
    assert ok
    assert all(v >= -1e-8 for v in extended.values()), extended


def test_criterion_5_monte_carlo_value(record_criterion):
    rng = np.random.default_rng(20255)
    base = random_scenario(rng, n_agents=(3, 3), horizon=(8, 8), agent_dims=(1, 1),
                           noise=True, max_radius=1.0)
    modes = (HARD, Mode.soft(2.0), NONE, HARD, Mode.soft(0.5), NONE, HARD, HARD)
    sc = base.with_schedule(ConstraintSchedule(modes, base.schedule.targets))
    gs = backward_pass(sc)
    summary = monte_carlo(sc, gs, 10_000, base_seed=5)
    pred = predicted_cost(gs, sc.x0)
    z = abs(summary.mean_cost - pred) / summary.cost_std_error
    ok = z <= 3.0
    record_criterion(5, "Monte Carlo mean cost vs value function, 3 agents T=8, 10k paths", ok,
                     f"mean {summary.mean_cost:.4f}, predicted {pred:.4f}, |diff| = {z:.2f} s.e. (tol 3)")
    assert ok


def test_criterion_6_unconstrained_reduction(record_criterion):
    rng = np.random.default_rng(20256)
    worst = 0.0
    for _ in range(50):
        sc = random_scenario(rng, modes="none")
        P_dp = backward_pass(sc).P
        P_ref = unconstrained_riccati(sc)
        worst = max(worst, max(float(np.max(np.abs(a - b))) for a, b in zip(P_dp, P_ref)))
    ok = worst <= 1e-10
    record_criterion(6, "all-free P_t vs textbook Riccati, 50 instances", ok,
                     f"max |diff| = {worst:.2e} (tol 1e-10)")
    assert ok


def test_criterion_7_soft_limit(record_criterion):
    etas = (1.0, 1e2, 1e4, 1e6)
    path_res, mean_res = [], []
    for eta in etas:
        sc = demo_scenario("switched", DemoConfig(eta=eta))
        gs = backward_pass(sc)
        soft = sc.schedule.soft_steps()
        path = rollout(sc, gs, seed=2025)
        path_res.append(float(np.max(np.abs(path.residuals[soft]))))
        summary = monte_carlo(sc, gs, 100, base_seed=2025)
        mean_res.append(float(np.mean(summary.mean_abs_soft_residual[soft])))
    mono = all(b < a for a, b in zip(path_res, path_res[1:])) \
        and all(b < a for a, b in zip(mean_res, mean_res[1:]))
    ratio = path_res[-1] / path_res[0]
    ok = mono and ratio <= 1e-3 and mean_res[-1] / mean_res[0] <= 1e-3
    record_criterion(7, "soft residual shrinks with eta in {1,1e2,1e4,1e6}", ok,
                     "seeded-path max residual " + ", ".join(f"{r:.2e}" for r in path_res)
                     + f"; eta=1e6/eta=1 = {ratio:.2e} (tol 1e-3)")
    assert ok


def test_criterion_8_peak_smoothing(record_criterion):
    cfg = DemoConfig(eta=1.0)
    *_, inter = run_demo("intermittent", cfg, n_paths=20)
    *_, switched = run_demo("switched", cfg, n_paths=20)
    ok = switched.most_negative_total_power > inter.most_negative_total_power \
        and inter.max_scaled_hard_residual <= 1e-9 and switched.max_scaled_hard_residual <= 1e-9
    record_criterion(8, "switched (eta=1) softens the negative power peak", ok,
                     f"min total power: intermittent {inter.most_negative_total_power:.2f} kW, "
                     f"switched {switched.most_negative_total_power:.2f} kW")
    assert ok


def test_criterion_9_complexity_scaling(record_criterion):
    dp = time_backward_pass(200, 20, reps=7) / time_backward_pass(100, 20, reps=7)
    kkt_100 = time_kkt(100, 20)
    kkt_200 = time_kkt(200, 20)
    kkt = kkt_200 / kkt_100
    ok = 1.5 <= dp <= 3.0 and kkt > 2.0
    record_criterion(9, "backward pass linear in T, KKT oracle superlinear (N=20, T=100->200)", ok,
                     f"backward-pass ratio {dp:.2f} (band [1.5, 3.0]); KKT ratio {kkt:.2f} "
                     f"({kkt_100:.1f} s -> {kkt_200:.1f} s, must exceed 2)")
    assert ok


def test_criterion_4_projection_algebra(record_criterion):
    # runs last (see conftest) so the record covers every schedule built by the suite;
    # timing runs bypass the recorder, so check a benchmark schedule here directly
    bench = projection_defects(backward_pass(bench_scenario(100, 20)))
    demo = [projection_defects(backward_pass(demo_scenario(v))) for v in ("hard", "intermittent", "switched")]
    rec = PROJECTION_RECORD
    ann = max([rec["ann"], bench[0]] + [d[0] for d in demo])
    off = max([rec["off"], bench[1]] + [d[1] for d in demo])
    idem = max([rec["idem"], bench[2]] + [d[2] for d in demo])
    ok = ann <= 1e-10 and off <= 1e-10 and idem <= 1e-9 and rec["hard_steps"] > 0
    record_criterion(4, f"projection algebra over {rec['schedules']} schedules "
                        f"({rec['hard_steps']} hard steps)", ok,
                     f"||1'Gamma|| = {ann:.1e}, offset = {off:.1e}, idempotence = {idem:.1e} "
                     "(tol 1e-10, 1e-10, 1e-9)")
    assert ok
