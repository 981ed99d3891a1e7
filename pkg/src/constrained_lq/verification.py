"""Randomized DP-vs-QP campaign plus the algebraic invariants of the gains."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .controller import backward_pass, hard_multiplier
from .model import ConstraintSchedule, Mode
from .instances import random_scenario
from .oracle import build_stacked_qp, open_loop_compare, solve_kkt, sum_multipliers, unconstrained_riccati

DP_QP_TOL = 1e-8
PSD_TOL = 1e-8
ANNIHILATION_TOL = 1e-10
IDEMPOTENCE_RTOL = 1e-9
RICCATI_TOL = 1e-10
MULTIPLIER_TOL = 1e-7


def projection_defects(schedule):
    """Worst annihilation / offset / weighted-idempotence defects over Hard steps.

    Returns ``(max ||1'Gamma||_inf, max |1'gamma - c| / max(1,|c|),
    max ||Gamma Omega Gamma - Gamma||_inf / ||Gamma||_inf)``.
    """
    ann = off = idem = 0.0
    for t, mode in enumerate(schedule.modes):
        if not mode.is_hard:
            continue
        ops = schedule.ops[t]
        G, c = ops.gamma_mat, float(schedule.targets[t])
        ann = max(ann, float(np.max(np.abs(G.sum(axis=0)))))
        off = max(off, abs(float(ops.gamma_vec.sum()) - c) / max(1.0, abs(c)))
        gnorm = float(np.max(np.abs(G)))
        if gnorm > 0:
            idem = max(idem, float(np.max(np.abs(G @ ops.omega @ G - G))) / gnorm)
    return ann, off, idem


@dataclass
class Check:
    name: str
    worst: float
    tol: float
    # "le": worst <= tol passes; "ge": worst >= tol passes
    sense: str = "le"

    @property
    def passed(self):
        return self.worst <= self.tol if self.sense == "le" else self.worst >= self.tol

    def line(self):
        op = "<=" if self.sense == "le" else ">="
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name:<32} worst={self.worst:.3e}  ({op} {self.tol:g})"


@dataclass
class VerifyReport:
    count: int
    seed: int
    checks: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def lines(self):
        out = [f"verify: {self.count} random instances, seed {self.seed}"]
        out += [f"WARNING: {w}" for w in self.warnings]
        out += [c.line() for c in self.checks]
        out.append("RESULT: " + ("PASS" if self.passed else "FAIL"))
        return out


def run_campaign(count=100, seed=0):
    report = VerifyReport(count, seed)
    if count == 0:
        report.warnings.append("count = 0: nothing verified")
        return report
    rng = np.random.default_rng(seed)
    dev = ann = off = idem = riccati = mult = 0.0
    min_eig = np.inf
    for _ in range(count):
        sc = random_scenario(rng)
        gs = backward_pass(sc)
        qp = build_stacked_qp(sc)
        z, lam = solve_kkt(qp)
        dev = max(dev, open_loop_compare(sc, gs, qp_solution=(z, lam)).max_dev)
        a, o, i = projection_defects(gs)
        ann, off, idem = max(ann, a), max(off, o), max(idem, i)
        min_eig = min(min_eig, min(float(np.linalg.eigvalsh(P)[0]) for P in gs.P))

        u_qp, x_qp = qp.split(z)
        states = np.vstack([sc.x0, x_qp])
        for t, lam_t in sum_multipliers(qp, lam).items():
            half = hard_multiplier(gs, t, states[t], sc.fleet)
            mult = max(mult, abs(lam_t / 2.0 - half) / max(1.0, abs(half)))

        free = sc.with_schedule(ConstraintSchedule.uniform(Mode.none(), sc.schedule.targets))
        P_ref = unconstrained_riccati(free)
        P_dp = backward_pass(free).P
        riccati = max(riccati, max(float(np.max(np.abs(a - b))) for a, b in zip(P_dp, P_ref)))

    report.checks = [
        Check("dp_vs_qp_max_deviation", dev, DP_QP_TOL),
        Check("min_eigenvalue_P", min_eig, -PSD_TOL, "ge"),
        Check("hard_annihilation_1tGamma", ann, ANNIHILATION_TOL),
        Check("hard_offset_1tgamma_minus_c", off, ANNIHILATION_TOL),
        Check("weighted_idempotence", idem, IDEMPOTENCE_RTOL),
        Check("unconstrained_vs_riccati", riccati, RICCATI_TOL),
        Check("multiplier_reconciliation", mult, MULTIPLIER_TOL),
    ]
    return report
