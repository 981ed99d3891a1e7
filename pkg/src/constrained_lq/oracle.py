"""Independent verification solvers.

Nothing here calls into :mod:`constrained_lq.controller`. The stacked QP
solves the noise-free problem over the whole horizon in one dense KKT system;
with additive noise and no input bounds the optimal feedback law does not
depend on the noise (the noise only adds ``tr(W P_{t+1})`` to the value
constant), so agreement at ``w = 0`` verifies the synthesized gains.

Multiplier convention: the QP objective is ``0.5 z'Hz + g'z (+ const)`` with
``H`` equal to twice the cost weights, so it equals the total cost exactly, and
the input-sum rows are oriented ``+1'u_t = c_t``. Stationarity is then
``Hz + g + E'lam = 0`` and the multiplier of the sum row at step t equals the
per-step multiplier ``lam`` of the Lagrangian ``u'Omega u + 2u'f + lam (1'u - c)``.
``sum_multipliers / 2`` is therefore directly comparable with
:func:`constrained_lq.controller.hard_multiplier`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NotPositiveDefinite, SingularKKT

KKT_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class StackedQP:
    """Decision vector ``z = (u_0..u_{T-1}, x_1..x_T)``."""

    H: np.ndarray
    g: np.ndarray
    E: np.ndarray
    e: np.ndarray
    const: float
    n: int
    m: int
    T: int
    sum_rows: tuple  # (t, row index in E) for each Hard step

    @property
    def dim(self):
        return self.H.shape[0]

    def split(self, z):
        u = z[: self.T * self.m].reshape(self.T, self.m)
        x = z[self.T * self.m:].reshape(self.T, self.n)
        return u, x

    def objective(self, z):
        return float(0.5 * z @ self.H @ z + self.g @ z + self.const)


def build_stacked_qp(scenario):
    fleet, cost, sched = scenario.fleet, scenario.cost, scenario.schedule
    A, B = fleet.A, fleet.B
    n, m, T = fleet.n_tot, fleet.m_tot, scenario.horizon
    r = cost.refs
    x0 = scenario.x0
    if x0.shape != (n,):
        raise DimensionMismatch("x0 does not match the fleet state dimension")
    nu = T * m
    D = nu + T * n

    def ui(t):
        return slice(t * m, (t + 1) * m)

    def xi(t):  # x_t for t = 1..T
        return slice(nu + (t - 1) * n, nu + t * n)

    H = np.zeros((D, D))
    g = np.zeros(D)
    e0 = x0 - r[0]
    const = float(e0 @ cost.Q @ e0)
    ones = np.ones((m, m))
    for t in range(T):
        H[ui(t), ui(t)] += 2.0 * cost.R
        mode = sched.modes[t]
        if mode.is_soft:
            c = sched.targets[t]
            H[ui(t), ui(t)] += 2.0 * mode.eta * ones
            g[ui(t)] += -2.0 * mode.eta * c
            const += mode.eta * c * c
    for t in range(1, T + 1):
        W_t = cost.Q_T if t == T else cost.Q
        H[xi(t), xi(t)] += 2.0 * W_t
        g[xi(t)] += -2.0 * W_t @ r[t]
        const += float(r[t] @ W_t @ r[t])

    hard = [t for t in range(T) if sched.modes[t].is_hard]
    E = np.zeros((T * n + len(hard), D))
    e = np.zeros(T * n + len(hard))
    for t in range(T):
        rows = slice(t * n, (t + 1) * n)
        E[rows, xi(t + 1)] = np.eye(n)
        E[rows, ui(t)] = -B
        if t == 0:
            e[rows] = A @ x0
        else:
            E[rows, xi(t)] = -A
    sum_rows = []
    for k, t in enumerate(hard):
        row = T * n + k
        E[row, ui(t)] = 1.0
        e[row] = sched.targets[t]
        sum_rows.append((t, row))
    return StackedQP(H, g, E, e, const, n, m, T, tuple(sum_rows))


def solve_kkt(qp):
    """Solve ``[H E'; E 0] [z; lam] = [-g; e]`` with a dense symmetric-indefinite solve."""
    D, p = qp.dim, qp.E.shape[0]
    kkt = np.zeros((D + p, D + p))
    kkt[:D, :D] = qp.H
    kkt[:D, D:] = qp.E.T
    kkt[D:, :D] = qp.E
    rhs = np.concatenate([-qp.g, qp.e])
    try:
        with np.errstate(all="ignore"):
            sol = scipy.linalg.solve(kkt, rhs, assume_a="sym", check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SingularKKT(str(exc)) from None
    if not np.all(np.isfinite(sol)):
        raise SingularKKT("non-finite KKT solution")
    resid = np.max(np.abs(kkt @ sol - rhs)) if rhs.size else 0.0
    scale = max(1.0, float(np.max(np.abs(rhs), initial=0.0)),
                float(np.max(np.abs(kkt), initial=0.0)) * float(np.max(np.abs(sol), initial=0.0)))
    if resid > KKT_RTOL * scale:
        raise SingularKKT(f"KKT residual {resid:.3e} exceeds tolerance")
    return sol[:D], sol[D:]


def unconstrained_riccati(scenario):
    """Textbook finite-horizon Riccati recursion; returns ``[P_0, ..., P_T]``."""
    A, B = scenario.fleet.A, scenario.fleet.B
    Q, R = scenario.cost.Q, scenario.cost.R
    T = scenario.horizon
    P = scenario.cost.Q_T.copy()
    out = [P]
    for _ in range(T):
        S = R + B.T @ P @ B
        if np.min(np.linalg.eigvalsh(0.5 * (S + S.T))) <= 0:
            raise NotPositiveDefinite("R + B'PB is not positive definite")
        PB = P @ B
        P = Q + A.T @ P @ A - A.T @ PB @ np.linalg.solve(S, PB.T @ A)
        P = 0.5 * (P + P.T)
        out.append(P)
    return out[::-1]


@dataclass(frozen=True)
class DeviationReport:
    max_input_dev: float
    max_state_dev: float
    qp_objective: float
    dp_objective: float

    @property
    def max_dev(self):
        return max(self.max_input_dev, self.max_state_dev)


def _dp_open_loop(scenario, schedule):
    A, B = scenario.fleet.A, scenario.fleet.B
    T = scenario.horizon
    x = scenario.x0.copy()
    us, xs = [], []
    for t in range(T):
        u = schedule.d[t] - schedule.K[t] @ x
        x = A @ x + B @ u
        us.append(u)
        xs.append(x)
    return np.array(us), np.array(xs)


def open_loop_compare(scenario, schedule, qp_solution=None):
    """Max elementwise gap between the DP policy (w = 0) and the stacked-QP optimum."""
    qp = build_stacked_qp(scenario)
    z, _ = qp_solution if qp_solution is not None else solve_kkt(qp)
    u_qp, x_qp = qp.split(z)
    u_dp, x_dp = _dp_open_loop(scenario, schedule)
    z_dp = np.concatenate([u_dp.ravel(), x_dp.ravel()])
    return DeviationReport(
        max_input_dev=float(np.max(np.abs(u_qp - u_dp))),
        max_state_dev=float(np.max(np.abs(x_qp - x_dp))),
        qp_objective=qp.objective(z),
        dp_objective=qp.objective(z_dp),
    )


def sum_multipliers(qp, lam):
    """``{t: multiplier}`` for every Hard step's input-sum row."""
    return {t: float(lam[row]) for t, row in qp.sum_rows}
