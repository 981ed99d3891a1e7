"""Backward-pass synthesis of the input-sum constrained LQ control law.

For every step the optimal input is affine in the state,

    u_t = -Gamma_t (B' P_{t+1} A x_t + B' s_{t+1}) + gamma_t = -K_t x_t + d_t,

where ``Gamma_t`` / ``gamma_t`` depend on the step's constraint mode:

* Hard: ``Gamma`` is the Omega-weighted projection of ``Omega^{-1}`` onto
  ``{u : 1'u = 0}`` and ``gamma`` shifts onto ``1'u = c_t``;
* None: the unconstrained LQ step, ``Gamma = Omega^{-1}``, ``gamma = 0``;
* Soft(eta): penalty ``eta (1'u - c_t)^2`` folded into ``Pi = Omega + eta 11'``.

``Omega = R + B' P_{t+1} B``. The value function is
``V_t(z) = z' P_t z + 2 s_t' z + q_t``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateConstraint, DimensionMismatch, IndexOutOfRange, NonFiniteRecursion
from .numkernel import SPDFactor, min_eigenvalue_symmetric, symmetrize

DEGENERATE_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class StepOperators:
    omega: np.ndarray
    gamma_mat: np.ndarray
    gamma_vec: np.ndarray
    pi: Optional[np.ndarray] = None
    # Omega^{-1} 1 and 1' Omega^{-1} 1, reused by the multiplier formula
    omega_inv_ones: Optional[np.ndarray] = None
    ones_omega_inv_ones: float = float("nan")


@dataclass(frozen=True, eq=False)
class GainSchedule:
    """Backward-pass output.

    ``P``, ``s``, ``q`` are indexed t = 0..T; ``K``, ``d`` and ``ops`` t = 0..T-1.
    """

    P: tuple
    s: tuple
    q: tuple
    K: tuple
    d: tuple
    ops: tuple
    modes: tuple
    targets: np.ndarray

    @property
    def horizon(self):
        return len(self.K)


def step_operators(P_next, mode, c_t, fleet, cost):
    B = fleet.B
    omega = symmetrize(cost.R + B.T @ P_next @ B)
    factor = SPDFactor(omega)
    omega_inv = factor.inverse()
    # row sums of the symmetrized inverse keep 1'Gamma = 0 at rounding level
    v = omega_inv.sum(axis=1)
    k = float(v.sum())
    m = omega.shape[0]

    if mode.is_hard:
        if not k > DEGENERATE_TOL:
            raise DegenerateConstraint(f"1' Omega^-1 1 = {k:.3e}")
        if m == 1:
            # a single input is fully pinned; the formula would leave a 1-ulp residue
            gamma_mat, gamma_vec = np.zeros((1, 1)), np.array([float(c_t)])
        else:
            gamma_mat = symmetrize(omega_inv - np.outer(v, v) / k)
            gamma_vec = v * (c_t / k)
        return StepOperators(omega, gamma_mat, gamma_vec, None, v, k)

    if mode.is_none:
        return StepOperators(omega, omega_inv, np.zeros(m), None, v, k)

    # Soft: Pi^{-1} by Sherman-Morrison on the Omega factorization
    eta = mode.eta
    pi = omega + eta * np.ones((m, m))
    denom = 1.0 + eta * k
    gamma_mat = symmetrize(omega_inv - (eta / denom) * np.outer(v, v))
    gamma_vec = v * (eta * c_t / denom)
    return StepOperators(omega, gamma_mat, gamma_vec, pi, v, k)


def _value_constant(ops, mode, c_t, Bts):
    """z-independent part of the minimized Bellman bracket (beyond q, r'Qr, tr(WP))."""
    G, g = ops.gamma_mat, ops.gamma_vec
    base = 2.0 * float(Bts @ g) - float(Bts @ G @ Bts)
    if mode.is_soft:
        # min_u u'Pi u + 2u'(f - eta c 1) + eta c^2, evaluated at f = B's
        return base - float(g @ ops.pi @ g) + mode.eta * c_t**2
    return base + float(g @ ops.omega @ g)


def backward_pass(scenario):
    fleet, cost, sched = scenario.fleet, scenario.cost, scenario.schedule
    A, B, W, Q = fleet.A, fleet.B, fleet.W, cost.Q
    T = scenario.horizon
    r = cost.refs

    P = symmetrize(cost.Q_T)
    s = -cost.Q_T @ r[T]
    q = float(r[T] @ cost.Q_T @ r[T])
    Ps, ss, qs = [P], [s], [q]
    Ks, ds, opss = [], [], []

    for t in range(T - 1, -1, -1):
        mode, c_t = sched.modes[t], float(sched.targets[t])
        ops = step_operators(P, mode, c_t, fleet, cost)
        G, g = ops.gamma_mat, ops.gamma_vec
        BtPA = B.T @ P @ A
        Bts = B.T @ s

        K = G @ BtPA
        d = -G @ Bts + g
        P_new = symmetrize(Q + A.T @ P @ A - BtPA.T @ G @ BtPA)
        s_new = A.T @ s - BtPA.T @ (G @ Bts) + BtPA.T @ g - Q @ r[t]
        q_new = (q + float(r[t] @ Q @ r[t]) + float(np.sum(W * P))
                 + _value_constant(ops, mode, c_t, Bts))

        if not (np.all(np.isfinite(P_new)) and np.all(np.isfinite(s_new)) and np.isfinite(q_new)):
            raise NonFiniteRecursion(f"non-finite value function at t={t}")
        P, s, q = P_new, s_new, q_new
        Ps.append(P)
        ss.append(s)
        qs.append(q)
        Ks.append(K)
        ds.append(d)
        opss.append(ops)

    return GainSchedule(
        P=tuple(reversed(Ps)), s=tuple(reversed(ss)), q=tuple(reversed(qs)),
        K=tuple(reversed(Ks)), d=tuple(reversed(ds)), ops=tuple(reversed(opss)),
        modes=sched.modes, targets=sched.targets.copy(),
    )


def control_at(schedule, t, x):
    if not 0 <= t < schedule.horizon:
        raise IndexOutOfRange(f"t={t} outside [0, {schedule.horizon - 1}]")
    x = np.asarray(x, dtype=float)
    if x.shape != (schedule.K[t].shape[1],):
        raise DimensionMismatch(f"state has shape {x.shape}, expected ({schedule.K[t].shape[1]},)")
    return schedule.d[t] - schedule.K[t] @ x


def predicted_cost(schedule, x0):
    """Expected total cost ``x0' P_0 x0 + 2 s_0' x0 + q_0`` under the policy."""
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (schedule.P[0].shape[0],):
        raise DimensionMismatch(f"x0 has shape {x0.shape}")
    return float(x0 @ schedule.P[0] @ x0 + 2.0 * schedule.s[0] @ x0 + schedule.q[0])


def hard_multiplier(schedule, t, x, fleet):
    """Half Lagrange multiplier of the input-sum constraint at a Hard step.

    Uses the per-step Lagrangian ``u'Omega u + 2u'f + lam (1'u - c)``, so the
    returned value is ``lam / 2 = -(1'Omega^{-1} f + c) / (1'Omega^{-1} 1)``.
    """
    if not schedule.modes[t].is_hard:
        raise ValueError(f"step {t} is not a Hard step")
    ops = schedule.ops[t]
    P1, s1 = schedule.P[t + 1], schedule.s[t + 1]
    f = fleet.B.T @ (P1 @ (fleet.A @ np.asarray(x, dtype=float)) + s1)
    return -(float(ops.omega_inv_ones @ f) + float(schedule.targets[t])) / ops.ones_omega_inv_ones


def min_eigenvalues(schedule):
    return [min_eigenvalue_symmetric(P) for P in schedule.P]
