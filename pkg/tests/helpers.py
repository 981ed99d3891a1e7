"""Small hand-built scenarios shared by the unit tests."""
import numpy as np

from constrained_lq.model import ConstraintSchedule, CostSpec, FleetModel, Scenario


def identity_scenario(n_agents, modes, targets, x0=None, refs=0.0, q=1.0, r=1.0, q_T=1.0,
                      a=1.0, b=1.0, w=0.0):
    """Scalar agents with A = aI, B = bI, Q = qI, R = rI, Q_T = q_T I."""
    T = len(modes)
    I = np.eye(n_agents)
    fleet = FleetModel(tuple((1, 1) for _ in range(n_agents)), a * I, b * I, w * I)
    cost = CostSpec(q * I, r * I, q_T * I, np.full((T + 1, n_agents), refs, dtype=float))
    sched = ConstraintSchedule(tuple(modes), np.asarray(targets, dtype=float))
    x0 = np.zeros(n_agents) if x0 is None else np.asarray(x0, dtype=float)
    return Scenario(fleet, cost, sched, x0)


def kkt_step_oracle(omega, f, mode, c):
    """argmin_u u'Omega u + 2u'f (+ eta (1'u - c)^2 | s.t. 1'u = c) by direct linear solve."""
    m = omega.shape[0]
    one = np.ones(m)
    if mode.is_hard:
        K = np.block([[2 * omega, one[:, None]], [one[None, :], np.zeros((1, 1))]])
        return np.linalg.solve(K, np.concatenate([-2 * f, [c]]))[:m]
    eta = mode.eta if mode.is_soft else 0.0
    return np.linalg.solve(omega + eta * np.outer(one, one), -f + eta * c * one)
