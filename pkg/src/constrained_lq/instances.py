"""Random problem instances for verification campaigns."""
from __future__ import annotations

import numpy as np

from .model import ConstraintSchedule, CostSpec, FleetModel, Mode, Scenario


def random_psd(rng, n, rank=None):
    rank = n if rank is None else rank
    F = rng.standard_normal((n, rank))
    return F @ F.T / max(rank, 1)


def random_stable_block(rng, n, max_radius=1.2):
    """Random square block with spectral radius drawn from (0, max_radius]."""
    M = rng.standard_normal((n, n))
    rho = np.max(np.abs(np.linalg.eigvals(M)))
    target = rng.uniform(0.3, max_radius)
    return M * (target / rho) if rho > 0 else M


def random_scenario(rng, n_agents=(1, 5), horizon=(1, 10), modes="mixed",
                    agent_dims=(1, 2), noise=False, max_radius=1.2, eta_range=(0.0, 10.0)):
    """Draw a random scenario.

    ``modes`` is ``"mixed"`` (Hard/Soft/None uniformly), ``"hard"``, ``"none"``
    or ``"soft"``. Agent state/input dims are drawn from ``1..agent_dims[1]``.
    Q and Q_T are dense random PSD (possibly rank deficient), R is a random
    positive diagonal.
    """
    N = int(rng.integers(n_agents[0], n_agents[1] + 1))
    T = int(rng.integers(horizon[0], horizon[1] + 1))
    dims = [(int(rng.integers(agent_dims[0], agent_dims[1] + 1)),
             int(rng.integers(agent_dims[0], agent_dims[1] + 1))) for _ in range(N)]
    A_blocks = [random_stable_block(rng, nx, max_radius) for nx, _ in dims]
    B_blocks = [rng.standard_normal((nx, nu)) for nx, nu in dims]
    W_blocks = [random_psd(rng, nx) if noise else np.zeros((nx, nx)) for nx, _ in dims]
    fleet = FleetModel.from_agents(A_blocks, B_blocks, W_blocks)
    n, m = fleet.n_tot, fleet.m_tot

    Q = random_psd(rng, n, rank=int(rng.integers(1, n + 1)))
    Q_T = random_psd(rng, n, rank=int(rng.integers(1, n + 1)))
    R = np.diag(rng.uniform(0.1, 2.0, size=m))
    refs = rng.normal(0.0, 2.0, size=(T + 1, n))
    cost = CostSpec(Q, R, Q_T, refs)

    def pick():
        kind = modes if modes != "mixed" else rng.choice(["hard", "soft", "none"])
        if kind == "hard":
            return Mode.hard()
        if kind == "soft":
            return Mode.soft(rng.uniform(*eta_range))
        return Mode.none()

    sched = ConstraintSchedule(tuple(pick() for _ in range(T)), rng.normal(0.0, 3.0, size=T))
    x0 = rng.normal(0.0, 2.0, size=n)
    return Scenario(fleet, cost, sched, x0, seed=int(rng.integers(2**31)))
