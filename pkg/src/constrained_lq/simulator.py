"""Closed-loop simulation under additive Gaussian noise.

Per-path seeds are counter-based: path ``i`` of a campaign with base seed ``b``
draws from ``SeedSequence(entropy=b, spawn_key=(i,))``. A path's randomness
therefore depends only on ``(b, i)``, never on which worker ran it or when.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .controller import control_at
from .errors import DimensionMismatch, NonFiniteState, NotPSD
from .model import class_indices, stage_cost, terminal_cost

WORKERS_ENV = "CLQ_WORKERS"
PSD_RTOL = 1e-10


class NoiseSampler:
    """Zero-mean Gaussian draws with covariance ``W`` through a PSD factor.

    The factor is computed once; diagonal ``W`` short-circuits to per-coordinate
    standard deviations.
    """

    def __init__(self, W):
        W = np.asarray(W, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise DimensionMismatch(f"W must be square, got {W.shape}")
        self.dim = W.shape[0]
        scale = max(1.0, float(np.max(np.abs(W), initial=0.0)))
        self.zero = not np.any(W)
        self.diag = None
        self.factor = None
        if self.zero:
            return
        if np.count_nonzero(W - np.diag(np.diag(W))) == 0:
            dg = np.diag(W)
            if np.min(dg) < -PSD_RTOL * scale:
                raise NotPSD("W has a negative diagonal entry")
            self.diag = np.sqrt(np.clip(dg, 0.0, None))
            return
        if np.max(np.abs(W - W.T)) > PSD_RTOL * scale:
            raise NotPSD("W is not symmetric")
        lam, V = np.linalg.eigh(0.5 * (W + W.T))
        if lam[0] < -PSD_RTOL * scale:
            raise NotPSD(f"W has eigenvalue {lam[0]:.3e}")
        self.factor = V * np.sqrt(np.clip(lam, 0.0, None))

    def draw(self, rng):
        if self.zero:
            return np.zeros(self.dim)
        z = rng.standard_normal(self.dim)
        if self.diag is not None:
            return self.diag * z
        return self.factor @ z


def draw_noise(W, rng):
    """One draw ``w ~ N(0, W)`` from the generator ``rng``."""
    return NoiseSampler(W).draw(rng)


def path_rng(base_seed, index):
    return np.random.default_rng(np.random.SeedSequence(entropy=base_seed, spawn_key=(index,)))


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    states: np.ndarray  # (T+1, n)
    inputs: np.ndarray  # (T, m)
    step_costs: np.ndarray  # (T+1,), terminal cost last
    residuals: np.ndarray  # (T,), 1'u_t - c_t
    total_cost: float

    @property
    def total_input(self):
        return self.inputs.sum(axis=1)


def rollout(scenario, schedule, seed=None, rng=None, deterministic=False, sampler=None):
    """Simulate one closed-loop path.

    Noise comes from ``rng`` if given, else ``default_rng(seed)``;
    ``deterministic=True`` sets ``w = 0``.
    """
    fleet, cost, sched = scenario.fleet, scenario.cost, scenario.schedule
    T = scenario.horizon
    if schedule.horizon != T or schedule.K[0].shape != (fleet.m_tot, fleet.n_tot):
        raise DimensionMismatch("gain schedule does not match the scenario")
    if not deterministic:
        sampler = sampler or NoiseSampler(fleet.W)
        rng = rng if rng is not None else np.random.default_rng(seed)

    states = np.empty((T + 1, fleet.n_tot))
    inputs = np.empty((T, fleet.m_tot))
    step_costs = np.empty(T + 1)
    residuals = np.empty(T)
    x = scenario.x0.astype(float, copy=True)
    states[0] = x
    for t in range(T):
        u = control_at(schedule, t, x)
        inputs[t] = u
        step_costs[t] = stage_cost(x, u, t, cost, sched)
        residuals[t] = float(np.sum(u)) - sched.targets[t]
        x = fleet.A @ x + fleet.B @ u
        if not deterministic:
            x = x + sampler.draw(rng)
        if not np.all(np.isfinite(x)):
            raise NonFiniteState(f"non-finite state at t={t + 1}")
        states[t + 1] = x
    step_costs[T] = terminal_cost(x, cost)
    return TrajectoryRecord(states, inputs, step_costs, residuals, float(np.sum(step_costs)))


@dataclass(frozen=True, eq=False)
class MonteCarloSummary:
    n_paths: int
    mean_cost: float
    cost_std_error: float
    max_abs_hard_residual: float
    # max |1'u_t - c_t| / max(1, |c_t|) over Hard steps
    max_scaled_hard_residual: float
    # mean |1'u_t - c_t| at Soft steps, nan elsewhere
    mean_abs_soft_residual: np.ndarray
    class_mean_soc: dict = field(default_factory=dict)
    mean_states: np.ndarray = None
    mean_inputs: np.ndarray = None
    mean_step_costs: np.ndarray = None
    costs: np.ndarray = None


def default_workers():
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


class PathError(RuntimeError):
    def __init__(self, index, exc):
        self.index = index
        super().__init__(f"path {index}: {exc!r}")


def monte_carlo(scenario, schedule, n_paths, base_seed=0, workers=None):
    """Run ``n_paths`` independent rollouts and aggregate them in path order."""
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    sampler = NoiseSampler(scenario.fleet.W)

    def run(i):
        try:
            return rollout(scenario, schedule, rng=path_rng(base_seed, i), sampler=sampler)
        except Exception as exc:
            raise PathError(i, exc) from exc

    workers = workers or default_workers()
    if workers > 1 and n_paths > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run, range(n_paths)))
    else:
        records = [run(i) for i in range(n_paths)]
    return summarize(scenario, records)


def summarize(scenario, records):
    sched = scenario.schedule
    n = len(records)
    costs = np.array([r.total_cost for r in records])
    # shift by the first path so identical costs give an exactly zero spread
    spread = costs - costs[0]
    std = float(np.std(spread, ddof=1)) if n > 1 else 0.0
    states = np.stack([r.states for r in records])
    inputs = np.stack([r.inputs for r in records])
    resid = np.abs(np.stack([r.residuals for r in records]))

    hard = sched.hard_steps()
    soft = sched.soft_steps()
    max_hard = float(resid[:, hard].max()) if hard else 0.0
    scale = np.maximum(1.0, np.abs(sched.targets))
    max_scaled = float((resid[:, hard] / scale[hard]).max()) if hard else 0.0
    soft_mean = np.full(sched.horizon, np.nan)
    if soft:
        soft_mean[soft] = resid[:, soft].mean(axis=0)

    mean_states = states.mean(axis=0)
    class_soc = {}
    if scenario.agent_class is not None:
        for label, idx in class_indices(scenario.agent_class, scenario.fleet.agent_dims).items():
            class_soc[label] = mean_states[:, idx].mean(axis=1)

    return MonteCarloSummary(
        n_paths=n,
        mean_cost=float(costs.mean()),
        cost_std_error=std / np.sqrt(n),
        max_abs_hard_residual=max_hard,
        max_scaled_hard_residual=max_scaled,
        mean_abs_soft_residual=soft_mean,
        class_mean_soc=class_soc,
        mean_states=mean_states,
        mean_inputs=inputs.mean(axis=0),
        mean_step_costs=np.stack([r.step_costs for r in records]).mean(axis=0),
        costs=costs,
    )
