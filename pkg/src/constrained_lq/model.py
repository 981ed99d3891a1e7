"""Domain types for the N-agent system and demand-response scenario construction.

Arrays are stored as numpy arrays on frozen dataclasses; treat them as
read-only once a scenario is built (they are shared between rollout workers).
"""
from __future__ import annotations

import csv
import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyInput, InvalidWindow, NotPSD, ValidationError
from .numkernel import SPDFactor, as_matrix, as_vector, block_diag, min_eigenvalue_symmetric

PSD_ATOL = 1e-10


class ModeKind(enum.Enum):
    HARD = "hard"
    SOFT = "soft"
    NONE = "none"


@dataclass(frozen=True)
class Mode:
    """Constraint mode of a single step: Hard, Soft(eta) or None."""

    kind: ModeKind
    eta: float = 0.0

    def __post_init__(self):
        if self.kind is ModeKind.SOFT:
            if not (math.isfinite(self.eta) and self.eta >= 0):
                raise ValueError(f"soft penalty weight must be finite and >= 0, got {self.eta}")
        elif self.eta != 0.0:
            raise ValueError(f"{self.kind.value} mode takes no penalty weight")

    @classmethod
    def hard(cls):
        return cls(ModeKind.HARD)

    @classmethod
    def soft(cls, eta):
        return cls(ModeKind.SOFT, float(eta))

    @classmethod
    def none(cls):
        return cls(ModeKind.NONE)

    @property
    def is_hard(self):
        return self.kind is ModeKind.HARD

    @property
    def is_soft(self):
        return self.kind is ModeKind.SOFT

    @property
    def is_none(self):
        return self.kind is ModeKind.NONE

    def label(self):
        if self.is_soft:
            return f"soft({self.eta:g})"
        return self.kind.value

    @classmethod
    def parse(cls, text):
        """Inverse of :meth:`label`."""
        text = text.strip().lower()
        if text == "hard":
            return cls.hard()
        if text == "none":
            return cls.none()
        if text.startswith("soft(") and text.endswith(")"):
            return cls.soft(float(text[5:-1]))
        raise ValueError(f"unknown mode label {text!r}")


HARD = Mode.hard()
NONE = Mode.none()


def _check_psd(m, name, strict=False):
    if np.max(np.abs(m - m.T), initial=0.0) > 1e-10 * max(1.0, float(np.max(np.abs(m), initial=0.0))):
        raise ValidationError(f"{name} symmetric", f"{name} is not symmetric")
    if strict:
        try:
            SPDFactor(m)
        except ArithmeticError:
            raise ValidationError(f"{name} positive definite", f"{name} is not positive definite") from None
    elif m.size and min_eigenvalue_symmetric(m) < -PSD_ATOL * max(1.0, float(np.max(np.abs(m)))):
        raise ValidationError(f"{name} positive semidefinite", f"{name} has a negative eigenvalue")


@dataclass(frozen=True, eq=False)
class FleetModel:
    """Block-diagonal fleet dynamics ``x+ = A x + B u + w`` with ``w ~ (0, W)``."""

    agent_dims: tuple
    A: np.ndarray
    B: np.ndarray
    W: np.ndarray

    def __post_init__(self):
        dims = tuple((int(nx), int(nu)) for nx, nu in self.agent_dims)
        if not dims:
            raise EmptyInput("fleet needs at least one agent")
        object.__setattr__(self, "agent_dims", dims)
        A = as_matrix(self.A, "A")
        B = as_matrix(self.B, "B")
        W = as_matrix(self.W, "W")
        n, m = self.n_tot, self.m_tot
        if A.shape != (n, n) or B.shape != (n, m) or W.shape != (n, n):
            raise DimensionMismatch(
                f"expected A {n}x{n}, B {n}x{m}, W {n}x{n}; got {A.shape}, {B.shape}, {W.shape}"
            )
        try:
            _check_psd(W, "W")
        except ValidationError as exc:
            raise NotPSD(str(exc)) from None
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "W", W)

    @classmethod
    def from_agents(cls, A_blocks, B_blocks, W_blocks):
        """Assemble the fleet from per-agent ``(A_i, B_i, W_i)`` blocks."""
        A_blocks = [as_matrix(a, "A_i") for a in A_blocks]
        B_blocks = [as_matrix(b, "B_i") for b in B_blocks]
        W_blocks = [as_matrix(w, "W_i") for w in W_blocks]
        if not (len(A_blocks) == len(B_blocks) == len(W_blocks)):
            raise DimensionMismatch("per-agent block lists differ in length")
        dims = [(b.shape[0], b.shape[1]) for b in B_blocks]
        return cls(tuple(dims), block_diag(A_blocks), block_diag(B_blocks), block_diag(W_blocks))

    @property
    def n_agents(self):
        return len(self.agent_dims)

    @property
    def n_tot(self):
        return sum(nx for nx, _ in self.agent_dims)

    @property
    def m_tot(self):
        return sum(nu for _, nu in self.agent_dims)

    def with_noise(self, W):
        return FleetModel(self.agent_dims, self.A, self.B, W)


@dataclass(frozen=True, eq=False)
class CostSpec:
    """Tracking weights and the reference trajectory ``refs[t]`` for t = 0..T."""

    Q: np.ndarray
    R: np.ndarray
    Q_T: np.ndarray
    refs: np.ndarray

    def __post_init__(self):
        Q = as_matrix(self.Q, "Q")
        R = as_matrix(self.R, "R")
        Q_T = as_matrix(self.Q_T, "Q_T")
        refs = np.asarray(self.refs, dtype=float)
        if refs.ndim != 2 or refs.shape[0] < 1:
            raise DimensionMismatch(f"refs must be (T+1, n_tot), got {refs.shape}")
        n = Q.shape[0]
        if Q.shape != (n, n) or Q_T.shape != (n, n) or refs.shape[1] != n:
            raise DimensionMismatch("Q, Q_T and refs disagree on the state dimension")
        if R.shape[0] != R.shape[1]:
            raise DimensionMismatch("R must be square")
        if not np.all(np.isfinite(refs)):
            raise ValueError("refs has non-finite entries")
        _check_psd(Q, "Q")
        _check_psd(Q_T, "Q_T")
        _check_psd(R, "R", strict=True)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "Q_T", Q_T)
        object.__setattr__(self, "refs", refs)

    @property
    def horizon(self):
        return self.refs.shape[0] - 1


@dataclass(frozen=True, eq=False)
class ConstraintSchedule:
    """Per-step constraint modes and input-sum targets ``c_t`` for t = 0..T-1."""

    modes: tuple
    targets: np.ndarray

    def __post_init__(self):
        modes = tuple(self.modes)
        targets = np.asarray(self.targets, dtype=float).reshape(-1)
        if len(modes) != targets.shape[0]:
            raise DimensionMismatch(f"{len(modes)} modes but {targets.shape[0]} targets")
        if not all(isinstance(mo, Mode) for mo in modes):
            raise TypeError("modes must be Mode instances")
        if not np.all(np.isfinite(targets)):
            raise ValueError("targets have non-finite entries")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "targets", targets)

    @classmethod
    def uniform(cls, mode, targets):
        targets = np.asarray(targets, dtype=float).reshape(-1)
        return cls(tuple(mode for _ in range(targets.shape[0])), targets)

    @property
    def horizon(self):
        return len(self.modes)

    def hard_steps(self):
        return [t for t, mo in enumerate(self.modes) if mo.is_hard]

    def soft_steps(self):
        return [t for t, mo in enumerate(self.modes) if mo.is_soft]

    def free_steps(self):
        """Steps where the input sum is not pinned (Soft or None)."""
        return [t for t, mo in enumerate(self.modes) if not mo.is_hard]


@dataclass(frozen=True, eq=False)
class Scenario:
    fleet: FleetModel
    cost: CostSpec
    schedule: ConstraintSchedule
    x0: np.ndarray
    seed: int = 0
    agent_class: Optional[tuple] = None
    u_min: Optional[np.ndarray] = None
    u_max: Optional[np.ndarray] = None

    def __post_init__(self):
        x0 = as_vector(self.x0, "x0")
        object.__setattr__(self, "x0", x0)
        n, m = self.fleet.n_tot, self.fleet.m_tot
        if self.schedule.horizon < 1:
            raise ValidationError("horizon", "empty horizon (T must be >= 1)")
        if self.cost.horizon != self.schedule.horizon:
            raise DimensionMismatch(
                f"refs cover T={self.cost.horizon}, schedule covers T={self.schedule.horizon}"
            )
        if x0.shape[0] != n or self.cost.Q.shape[0] != n or self.cost.R.shape[0] != m:
            raise DimensionMismatch("x0 / Q / R dimensions disagree with the fleet")
        if self.agent_class is not None:
            cls = tuple(str(c) for c in self.agent_class)
            if len(cls) != self.fleet.n_agents:
                raise DimensionMismatch("agent_class must label every agent")
            object.__setattr__(self, "agent_class", cls)
        for name in ("u_min", "u_max"):
            val = getattr(self, name)
            if val is not None:
                val = np.broadcast_to(np.asarray(val, dtype=float), (m,)).copy()
                object.__setattr__(self, name, val)

    @property
    def horizon(self):
        return self.schedule.horizon

    def with_schedule(self, schedule):
        return Scenario(self.fleet, self.cost, schedule, self.x0, self.seed,
                        self.agent_class, self.u_min, self.u_max)

    def with_noise(self, W):
        return Scenario(self.fleet.with_noise(W), self.cost, self.schedule, self.x0,
                        self.seed, self.agent_class, self.u_min, self.u_max)

    def capacity_violations(self):
        """Hard steps whose target lies outside the aggregate input range.

        Returns an empty list when no bounds are attached. The controller never
        clips; callers decide what to do with the warning.
        """
        if self.u_min is None and self.u_max is None:
            return []
        lo = -np.inf if self.u_min is None else float(np.sum(self.u_min))
        hi = np.inf if self.u_max is None else float(np.sum(self.u_max))
        return [t for t in self.schedule.hard_steps()
                if not lo <= self.schedule.targets[t] <= hi]

    def warn_capacity(self):
        bad = self.capacity_violations()
        if bad:
            warnings.warn(
                f"input-sum target outside aggregate capacity at steps {bad}",
                RuntimeWarning, stacklevel=2,
            )
        return bad


@dataclass(frozen=True, eq=False)
class SolarProfile:
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float).reshape(-1)
        if not np.all(np.isfinite(s)):
            raise ValueError("solar profile has non-finite samples")
        object.__setattr__(self, "samples", s)

    def __len__(self):
        return self.samples.shape[0]


@dataclass(frozen=True)
class FleetParams:
    """Battery fleet parameters; defaults are the demand-response example values."""

    a_range: tuple = (0.96, 0.99)
    b: float = 1.0
    noise_variance: float = 3.0
    capacity_kwh: float = 80.0
    initial_soc_range: tuple = (0.4, 0.6)
    class_targets: tuple = (("alpha", 0.8), ("beta", 0.4))
    q: float = 1.0
    q_terminal: float = 1.0
    r: float = 0.01


@dataclass(frozen=True, eq=False)
class SampledFleet:
    fleet: FleetModel
    x0: np.ndarray
    targets: np.ndarray
    agent_class: tuple
    params: FleetParams = field(default_factory=FleetParams)

    def cost(self, horizon):
        """CostSpec with references held at each agent's class target."""
        p = self.params
        n = self.fleet.n_tot
        refs = np.tile(self.targets, (horizon + 1, 1))
        return CostSpec(p.q * np.eye(n), p.r * np.eye(n), p.q_terminal * np.eye(n), refs)


def sample_fleet(n_agents, seed, params=None):
    """Draw a scalar-battery fleet.

    Agents are split evenly over the classes in ``params.class_targets`` (the
    first class gets the extra agent when the split is uneven). Draw order from
    ``numpy.random.default_rng(seed)``: all ``A_i`` first, then all initial SoCs.
    """
    if n_agents < 1:
        raise EmptyInput("n_agents must be >= 1")
    p = params or FleetParams()
    rng = np.random.default_rng(seed)
    a = rng.uniform(p.a_range[0], p.a_range[1], size=n_agents)
    soc0 = rng.uniform(p.initial_soc_range[0], p.initial_soc_range[1], size=n_agents)
    x0 = soc0 * p.capacity_kwh

    n_cls = len(p.class_targets)
    labels, targets = [], []
    for i in range(n_agents):
        name, frac = p.class_targets[i * n_cls // n_agents]
        labels.append(name)
        targets.append(frac * p.capacity_kwh)

    fleet = FleetModel(
        tuple((1, 1) for _ in range(n_agents)),
        np.diag(a),
        p.b * np.eye(n_agents),
        p.noise_variance * np.eye(n_agents),
    )
    return SampledFleet(fleet, x0, np.asarray(targets), tuple(labels), p)


def synthetic_solar(horizon, peak_kw, daylight=(6, 18)):
    """Half-sine generation bump over ``[start, end)``, zero elsewhere."""
    start, end = daylight
    if not (0 <= start < end <= horizon):
        raise InvalidWindow(f"daylight window {daylight} not inside [0, {horizon}]")
    if peak_kw < 0:
        raise InvalidWindow(f"peak_kw must be >= 0, got {peak_kw}")
    t = np.arange(horizon, dtype=float)
    inside = (t >= start) & (t < end)
    samples = np.zeros(horizon)
    samples[inside] = peak_kw * np.sin(np.pi * (t[inside] - start) / (end - start))
    return SolarProfile(samples)


def load_solar_csv(path, column, horizon=None):
    """Read a kW column from a CSV with a header row; blank lines are skipped."""
    values = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = None
        for lineno, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if header is None:
                header = [h.strip() for h in row]
                if column not in header:
                    raise ValueError(f"{path}: column {column!r} not in header {header}")
                col = header.index(column)
                continue
            cell = row[col].strip() if col < len(row) else ""
            try:
                v = float(cell)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric cell {cell!r}") from None
            if not math.isfinite(v):
                raise ValueError(f"{path}:{lineno}: non-finite cell {cell!r}")
            values.append(v)
    if horizon is not None:
        if len(values) < horizon:
            raise ValueError(f"{path}: {len(values)} rows, need {horizon}")
        values = values[:horizon]
    return SolarProfile(np.asarray(values))


def schedule_from_profile(profile, off_mode=NONE, on_mode=HARD):
    """Hard wherever the profile is nonzero, ``off_mode`` elsewhere; targets copied."""
    modes = tuple(on_mode if c != 0 else off_mode for c in profile.samples)
    return ConstraintSchedule(modes, profile.samples.copy())


def _check_step_dims(x, u, cost):
    if x.shape[0] != cost.Q.shape[0] or u.shape[0] != cost.R.shape[0]:
        raise DimensionMismatch(
            f"x has {x.shape[0]} entries and u {u.shape[0]}; "
            f"expected {cost.Q.shape[0]} and {cost.R.shape[0]}"
        )


def stage_cost(x, u, t, cost, schedule):
    """Running cost at step t including the soft penalty when mode[t] is Soft."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    _check_step_dims(x, u, cost)
    e = x - cost.refs[t]
    val = float(e @ cost.Q @ e + u @ cost.R @ u)
    mode = schedule.modes[t]
    if mode.is_soft:
        val += mode.eta * (float(np.sum(u)) - schedule.targets[t]) ** 2
    return val


def terminal_cost(x, cost):
    x = np.asarray(x, dtype=float)
    if x.shape[0] != cost.Q_T.shape[0]:
        raise DimensionMismatch("terminal state dimension mismatch")
    e = x - cost.refs[-1]
    return float(e @ cost.Q_T @ e)


def class_indices(agent_class, agent_dims=None):
    """Map class label -> state indices of that class's agents."""
    out = {}
    offset = 0
    dims = agent_dims or [(1, 1)] * len(agent_class)
    for label, (nx, _) in zip(agent_class, dims):
        out.setdefault(label, []).extend(range(offset, offset + nx))
        offset += nx
    return out
