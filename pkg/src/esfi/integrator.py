"""Adaptive integration of the E-SFI system and its two summary indices.

``integrate`` solves the augmented 8-state system on a caller-supplied time
grid with a Dormand-Prince 5(4) stepper (compiled kernel when built, pure
Python otherwise) and returns the dense-output samples as a Trajectory.
``peak_instantaneous`` and ``stable_cumulative`` extract the per-emotion
peak forwarder count F_em(max) and the late-time cumulative plateau C_em(s).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .errors import DomainError, IntegrationError, NotYetStableError
from .model import (
    ModelParams,
    PopulationState,
    STATE_IDS,
    conservation_total,
    require_valid_params,
)

DEFAULT_TOL = 1e-8
#: fraction of the trajectory peak below which forwarding is considered over
STABLE_ACTIVE_FRACTION = 1e-3
#: negative excursions smaller than this (times N) are clamped, larger ones fail
NEGATIVE_CLAMP_FRACTION = 1e-9

_MAX_STEPS = 1_000_000


class Emotion(enum.Enum):
    POSITIVE = "positive"
    NEUTRAL = "neutral"
    NEGATIVE = "negative"

    @property
    def f_column(self) -> int:
        return {"positive": 1, "neutral": 2, "negative": 3}[self.value]

    @property
    def c_column(self) -> int:
        return self.f_column + 4

    @classmethod
    def from_name(cls, name: str) -> "Emotion":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise DomainError(f"unknown emotion {name!r}") from None


@dataclass(frozen=True)
class TimeGrid:
    """Integration window plus the times at which the solution is sampled."""

    t_start: float
    t_end: float
    output_times: np.ndarray = field(repr=False)

    def __post_init__(self):
        times = np.asarray(self.output_times, dtype=float)
        object.__setattr__(self, "output_times", times)
        if not (math.isfinite(self.t_start) and math.isfinite(self.t_end)):
            raise DomainError("grid bounds must be finite")
        if not self.t_start < self.t_end:
            raise DomainError(f"need t_start < t_end, got [{self.t_start}, {self.t_end}]")
        if times.ndim != 1 or times.size == 0:
            raise DomainError("output_times must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(times)):
            raise DomainError("output_times must be finite")
        if np.any(np.diff(times) <= 0):
            raise DomainError("output_times must be strictly increasing")
        if times[0] < self.t_start or times[-1] > self.t_end:
            raise DomainError("output_times must lie within [t_start, t_end]")

    @classmethod
    def uniform(cls, t_start: float, t_end: float, n_points: int) -> "TimeGrid":
        if n_points < 2:
            raise DomainError("need at least 2 output points")
        return cls(t_start, t_end, np.linspace(t_start, t_end, n_points))

    def stretched(self, scale: float) -> "TimeGrid":
        """Same start and point density, horizon multiplied by ``scale``."""
        span = (self.t_end - self.t_start) * scale
        return TimeGrid.uniform(self.t_start, self.t_start + span, len(self.output_times))


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution: one 8-component state per output time."""

    grid: TimeGrid
    states: np.ndarray  # (n_times, 8), columns in STATE_IDS order
    n_steps: int = 0
    backend_name: str = ""

    def __len__(self) -> int:
        return self.states.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.grid.output_times

    def column(self, name: str) -> np.ndarray:
        return self.states[:, STATE_IDS.index(name)]

    def state_at(self, index: int) -> PopulationState:
        return PopulationState.from_array(self.states[index])

    def conservation_totals(self) -> np.ndarray:
        return self.states[:, 0:5].sum(axis=1)


def integrate(
    params: ModelParams,
    init: PopulationState,
    grid: TimeGrid,
    tol: float = DEFAULT_TOL,
    backend_name: str | None = None,
) -> Trajectory:
    """Solve the system from ``init`` and sample it at ``grid.output_times``.

    ``tol`` controls the local error: relative tolerance ``tol``, absolute
    tolerance ``tol * N`` with N the conserved total population.  Negative
    excursions below ``-1e-9 * N`` abort with IntegrationError; smaller ones
    are clamped to zero in the returned samples.
    """
    require_valid_params(params)
    if not (tol > 0 and math.isfinite(tol)):
        raise DomainError(f"tol must be a positive finite real, got {tol!r}")
    y0 = init.as_array()
    if not np.all(np.isfinite(y0)):
        raise DomainError("initial state must be finite")
    if np.any(y0 < 0):
        raise DomainError("initial state must be nonnegative")

    total = conservation_total(init)
    atol = tol * total if total > 0 else tol
    name = backend_name or backend.default_backend()
    kernel = backend.get_kernel(name)

    # keep the deactivation terms inside the explicit-RK stability region so
    # decayed forwarding compartments do not oscillate around zero
    alpha_max = max(params.alpha_pos, params.alpha_neu, params.alpha_neg)
    max_step = 2.5 / alpha_max if alpha_max > 0 else math.inf

    out, status, last_t, n_steps = kernel.integrate_dp54(
        params.rate_vector(), y0, float(grid.t_start), grid.output_times,
        tol, atol, _MAX_STEPS, max_step,
    )
    if status == kernel.STATUS_STEP_UNDERFLOW:
        raise IntegrationError(
            f"step size underflow at t={last_t:.6g}", last_good_time=last_t
        )
    if status == kernel.STATUS_MAX_STEPS:
        raise IntegrationError(
            f"step budget exhausted at t={last_t:.6g}", last_good_time=last_t
        )

    floor = -NEGATIVE_CLAMP_FRACTION * max(total, 1.0)
    low = out.min()
    if low < floor:
        where = np.unravel_index(np.argmin(out), out.shape)
        raise IntegrationError(
            f"state component {STATE_IDS[where[1]]!r} went negative "
            f"({low:.3e}) at t={grid.output_times[where[0]]:.6g}",
            last_good_time=float(grid.output_times[where[0]]),
        )
    if low < 0:
        out = np.where(out < 0, 0.0, out)

    return Trajectory(grid=grid, states=out, n_steps=n_steps, backend_name=name)


def peak_instantaneous(traj: Trajectory, emotion: Emotion) -> tuple[float, float]:
    """Peak of the selected instantaneous forwarding curve over the grid.

    Returns ``(time, value)``; ties break toward the earliest time.
    """
    if len(traj) == 0:
        raise DomainError("empty trajectory")
    values = traj.states[:, emotion.f_column]
    idx = int(np.argmax(values))
    return float(traj.times[idx]), float(values[idx])


def active_forwarders(traj: Trajectory) -> np.ndarray:
    """max(F_pos, F_neu, F_neg) at every output time."""
    return traj.states[:, 1:4].max(axis=1)


def stable_cumulative(traj: Trajectory, emotion: Emotion) -> float:
    """Late-time plateau of the selected cumulative curve, C_em(s).

    Requires the forwarding activity to have decayed below
    ``STABLE_ACTIVE_FRACTION`` of its trajectory peak at the final output
    time; raises NotYetStableError (with the residual fraction) otherwise.
    """
    if len(traj) == 0:
        raise DomainError("empty trajectory")
    active = active_forwarders(traj)
    peak = float(active.max())
    residual = float(active[-1])
    if peak > 0 and residual >= STABLE_ACTIVE_FRACTION * peak:
        raise NotYetStableError(residual / peak)
    return float(traj.states[-1, emotion.c_column])
