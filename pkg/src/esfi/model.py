"""Core types and vector field of the E-SFI propagation model.

The population is split into five states: susceptible users (S), three
emotion-tagged forwarding compartments (F_pos, F_neu, F_neg) whose members
are the only ones able to influence susceptibles, and immune users (I) who
no longer forward.  A contact between a susceptible and an active forwarder
converts the susceptible into a forwarder keeping the same emotion (with
probability ``p_plus``), shifting it one step along positive-neutral-negative
(``p_zero``), flipping it outright (``p_minus``), or into an immune user
(the remaining probability mass).  Deactivation moves forwarders to I at
per-emotion rates ``alpha_*``.

Three extra states C_pos, C_neu, C_neg accumulate the gross inflow into the
corresponding forwarding compartment; they are the model counterpart of the
observable cumulative forwarding counts and never decrease.

Time is measured in sampling periods (one period = 30 minutes for the
bundled dataset); all rates are per period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .errors import DomainError

#: Canonical ordering of the calibratable parameters, used by the fitter,
#: the sensitivity sampler and every serialized artifact.
PARAM_IDS = (
    "beta",
    "p_plus",
    "p_zero",
    "p_minus",
    "alpha_pos",
    "alpha_neu",
    "alpha_neg",
    "s_zero",
)

#: Ordering of the state vector used by the integration kernels.
STATE_IDS = ("s", "f_pos", "f_neu", "f_neg", "i", "c_pos", "c_neu", "c_neg")


@dataclass(frozen=True)
class ModelParams:
    """The eight calibratable quantities of the model.

    beta        per-user per-period exposure rate; an active forwarder
                exposes ``beta * S`` susceptibles per period
    p_plus      probability that an exposed susceptible forwards with the
                same emotion as the contacted forwarder
    p_zero      probability of forwarding with the one-step-shifted emotion
    p_minus     probability of forwarding with the fully reversed emotion
    alpha_pos/neu/neg   deactivation rate of the forwarding compartments
    s_zero      initial susceptible population
    """

    beta: float
    p_plus: float
    p_zero: float
    p_minus: float
    alpha_pos: float
    alpha_neu: float
    alpha_neg: float
    s_zero: float

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def rate_vector(self) -> np.ndarray:
        """The seven rate/probability entries, in kernel order (no s_zero)."""
        return np.array(
            [self.beta, self.p_plus, self.p_zero, self.p_minus,
             self.alpha_pos, self.alpha_neu, self.alpha_neg],
            dtype=float,
        )

    def replace(self, **changes) -> "ModelParams":
        merged = self.as_dict()
        unknown = set(changes) - set(merged)
        if unknown:
            raise DomainError(f"unknown parameter id(s): {sorted(unknown)}")
        merged.update(changes)
        return ModelParams(**merged)


@dataclass(frozen=True)
class PopulationState:
    """Instantaneous compartment sizes plus the cumulative counters."""

    s: float
    f_pos: float
    f_neu: float
    f_neg: float
    i: float
    c_pos: float
    c_neu: float
    c_neg: float

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.s, self.f_pos, self.f_neu, self.f_neg, self.i,
             self.c_pos, self.c_neu, self.c_neg],
            dtype=float,
        )

    @classmethod
    def from_array(cls, values) -> "PopulationState":
        values = np.asarray(values, dtype=float)
        if values.shape != (8,):
            raise DomainError(f"state vector must have 8 entries, got shape {values.shape}")
        return cls(*map(float, values))


def validate_params(params: ModelParams) -> list[str]:
    """Check the parameter invariants; returns a list of violations (empty = ok).

    Besides elementwise nonnegativity the two coupled constraints
    ``p_plus + p_zero + p_minus <= 1`` and ``p_plus + 2*p_zero <= 1`` are
    enforced: they keep the immune-inflow coefficients of the vector field
    nonnegative, without which I could decrease.
    """
    violations = []
    for name in PARAM_IDS:
        value = getattr(params, name)
        if not math.isfinite(value):
            violations.append(f"{name} must be finite, got {value!r}")
        elif value < 0:
            violations.append(f"{name} must be >= 0, got {value!r}")
    for name in ("p_plus", "p_zero", "p_minus"):
        if getattr(params, name) > 1:
            violations.append(f"{name} must be <= 1, got {getattr(params, name)!r}")
    if not violations:
        if params.p_plus + params.p_zero + params.p_minus > 1:
            violations.append(
                "p_plus + p_zero + p_minus must be <= 1 "
                f"(got {params.p_plus + params.p_zero + params.p_minus!r})"
            )
        if params.p_plus + 2 * params.p_zero > 1:
            violations.append(
                "p_plus + 2*p_zero must be <= 1 "
                f"(got {params.p_plus + 2 * params.p_zero!r})"
            )
    return violations


def require_valid_params(params: ModelParams) -> None:
    violations = validate_params(params)
    if violations:
        raise DomainError("invalid parameters: " + "; ".join(violations))


def rhs(state: PopulationState, params: ModelParams) -> PopulationState:
    """Time derivative of the augmented state.

    The five compartment derivatives sum to zero (the total population is
    conserved) and each cumulative derivative equals the gross inflow into
    the matching forwarding compartment, deactivation excluded.
    """
    require_valid_params(params)
    for name in STATE_IDS:
        if not math.isfinite(getattr(state, name)):
            raise DomainError(f"state field {name!r} is not finite: {getattr(state, name)!r}")

    beta, pp, p0, pm = params.beta, params.p_plus, params.p_zero, params.p_minus
    exp_pos = beta * state.s * state.f_pos   # exposures per period, by contacted emotion
    exp_neu = beta * state.s * state.f_neu
    exp_neg = beta * state.s * state.f_neg

    in_pos = pp * exp_pos + p0 * exp_neu + pm * exp_neg
    in_neu = p0 * exp_pos + pp * exp_neu + p0 * exp_neg
    in_neg = pm * exp_pos + p0 * exp_neu + pp * exp_neg

    d_s = -exp_pos - exp_neu - exp_neg
    d_f_pos = in_pos - params.alpha_pos * state.f_pos
    d_f_neu = in_neu - params.alpha_neu * state.f_neu
    d_f_neg = in_neg - params.alpha_neg * state.f_neg
    d_i = (
        (1 - pp - pm - p0) * exp_pos
        + (1 - pp - 2 * p0) * exp_neu
        + (1 - pp - pm - p0) * exp_neg
        + params.alpha_pos * state.f_pos
        + params.alpha_neu * state.f_neu
        + params.alpha_neg * state.f_neg
    )
    return PopulationState(d_s, d_f_pos, d_f_neu, d_f_neg, d_i, in_pos, in_neu, in_neg)


def conservation_total(state: PopulationState) -> float:
    """Total population N = S + F_pos + F_neu + F_neg + I."""
    return state.s + state.f_pos + state.f_neu + state.f_neg + state.i


def make_initial_state(
    params: ModelParams, f_pos0: float, f_neu0: float, f_neg0: float
) -> PopulationState:
    """Initial condition anchored at the first observed sample.

    The cumulative counters start at the initial forwarder counts, not at
    zero, so that the model series is directly comparable with an observed
    cumulative series whose first sample is nonzero.  I(0) = 0.
    """
    for name, value in (("f_pos0", f_pos0), ("f_neu0", f_neu0), ("f_neg0", f_neg0)):
        if not math.isfinite(value) or value < 0:
            raise DomainError(f"{name} must be finite and >= 0, got {value!r}")
    if not math.isfinite(params.s_zero) or params.s_zero < 0:
        raise DomainError(f"s_zero must be finite and >= 0, got {params.s_zero!r}")
    return PopulationState(
        s=params.s_zero,
        f_pos=f_pos0, f_neu=f_neu0, f_neg=f_neg0,
        i=0.0,
        c_pos=f_pos0, c_neu=f_neu0, c_neg=f_neg0,
    )
