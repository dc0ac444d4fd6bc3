"""Least-squares calibration of the model against an observed dataset.

The objective is the plain unweighted sum over the observed sample indices
of squared residuals of all three cumulative series.  The model series is
produced by integrating from the dataset's own first row (initial
forwarders = row 0, I(0) = 0, cumulative counters = row 0), so the k=0
residual is zero by construction and the estimated quantities are the seven
rates plus the initial susceptible population.

Minimization is derivative-free: Nelder-Mead restarted from jittered
starting points, run in a transformed space that builds the box bounds in
(log scale for beta, the alphas and s_zero, whose plausible magnitudes span
many decades; linear scale for the three probabilities, both mapped through
a logit).  The two coupled probability constraints are soft-enforced with a
quadratic penalty and the returned parameters are projected back onto the
feasible set, so a FitResult never violates them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from .data import ObservedDataset
from .errors import DomainError, EsfiError, IntegrationError
from .integrator import DEFAULT_TOL, TimeGrid, integrate
from .model import PARAM_IDS, ModelParams, make_initial_state, validate_params

#: parameters optimized on a log scale (magnitudes span several decades)
LOG_SCALE_PARAMS = frozenset({"beta", "alpha_pos", "alpha_neu", "alpha_neg", "s_zero"})
PROBABILITY_PARAMS = ("p_plus", "p_zero", "p_minus")

_PENALTY_WEIGHT = 1e6
_FAILED_OBJECTIVE = 1e30


@dataclass(frozen=True)
class FitConfig:
    max_iterations: int = 4000
    convergence_tol: float = 1e-8
    restarts: int = 8
    seed: int = 1
    bounds: dict[str, tuple[float, float]] | None = None

    def __post_init__(self):
        if self.max_iterations <= 0:
            raise DomainError("max_iterations must be positive")
        if not self.convergence_tol > 0:
            raise DomainError("convergence_tol must be positive")
        if self.restarts < 0:
            raise DomainError("restarts must be >= 0")
        if self.bounds is not None:
            _validate_bounds(self.bounds)


@dataclass(frozen=True)
class FitResult:
    params: ModelParams
    objective: float
    per_series_rmse: tuple[float, float, float]  # c_pos, c_neu, c_neg
    iterations: int
    converged: bool
    residual_series: tuple[np.ndarray, np.ndarray, np.ndarray]  # model - observed
    message: str = ""


def _validate_bounds(bounds: dict[str, tuple[float, float]]) -> None:
    missing = set(PARAM_IDS) - set(bounds)
    if missing:
        raise DomainError(f"bounds missing for parameters: {sorted(missing)}")
    for name, (lo, hi) in bounds.items():
        if name not in PARAM_IDS:
            raise DomainError(f"bounds given for unknown parameter {name!r}")
        if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
            raise DomainError(f"invalid bounds for {name}: [{lo}, {hi}]")
        if lo < 0:
            raise DomainError(f"lower bound for {name} must be >= 0")
        if name in LOG_SCALE_PARAMS and lo <= 0:
            raise DomainError(f"{name} is optimized in log space and needs a positive lower bound")
        if name in PROBABILITY_PARAMS and hi > 1:
            raise DomainError(f"upper bound for probability {name} must be <= 1")


def default_bounds(dataset: ObservedDataset) -> dict[str, tuple[float, float]]:
    """Box bounds bracketing plausible microblog-event magnitudes."""
    s_lo = max(dataset.total_final(), 1.0)
    return {
        "beta": (1e-8, 1e-2),
        "p_plus": (1e-6, 0.5),
        "p_zero": (1e-6, 0.5),
        "p_minus": (1e-6, 0.5),
        "alpha_pos": (1e-3, 5.0),
        "alpha_neu": (1e-3, 5.0),
        "alpha_neg": (1e-3, 5.0),
        "s_zero": (s_lo, 1e7),
    }


def default_initial_guess(dataset: ObservedDataset) -> ModelParams:
    return ModelParams(
        beta=1e-5,
        p_plus=0.05, p_zero=0.005, p_minus=0.005,
        alpha_pos=0.5, alpha_neu=0.5, alpha_neg=0.5,
        s_zero=10.0 * dataset.total_final(),
    )


def _dataset_grid(dataset: ObservedDataset) -> TimeGrid:
    times = dataset.sample_times
    return TimeGrid(float(times[0]), float(times[-1]), times)


def model_residuals(params: ModelParams, dataset: ObservedDataset, tol: float):
    """(model - observed) per series, via one integration over the sample grid."""
    init = make_initial_state(params, *dataset.initial_forwarders())
    traj = integrate(params, init, _dataset_grid(dataset), tol)
    return (
        traj.column("c_pos") - dataset.c_pos,
        traj.column("c_neu") - dataset.c_neu,
        traj.column("c_neg") - dataset.c_neg,
    )


def ls_error(params: ModelParams, dataset: ObservedDataset, tol: float = DEFAULT_TOL) -> float:
    """Sum of squared residuals of all three cumulative series.

    The third term uses the negative series, completing the symmetric
    three-series sum.
    """
    violations = validate_params(params)
    if violations:
        raise DomainError("invalid parameters: " + "; ".join(violations))
    try:
        res = model_residuals(params, dataset, tol)
    except IntegrationError as exc:
        raise IntegrationError(
            f"integration failed while scoring params {params.as_dict()}: {exc}",
            last_good_time=exc.last_good_time,
        ) from exc
    return float(sum(np.dot(r, r) for r in res))


# bounded <-> unconstrained coordinate transform


def _to_unconstrained(params: ModelParams, bounds) -> np.ndarray:
    z = np.empty(len(PARAM_IDS))
    for k, name in enumerate(PARAM_IDS):
        lo, hi = bounds[name]
        x = getattr(params, name)
        if not lo <= x <= hi:
            raise DomainError(f"{name}={x!r} outside bounds [{lo}, {hi}]")
        if name in LOG_SCALE_PARAMS:
            u = (math.log(x) - math.log(lo)) / (math.log(hi) - math.log(lo))
        else:
            u = (x - lo) / (hi - lo)
        u = min(max(u, 1e-12), 1 - 1e-12)
        z[k] = math.log(u / (1 - u))
    return z


def _from_unconstrained(z: np.ndarray, bounds) -> ModelParams:
    values = {}
    for k, name in enumerate(PARAM_IDS):
        lo, hi = bounds[name]
        u = float(expit(z[k]))
        if name in LOG_SCALE_PARAMS:
            values[name] = math.exp(math.log(lo) + u * (math.log(hi) - math.log(lo)))
        else:
            values[name] = lo + u * (hi - lo)
    return ModelParams(**values)


def _constraint_violation(params: ModelParams) -> float:
    v1 = max(0.0, params.p_plus + params.p_zero + params.p_minus - 1.0)
    v2 = max(0.0, params.p_plus + 2.0 * params.p_zero - 1.0)
    return v1 * v1 + v2 * v2


def project_feasible(params: ModelParams) -> ModelParams:
    """Proportionally shrink (p_plus, p_zero, p_minus) onto the feasible set."""
    s1 = params.p_plus + params.p_zero + params.p_minus
    s2 = params.p_plus + 2.0 * params.p_zero
    c = min(1.0, 1.0 / s1 if s1 > 1.0 else 1.0, 1.0 / s2 if s2 > 1.0 else 1.0)
    if c >= 1.0:
        return params
    return params.replace(
        p_plus=params.p_plus * c, p_zero=params.p_zero * c, p_minus=params.p_minus * c
    )


def _raw_objective(params: ModelParams, dataset: ObservedDataset, tol: float) -> float:
    """LS value plus the soft feasibility penalty; huge on solver failure."""
    try:
        res = model_residuals(params, dataset, tol)
    except (IntegrationError, EsfiError):
        return _FAILED_OBJECTIVE
    value = float(sum(np.dot(r, r) for r in res))
    return value + _PENALTY_WEIGHT * _constraint_violation(params)


def fit(
    dataset: ObservedDataset,
    config: FitConfig | None = None,
    initial_guess: ModelParams | None = None,
    tol: float = DEFAULT_TOL,
) -> FitResult:
    """Estimate all eight parameters from an observed dataset.

    Runs ``1 + config.restarts`` Nelder-Mead starts (the supplied guess plus
    seeded jitters of it) and one polish pass from the best vertex, then
    re-evaluates the winner without the penalty term.  A result is returned
    even when nothing converged; ``converged`` reflects whether the winning
    run terminated by tolerance rather than by iteration budget.
    """
    config = config or FitConfig()
    bounds = config.bounds or default_bounds(dataset)
    _validate_bounds(bounds)
    guess = initial_guess or default_initial_guess(dataset)
    violations = validate_params(guess)
    if violations:
        raise DomainError("infeasible initial guess: " + "; ".join(violations))

    z0 = _to_unconstrained(guess, bounds)

    def objective(z: np.ndarray) -> float:
        return _raw_objective(_from_unconstrained(z, bounds), dataset, tol)

    rng = np.random.default_rng(config.seed)
    starts = [z0]
    for _ in range(config.restarts):
        starts.append(z0 + rng.normal(0.0, 1.0, size=z0.size))

    f_guess = objective(z0)
    best_z, best_f, best_success = z0, f_guess, False
    total_iterations = 0
    for z_start in starts:
        opt = minimize(
            objective, z_start, method="Nelder-Mead",
            options={
                "maxiter": config.max_iterations,
                "maxfev": 2 * config.max_iterations,
                "xatol": 1e-6,
                "fatol": config.convergence_tol * (1.0 + abs(f_guess)),
                "adaptive": True,
            },
        )
        total_iterations += int(opt.nit)
        if opt.fun < best_f:
            best_z, best_f, best_success = opt.x, float(opt.fun), bool(opt.success)

    # polish from the winning vertex: a fresh simplex often escapes the
    # flat/degenerate simplexes Nelder-Mead ends with
    opt = minimize(
        objective, best_z, method="Nelder-Mead",
        options={
            "maxiter": config.max_iterations,
            "maxfev": 2 * config.max_iterations,
            "xatol": 1e-7,
            "fatol": config.convergence_tol * (1.0 + abs(best_f)),
            "adaptive": True,
        },
    )
    total_iterations += int(opt.nit)
    if opt.fun <= best_f:
        best_z, best_f, best_success = opt.x, float(opt.fun), bool(opt.success)

    params = project_feasible(_from_unconstrained(best_z, bounds))
    try:
        res = model_residuals(params, dataset, tol)
        objective_value = float(sum(np.dot(r, r) for r in res))
    except IntegrationError:
        return FitResult(
            params=params, objective=float("inf"),
            per_series_rmse=(float("nan"),) * 3,
            iterations=total_iterations, converged=False,
            residual_series=(np.array([]),) * 3,
            message="winning parameters failed to integrate",
        )
    rmse = tuple(float(np.sqrt(np.mean(r * r))) for r in res)
    return FitResult(
        params=params,
        objective=objective_value,
        per_series_rmse=rmse,
        iterations=total_iterations,
        converged=best_success,
        residual_series=tuple(res),
        message="" if best_success else "no start converged within the iteration budget",
    )


def residual_report(result: FitResult, dataset: ObservedDataset) -> dict:
    """Per-series residual arrays plus max |residual| and RMSE summaries."""
    res = result.residual_series
    if any(len(r) != len(dataset) for r in res):
        raise DomainError(
            f"residual length {[len(r) for r in res]} does not match dataset length {len(dataset)}"
        )
    report = {"sample_times": dataset.sample_times.tolist(), "series": {}}
    for name, r in zip(("c_pos", "c_neu", "c_neg"), res):
        report["series"][name] = {
            "residuals": [float(v) for v in r],
            "max_abs": float(np.max(np.abs(r))),
            "rmse": float(np.sqrt(np.mean(r * r))),
        }
    return report


def fit_report_dict(result: FitResult, dataset: ObservedDataset) -> dict:
    """JSON-ready fit report (parameters, objective, RMSEs, residuals)."""
    f0 = dataset.initial_forwarders()
    return {
        "params": result.params.as_dict(),
        "objective": result.objective,
        "per_series_rmse": {
            "c_pos": result.per_series_rmse[0],
            "c_neu": result.per_series_rmse[1],
            "c_neg": result.per_series_rmse[2],
        },
        "converged": result.converged,
        "iterations": result.iterations,
        "message": result.message,
        "residuals": {
            "c_pos": [float(v) for v in result.residual_series[0]],
            "c_neu": [float(v) for v in result.residual_series[1]],
            "c_neg": [float(v) for v in result.residual_series[2]],
        },
        "initial_forwarders": {"f_pos": f0[0], "f_neu": f0[1], "f_neg": f0[2]},
        "sample_times": dataset.sample_times.tolist(),
    }
