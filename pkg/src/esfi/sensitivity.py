"""Latin hypercube sampling, PRCC computation and parameter sweeps.

The sensitivity pipeline perturbs all eight parameters inside caller-chosen
ranges (default: +-50% around a calibrated base), evaluates six summary
indices per sample (the three peak instantaneous forwarder counts and the
three stable cumulative counts) and reports the partial rank correlation
coefficient of each (parameter, index) pair: the Pearson correlation of the
rank residuals after regressing out the ranks of every other parameter.
|PRCC| >= 0.4 counts as a strong influence, 0.2 <= |PRCC| < 0.4 as median,
anything below as weak.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .errors import AnalysisError, DomainError, NotYetStableError
from .integrator import (
    Emotion,
    TimeGrid,
    integrate,
    peak_instantaneous,
    stable_cumulative,
)
from .model import PARAM_IDS, ModelParams, make_initial_state, validate_params

INDEX_IDS = ("f_pos_max", "f_neu_max", "f_neg_max", "c_pos_s", "c_neu_s", "c_neg_s")

STRONG_THRESHOLD = 0.4
MEDIAN_THRESHOLD = 0.2

_RIDGE = 1e-10
_MAX_HORIZON_SCALE = 8
_DEFAULT_HORIZON = (0.0, 120.0, 481)


def default_horizon() -> TimeGrid:
    return TimeGrid.uniform(*_DEFAULT_HORIZON)


@dataclass(frozen=True)
class ParameterRanges:
    """Per-parameter [lo, hi] sampling intervals for all eight parameters."""

    intervals: dict[str, tuple[float, float]]

    def __post_init__(self):
        missing = set(PARAM_IDS) - set(self.intervals)
        if missing:
            raise DomainError(f"ranges missing for parameters: {sorted(missing)}")
        unknown = set(self.intervals) - set(PARAM_IDS)
        if unknown:
            raise DomainError(f"ranges given for unknown parameters: {sorted(unknown)}")
        for name, (lo, hi) in self.intervals.items():
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise DomainError(f"range for {name} must be finite")
            if lo < 0:
                raise DomainError(f"range for {name} must be nonnegative, got lo={lo}")
            if not lo < hi:
                raise DomainError(f"range for {name} needs lo < hi, got [{lo}, {hi}]")

    def __getitem__(self, name: str) -> tuple[float, float]:
        return self.intervals[name]

    @classmethod
    def around(cls, base: ModelParams, span: float = 0.5) -> "ParameterRanges":
        """+-span (fractional) box around a base point; base must be positive."""
        if not 0 < span:
            raise DomainError("span must be positive")
        intervals = {}
        for name in PARAM_IDS:
            value = getattr(base, name)
            if value <= 0:
                raise DomainError(
                    f"cannot build a +-{span:.0%} range around {name}={value!r}"
                )
            intervals[name] = (value * (1.0 - span), value * (1.0 + span))
        return cls(intervals)


@dataclass(frozen=True)
class SampleMatrix:
    """n x 8 parameter draws (columns in PARAM_IDS order) plus provenance."""

    values: np.ndarray
    seed: int
    ranges: ParameterRanges | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 2 or values.shape[1] != len(PARAM_IDS):
            raise DomainError(f"sample matrix must be n x {len(PARAM_IDS)}, got {values.shape}")

    def __len__(self) -> int:
        return self.values.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.values[:, PARAM_IDS.index(name)]

    def params_at(self, row: int) -> ModelParams:
        return ModelParams(**dict(zip(PARAM_IDS, map(float, self.values[row]))))

    def subset(self, rows) -> "SampleMatrix":
        return SampleMatrix(self.values[rows], self.seed, self.ranges)


def shrink_probabilities(p_plus: float, p_zero: float, p_minus: float):
    """Proportionally scale a probability triple onto the feasible set."""
    s1 = p_plus + p_zero + p_minus
    s2 = p_plus + 2.0 * p_zero
    c = 1.0
    if s1 > 1.0:
        c = min(c, 1.0 / s1)
    if s2 > 1.0:
        c = min(c, 1.0 / s2)
    return p_plus * c, p_zero * c, p_minus * c


def lhs_sample(ranges: ParameterRanges, n: int, seed: int) -> SampleMatrix:
    """Latin hypercube draw: per column, exactly one point per equal-width
    stratum, independently permuted.  Probability triples that violate the
    joint constraints are shrunk proportionally onto the boundary (a small,
    documented distortion of those marginals)."""
    if n < 2:
        raise DomainError("need n >= 2 samples")
    rng = np.random.default_rng(seed)
    values = np.empty((n, len(PARAM_IDS)))
    for k, name in enumerate(PARAM_IDS):
        lo, hi = ranges[name]
        offsets = (np.arange(n) + rng.uniform(size=n)) / n
        values[:, k] = lo + (hi - lo) * rng.permutation(offsets)
    ip, i0, im = (PARAM_IDS.index(p) for p in ("p_plus", "p_zero", "p_minus"))
    for row in values:
        row[ip], row[i0], row[im] = shrink_probabilities(row[ip], row[i0], row[im])
    return SampleMatrix(values=values, seed=seed, ranges=ranges)


def compute_indices(
    params: ModelParams,
    init,
    horizon: TimeGrid | None = None,
    tol: float = 1e-8,
) -> dict[str, float]:
    """The six summary indices for one parameter point.

    Integrates over ``horizon``, doubling its span (up to 8x) until the
    forwarding activity has decayed enough for the cumulative plateaus to
    be read off.  If stability is still unreached at 8x, the three stable
    cumulative entries are returned as NaN (the unstable marker); peaks are
    always reported.
    """
    horizon = horizon or default_horizon()
    scale = 1
    while True:
        grid = horizon if scale == 1 else horizon.stretched(scale)
        traj = integrate(params, init, grid, tol)
        out = {}
        for emotion, f_id, c_id in (
            (Emotion.POSITIVE, "f_pos_max", "c_pos_s"),
            (Emotion.NEUTRAL, "f_neu_max", "c_neu_s"),
            (Emotion.NEGATIVE, "f_neg_max", "c_neg_s"),
        ):
            out[f_id] = peak_instantaneous(traj, emotion)[1]
            try:
                out[c_id] = stable_cumulative(traj, emotion)
            except NotYetStableError:
                out[c_id] = float("nan")
        if not any(math.isnan(out[c]) for c in ("c_pos_s", "c_neu_s", "c_neg_s")):
            return out
        if scale >= _MAX_HORIZON_SCALE:
            return out
        scale *= 2


def classify_correlation(value: float) -> str:
    """Map |PRCC| onto the strong / median / weak scale."""
    if not math.isfinite(value) or abs(value) > 1.0:
        raise DomainError(f"correlation must lie in [-1, 1], got {value!r}")
    if abs(value) >= STRONG_THRESHOLD:
        return "strong"
    if abs(value) >= MEDIAN_THRESHOLD:
        return "median"
    return "weak"


def _rank_z(x: np.ndarray) -> np.ndarray:
    """Average-tie ranks, centered and scaled (affine-invariant for PRCC)."""
    r = rankdata(x, method="average").astype(float)
    r -= r.mean()
    norm = math.sqrt(float(np.dot(r, r)))
    if norm == 0.0:
        raise DomainError("constant column: partial rank correlation is undefined")
    return r / norm


def prcc(samples: SampleMatrix, outputs, target: str) -> float:
    """Partial rank correlation of one parameter column with an output.

    Both the target column and the outputs are rank-transformed, the ranks
    of all remaining parameter columns are regressed out of each (ordinary
    least squares via ridge-stabilized normal equations), and the Pearson
    correlation of the two residual vectors is returned.
    """
    if target not in PARAM_IDS:
        raise DomainError(f"unknown parameter id {target!r}")
    outputs = np.asarray(outputs, dtype=float)
    n = len(samples)
    if outputs.shape != (n,):
        raise DomainError(f"outputs shape {outputs.shape} does not match {n} samples")
    if n <= 10:
        raise DomainError("PRCC needs more than 10 samples")
    if not np.all(np.isfinite(outputs)):
        raise DomainError("outputs contain non-finite values")

    t = _rank_z(samples.column(target))
    y = _rank_z(outputs)
    others = [name for name in PARAM_IDS if name != target]
    columns = [np.ones(n) / math.sqrt(n)]
    for name in others:
        col = samples.column(name)
        if np.ptp(col) > 0:
            columns.append(_rank_z(col))
    X = np.column_stack(columns)

    gram = X.T @ X + _RIDGE * np.eye(X.shape[1])
    res_t = t - X @ np.linalg.solve(gram, X.T @ t)
    res_y = y - X @ np.linalg.solve(gram, X.T @ y)

    nt = math.sqrt(float(np.dot(res_t, res_t)))
    ny = math.sqrt(float(np.dot(res_y, res_y)))
    if nt <= 0 or ny <= 0:
        raise DomainError(
            "residuals are constant: partial rank correlation is undefined "
            f"(target {target!r})"
        )
    value = float(np.dot(res_t, res_y) / (nt * ny))
    return max(-1.0, min(1.0, value))


@dataclass(frozen=True)
class SensitivityReport:
    """PRCC values and strength classes for every (parameter, index) pair."""

    prcc_values: np.ndarray  # (8 params, 6 indices)
    n_samples: int
    n_failed: int
    seed: int
    ranges: ParameterRanges
    failures: tuple = field(default_factory=tuple)

    def value(self, param: str, index: str) -> float:
        return float(self.prcc_values[PARAM_IDS.index(param), INDEX_IDS.index(index)])

    def strength(self, param: str, index: str) -> str:
        return classify_correlation(self.value(param, index))

    def to_csv(self, destination) -> None:
        own = isinstance(destination, str) or hasattr(destination, "__fspath__")
        fh = open(destination, "w", encoding="utf-8", newline="\n") if own else destination
        try:
            fh.write("param," + ",".join(INDEX_IDS) + "\n")
            for p, name in enumerate(PARAM_IDS):
                cells = [repr(float(self.prcc_values[p, q])) for q in range(len(INDEX_IDS))]
                fh.write(name + "," + ",".join(cells) + "\n")
        finally:
            if own:
                fh.close()

    def to_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "n_failed": self.n_failed,
            "seed": self.seed,
            "ranges": {name: list(self.ranges[name]) for name in PARAM_IDS},
            "prcc": {
                p: {q: float(self.prcc_values[i, j]) for j, q in enumerate(INDEX_IDS)}
                for i, p in enumerate(PARAM_IDS)
            },
            "strength": {
                p: {q: classify_correlation(float(self.prcc_values[i, j]))
                    for j, q in enumerate(INDEX_IDS)}
                for i, p in enumerate(PARAM_IDS)
            },
        }


def _evaluate_sample(args) -> tuple[int, list[float] | None, str]:
    """Worker: indices for one sample row; (row, values|None, error)."""
    row, values, f0, horizon_spec, tol = args
    try:
        params = ModelParams(**dict(zip(PARAM_IDS, map(float, values))))
        violations = validate_params(params)
        if violations:
            return row, None, "; ".join(violations)
        init = make_initial_state(params, *f0)
        horizon = TimeGrid.uniform(*horizon_spec)
        out = compute_indices(params, init, horizon, tol)
        result = [out[idx] for idx in INDEX_IDS]
        if any(math.isnan(v) for v in result):
            return row, None, "stability not reached at 8x horizon"
        return row, result, ""
    except Exception as exc:  # surfaced in the failure budget
        return row, None, str(exc)


def evaluate_samples(
    samples: SampleMatrix,
    f0: tuple[float, float, float],
    horizon: TimeGrid | None = None,
    tol: float = 1e-8,
    workers: int = 1,
) -> tuple[np.ndarray, list[tuple[int, str]]]:
    """Indices for every sample row; returns (n x 6 matrix, failures).

    Failed rows are NaN in the matrix and listed as (row, reason).
    """
    horizon = horizon or default_horizon()
    spec = (horizon.t_start, horizon.t_end, len(horizon.output_times))
    jobs = [(i, tuple(samples.values[i]), tuple(f0), spec, tol) for i in range(len(samples))]
    outputs = np.full((len(samples), len(INDEX_IDS)), np.nan)
    failures: list[tuple[int, str]] = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate_sample, jobs, chunksize=max(1, len(jobs) // (8 * workers))))
    else:
        results = [_evaluate_sample(job) for job in jobs]
    for row, values, error in results:
        if values is None:
            failures.append((row, error))
        else:
            outputs[row] = values
    return outputs, failures


def sensitivity_run(
    base: ModelParams,
    ranges: ParameterRanges,
    n: int,
    seed: int,
    f0: tuple[float, float, float],
    horizon: TimeGrid | None = None,
    tol: float = 1e-8,
    workers: int = 1,
) -> SensitivityReport:
    """Full pipeline: LHS draw, per-sample indices, PRCC per pair.

    Per-sample failures are tolerated up to 1% of ``n`` (failed rows are
    excluded from every correlation); beyond that the run fails.
    """
    del base  # sampling is fully described by `ranges`; kept for call-site symmetry
    samples = lhs_sample(ranges, n, seed)
    outputs, failures = evaluate_samples(samples, f0, horizon, tol, workers)
    if len(failures) > 0.01 * n:
        preview = "; ".join(f"row {r}: {msg}" for r, msg in failures[:5])
        raise AnalysisError(
            f"{len(failures)} of {n} samples failed (> 1% budget): {preview}"
        )
    good = np.array([i for i in range(n) if not np.any(np.isnan(outputs[i]))], dtype=int)
    kept = samples.subset(good)
    kept_outputs = outputs[good]

    values = np.empty((len(PARAM_IDS), len(INDEX_IDS)))
    for i, param in enumerate(PARAM_IDS):
        for j in range(len(INDEX_IDS)):
            values[i, j] = prcc(kept, kept_outputs[:, j], param)
    return SensitivityReport(
        prcc_values=values,
        n_samples=n,
        n_failed=len(failures),
        seed=seed,
        ranges=ranges,
        failures=tuple(failures),
    )


def sweep_grid(
    base: ModelParams,
    vary: list[str],
    grids: list,
    index: str,
    f0: tuple[float, float, float],
    horizon: TimeGrid | None = None,
    tol: float = 1e-8,
) -> np.ndarray:
    """Evaluate one index over the cartesian product of up to 3 value grids.

    Output shape matches the input grids; infeasible grid points are NaN.
    """
    if not 1 <= len(vary) <= 3:
        raise DomainError("sweep varies between 1 and 3 parameters")
    if len(vary) != len(grids):
        raise DomainError("need one value grid per varied parameter")
    if index not in INDEX_IDS:
        raise DomainError(f"unknown index {index!r}; available: {INDEX_IDS}")
    for name in vary:
        if name not in PARAM_IDS:
            raise DomainError(f"unknown parameter id {name!r}")
    grids = [np.asarray(g, dtype=float) for g in grids]
    shape = tuple(len(g) for g in grids)
    out = np.full(shape, np.nan)
    for pos in np.ndindex(shape):
        overrides = {name: float(grids[k][pos[k]]) for k, name in enumerate(vary)}
        params = base.replace(**overrides)
        if validate_params(params):
            continue  # infeasible point stays NaN
        init = make_initial_state(params, *f0)
        out[pos] = compute_indices(params, init, horizon, tol)[index]
    return out
