"""Command-line interface: simulate, fit, prcc, sweep, scenario.

Runs are configured by an INI file (one section per command plus a
``[params]`` section for model parameters) and/or flags; flags win.  Base
parameters can also come from a previous fit via ``--fit-report``.  Every
command writes its outputs under ``--out`` and is deterministic for fixed
inputs and seed.

Exit codes: 0 success, 1 analysis failure (diagnostics still written when
possible), 2 input or configuration error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import svgplot
from .calibration import FitConfig, fit, fit_report_dict
from .data import export_trajectory, load_dataset
from .errors import AnalysisError, DomainError, EsfiError, ParseError
from .integrator import TimeGrid, integrate
from .model import PARAM_IDS, ModelParams, make_initial_state, validate_params
from .sensitivity import (
    INDEX_IDS,
    ParameterRanges,
    compute_indices,
    sensitivity_run,
    sweep_grid,
)

_EMOTION_LABELS = {"pos": "positive", "neu": "neutral", "neg": "negative"}


@dataclass(frozen=True)
class ScenarioSpec:
    """A labelled set of parameter overrides applied to a base point."""

    base: ModelParams
    overrides: dict[str, float]
    label: str

    def params(self) -> ModelParams:
        return self.base.replace(**self.overrides)


@dataclass(frozen=True)
class ScenarioComparison:
    """Six indices per scenario plus absolute/percent deltas vs the base."""

    rows: list[dict] = field(default_factory=list)

    def to_csv(self, destination) -> None:
        header = (
            ["label"]
            + list(INDEX_IDS)
            + [f"delta_{i}" for i in INDEX_IDS]
            + [f"pct_{i}" for i in INDEX_IDS]
        )
        with open(destination, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in self.rows:
                cells = [row["label"]]
                cells += [repr(row["indices"][i]) for i in INDEX_IDS]
                cells += [repr(row["delta"][i]) for i in INDEX_IDS]
                cells += ["" if row["pct"][i] is None else repr(row["pct"][i])
                          for i in INDEX_IDS]
                fh.write(",".join(cells) + "\n")

    def to_dict(self) -> dict:
        return {"scenarios": self.rows}


def compare_scenarios(
    base: ModelParams,
    scenarios: list[ScenarioSpec],
    f0,
    horizon: TimeGrid | None = None,
    tol: float = 1e-8,
) -> ScenarioComparison:
    """Evaluate every scenario against a freshly simulated base row."""
    base_idx = compute_indices(base, make_initial_state(base, *f0), horizon, tol)
    rows = [{
        "label": "base",
        "indices": {i: float(base_idx[i]) for i in INDEX_IDS},
        "delta": {i: 0.0 for i in INDEX_IDS},
        "pct": {i: 0.0 for i in INDEX_IDS},
    }]
    for spec in scenarios:
        params = spec.params()
        violations = validate_params(params)
        if violations:
            raise AnalysisError(f"scenario {spec.label!r} is infeasible: " + "; ".join(violations))
        idx = compute_indices(params, make_initial_state(params, *f0), horizon, tol)
        deltas = {i: float(idx[i] - base_idx[i]) for i in INDEX_IDS}
        pct = {
            i: (None if base_idx[i] == 0 else float(100.0 * deltas[i] / base_idx[i]))
            for i in INDEX_IDS
        }
        rows.append({
            "label": spec.label,
            "indices": {i: float(idx[i]) for i in INDEX_IDS},
            "delta": deltas,
            "pct": pct,
        })
    return ScenarioComparison(rows=rows)


# configuration plumbing


def _load_config(path: str | None) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                cp.read_file(fh)
        except FileNotFoundError:
            raise ParseError(f"config file not found: {path}") from None
        except configparser.Error as exc:
            raise ParseError(f"malformed config file {path}: {exc}") from None
    return cp


def _get(cp, section, key, flag_value, default, cast):
    if flag_value is not None:
        return flag_value
    if cp.has_option(section, key):
        raw = cp.get(section, key)
        try:
            return cast(raw)
        except ValueError:
            raise ParseError(f"config [{section}] {key} = {raw!r}: not a valid {cast.__name__}") from None
    return default


def _params_from_config(cp) -> tuple[ModelParams, tuple[float, float, float]]:
    if not cp.has_section("params"):
        raise ParseError("no parameter source: provide --fit-report or a config "
                         "file with a [params] section")
    values = {}
    for name in PARAM_IDS:
        if not cp.has_option("params", name):
            raise ParseError(f"config [params] is missing {name}")
        try:
            values[name] = cp.getfloat("params", name)
        except ValueError:
            raise ParseError(f"config [params] {name} is not a number") from None
    f0 = tuple(
        _get(cp, "params", key, None, 0.0, float)
        for key in ("f_pos0", "f_neu0", "f_neg0")
    )
    return ModelParams(**values), f0


def _params_from_fit_report(path) -> tuple[ModelParams, tuple[float, float, float]]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            report = json.load(fh)
    except FileNotFoundError:
        raise ParseError(f"fit report not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"fit report {path} is not valid JSON: {exc}") from None
    try:
        params = ModelParams(**{k: float(report["params"][k]) for k in PARAM_IDS})
        f0_map = report["initial_forwarders"]
        f0 = (float(f0_map["f_pos"]), float(f0_map["f_neu"]), float(f0_map["f_neg"]))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"fit report {path} is missing field {exc}") from None
    return params, f0


def _base_params(args, cp) -> tuple[ModelParams, tuple[float, float, float]]:
    if getattr(args, "fit_report", None):
        return _params_from_fit_report(args.fit_report)
    return _params_from_config(cp)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _horizon(cp, section, args) -> TimeGrid:
    t_end = _get(cp, section, "t_end", getattr(args, "t_end", None), 120.0, float)
    points = _get(cp, section, "points", getattr(args, "points", None), 481, int)
    if t_end <= 0:
        raise ParseError(f"[{section}] t_end must be positive, got {t_end}")
    if points < 2:
        raise ParseError(f"[{section}] points must be >= 2, got {points}")
    return TimeGrid.uniform(0.0, t_end, points)


# commands


def cmd_simulate(args) -> int:
    cp = _load_config(args.config)
    params, f0 = _base_params(args, cp)
    grid = _horizon(cp, "simulate", args)
    tol = _get(cp, "simulate", "tol", args.tol, 1e-8, float)

    traj = integrate(params, make_initial_state(params, *f0), grid, tol)
    out = _out_dir(args)
    export_trajectory(traj, out / "trajectory.csv")

    t = traj.times
    svgplot.line_chart(
        out / "instantaneous.svg",
        "Instantaneous forwarders by emotion", "time (sampling periods)", "active forwarders",
        [(f"F_{k}", t, traj.column(f"f_{k}")) for k in ("pos", "neu", "neg")],
    )
    svgplot.line_chart(
        out / "cumulative.svg",
        "Cumulative forwards by emotion", "time (sampling periods)", "cumulative forwards",
        [(f"C_{k}", t, traj.column(f"c_{k}")) for k in ("pos", "neu", "neg")],
    )
    print(f"wrote {out / 'trajectory.csv'} ({len(traj)} rows, {traj.n_steps} solver steps)")
    for k in ("pos", "neu", "neg"):
        print(f"  final C_{k} = {traj.column('c_' + k)[-1]:.1f}")
    return 0


def cmd_fit(args) -> int:
    cp = _load_config(args.config)
    dataset_spec = _get(cp, "fit", "dataset", args.dataset, "builtin:negative-event", str)
    dataset = load_dataset(dataset_spec)
    config = FitConfig(
        max_iterations=_get(cp, "fit", "max_iterations", args.max_iterations, 4000, int),
        convergence_tol=_get(cp, "fit", "convergence_tol", None, 1e-8, float),
        restarts=_get(cp, "fit", "restarts", args.restarts, 8, int),
        seed=_get(cp, "fit", "seed", args.seed, 1, int),
    )
    result = fit(dataset, config)

    out = _out_dir(args)
    _write_json(out / "fit_report.json", fit_report_dict(result, dataset))
    with open(out / "residuals.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,res_c_pos,res_c_neu,res_c_neg\n")
        for k, tk in enumerate(dataset.sample_times):
            fh.write(",".join([repr(float(tk))] + [
                repr(float(result.residual_series[j][k])) for j in range(3)
            ]) + "\n")

    dense = TimeGrid.uniform(
        float(dataset.sample_times[0]), float(dataset.sample_times[-1]), 361
    )
    traj = integrate(result.params, make_initial_state(result.params, *dataset.initial_forwarders()), dense)
    svgplot.line_chart(
        out / "fit_overlay.svg",
        "Observed vs fitted cumulative forwards", "time (sampling periods)", "cumulative forwards",
        [(f"fitted C_{k}", traj.times, traj.column(f"c_{k}")) for k in ("pos", "neu", "neg")],
        markers=[(f"observed C_{k}", dataset.sample_times, dataset.series(f"c_{k}"))
                 for k in ("pos", "neu", "neg")],
    )

    print(f"objective = {result.objective:.6g} after {result.iterations} iterations "
          f"({'converged' if result.converged else 'NOT converged'})")
    for name, rmse in zip(("c_pos", "c_neu", "c_neg"), result.per_series_rmse):
        print(f"  RMSE {name} = {rmse:.2f}")
    for name in PARAM_IDS:
        print(f"  {name} = {getattr(result.params, name):.6g}")
    print(f"wrote {out / 'fit_report.json'}, residuals.csv, fit_overlay.svg")
    if not result.converged:
        print(f"fit did not converge: {result.message}", file=sys.stderr)
        return 1
    return 0


def cmd_prcc(args) -> int:
    cp = _load_config(args.config)
    base, f0 = _base_params(args, cp)
    n = _get(cp, "prcc", "samples", args.samples, 1000, int)
    seed = _get(cp, "prcc", "seed", args.seed, 1, int)
    span = _get(cp, "prcc", "span", args.span, 0.5, float)
    workers = _get(cp, "prcc", "workers", args.workers, 0, int)
    if workers <= 0:
        workers = os.cpu_count() or 1
    horizon = _horizon(cp, "prcc", args)

    ranges = ParameterRanges.around(base, span)
    report = sensitivity_run(base, ranges, n, seed, f0, horizon, workers=workers)

    out = _out_dir(args)
    report.to_csv(out / "prcc.csv")
    _write_json(out / "prcc.json", report.to_dict())
    for index in INDEX_IDS:
        svgplot.bar_chart(
            out / f"prcc_{index}.svg",
            f"PRCC on {index}", "PRCC",
            list(PARAM_IDS),
            [report.value(p, index) for p in PARAM_IDS],
        )
    print(f"PRCC over {n} samples (seed {seed}, span +-{span:.0%}, "
          f"{report.n_failed} failed samples)")
    for p in PARAM_IDS:
        cells = "  ".join(f"{index}={report.value(p, index):+.3f}" for index in INDEX_IDS)
        print(f"  {p:>10}: {cells}")
    print(f"wrote {out / 'prcc.csv'}, prcc.json, prcc_<index>.svg")
    return 0


def _parse_grid(text: str) -> np.ndarray:
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ParseError(f"grid spec {text!r} must be lo:hi:n or a comma list")
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        if n < 1:
            raise ParseError(f"grid spec {text!r}: n must be >= 1")
        return np.linspace(lo, hi, n)
    return np.array([float(v) for v in text.split(",") if v.strip()], dtype=float)


def cmd_sweep(args) -> int:
    cp = _load_config(args.config)
    base, f0 = _base_params(args, cp)
    vary_raw = _get(cp, "sweep", "vary", args.vary, None, str)
    index = _get(cp, "sweep", "index", args.index, None, str)
    if not vary_raw or not index:
        raise ParseError("sweep needs 'vary' and 'index' (flags or [sweep] section)")
    vary = [v.strip() for v in vary_raw.split(",") if v.strip()]
    grids = []
    for name in vary:
        spec = _get(cp, "sweep", f"values_{name}", None, None, str)
        if args.values is not None and len(vary) == 1:
            spec = args.values
        if spec is None:
            raise ParseError(f"sweep is missing a value grid for {name} "
                             f"(--values or [sweep] values_{name})")
        grids.append(_parse_grid(spec))
    horizon = _horizon(cp, "sweep", args)

    values = sweep_grid(base, vary, grids, index, f0, horizon)

    out = _out_dir(args)
    with open(out / "sweep.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(vary + [index]) + "\n")
        for pos in np.ndindex(values.shape):
            coords = [repr(float(grids[k][pos[k]])) for k in range(len(vary))]
            v = values[pos]
            fh.write(",".join(coords + [repr(float(v)) if math.isfinite(v) else ""]) + "\n")
    _write_json(out / "sweep.json", {
        "vary": vary,
        "index": index,
        "grids": {name: [float(v) for v in g] for name, g in zip(vary, grids)},
        "values": np.where(np.isfinite(values), values, None).tolist(),
    })
    if len(vary) == 1:
        svgplot.line_chart(
            out / "sweep.svg",
            f"{index} vs {vary[0]}", vary[0], index,
            [(index, grids[0], values)],
        )
    print(f"swept {index} over {' x '.join(str(len(g)) for g in grids)} grid; "
          f"wrote {out / 'sweep.csv'}")
    return 0


def cmd_scenario(args) -> int:
    cp = _load_config(args.config)
    base, f0 = _base_params(args, cp)
    if not cp.has_section("scenario") or not cp.options("scenario"):
        raise ParseError("no scenarios: add a [scenario] section "
                         "(label = param=value, param=value)")
    scenarios = []
    for label in cp.options("scenario"):
        overrides = {}
        for item in cp.get("scenario", label).split(","):
            item = item.strip()
            if not item:
                continue
            if "=" not in item:
                raise ParseError(f"scenario {label!r}: override {item!r} is not param=value")
            name, _, value = item.partition("=")
            name = name.strip()
            if name not in PARAM_IDS:
                raise ParseError(f"scenario {label!r}: unknown parameter {name!r}")
            try:
                overrides[name] = float(value)
            except ValueError:
                raise ParseError(f"scenario {label!r}: {value!r} is not a number") from None
        scenarios.append(ScenarioSpec(base=base, overrides=overrides, label=label))
    horizon = _horizon(cp, "scenario", args)

    comparison = compare_scenarios(base, scenarios, f0, horizon)
    out = _out_dir(args)
    comparison.to_csv(out / "scenario.csv")
    _write_json(out / "scenario.json", comparison.to_dict())
    for row in comparison.rows:
        cells = "  ".join(f"{i}={row['indices'][i]:.1f}" for i in INDEX_IDS)
        print(f"  {row['label']:>16}: {cells}")
    print(f"wrote {out / 'scenario.csv'}, scenario.json")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="esfi",
        description="Emotion-split susceptible-forwarding-immune propagation model",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fit_report=True):
        p.add_argument("--config", help="INI configuration file")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        if fit_report:
            p.add_argument("--fit-report", help="fit_report.json to take base parameters from")

    p = sub.add_parser("simulate", help="integrate the model and export the trajectory")
    common(p)
    p.add_argument("--t-end", type=float, dest="t_end")
    p.add_argument("--points", type=int)
    p.add_argument("--tol", type=float)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="calibrate parameters against a dataset")
    common(p, fit_report=False)
    p.add_argument("--dataset", help="CSV path or builtin:negative-event")
    p.add_argument("--restarts", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-iterations", type=int, dest="max_iterations")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("prcc", help="Latin-hypercube PRCC sensitivity analysis")
    common(p)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--span", type=float, help="half-width of the sampling box, fraction of base")
    p.add_argument("--workers", type=int, help="parallel workers (0 = all processors)")
    p.add_argument("--t-end", type=float, dest="t_end")
    p.add_argument("--points", type=int)
    p.set_defaults(func=cmd_prcc)

    p = sub.add_parser("sweep", help="evaluate one index over a parameter grid")
    common(p)
    p.add_argument("--vary", help="parameter id(s), comma separated (max 3)")
    p.add_argument("--values", help="value grid for a single varied parameter (lo:hi:n or comma list)")
    p.add_argument("--index", help=f"index id, one of {', '.join(INDEX_IDS)}")
    p.add_argument("--t-end", type=float, dest="t_end")
    p.add_argument("--points", type=int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("scenario", help="compare intervention scenarios against the base")
    common(p)
    p.add_argument("--t-end", type=float, dest="t_end")
    p.add_argument("--points", type=int)
    p.set_defaults(func=cmd_scenario)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename or exc}", file=sys.stderr)
        return 2
    except EsfiError as exc:
        print(f"analysis failed: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
