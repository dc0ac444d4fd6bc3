"""Observed-dataset container, CSV input/output and the bundled corpus.

Datasets are per-emotion cumulative forwarding counts sampled at integer
multiples of a fixed interval (30 minutes for the bundled series).  The CSV
format is ``t,c_pos,c_neu,c_neg`` with consecutive integer ``t`` starting
at 0.  The bundled negative-tone event (a quarantine-refusal incident on
Sina microblog that drew predominantly negative forwards) has a publication
gap: samples 0..27 plus an isolated final sample at t=60, and the dataset
records those indices explicitly so nothing is interpolated into the gap.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParseError
from .integrator import Trajectory

CSV_HEADER = ("t", "c_pos", "c_neu", "c_neg")
SERIES_IDS = ("c_pos", "c_neu", "c_neg")


@dataclass(frozen=True)
class ObservedDataset:
    """Cumulative forwarding counts per emotion at known sample indices.

    ``sample_times`` are the indices k at which the series were observed
    (strictly increasing integers; non-consecutive when the source elides
    rows).  ``sample_interval`` is the physical length of one index step,
    metadata only: the model works in index units.
    """

    c_pos: np.ndarray
    c_neu: np.ndarray
    c_neg: np.ndarray
    sample_times: np.ndarray
    sample_interval: float = 1.0
    provenance: str = ""

    def __post_init__(self):
        for name in ("c_pos", "c_neu", "c_neg", "sample_times"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        n = len(self.sample_times)
        if n < 3:
            raise DomainError("a dataset needs at least 3 samples")
        for name in SERIES_IDS:
            series = getattr(self, name)
            if series.shape != (n,):
                raise DomainError(f"series {name} length {series.shape} != {n} sample times")
            if not np.all(np.isfinite(series)):
                raise DomainError(f"series {name} contains non-finite values")
            if np.any(series < 0):
                raise DomainError(f"series {name} contains negative values")
            if np.any(np.diff(series) < 0):
                raise DomainError(f"series {name} is not non-decreasing")
        if np.any(np.diff(self.sample_times) <= 0):
            raise DomainError("sample_times must be strictly increasing")
        if not self.sample_interval > 0:
            raise DomainError("sample_interval must be positive")

    def __len__(self) -> int:
        return len(self.sample_times)

    def series(self, name: str) -> np.ndarray:
        if name not in SERIES_IDS:
            raise DomainError(f"unknown series {name!r}")
        return getattr(self, name)

    def initial_forwarders(self) -> tuple[float, float, float]:
        """First row of the three series, the model's F_em(0) anchor."""
        return float(self.c_pos[0]), float(self.c_neu[0]), float(self.c_neg[0])

    def total_final(self) -> float:
        return float(self.c_pos[-1] + self.c_neu[-1] + self.c_neg[-1])

    def has_gap(self) -> bool:
        return bool(np.any(np.diff(self.sample_times) > 1))


def load_csv(source) -> ObservedDataset:
    """Parse a ``t,c_pos,c_neu,c_neg`` CSV into a validated dataset.

    ``source`` may be a path, a text stream, or a bytes stream (UTF-8).
    ``t`` must run 0,1,2,... without gaps; cumulative columns must be
    non-decreasing.  Violations raise ParseError naming row and column.
    """
    if isinstance(source, (str,)) or hasattr(source, "__fspath__"):
        with open(source, "rb") as fh:
            raw = fh.read()
    else:
        raw = source.read()
    if isinstance(raw, bytes):
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"not valid UTF-8: {exc}") from exc
    else:
        text = raw

    lines = [ln.strip() for ln in io.StringIO(text)]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ParseError("empty file")
    header = tuple(cell.strip() for cell in lines[0].split(","))
    if header != CSV_HEADER:
        raise ParseError(f"expected header {','.join(CSV_HEADER)!r}, got {lines[0]!r}", row=1)

    t_vals: list[int] = []
    series: dict[str, list[float]] = {name: [] for name in SERIES_IDS}
    for row_no, line in enumerate(lines[1:], start=2):
        cells = [cell.strip() for cell in line.split(",")]
        if len(cells) != 4:
            raise ParseError(f"expected 4 cells, got {len(cells)}", row=row_no)
        try:
            t = float(cells[0])
        except ValueError:
            raise ParseError(f"non-numeric cell {cells[0]!r}", row=row_no, column="t") from None
        if t != int(t):
            raise ParseError(f"t must be an integer sample index, got {cells[0]!r}",
                             row=row_no, column="t")
        expected = len(t_vals)
        if int(t) != expected:
            raise ParseError(f"t must be consecutive from 0; expected {expected}, got {int(t)}",
                             row=row_no, column="t")
        t_vals.append(int(t))
        for name, cell in zip(SERIES_IDS, cells[1:]):
            try:
                value = float(cell)
            except ValueError:
                raise ParseError(f"non-numeric cell {cell!r}", row=row_no, column=name) from None
            if not math.isfinite(value):
                raise ParseError(f"non-finite value {cell!r}", row=row_no, column=name)
            if value < 0:
                raise ParseError(f"negative count {cell!r}", row=row_no, column=name)
            prev = series[name][-1] if series[name] else None
            if prev is not None and value < prev:
                raise ParseError(
                    f"cumulative series decreases ({prev} -> {value})", row=row_no, column=name
                )
            series[name].append(value)

    if len(t_vals) < 3:
        raise ParseError(f"need at least 3 data rows, got {len(t_vals)}")
    return ObservedDataset(
        c_pos=series["c_pos"], c_neu=series["c_neu"], c_neg=series["c_neg"],
        sample_times=t_vals,
    )


# Bundled negative-tone event: cumulative forwards per emotion every 30
# minutes; published rows are t=0..27 and t=60 (the span 28..59 was elided
# at the source and is represented by the index gap, never interpolated).
_NEG_T = list(range(28)) + [60]
_NEG_C_POS = [
    68, 165, 262, 355, 454, 545, 634, 757, 866, 963,
    1035, 1080, 1095, 1106, 1112, 1116, 1121, 1126, 1130, 1132,
    1132, 1134, 1135, 1136, 1136, 1137, 1137, 1138,
    1163,
]
_NEG_C_NEU = [
    40, 111, 181, 251, 305, 351, 403, 469, 529, 576,
    613, 627, 631, 634, 635, 638, 644, 646, 650, 654,
    658, 658, 658, 658, 658, 658, 658, 658,
    668,
]
_NEG_C_NEG = [
    265, 639, 950, 1204, 1470, 1711, 2015, 2337, 2629, 2921,
    3147, 3270, 3323, 3350, 3374, 3393, 3421, 3437, 3461, 3472,
    3481, 3484, 3489, 3491, 3491, 3493, 3493, 3496,
    3573,
]

BUILTIN_DATASETS = ("negative-event",)


def builtin_negative_event() -> ObservedDataset:
    """The bundled negative-tone microblog event (29 published samples)."""
    return ObservedDataset(
        c_pos=_NEG_C_POS, c_neu=_NEG_C_NEU, c_neg=_NEG_C_NEG,
        sample_times=_NEG_T,
        sample_interval=1.0,
        provenance=(
            "negative-tone quarantine-refusal event, Sina microblog; "
            "30-minute sampling, rows 28..59 unpublished"
        ),
    )


def load_dataset(spec: str) -> ObservedDataset:
    """Resolve ``builtin:<name>`` or a CSV path into a dataset."""
    if spec.startswith("builtin:"):
        name = spec[len("builtin:"):]
        if name == "negative-event":
            return builtin_negative_event()
        raise ParseError(f"unknown builtin dataset {name!r}; available: {BUILTIN_DATASETS}")
    return load_csv(spec)


def export_trajectory(traj: Trajectory, destination) -> None:
    """Write a trajectory as CSV (full round-trippable precision).

    Header ``t,s,f_pos,f_neu,f_neg,i,c_pos,c_neu,c_neg``, one row per
    output time.  ``destination`` may be a path or a text stream.
    """
    own = False
    if isinstance(destination, str) or hasattr(destination, "__fspath__"):
        fh = open(destination, "w", encoding="utf-8", newline="\n")
        own = True
    else:
        fh = destination
    try:
        fh.write("t,s,f_pos,f_neu,f_neg,i,c_pos,c_neu,c_neg\n")
        for t, row in zip(traj.times, traj.states):
            cells = [repr(float(t))] + [repr(float(v)) for v in row]
            fh.write(",".join(cells) + "\n")
    finally:
        if own:
            fh.close()
