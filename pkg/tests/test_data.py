import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from esfi import (
    DomainError,
    ModelParams,
    ObservedDataset,
    ParseError,
    TimeGrid,
    builtin_negative_event,
    export_trajectory,
    integrate,
    load_csv,
    load_dataset,
    make_initial_state,
)
from tests.conftest import REPORTED, TABLE_HEAD

GOOD_CSV = "t,c_pos,c_neu,c_neg\n0,1,2,3\n1,2,2,4\n2,2,3,9\n"


class TestBuiltin:
    def test_series_heads(self):
        ds = builtin_negative_event()
        assert ds.c_pos[:3].tolist() == [68, 165, 262]
        assert ds.c_neu[0] == 40 and ds.c_neg[0] == 265

    def test_neutral_plateau(self):
        ds = builtin_negative_event()
        assert np.all(ds.c_neu[20:28] == 658)

    def test_sample_count_and_gap(self):
        ds = builtin_negative_event()
        assert len(ds) == 29
        assert ds.sample_times[:28].tolist() == list(range(28))
        assert ds.sample_times[-1] == 60
        assert ds.has_gap()

    def test_last_consecutive_row(self):
        ds = builtin_negative_event()
        assert ds.c_neg[27] == 3496
        assert ds.c_pos[-1] == 1163 and ds.c_neu[-1] == 668 and ds.c_neg[-1] == 3573

    def test_initial_forwarders(self):
        assert builtin_negative_event().initial_forwarders() == TABLE_HEAD

    def test_load_dataset_spec(self):
        assert len(load_dataset("builtin:negative-event")) == 29
        with pytest.raises(ParseError):
            load_dataset("builtin:positive-event")


class TestObservedDataset:
    def test_too_short(self):
        with pytest.raises(DomainError):
            ObservedDataset(c_pos=[1, 2], c_neu=[1, 2], c_neg=[1, 2], sample_times=[0, 1])

    def test_decreasing_series(self):
        with pytest.raises(DomainError, match="non-decreasing"):
            ObservedDataset(c_pos=[3, 2, 4], c_neu=[1, 1, 1], c_neg=[1, 1, 1],
                            sample_times=[0, 1, 2])

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            ObservedDataset(c_pos=[1, 2, 3], c_neu=[1, 2], c_neg=[1, 2, 3],
                            sample_times=[0, 1, 2])


class TestLoadCsv:
    def test_well_formed(self):
        ds = load_csv(io.StringIO(GOOD_CSV))
        assert len(ds) == 3
        assert ds.c_neg.tolist() == [3, 4, 9]

    def test_bytes_and_crlf(self):
        ds = load_csv(io.BytesIO(GOOD_CSV.replace("\n", "\r\n").encode()))
        assert len(ds) == 3

    def test_path(self, tmp_path):
        path = tmp_path / "ds.csv"
        path.write_text(GOOD_CSV)
        assert len(load_csv(path)) == 3

    def test_decreasing_cumulative(self):
        text = "t,c_pos,c_neu,c_neg\n0,1,2,9\n1,2,2,8\n2,3,3,9\n"
        with pytest.raises(ParseError, match=r"row 3.*c_neg"):
            load_csv(io.StringIO(text))

    def test_gap_in_t(self):
        text = "t,c_pos,c_neu,c_neg\n0,1,2,3\n2,2,2,4\n3,2,3,9\n"
        with pytest.raises(ParseError, match="consecutive"):
            load_csv(io.StringIO(text))

    def test_non_numeric_cell(self):
        text = "t,c_pos,c_neu,c_neg\n0,1,2,3\n1,x,2,4\n2,2,3,9\n"
        with pytest.raises(ParseError, match=r"row 2.*c_pos"):
            load_csv(io.StringIO(text))

    def test_missing_column(self):
        with pytest.raises(ParseError, match="header"):
            load_csv(io.StringIO("t,c_pos,c_neu\n0,1,2\n"))

    def test_empty(self):
        with pytest.raises(ParseError):
            load_csv(io.StringIO(""))

    def test_table_transcription(self):
        ds = builtin_negative_event()
        rows = ["t,c_pos,c_neu,c_neg"]
        for k in range(28):  # consecutive block only
            rows.append(f"{k},{ds.c_pos[k]:.0f},{ds.c_neu[k]:.0f},{ds.c_neg[k]:.0f}")
        parsed = load_csv(io.StringIO("\n".join(rows) + "\n"))
        assert parsed.c_pos[0] == 68
        assert parsed.c_neg[27] == 3496


@given(
    row=st.integers(min_value=0, max_value=2),
    column=st.integers(min_value=1, max_value=3),
    bump=st.floats(min_value=0.5, max_value=50),
)
@settings(max_examples=60, deadline=None)
def test_loader_rejects_corruptions(row, column, bump):
    # lowering any cumulative cell below its predecessor, or shifting any t,
    # must be rejected
    cells = [line.split(",") for line in GOOD_CSV.strip().splitlines()]
    header, data = cells[0], cells[1:]
    value = float(data[row][column])
    prev = float(data[row - 1][column]) if row > 0 else 0.0
    data[row][column] = repr(prev - bump) if row > 0 else repr(value - max(bump, value + 1))
    text = "\n".join([",".join(header)] + [",".join(r) for r in data])
    with pytest.raises(ParseError):
        load_csv(io.StringIO(text))


@given(shift=st.integers(min_value=1, max_value=5), row=st.integers(min_value=0, max_value=2))
@settings(max_examples=30, deadline=None)
def test_loader_rejects_time_shifts(shift, row):
    cells = [line.split(",") for line in GOOD_CSV.strip().splitlines()]
    header, data = cells[0], cells[1:]
    data[row][0] = str(int(data[row][0]) + shift)
    text = "\n".join([",".join(header)] + [",".join(r) for r in data])
    with pytest.raises(ParseError):
        load_csv(io.StringIO(text))


class TestExportTrajectory:
    def make_traj(self, n=5):
        init = make_initial_state(REPORTED, *TABLE_HEAD)
        return integrate(REPORTED, init, TimeGrid.uniform(0, 10, n))

    def test_round_trip_exact(self, tmp_path):
        traj = self.make_traj(11)
        path = tmp_path / "traj.csv"
        export_trajectory(traj, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "t,s,f_pos,f_neu,f_neg,i,c_pos,c_neu,c_neg"
        parsed = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
        assert np.array_equal(parsed[:, 0], traj.times)
        assert np.array_equal(parsed[:, 1:], traj.states)

    def test_single_state_file(self, tmp_path):
        grid = TimeGrid(0.0, 1.0, [1.0])
        init = make_initial_state(REPORTED, *TABLE_HEAD)
        traj = integrate(REPORTED, init, grid)
        buf = io.StringIO()
        export_trajectory(traj, buf)
        assert len(buf.getvalue().strip().splitlines()) == 2

    def test_export_then_load_cumulative_columns(self, tmp_path):
        # integer sample times make the exported C columns a loadable dataset
        init = make_initial_state(REPORTED, *TABLE_HEAD)
        traj = integrate(REPORTED, init, TimeGrid(0.0, 10.0, np.arange(11.0)))
        path = tmp_path / "traj.csv"
        export_trajectory(traj, path)
        lines = path.read_text().strip().splitlines()[1:]
        out = ["t,c_pos,c_neu,c_neg"]
        for line in lines:
            f = line.split(",")
            out.append(",".join([repr(int(float(f[0])))] + f[6:9]))
        ds = load_csv(io.StringIO("\n".join(out)))
        assert np.array_equal(ds.c_pos, traj.column("c_pos"))
        assert np.array_equal(ds.c_neg, traj.column("c_neg"))
