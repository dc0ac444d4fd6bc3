import numpy as np
import pytest
from scipy.integrate import solve_ivp

from esfi import (
    DomainError,
    Emotion,
    IntegrationError,
    ModelParams,
    NotYetStableError,
    PopulationState,
    TimeGrid,
    Trajectory,
    conservation_total,
    integrate,
    make_initial_state,
    peak_instantaneous,
    stable_cumulative,
)
from tests.conftest import REPORTED, TABLE_HEAD


def zero_params(**overrides):
    base = {name: 0.0 for name in ModelParams.__dataclass_fields__}
    base.update(overrides)
    return ModelParams(**base)


def reported_trajectory(t_end=120.0, n=241, tol=1e-8):
    init = make_initial_state(REPORTED, *TABLE_HEAD)
    return integrate(REPORTED, init, TimeGrid.uniform(0.0, t_end, n), tol)


class TestTimeGrid:
    def test_uniform(self):
        grid = TimeGrid.uniform(0, 10, 11)
        assert grid.output_times.tolist() == list(range(11))

    @pytest.mark.parametrize("bad", [
        dict(t_start=5, t_end=5, output_times=[5]),
        dict(t_start=0, t_end=10, output_times=[0, 11]),
        dict(t_start=0, t_end=10, output_times=[3, 2]),
        dict(t_start=0, t_end=10, output_times=[2, 2]),
        dict(t_start=0, t_end=10, output_times=[]),
    ])
    def test_invalid_grids(self, bad):
        with pytest.raises(DomainError):
            TimeGrid(**bad)


class TestIntegrate:
    def test_zero_field_is_constant(self):
        init = PopulationState(100, 5, 6, 7, 8, 5, 6, 7)
        traj = integrate(zero_params(), init, TimeGrid.uniform(0, 50, 26))
        assert np.array_equal(traj.states, np.tile(init.as_array(), (26, 1)))

    def test_linear_decay_closed_form(self):
        # beta=0 decouples: f_pos(t) = 100 exp(-t)
        params = zero_params(alpha_pos=1.0)
        init = PopulationState(0, 100, 0, 0, 0, 100, 0, 0)
        grid = TimeGrid.uniform(0, 10, 101)
        traj = integrate(params, init, grid, tol=1e-8)
        expected = 100.0 * np.exp(-grid.output_times)
        assert np.max(np.abs(traj.column("f_pos") - expected)) < 1e-4
        assert np.max(np.abs(traj.column("i") - (100.0 - expected))) < 1e-4

    def test_against_independent_solver(self):
        # reference route: scipy's own RK45 at much tighter tolerance
        init = make_initial_state(REPORTED, *TABLE_HEAD)
        grid = TimeGrid.uniform(0, 60, 121)

        def reference_rhs(t, y):
            p = REPORTED
            ep, en, eg = p.beta * y[0] * y[1], p.beta * y[0] * y[2], p.beta * y[0] * y[3]
            i_pos = p.p_plus * ep + p.p_zero * en + p.p_minus * eg
            i_neu = p.p_zero * ep + p.p_plus * en + p.p_zero * eg
            i_neg = p.p_minus * ep + p.p_zero * en + p.p_plus * eg
            return [
                -(ep + en + eg),
                i_pos - p.alpha_pos * y[1],
                i_neu - p.alpha_neu * y[2],
                i_neg - p.alpha_neg * y[3],
                (1 - p.p_plus - p.p_minus - p.p_zero) * (ep + eg)
                + (1 - p.p_plus - 2 * p.p_zero) * en
                + p.alpha_pos * y[1] + p.alpha_neu * y[2] + p.alpha_neg * y[3],
                i_pos, i_neu, i_neg,
            ]

        ref = solve_ivp(reference_rhs, (0, 60), init.as_array(),
                        t_eval=grid.output_times, rtol=1e-11, atol=1e-8)
        traj = integrate(REPORTED, init, grid, tol=1e-10)
        scale = np.abs(ref.y).max()
        assert np.max(np.abs(traj.states - ref.y.T)) / scale < 1e-8

    def test_conservation(self):
        traj = reported_trajectory()
        totals = traj.conservation_totals()
        assert np.max(np.abs(totals - totals[0])) / totals[0] <= 1e-8

    def test_step_halving_consistency(self):
        tol = 1e-6
        init = make_initial_state(REPORTED, *TABLE_HEAD)
        grid = TimeGrid.uniform(0, 60, 61)
        coarse = integrate(REPORTED, init, grid, tol)
        fine = integrate(REPORTED, init, grid, tol / 16)
        scale = conservation_total(init)
        assert np.max(np.abs(coarse.states - fine.states)) / scale <= 100 * tol

    def test_monotone_columns(self):
        traj = reported_trajectory()
        total = traj.conservation_totals()[0]
        slack = 10 * 1e-8 * total
        assert np.all(np.diff(traj.column("s")) <= slack)
        assert np.all(np.diff(traj.column("i")) >= -slack)
        for c in ("c_pos", "c_neu", "c_neg"):
            assert np.all(np.diff(traj.column(c)) >= -slack)

    def test_nonnegative_states(self):
        traj = reported_trajectory(t_end=400.0, n=801)
        assert traj.states.min() >= 0.0

    def test_dense_output_independent_of_grid(self):
        # adding output times must not change the values at shared times:
        # sampling rides on dense output and never alters the step sequence
        init = make_initial_state(REPORTED, *TABLE_HEAD)
        sparse = integrate(REPORTED, init, TimeGrid.uniform(0, 60, 7))
        dense = integrate(REPORTED, init, TimeGrid.uniform(0, 60, 61))
        shared = np.isin(dense.times, sparse.times)
        assert np.array_equal(dense.states[shared], sparse.states)

    def test_invalid_inputs(self):
        init = make_initial_state(REPORTED, *TABLE_HEAD)
        grid = TimeGrid.uniform(0, 10, 11)
        with pytest.raises(DomainError):
            integrate(REPORTED.replace(beta=-1.0), init, grid)
        with pytest.raises(DomainError):
            integrate(REPORTED, PopulationState(-5, 0, 0, 0, 0, 0, 0, 0), grid)
        with pytest.raises(DomainError):
            integrate(REPORTED, init, grid, tol=0.0)

    def test_backend_choice_is_exposed(self):
        traj = reported_trajectory(n=31)
        assert traj.backend_name in ("cython", "python")
        assert traj.n_steps > 0


class TestPeakInstantaneous:
    def test_decay_peaks_at_start(self):
        params = zero_params(alpha_pos=1.0)
        init = PopulationState(0, 100, 0, 0, 0, 100, 0, 0)
        traj = integrate(params, init, TimeGrid.uniform(0, 10, 51))
        assert peak_instantaneous(traj, Emotion.POSITIVE) == (0.0, 100.0)

    def test_constant_zero(self):
        traj = integrate(zero_params(), PopulationState(10, 0, 0, 0, 0, 0, 0, 0),
                         TimeGrid.uniform(2, 8, 13))
        assert peak_instantaneous(traj, Emotion.NEUTRAL) == (2.0, 0.0)

    def test_interior_peak_matches_brute_force(self):
        traj = reported_trajectory(n=601)
        t_peak, value = peak_instantaneous(traj, Emotion.NEGATIVE)
        assert traj.times[0] < t_peak < traj.times[-1]
        brute = reported_trajectory(n=6001)
        t_b, v_b = peak_instantaneous(brute, Emotion.NEGATIVE)
        # value mismatch is bounded by the coarse grid's sampling error,
        # ~ (dt^2 / 8) |f''| at the peak
        assert value == pytest.approx(v_b, rel=1e-3)
        assert t_peak == pytest.approx(t_b, abs=0.2)

    def test_empty_trajectory(self):
        traj = Trajectory(grid=TimeGrid.uniform(0, 1, 2), states=np.empty((0, 8)))
        with pytest.raises(DomainError):
            peak_instantaneous(traj, Emotion.POSITIVE)


class TestStableCumulative:
    def test_no_activity_returns_initial(self):
        traj = integrate(zero_params(), PopulationState(10, 0, 0, 0, 0, 3, 4, 5),
                         TimeGrid.uniform(0, 10, 11))
        assert stable_cumulative(traj, Emotion.NEGATIVE) == 5.0

    def test_pure_decay_adds_nothing(self):
        params = zero_params(alpha_neg=0.5)
        init = PopulationState(0, 0, 0, 100, 0, 0, 0, 100)
        traj = integrate(params, init, TimeGrid.uniform(0, 40, 81))
        assert stable_cumulative(traj, Emotion.NEGATIVE) == pytest.approx(100.0, abs=1e-6)

    def test_not_yet_stable(self):
        params = zero_params(alpha_neg=0.01)
        init = PopulationState(0, 0, 0, 100, 0, 0, 0, 100)
        traj = integrate(params, init, TimeGrid.uniform(0, 5, 11))
        with pytest.raises(NotYetStableError) as info:
            stable_cumulative(traj, Emotion.NEGATIVE)
        assert 0.9 < info.value.residual_fraction <= 1.0

    def test_emotion_scale_ordering(self, table_fit):
        result, _ = table_fit
        init = make_initial_state(result.params, *TABLE_HEAD)
        traj = integrate(result.params, init, TimeGrid.uniform(0, 120, 241))
        c_neg = stable_cumulative(traj, Emotion.NEGATIVE)
        c_pos = stable_cumulative(traj, Emotion.POSITIVE)
        c_neu = stable_cumulative(traj, Emotion.NEUTRAL)
        assert c_neg > c_pos > c_neu
