import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from esfi import (
    DomainError,
    ModelParams,
    PopulationState,
    conservation_total,
    make_initial_state,
    rhs,
    validate_params,
)
from tests.conftest import REPORTED, TABLE_HEAD


def zero_params(**overrides):
    base = {name: 0.0 for name in ModelParams.__dataclass_fields__}
    base.update(overrides)
    return ModelParams(**base)


class TestRhs:
    def test_hand_arithmetic(self):
        # beta*S*F_pos = 10; coefficients split it 0.5/0.1/0.05 and the
        # remainder plus alpha outflow goes to I
        params = zero_params(beta=0.001, p_plus=0.5, p_zero=0.1, p_minus=0.05, alpha_pos=0.2)
        state = PopulationState(s=1000, f_pos=10, f_neu=0, f_neg=0, i=0,
                                c_pos=0, c_neu=0, c_neg=0)
        d = rhs(state, params)
        assert d.s == pytest.approx(-10.0, abs=1e-12)
        assert d.f_pos == pytest.approx(3.0, abs=1e-12)
        assert d.f_neu == pytest.approx(1.0, abs=1e-12)
        assert d.f_neg == pytest.approx(0.5, abs=1e-12)
        assert d.i == pytest.approx(5.5, abs=1e-12)
        assert d.c_pos == pytest.approx(5.0, abs=1e-12)
        assert d.c_neu == pytest.approx(1.0, abs=1e-12)
        assert d.c_neg == pytest.approx(0.5, abs=1e-12)
        assert d.s + d.f_pos + d.f_neu + d.f_neg + d.i == pytest.approx(0.0, abs=1e-12)

    def test_no_forwarders_halts(self):
        params = zero_params(beta=0.01, p_plus=0.3, p_zero=0.1, p_minus=0.1,
                             alpha_pos=1.0, alpha_neu=1.0, alpha_neg=1.0)
        state = PopulationState(s=500, f_pos=0, f_neu=0, f_neg=0, i=20,
                                c_pos=5, c_neu=6, c_neg=7)
        d = rhs(state, params)
        assert all(getattr(d, f) == 0.0 for f in
                   ("s", "f_pos", "f_neu", "f_neg", "i", "c_pos", "c_neu", "c_neg"))

    def test_no_susceptibles_decays_only(self):
        params = zero_params(beta=0.01, p_plus=0.3, alpha_pos=0.5, alpha_neu=0.6, alpha_neg=0.7)
        state = PopulationState(s=0, f_pos=10, f_neu=20, f_neg=30, i=0,
                                c_pos=10, c_neu=20, c_neg=30)
        d = rhs(state, params)
        assert d.s == 0.0
        assert d.f_pos == pytest.approx(-5.0)
        assert d.f_neu == pytest.approx(-12.0)
        assert d.f_neg == pytest.approx(-21.0)
        assert d.i == pytest.approx(38.0)
        assert d.c_pos == d.c_neu == d.c_neg == 0.0

    def test_non_finite_state_rejected(self):
        params = zero_params(beta=0.001)
        state = PopulationState(s=math.nan, f_pos=1, f_neu=0, f_neg=0, i=0,
                                c_pos=0, c_neu=0, c_neg=0)
        with pytest.raises(DomainError, match="'s'"):
            rhs(state, params)

    def test_invalid_params_rejected(self):
        state = PopulationState(1, 1, 1, 1, 1, 1, 1, 1)
        with pytest.raises(DomainError, match="p_plus"):
            rhs(state, zero_params(p_plus=0.6, p_zero=0.3))


feasible_params = st.builds(
    ModelParams,
    beta=st.floats(0, 1e-2),
    p_plus=st.floats(0, 0.4),
    p_zero=st.floats(0, 0.25),
    p_minus=st.floats(0, 0.3),
    alpha_pos=st.floats(0, 3),
    alpha_neu=st.floats(0, 3),
    alpha_neg=st.floats(0, 3),
    s_zero=st.floats(0, 1e6),
)

states = st.builds(
    PopulationState,
    s=st.floats(0, 1e6), f_pos=st.floats(0, 1e5), f_neu=st.floats(0, 1e5),
    f_neg=st.floats(0, 1e5), i=st.floats(0, 1e6),
    c_pos=st.floats(0, 1e5), c_neu=st.floats(0, 1e5), c_neg=st.floats(0, 1e5),
)


class TestRhsProperties:
    @given(feasible_params, states)
    @settings(max_examples=200, deadline=None)
    def test_compartments_conserved(self, params, state):
        d = rhs(state, params)
        parts = (d.s, d.f_pos, d.f_neu, d.f_neg, d.i)
        scale = max(abs(p) for p in parts)
        assert abs(sum(parts)) <= 16 * np.finfo(float).eps * max(scale, 1.0)

    @given(feasible_params, states)
    @settings(max_examples=200, deadline=None)
    def test_cumulative_inflow_bounded_by_exposures(self, params, state):
        # every exposure that forwards is counted once; the remainder goes
        # straight to I, so sum(dC) <= -dS always
        d = rhs(state, params)
        slack = 1e-12 * max(abs(d.s), 1.0)
        assert d.c_pos + d.c_neu + d.c_neg <= -d.s + slack

    def test_cumulative_inflow_equality_at_saturation(self):
        # with p_plus + p_zero + p_minus = 1 and p_plus + 2 p_zero = 1 no
        # exposure goes directly to I
        params = zero_params(beta=1e-3, p_plus=0.5, p_zero=0.25, p_minus=0.25)
        state = PopulationState(s=100, f_pos=3, f_neu=4, f_neg=5, i=0,
                                c_pos=0, c_neu=0, c_neg=0)
        d = rhs(state, params)
        assert d.c_pos + d.c_neu + d.c_neg == pytest.approx(-d.s, rel=1e-14)

    @given(st.floats(1e-3, 1e3))
    @settings(max_examples=50, deadline=None)
    def test_exposure_scaling_invariance(self, lam):
        # scaling every F by lam and beta by 1/lam keeps dS unchanged
        base = zero_params(beta=1e-4, p_plus=0.2, p_zero=0.05, p_minus=0.03,
                           alpha_pos=0.5, alpha_neu=0.5, alpha_neg=0.5)
        state = PopulationState(s=1e4, f_pos=10, f_neu=20, f_neg=30, i=0,
                                c_pos=0, c_neu=0, c_neg=0)
        scaled_params = base.replace(beta=base.beta / lam)
        scaled_state = PopulationState(
            s=state.s, f_pos=state.f_pos * lam, f_neu=state.f_neu * lam,
            f_neg=state.f_neg * lam, i=0, c_pos=0, c_neu=0, c_neg=0)
        assert rhs(scaled_state, scaled_params).s == pytest.approx(rhs(state, base).s, rel=1e-12)


class TestValidateParams:
    def test_reported_values_are_feasible(self):
        assert validate_params(REPORTED) == []

    def test_coupled_constraint_violation(self):
        violations = validate_params(zero_params(p_plus=0.6, p_zero=0.3))
        assert any("p_plus + 2*p_zero" in v for v in violations)

    def test_all_zero_is_admissible(self):
        assert validate_params(zero_params()) == []

    def test_negative_field(self):
        violations = validate_params(zero_params(beta=-1e-4))
        assert any("beta" in v for v in violations)

    def test_three_way_sum_violation(self):
        violations = validate_params(zero_params(p_plus=0.5, p_zero=0.2, p_minus=0.4))
        assert any("p_plus + p_zero + p_minus" in v for v in violations)

    def test_non_finite(self):
        violations = validate_params(zero_params(alpha_pos=math.inf))
        assert any("alpha_pos" in v for v in violations)


class TestConservationTotal:
    def test_simple_sum(self):
        assert conservation_total(PopulationState(5, 1, 2, 3, 4, 9, 9, 9)) == 15

    def test_zero(self):
        assert conservation_total(PopulationState(0, 0, 0, 0, 0, 0, 0, 0)) == 0

    def test_initial_state_from_dataset_head(self):
        params = REPORTED.replace(s_zero=100000.0)
        init = make_initial_state(params, *TABLE_HEAD)
        assert conservation_total(init) == 100373.0


class TestMakeInitialState:
    def test_counters_anchor_to_initial_forwarders(self):
        init = make_initial_state(REPORTED.replace(s_zero=100000.0), *TABLE_HEAD)
        assert (init.c_pos, init.c_neu, init.c_neg) == TABLE_HEAD
        assert (init.f_pos, init.f_neu, init.f_neg) == TABLE_HEAD
        assert init.i == 0.0
        assert init.s == 100000.0

    def test_all_zero(self):
        init = make_initial_state(zero_params(), 0, 0, 0)
        assert init.as_array().tolist() == [0.0] * 8

    def test_total_population(self):
        init = make_initial_state(zero_params(s_zero=100.0), 1, 0, 0)
        assert conservation_total(init) == 101.0

    def test_negative_input_rejected(self):
        with pytest.raises(DomainError, match="f_neu0"):
            make_initial_state(zero_params(), 1, -2, 3)


class TestTypes:
    def test_state_array_round_trip(self):
        state = PopulationState(1, 2, 3, 4, 5, 6, 7, 8)
        assert PopulationState.from_array(state.as_array()) == state

    def test_from_array_shape_check(self):
        with pytest.raises(DomainError):
            PopulationState.from_array(np.zeros(7))

    def test_replace_unknown_field(self):
        with pytest.raises(DomainError, match="unknown parameter"):
            REPORTED.replace(gamma=1.0)
