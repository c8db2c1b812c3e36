#!/usr/bin/env python3
"""
Tests for steady states, fixed-parameter evolution and adiabatic ramps
"""

import time

import numpy as np
import pytest
import scipy.linalg as la

from conftest import locked
from errors import DegenerateSteadyState, StepFailure, ValidationError
from lindblad import generator, maximally_mixed, pure_state, random_density_matrix, unvec, vec
from presets import get_preset
from solver import (
    TRAJECTORY_COLUMNS, RampSpec, SolverSettings, Trajectory, adiabatic_ramp, evolve,
    nullspace_steady_state, relaxation_time, spectral_gap, steady_state,
)

# fig1a at delta3 = delta4, oracle populations frozen to 1e-9
REGRESSION_POPULATIONS = [
    (0.0, 1, 0.9216333125),
    (20.0, 5, 0.9603060645),
]


class TestSteadyState:

    @pytest.mark.parametrize("delta3", [-40.0, -12.5, 0.0, 7.5, 20.0, 40.0])
    def test_matches_nullspace_oracle(self, fig1a_params, delta3):
        L = generator(locked(fig1a_params, delta3))
        result = steady_state(L)
        oracle = nullspace_steady_state(L)
        assert np.max(np.abs(result.state.matrix - oracle.matrix)) < 1e-9
        assert result.residual < 1e-10
        assert abs(np.sum(result.state.populations) - 1) < 1e-12

    @pytest.mark.parametrize("delta3, level, expected", REGRESSION_POPULATIONS)
    def test_regression_populations(self, fig1a_params, delta3, level, expected):
        L = generator(locked(fig1a_params, delta3))
        assert steady_state(L).state.populations[level - 1] == pytest.approx(expected, abs=1e-9)
        assert nullspace_steady_state(L).populations[level - 1] == pytest.approx(expected, abs=1e-9)

    def test_accepts_params(self, far_detuned):
        from_params = steady_state(far_detuned).state.matrix
        from_generator = steady_state(generator(far_detuned)).state.matrix
        np.testing.assert_array_equal(from_params, from_generator)

    @pytest.mark.parametrize("row", [(2, 2), (3, 3), (5, 5)])
    def test_replaced_row_is_irrelevant(self, far_detuned, row):
        reference = steady_state(far_detuned).state.matrix
        other = steady_state(far_detuned, replace_row=row).state.matrix
        assert np.max(np.abs(reference - other)) < 1e-10

    def test_resonant_point_stays_in_level_one(self, fig1a_params):
        populations = steady_state(locked(fig1a_params, 0.0)).state.populations
        assert populations[0] > 0.85
        assert populations[4] < 0.1

    def test_detuned_point_transfers_to_level_five(self, far_detuned):
        populations = steady_state(far_detuned).state.populations
        assert populations[4] > 0.9
        assert populations[0] < 0.08

    def test_transfer_needs_gamma25(self):
        preset = get_preset("fig1b")
        rho55 = [steady_state(preset.params.replace(gamma_25=g)).state.populations[4]
                 for g in preset.axis.values]
        assert rho55[0] < 0.05
        index = int(np.argmin(np.abs(np.asarray(preset.axis.values) - 0.05)))
        assert rho55[index] > 0.7
        assert np.all(np.diff(rho55) >= -1e-9)

    def test_mirror_configuration_traps_in_level_three(self, mirror_params):
        populations = steady_state(mirror_params).state.populations
        assert populations[2] > populations[4]

    def test_zero_drive_is_degenerate(self, zero_params):
        with pytest.raises(DegenerateSteadyState):
            steady_state(zero_params)

    def test_undriven_ground_manifold_is_degenerate(self, fig1a_params):
        with pytest.raises(DegenerateSteadyState) as info:
            steady_state(fig1a_params.replace(rabi=(0, 0, 0, 0)))
        assert info.value.exit_code == 11

    def test_gap_and_relaxation_time(self, far_detuned):
        L = generator(far_detuned)
        gap = spectral_gap(L)
        assert gap > 0
        assert relaxation_time(L) == pytest.approx(1 / gap)
        assert steady_state(L).gap == pytest.approx(gap)


class TestSolverSettings:

    def test_rejects_non_positive(self):
        with pytest.raises(ValidationError) as info:
            SolverSettings(residual_tolerance=0)
        assert info.value.field == "residual_tolerance"

    def test_rejects_bool(self):
        with pytest.raises(ValidationError):
            SolverSettings(ramp_step=True)


class TestEvolve:

    def test_single_channel_decay(self, zero_params):
        params = zero_params.replace(gamma_25=1.0)
        trajectory = evolve(pure_state(2), params, t_end=5.0, n_samples=11)
        t = trajectory.times
        np.testing.assert_allclose(trajectory.observables["rho22"], np.exp(-t), atol=1e-10)
        np.testing.assert_allclose(trajectory.observables["rho55"], 1 - np.exp(-t), atol=1e-10)
        assert trajectory.observables["t"].iloc[-1] == 5.0

    def test_relaxes_to_steady_state(self, far_detuned):
        L = generator(far_detuned)
        t_end = 30.0 / spectral_gap(L)
        trajectory = evolve(pure_state(1), far_detuned, t_end=t_end, n_samples=301)
        target = steady_state(L).state.matrix
        assert np.max(np.abs(trajectory.final.matrix - target)) < 1e-6

    def test_steady_state_is_stationary(self, far_detuned):
        rho = steady_state(far_detuned).state
        trajectory = evolve(rho, far_detuned, t_end=100.0, n_samples=21)
        assert np.max(np.abs(trajectory.final.matrix - rho.matrix)) < 1e-9

    def test_columns(self, fig1a_params):
        trajectory = evolve(maximally_mixed(), fig1a_params, t_end=1.0, n_samples=3)
        assert list(trajectory.observables.columns) == TRAJECTORY_COLUMNS
        assert len(trajectory.states) == 3

    def test_invalid_sampling(self, fig1a_params):
        with pytest.raises(ValidationError) as info:
            evolve(pure_state(1), fig1a_params, t_end=0.0, n_samples=5)
        assert info.value.field == "t_end"
        with pytest.raises(ValidationError) as info:
            evolve(pure_state(1), fig1a_params, t_end=10.0, n_samples=1)
        assert info.value.field == "samples"

    def test_samples_match_direct_propagator(self, far_detuned, rng):
        rho0 = random_density_matrix(rng)
        trajectory = evolve(rho0, far_detuned, t_end=50.0, n_samples=6)
        L = generator(far_detuned).matrix
        for t, state in zip(trajectory.times, trajectory.states):
            expected = unvec(la.expm(L * t) @ vec(rho0.matrix))
            assert np.max(np.abs(state.matrix - expected)) < 1e-10

    def test_random_initial_states_share_the_steady_state(self, far_detuned, rng):
        L = generator(far_detuned)
        t_end = 30.0 / spectral_gap(L)
        target = steady_state(L).state.matrix
        for _ in range(5):
            trajectory = evolve(random_density_matrix(rng), far_detuned, t_end=t_end, n_samples=301)
            assert np.max(np.abs(trajectory.final.matrix - target)) < 1e-6


class TestTrajectory:

    def test_empty(self):
        empty = Trajectory.empty()
        assert list(empty.observables.columns) == TRAJECTORY_COLUMNS
        assert len(empty.observables) == 0
        tracked = Trajectory.empty(with_tracking=True)
        assert list(tracked.observables.columns) == TRAJECTORY_COLUMNS + ["tracking_error"]

    def test_times_must_increase(self):
        states = (maximally_mixed(), maximally_mixed())
        with pytest.raises(ValidationError):
            Trajectory(np.array([1.0, 1.0]), states, None)


class TestRampSpec:

    def test_smoothstep_profile(self):
        ramp = RampSpec(2.0, 20.0, 100.0, shape="smoothstep")
        assert ramp.fraction(0.0) == 0.0
        assert ramp.fraction(25.0) == pytest.approx(0.15625)
        assert ramp.fraction(50.0) == pytest.approx(0.5)
        assert ramp.value_at(100.0) == 20.0
        assert ramp.value_at(500.0) == 20.0

    def test_params_follow_target(self, fig1a_params):
        both = RampSpec(0.0, 10.0, 10.0).params_at(fig1a_params, 5.0)
        assert both.detunings[2] == both.detunings[3] == 5.0
        single = RampSpec(0.0, 10.0, 10.0, target="delta3").params_at(fig1a_params, 5.0)
        assert single.detunings[2] == 5.0
        assert single.detunings[3] == fig1a_params.detunings[3]

    @pytest.mark.parametrize("target", ["delta3", "delta3_delta4"])
    def test_generator_is_affine_in_ramp_value(self, fig1a_params, target):
        ramp = RampSpec(2.0, 20.0, 100.0, target=target)
        l0, dl = ramp.generator_terms(fig1a_params)
        for value in (-40.0, 2.0, 13.7, 20.0):
            direct = generator(ramp.with_value(fig1a_params, value)).matrix
            assert np.max(np.abs(l0 + value * dl - direct)) < 1e-12

    @pytest.mark.parametrize("kwargs, field", [
        ({"target": "delta5"}, "target"),
        ({"shape": "cosine"}, "shape"),
        ({"duration": 0.0}, "duration"),
        ({"start_value": float("nan")}, "start_value"),
    ])
    def test_validation(self, kwargs, field):
        values = {"start_value": 2.0, "end_value": 20.0, "duration": 100.0}
        values.update(kwargs)
        with pytest.raises(ValidationError) as info:
            RampSpec(**values)
        assert info.value.field == field


class TestAdiabaticRamp:

    def test_constant_ramp_holds_steady_state(self, fig1a_params):
        ramp = RampSpec(20.0, 20.0, 200.0)
        rho0 = steady_state(ramp.params_at(fig1a_params, 0.0)).state
        trajectory = adiabatic_ramp(rho0, fig1a_params, ramp, n_samples=11)
        assert np.max(trajectory.tracking_error) < 1e-8
        assert "tracking_error" in trajectory.observables.columns

    def test_degenerate_instant_reports_time(self, zero_params):
        params = zero_params.replace(gamma_25=1.0)
        ramp = RampSpec(0.0, 5.0, 10.0)
        with pytest.raises(DegenerateSteadyState) as info:
            adiabatic_ramp(pure_state(2), params, ramp, n_samples=3)
        assert info.value.time == 0.0

    def test_unreachable_ramp_tolerance(self, fig1a_params):
        settings = SolverSettings(ramp_tolerance=1e-300, min_step=0.5)
        with pytest.raises(StepFailure):
            adiabatic_ramp(pure_state(1), fig1a_params, RampSpec(2.0, 20.0, 10.0), n_samples=3,
                           settings=settings)

    @pytest.mark.slow
    @pytest.mark.parametrize("start, end", [(2.0, 20.0), (20.0, 2.0)])
    def test_slow_ramp_tracks_steady_state(self, fig1a_params, start, end):
        ramp = RampSpec(start, end, 20000.0, shape="smoothstep")
        rho0 = steady_state(ramp.params_at(fig1a_params, 0.0)).state
        trajectory = adiabatic_ramp(rho0, fig1a_params, ramp, n_samples=51)
        assert trajectory.tracking_error[0] < 1e-9
        assert trajectory.tracking_error[-1] < 0.01
        if end == 20.0:
            assert trajectory.final.populations[4] > 0.9

    @pytest.mark.slow
    def test_preset_ramp_runs_within_a_minute(self):
        preset = get_preset("fig1a")
        defaults = preset.ramp
        ramp = RampSpec(defaults["start"], defaults["end"], defaults["duration"],
                        target=defaults["target"], shape=defaults["shape"])
        rho0 = steady_state(ramp.params_at(preset.params, 0.0)).state
        started = time.perf_counter()
        adiabatic_ramp(rho0, preset.params, ramp, n_samples=defaults["samples"])
        assert time.perf_counter() - started < 60.0

    @pytest.mark.slow
    def test_lag_shrinks_with_duration(self, fig1a_params):
        lags = []
        for duration in (2500.0, 5000.0, 10000.0):
            ramp = RampSpec(20.0, 2.0, duration)
            rho0 = steady_state(ramp.params_at(fig1a_params, 0.0)).state
            lags.append(adiabatic_ramp(rho0, fig1a_params, ramp, n_samples=11).tracking_error[-1])
        assert lags[0] > lags[1] > lags[2]


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-v"]))
