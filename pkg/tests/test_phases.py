import math
from dataclasses import replace

import numpy as np
import pytest

from spinberry import (
    ModelParams,
    NullOverlap,
    berry_magnetic_analytic,
    berry_magnetic_numeric,
    berry_quantized_analytic,
    berry_quantized_numeric,
    eigenframes_at,
    phase_distance,
    solid_angle_fixed_latitude,
    two_mode_berry_analytic,
    two_mode_berry_numeric,
    two_mode_jz_expectation,
    wilson_loop_phase,
    wrap_angle,
)
from spinberry.twomode import embed_two_mode, two_mode_rotation

GENERIC = ModelParams(omega1=1.0, nu=0.8, lam=0.5, coupling_j=0.3, omega2=0.7)
TWO_PI = 2 * math.pi


def qubit_latitude_loop(theta: float, steps: int) -> np.ndarray:
    phis = TWO_PI * np.arange(steps) / steps
    top = np.full(steps, math.cos(theta / 2))
    bottom = np.exp(1j * phis) * math.sin(theta / 2)
    return np.stack([top, bottom], axis=1)


class TestWrapAngle:
    def test_range_is_half_open_at_minus_pi(self):
        assert wrap_angle(math.pi) == math.pi
        assert wrap_angle(-math.pi) == math.pi
        assert wrap_angle(3 * math.pi) == pytest.approx(math.pi)

    def test_distance_identifies_equivalent_phases(self):
        assert phase_distance(math.pi, -math.pi) == 0.0
        assert phase_distance(0.1, 0.1 + TWO_PI) < 1e-12


class TestWilsonLoopPhase:
    def test_identical_states_give_zero(self):
        states = np.tile(np.array([1.0, 0.0], dtype=complex), (8, 1))
        assert wilson_loop_phase(states) == 0.0

    def test_equatorial_qubit_loop_gives_half_solid_angle(self):
        # Brute-force oracle: the great-circle loop encloses solid angle
        # 2 pi, so the phase is -pi, modulo 2 pi.
        phase = wilson_loop_phase(qubit_latitude_loop(math.pi / 2, 512))
        assert phase_distance(phase, -math.pi) < 1e-4

    def test_generic_latitude_matches_half_solid_angle(self):
        theta = 1.1
        phase = wilson_loop_phase(qubit_latitude_loop(theta, 4096))
        expected = -0.5 * solid_angle_fixed_latitude(theta)
        assert phase_distance(phase, expected) < 1e-6

    def test_gauge_invariance_under_random_phases(self):
        rng = np.random.default_rng(30)
        states = qubit_latitude_loop(0.8, 64)
        base = wilson_loop_phase(states)
        for _ in range(50):
            dressed = states * np.exp(1j * rng.uniform(0, TWO_PI, size=(64, 1)))
            assert abs(wilson_loop_phase(dressed) - base) < 1e-12

    def test_open_path_interior_gauge_invariance(self):
        rng = np.random.default_rng(31)
        states = qubit_latitude_loop(0.8, 65)
        base = wilson_loop_phase(states, closed=False)
        phases = np.zeros(65)
        phases[1:-1] = rng.uniform(0, TWO_PI, size=63)
        dressed = states * np.exp(1j * phases[:, None])
        assert abs(wilson_loop_phase(dressed, closed=False) - base) < 1e-12

    def test_rejects_too_few_states(self):
        with pytest.raises(ValueError):
            wilson_loop_phase(np.eye(2, dtype=complex))

    def test_rejects_unnormalized_states(self):
        states = np.tile(np.array([2.0, 0.0], dtype=complex), (5, 1))
        with pytest.raises(ValueError):
            wilson_loop_phase(states)

    def test_null_overlap_raises(self):
        states = np.array(
            [[1, 0], [0, 1], [1, 0], [0, 1]], dtype=complex
        )  # orthogonal consecutive pairs
        with pytest.raises(NullOverlap):
            wilson_loop_phase(states)

    def test_halving_consistency_at_2048(self):
        states = qubit_latitude_loop(1.1, 4096)
        fine = wilson_loop_phase(states)
        coarse = wilson_loop_phase(states[::2])
        assert phase_distance(fine, coarse) < 1e-6


class TestSolidAngle:
    def test_pole(self):
        assert solid_angle_fixed_latitude(0.0) == 0.0

    def test_equator(self):
        assert solid_angle_fixed_latitude(math.pi / 2) == pytest.approx(TWO_PI)

    def test_full_sphere(self):
        assert solid_angle_fixed_latitude(math.pi) == pytest.approx(2 * TWO_PI)


class TestBerryMagnetic:
    def test_analytic_collapses_when_chi_is_zero(self):
        xi = 0.77
        assert berry_magnetic_analytic(0.0, xi, 1.23) == pytest.approx(
            math.pi * (1 - math.cos(xi))
        )

    def test_analytic_collapses_when_chi_is_pi(self):
        assert berry_magnetic_analytic(math.pi, 0.3, math.pi / 2) == pytest.approx(math.pi)

    def test_analytic_range(self):
        rng = np.random.default_rng(32)
        for _ in range(200):
            value = berry_magnetic_analytic(
                rng.uniform(0, math.pi),
                rng.uniform(-math.pi, math.pi),
                rng.uniform(-math.pi, math.pi),
            )
            assert 0.0 <= value < 2 * TWO_PI

    def test_numeric_matches_analytic_at_generic_point(self):
        report = berry_magnetic_numeric(GENERIC, 1, 4096)
        assert abs(report.difference_mod_2pi) < 1e-6
        assert report.converged

    def test_zero_magnetic_field_gives_zero_phase(self):
        params = replace(GENERIC, omega2=0.0)
        for j in (1, 2, 3, 4):
            report = berry_magnetic_numeric(params, j, 256)
            assert phase_distance(report.numeric_phase, 0.0) < 1e-8

    def test_strong_field_coupling_limit_is_pi(self):
        params = replace(GENERIC, lam=1e6)
        for j in (1, 2, 3, 4):
            report = berry_magnetic_numeric(params, j, 4096)
            assert phase_distance(report.numeric_phase, math.pi) < 1e-3

    def test_strong_spin_coupling_limit_is_zero(self):
        params = replace(GENERIC, coupling_j=1e6)
        for j in (1, 2, 3, 4):
            report = berry_magnetic_numeric(params, j, 4096)
            assert phase_distance(report.numeric_phase, 0.0) < 1e-3

    def test_report_difference_is_wrapped_by_construction(self):
        report = berry_magnetic_numeric(GENERIC, 2, 512)
        assert report.difference_mod_2pi == wrap_angle(
            report.analytic_phase - report.numeric_phase
        )


class TestBerryQuantized:
    def test_analytic_at_chi_zero(self):
        assert berry_quantized_analytic(0.0, 0) == 0.0

    def test_analytic_at_chi_pi_one_photon(self):
        assert berry_quantized_analytic(math.pi, 1) == pytest.approx(2 * TWO_PI)

    def test_analytic_equals_photon_number_expectation(self):
        for params in (GENERIC, replace(GENERIC, n_photon=2)):
            for frame in eigenframes_at(params):
                diag = params.n_photon + np.array([0, 0, 1, 1], dtype=float)
                expectation = float(
                    np.vdot(frame.amplitudes, diag * frame.amplitudes).real
                )
                assert berry_quantized_analytic(frame.chi, params.n_photon) == (
                    pytest.approx(TWO_PI * expectation, abs=1e-10)
                )

    def test_number_eigenstate_gets_integer_phase(self):
        params = ModelParams(1.0, 0.8, 0.0, 0.0, 0.0)
        report = berry_quantized_numeric(params, 4, 1024)
        assert phase_distance(report.numeric_phase, 0.0) < 1e-10

    def test_vacuum_phase_is_nonzero_for_coupled_system(self):
        report = berry_quantized_numeric(GENERIC, 2)
        assert phase_distance(report.numeric_phase, 0.0) > 1e-3
        assert abs(report.difference_mod_2pi) < 1e-8

    def test_without_magnetic_field_matches_bare_exchange_mixing(self):
        # With the field off, the block splits into two 2x2 exchange blocks;
        # their mixing angle gives sin^2(chi/2) independently.
        params = replace(GENERIC, omega2=0.0)
        n = params.n_photon
        ln = params.lam * math.sqrt(n + 1)
        # Block pairing |e1 e2, n> with |g1 e2, n+1>.
        a = params.coupling_j + n * params.nu + params.omega1 / 2
        b = -params.coupling_j + (n + 1) * params.nu - params.omega1 / 2
        half_split = math.hypot((a - b) / 2, ln)
        lower_weight = 0.5 - (a - b) / (4 * half_split) * 1.0
        report_values = {
            phase_distance(
                berry_quantized_numeric(params, j, 8192).numeric_phase, 0.0
            )
            for j in (1, 2, 3, 4)
        }
        expected_upper = wrap_angle(TWO_PI * lower_weight)
        expected_lower = wrap_angle(TWO_PI * (1 - lower_weight))
        for expected in (expected_upper, expected_lower):
            assert any(
                abs(v - abs(expected)) < 1e-4 for v in report_values
            ), (report_values, expected)


class TestTwoModeBerry:
    def test_analytic_zero_solid_angle(self):
        assert two_mode_berry_analytic(1.0, 2, 1, 0.0) == 0.0

    def test_analytic_balanced_photons_chi_zero(self):
        assert two_mode_berry_analytic(0.0, 1, 1, 2.0) == 0.0

    def test_analytic_direct_substitution(self):
        value = two_mode_berry_analytic(math.pi / 2, 1, 0, TWO_PI)
        assert value == pytest.approx(-1.5 * math.pi, abs=1e-15)

    def test_analytic_is_linear_in_solid_angle(self):
        rng = np.random.default_rng(33)
        for _ in range(50):
            chi = rng.uniform(0, math.pi)
            omega = rng.uniform(0, 2 * TWO_PI)
            scale = rng.uniform(0, 3)
            assert two_mode_berry_analytic(chi, 1, 0, scale * omega) == pytest.approx(
                scale * two_mode_berry_analytic(chi, 1, 0, omega), rel=1e-14
            )

    def test_uncoupled_vacuum_level_gets_zero_phase(self):
        params = ModelParams(1.0, 0.8, 0.0, 0.0, 0.0)
        # Level 4 is |e1 e2, 0> here (highest energy, chi = 0).
        frame = eigenframes_at(params)[3]
        assert frame.chi == pytest.approx(0.0, abs=1e-12)
        report = two_mode_berry_numeric(params, 4, 0.0, 512)
        assert phase_distance(report.numeric_phase, 0.0) < 1e-12

    def test_theta_zero_equals_jz_expectation(self):
        for n, nprime in ((0, 0), (1, 0), (0, 1), (2, 1)):
            params = replace(GENERIC, n_photon=n, n_prime=nprime)
            frame = eigenframes_at(params)[0]
            expected = TWO_PI * two_mode_jz_expectation(frame.chi, n, nprime)
            report = two_mode_berry_numeric(params, 1, 0.0, 65536)
            assert phase_distance(report.numeric_phase, expected) < 1e-8

    def test_theta_zero_brute_force_oracle(self):
        # Plain-python overlap product over explicitly rotated states.
        params = replace(GENERIC, n_photon=1)
        steps = 256
        frame = eigenframes_at(params)[2]
        state = embed_two_mode(frame, params)
        rotated = [
            two_mode_rotation(state, 0.0, TWO_PI * k / steps).amplitudes
            for k in range(steps + 1)
        ]
        product = 1.0 + 0.0j
        for a, b in zip(rotated, rotated[1:]):
            overlap = np.vdot(a, b)
            product *= overlap / abs(overlap)
        expected = wrap_angle(-np.angle(product))
        report = two_mode_berry_numeric(params, 3, 0.0, steps)
        assert phase_distance(report.numeric_phase, expected) < 1e-12

    def test_generic_latitude_converges_and_reports_convention_gap(self):
        # The numeric loop integrates to 2 pi cos(theta) <Jz>; the solid-angle
        # form differs from it by exactly 2 pi <Jz>, which the report carries
        # as the (unasserted) difference column.
        theta = math.pi / 2
        frame = eigenframes_at(GENERIC)[1]
        report = two_mode_berry_numeric(GENERIC, 2, theta, 4096)
        assert report.converged
        jz = two_mode_jz_expectation(frame.chi, 0, 0)
        assert phase_distance(report.numeric_phase, TWO_PI * math.cos(theta) * jz) < 1e-5
        assert phase_distance(report.difference_mod_2pi, -TWO_PI * jz) < 1e-5
