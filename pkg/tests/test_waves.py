import math

import numpy as np
import pytest

from brkpyapi.brk_core.brk_models import build_system
from brkpyapi.brk_waves.hugoniot import hugoniot_locus, liu_admissible, rh_speed, shock_liu_margin
from brkpyapi.brk_waves.rarefaction import rarefaction_curve
from brkpyapi.brk_waves.wave import Wave
from brkpyapi.brk_waves.wave_exception import LeftRegionException, OutOfRangeException
from brkpyapi.brk_waves.wave_fan_curve import characteristic_wave_fan_curve, wave_fan_curve
from brkpyapi.brk_waves.wave_kind import WaveKind


class TestHugoniotLocus:
    def test_burgers(self, burgers, numerics):
        locus = hugoniot_locus(burgers, [0.0], 1, 1.0, numerics=numerics)
        assert np.allclose(locus.states[:, 0], locus.s, atol=1e-10)
        assert np.allclose(locus.speeds, locus.s / 2.0, atol=1e-10)
        assert locus.extent == pytest.approx((-1.0, 1.0))

    def test_linear_family_two(self, linear2, numerics):
        locus = hugoniot_locus(linear2, [0.0, 0.0], 2, 0.5, numerics=numerics)
        assert np.allclose(locus.states[:, 0], 0.0, atol=1e-12)
        assert np.allclose(locus.states[:, 1], locus.s, atol=1e-12)
        assert np.allclose(locus.speeds, 1.0, atol=1e-10)

    def test_p_system_closed_form_speed(self, p_system, numerics):
        locus = hugoniot_locus(p_system, [1.0, 0.0], 1, 0.2, numerics=numerics)
        v: np.ndarray = locus.states[:, 0]
        away: np.ndarray = np.abs(v - 1.0) > 1e-6
        expected: np.ndarray = -(v[away] ** -2.0 - 1.0) / (v[away] - 1.0)
        assert np.allclose(locus.speeds[away] ** 2, expected, rtol=1e-8)
        assert np.max(locus.rh_residuals(p_system)) <= numerics.tol_rh
        assert locus.speed_at(0.0) == pytest.approx(-math.sqrt(2.0), abs=numerics.tol_rh)

    def test_family_out_of_range(self, burgers):
        with pytest.raises(ValueError):
            hugoniot_locus(burgers, [0.0], 2, 0.5)

    def test_rh_speed(self, burgers):
        assert rh_speed(burgers, np.array([1.0]), np.array([-1.0])) == pytest.approx(0.0)


class TestLiu:
    def test_burgers_compressive_shock(self, burgers, numerics):
        locus = hugoniot_locus(burgers, [0.0], 1, 1.2, numerics=numerics)
        verdict = liu_admissible(locus, 1.0, numerics.tol_liu)
        assert verdict.admissible
        assert verdict.worst_margin >= 0.0

    def test_burgers_expansion_shock(self, burgers, numerics):
        locus = hugoniot_locus(burgers, [0.0], 1, 1.2, numerics=numerics)
        assert not liu_admissible(locus, -1.0, numerics.tol_liu).admissible

    def test_cubic_full_jump_rejected(self, cubic, numerics):
        locus = hugoniot_locus(cubic, [-1.0], 1, 2.2, numerics=numerics)
        verdict = liu_admissible(locus, 2.0, numerics.tol_liu)
        assert not verdict.admissible
        assert verdict.worst_margin < 0.0

    def test_out_of_range(self, burgers, numerics):
        locus = hugoniot_locus(burgers, [0.0], 1, 0.5, numerics=numerics)
        with pytest.raises(OutOfRangeException):
            liu_admissible(locus, 0.9)

    def test_computed_jump_margin(self, burgers, numerics):
        good = shock_liu_margin(burgers, np.array([1.0]), np.array([0.0]), 1, 0.5, numerics)
        bad = shock_liu_margin(burgers, np.array([-1.0]), np.array([0.0]), 1, -0.5, numerics)
        assert good.admissible
        assert not bad.admissible


class TestRarefaction:
    def test_burgers(self, burgers, numerics):
        curve = rarefaction_curve(burgers, [0.0], 1, 0.5, numerics=numerics)
        assert np.allclose(curve.states[:, 0], curve.s, atol=1e-12)
        assert np.all(np.diff(curve.speeds) > 0.0)
        assert curve.endpoint[0] == pytest.approx(0.5)

    def test_linear_is_straight(self, linear2, numerics):
        curve = rarefaction_curve(linear2, [1.0, 1.0], 2, 0.3, numerics=numerics)
        assert np.allclose(curve.states[:, 0], 1.0)
        assert np.allclose(curve.speeds, 1.0)

    def test_p_system_step_halving(self, p_system, numerics):
        coarse = rarefaction_curve(p_system, [1.0, 0.0], 2, 0.2, ds=1e-2, numerics=numerics)
        fine = rarefaction_curve(p_system, [1.0, 0.0], 2, 0.2, ds=5e-3, numerics=numerics)
        assert np.linalg.norm(coarse.endpoint - fine.endpoint) <= 1e-8
        assert np.all(np.diff(fine.speeds) > 0.0) or np.all(np.diff(fine.speeds) < 0.0)

    def test_leaves_region(self, burgers, numerics):
        bounded = burgers.with_region(burgers.region.around([0.0], 0.2))
        with pytest.raises(LeftRegionException):
            rarefaction_curve(bounded, [0.0], 1, 0.5, numerics=numerics)


class TestWaveFanCurve:
    def test_burgers_shock_side(self, burgers, numerics):
        curve = wave_fan_curve(burgers, [0.0], 1, 1.0, numerics=numerics)
        assert curve.endpoint[0] == pytest.approx(1.0, abs=1e-10)
        assert len(curve.waves) == 1
        shock: Wave = curve.waves[0]
        assert shock.kind is WaveKind.SHOCK
        assert shock.speed == pytest.approx(0.5, abs=1e-10)
        assert shock.left[0] == pytest.approx(1.0, abs=1e-10)
        assert shock.right[0] == pytest.approx(0.0, abs=1e-14)

    def test_burgers_rarefaction_side(self, burgers, numerics):
        curve = wave_fan_curve(burgers, [0.0], 1, -1.0, numerics=numerics)
        assert curve.endpoint[0] == pytest.approx(-1.0, abs=1e-10)
        assert [w.kind for w in curve.waves] == [WaveKind.RAREFACTION]
        assert curve.waves[0].speed == pytest.approx(-1.0, abs=1e-8)
        assert curve.waves[0].speed_max == pytest.approx(0.0, abs=1e-8)

    def test_cubic_composite_wave(self, cubic, numerics):
        curve = wave_fan_curve(cubic, [-1.0], 1, 2.0, numerics=numerics)
        assert [w.kind for w in curve.waves] == [WaveKind.SHOCK, WaveKind.RAREFACTION]
        assert curve.waves[0].speed == pytest.approx(0.75, abs=2e-2)
        assert curve.waves[0].right[0] == pytest.approx(-0.5, abs=2e-2)
        assert np.all(np.diff(curve.fan_speeds) >= -numerics.tol_contact)

    def test_detachment_nonnegative(self, p_system, numerics):
        curve = wave_fan_curve(p_system, [1.0, 0.0], 1, -0.3, numerics=numerics)
        assert np.all(curve.detachment >= 0.0)
        assert np.allclose(curve.endpoint, curve.states[-1])

    def test_zero_strength(self, p_system, numerics):
        curve = wave_fan_curve(p_system, [1.0, 0.0], 2, 0.0, numerics=numerics)
        assert curve.waves == ()
        assert np.array_equal(curve.endpoint, [1.0, 0.0])

    def test_profile_table(self, burgers, numerics):
        curve = wave_fan_curve(burgers, [0.0], 1, 0.5, numerics=numerics)
        assert curve.profile_table().shape == (curve.tau.size, 6)


class TestCharacteristicCurve:
    def test_burgers_sonic_split(self, burgers, numerics):
        curve = characteristic_wave_fan_curve(burgers, [0.1], 1, -0.3, numerics=numerics)
        assert curve.characteristic
        assert curve.s_bar == pytest.approx(-0.1, abs=1e-8)
        assert curve.trace_state[0] == pytest.approx(0.0, abs=1e-8)
        assert -0.3 <= curve.s_under <= curve.s_bar
        assert all(w.speed >= -numerics.zero_speed_tol for w in curve.waves)

    def test_nonnegative_speeds_match_plain_curve(self, burgers, numerics):
        plain = wave_fan_curve(burgers, [0.5], 1, -0.2, numerics=numerics)
        curve = characteristic_wave_fan_curve(burgers, [0.5], 1, -0.2, numerics=numerics)
        assert np.allclose(curve.endpoint, plain.endpoint, atol=1e-10)
        assert curve.s_bar == pytest.approx(-0.2)

    def test_zero_speed_contact(self, numerics):
        sys = build_system("linear2", {"a": [[0.0, 0.0], [0.0, 1.0]]})
        curve = characteristic_wave_fan_curve(sys, [0.0, 0.0], 1, -0.4, numerics=numerics)
        assert np.allclose(curve.speeds, 0.0, atol=numerics.zero_speed_tol)
        assert np.allclose(curve.detachment, 0.0, atol=numerics.tol_contact)
        assert curve.s_bar == 0.0
        assert curve.s_under == pytest.approx(-0.4)
        assert curve.waves == ()
        assert np.allclose(curve.endpoint, [-0.4, 0.0], atol=1e-12)
