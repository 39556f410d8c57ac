import numpy as np
import pytest

from brkpyapi.brk_core.boundary_regime import RegimeKind
from brkpyapi.brk_layers.layer_exception import NoConnectionException
from brkpyapi.brk_riemann.boundary_riemann_solver import solve_boundary_riemann
from brkpyapi.brk_riemann.boundary_sensitivity import hypothesis_constants, trace_continuity
from brkpyapi.brk_riemann.fan_kind import FanKind
from brkpyapi.brk_riemann.riemann_exception import DataTooLargeException
from brkpyapi.brk_riemann.riemann_solver import solve_riemann
from brkpyapi.brk_riemann.validation import check_structure, validate_solution
from brkpyapi.brk_riemann.wave_fan import WaveFan, evaluate
from brkpyapi.brk_waves.wave import Wave
from brkpyapi.brk_waves.wave_kind import WaveKind


class TestSolveRiemann:
    def test_burgers_stationary_shock(self, burgers, numerics):
        fan = solve_riemann(burgers, [1.0], [-1.0], numerics)
        assert [w.kind for w in fan.waves] == [WaveKind.SHOCK]
        assert fan.waves[0].speed == pytest.approx(0.0, abs=1e-8)
        assert validate_solution(burgers, fan, numerics).passed

    def test_burgers_moving_shock(self, burgers, numerics):
        fan = solve_riemann(burgers, [1.0], [0.0], numerics)
        assert fan.waves[0].speed == pytest.approx(0.5, abs=1e-8)
        assert evaluate(fan, 0.49)[0] == pytest.approx(1.0, abs=1e-8)
        assert evaluate(fan, 0.51)[0] == pytest.approx(0.0, abs=1e-8)

    def test_burgers_rarefaction(self, burgers, numerics):
        fan = solve_riemann(burgers, [-1.0], [1.0], numerics)
        assert [w.kind for w in fan.waves] == [WaveKind.RAREFACTION]
        for xi in (-0.5, 0.0, 0.5):
            assert evaluate(fan, xi)[0] == pytest.approx(xi, abs=1e-6)
        assert evaluate(fan, -2.0)[0] == -1.0
        assert evaluate(fan, 2.0)[0] == 1.0

    def test_p_system_two_waves(self, p_system, numerics):
        fan = solve_riemann(p_system, [1.0, 0.0], [1.1, 0.05], numerics)
        assert {w.family for w in fan.waves} == {1, 2}
        assert all(a.speed_max <= b.speed + numerics.tol_fan for a, b in zip(fan.waves[:-1], fan.waves[1:]))
        report = validate_solution(p_system, fan, numerics)
        assert report.passed, report.failures()

    def test_trivial(self, linear2, numerics):
        fan = solve_riemann(linear2, [1.0, 2.0], [1.0, 2.0], numerics)
        assert fan.waves == ()
        assert np.array_equal(fan.strengths, [0.0, 0.0])

    def test_data_too_large(self, burgers, numerics):
        with pytest.raises(DataTooLargeException):
            solve_riemann(burgers, [0.0], [5.0], numerics)

    def test_initial_guess_reproduces_solution(self, p_system, numerics):
        fan = solve_riemann(p_system, [1.0, 0.0], [1.1, 0.05], numerics)
        again = solve_riemann(p_system, [1.0, 0.0], [1.1, 0.05], numerics, initial_guess=fan.strengths + 1e-3)
        assert np.allclose(again.strengths, fan.strengths, atol=1e-8)


class TestSolveBoundaryRiemann:
    def test_linear_closed_form(self, linear2, numerics):
        fan = solve_boundary_riemann(linear2, [1.0, 2.0], [3.0, 4.0], numerics)
        assert fan.kind is FanKind.BOUNDARY_RIEMANN
        assert fan.regime.kind is RegimeKind.NON_CHARACTERISTIC
        assert fan.trace == pytest.approx([1.0, 4.0], abs=1e-8)
        assert len(fan.waves) == 1
        assert fan.waves[0].speed == pytest.approx(1.0, abs=1e-8)
        layer = fan.boundary_group.layer
        exact = np.column_stack((1.0 + 2.0 * np.exp(-layer.y), np.full(layer.y.size, 4.0)))
        assert np.max(np.abs(layer.states - exact)) <= 1e-6
        assert validate_solution(linear2, fan, numerics).passed

    def test_boundary_equals_initial_state(self, linear2, numerics):
        fan = solve_boundary_riemann(linear2, [1.0, 2.0], [1.0, 2.0], numerics)
        assert fan.waves == ()
        assert np.array_equal(fan.trace, [1.0, 2.0])
        assert validate_solution(linear2, fan, numerics).passed

    def test_burgers_outgoing_shock(self, burgers, numerics):
        fan = solve_boundary_riemann(burgers, [0.5], [1.0], numerics)
        assert [w.kind for w in fan.waves] == [WaveKind.SHOCK]
        assert fan.waves[0].speed == pytest.approx(0.75, abs=1e-8)
        assert fan.boundary_group.layer.trivial
        assert validate_solution(burgers, fan, numerics).passed

    def test_burgers_near_sonic(self, burgers, numerics):
        fan = solve_boundary_riemann(burgers, [0.02], [0.05], numerics)
        assert fan.regime.kind is RegimeKind.CHARACTERISTIC
        assert fan.trace == pytest.approx([0.05], abs=1e-8)
        assert fan.waves[0].speed == pytest.approx(0.035, abs=1e-8)
        assert validate_solution(burgers, fan, numerics).passed

    def test_no_layer_to_boundary_datum(self, burgers, numerics):
        with pytest.raises(NoConnectionException):
            solve_boundary_riemann(burgers, [-1.0], [1.5], numerics)

    def test_save_and_load(self, linear2, numerics, tmp_path):
        fan = solve_boundary_riemann(linear2, [1.0, 2.0], [3.0, 4.0], numerics)
        restored = WaveFan.load(fan.save(tmp_path / "fan.json"))
        assert restored.kind is FanKind.BOUNDARY_RIEMANN
        assert np.array_equal(restored.trace, fan.trace)
        assert restored.regime.p == fan.regime.p
        assert np.array_equal(restored.boundary_group.layer.states, fan.boundary_group.layer.states)

    def test_schema_checked(self):
        with pytest.raises(ValueError, match="schema"):
            WaveFan.from_dict({"schema": 99})


class TestValidation:
    def test_expansion_shock_rejected(self, burgers, numerics):
        wave = Wave(kind=WaveKind.SHOCK, family=1, left=np.array([-1.0]), right=np.array([0.0]), speed=-0.5)
        fan = WaveFan(kind=FanKind.RIEMANN, left_state=np.array([-1.0]), right_state=np.array([0.0]),
                      waves=(wave,), strengths=np.array([-1.0]))
        report = validate_solution(burgers, fan, numerics)
        assert not report.passed
        assert report.failures() == ["jumps"]
        assert "inadmissible" in report.check("jumps").detail

    def test_wrong_speed_breaks_rankine_hugoniot(self, burgers, numerics):
        wave = Wave(kind=WaveKind.SHOCK, family=1, left=np.array([1.0]), right=np.array([0.0]), speed=0.4)
        fan = WaveFan(kind=FanKind.RIEMANN, left_state=np.array([1.0]), right_state=np.array([0.0]),
                      waves=(wave,), strengths=np.array([1.0]))
        assert check_structure(burgers, fan, numerics).rh_residuals[0] == pytest.approx(0.1)
        assert not validate_solution(burgers, fan, numerics).check("jumps").passed

    def test_tight_budget_fails_total_variation(self, burgers, numerics):
        fan = solve_riemann(burgers, [1.0], [0.0], numerics)
        report = validate_solution(burgers, fan, numerics, tv_budget=0.5)
        assert report.failures() == ["total_variation"]

    def test_report_to_dict(self, burgers, numerics):
        document = validate_solution(burgers, solve_riemann(burgers, [1.0], [0.0], numerics), numerics).to_dict()
        assert document["passed"] is True
        assert [c["name"] for c in document["checks"]] == ["far_field", "total_variation", "jumps", "rarefactions"]


class TestSensitivity:
    def test_linear_trace_is_lipschitz(self, linear2, numerics):
        continuity = trace_continuity(linear2, [1.0, 2.0], [3.0, 4.0], 1e-3, numerics)
        assert continuity.lipschitz == pytest.approx(1.0, abs=1e-3)
        assert continuity.displacements[0] == pytest.approx(0.0, abs=1e-6)

    def test_eta_range(self, linear2, numerics):
        with pytest.raises(ValueError):
            trace_continuity(linear2, [1.0, 2.0], [3.0, 4.0], 0.1, numerics)

    @pytest.mark.slow
    def test_hypothesis_constants(self, linear2, numerics):
        constants = hypothesis_constants(linear2, [1.0, 2.0], sizes=[0.1, 0.2], directions=2, seed=3,
                                         numerics=numerics)
        assert constants.data_max == pytest.approx(0.2)
        assert constants.successes == [2, 2]
        assert constants.tv_ratio <= 1.0 + 1e-6
