import numpy as np
import pytest

from brkpyapi.brk_riemann.boundary_riemann_solver import solve_boundary_riemann
from brkpyapi.brk_viscous.classical_sim import (self_similarity_check, simulate_classical, speed_bound,
                                                total_variation)
from brkpyapi.brk_viscous.grid_solution import GridSlice, SimulationConfig, l1_distance
from brkpyapi.brk_viscous.limit_comparison import compare_limits, fan_slice, viscosity_dependence_experiment
from brkpyapi.brk_viscous.selfsimilar_sim import simulate_selfsimilar
from brkpyapi.brk_viscous.solution_kind import SolutionKind
from brkpyapi.brk_viscous.viscous_exception import (CFLViolationException, DomainEscapeException,
                                                    WindowMismatchException)

MIXING = np.array([[1.0, 0.0], [1.0, 1.0]])


def shock_position(part: GridSlice, level: float) -> float:
    values: np.ndarray = part.values[:, 0]
    j: int = int(np.argmax(values < level))
    return float(np.interp(level, [values[j], values[j - 1]], [part.grid[j], part.grid[j - 1]]))


class TestL1Distance:
    grid = np.linspace(0.0, 1.0, 101)

    def test_identical(self):
        a = GridSlice(self.grid, np.zeros((101, 2)))
        assert l1_distance(a, a, (0.0, 1.0)) == 0.0

    def test_constant_offset(self):
        a = GridSlice(self.grid, np.zeros(101))
        b = GridSlice(self.grid, np.ones(101))
        assert l1_distance(a, b, (0.0, 1.0)) == pytest.approx(1.0)

    def test_linear_ramp(self):
        a = GridSlice(self.grid, np.zeros(101))
        b = GridSlice(np.linspace(0.0, 1.0, 37), np.linspace(0.0, 1.0, 37))
        assert l1_distance(a, b, (0.0, 1.0)) == pytest.approx(0.5, abs=1e-12)

    def test_window_not_covered(self):
        a = GridSlice(self.grid, np.zeros(101))
        short = GridSlice(np.linspace(0.0, 0.5, 11), np.zeros(11))
        with pytest.raises(WindowMismatchException):
            l1_distance(a, short, (0.0, 1.0))


class TestClassical:
    def test_equal_data_stay_constant(self, linear2, numerics):
        solution = simulate_classical(linear2, [1.0, 2.0], [1.0, 2.0], 0.05, SimulationConfig(dx=0.02), numerics)
        assert solution.kind is SolutionKind.TIME_DEPENDENT
        assert np.all(solution.values == np.array([1.0, 2.0]))
        assert np.all(solution.total_variation == 0.0)

    def test_burgers_shock_speed(self, burgers, numerics):
        config = SimulationConfig(dx=0.01, final_time=1.0)
        solution = simulate_classical(burgers, [0.0], [1.0], 0.01, config, numerics)
        assert solution.times[-1] == pytest.approx(1.0)
        assert abs(shock_position(solution.final_slice(), 0.5) - 0.5) <= 5.0 * config.dx
        assert solution.entropy.dissipative

    def test_total_variation_bounded(self, burgers, numerics):
        solution = simulate_classical(burgers, [0.0], [1.0], 0.02, SimulationConfig(dx=0.02), numerics)
        assert np.max(solution.total_variation) <= 1.0 + 1e-8
        assert solution.diagnostics["tv_ok"]

    def test_time_step_too_large(self, burgers, numerics):
        with pytest.raises(CFLViolationException):
            simulate_classical(burgers, [0.0], [1.0], 0.01, SimulationConfig(dt=1.0), numerics)

    def test_domain_too_short(self, burgers, numerics):
        with pytest.raises(DomainEscapeException):
            simulate_classical(burgers, [0.0], [1.0], 0.01, SimulationConfig(length=0.3), numerics)

    def test_epsilon_positive(self, burgers, numerics):
        with pytest.raises(ValueError):
            simulate_classical(burgers, [0.0], [1.0], 0.0)

    def test_speed_bound(self, p_system):
        lam_max, b_norm = speed_bound(p_system, np.array([1.0, 0.0]), np.array([1.0, 0.5]))
        assert lam_max == pytest.approx(np.sqrt(2.0))
        assert b_norm == pytest.approx(1.0)

    def test_total_variation(self):
        assert total_variation(np.array([[0.0], [2.0], [1.0]])) == 3.0


class TestSelfSimilar:
    def test_linear_trace_outside_layer(self, linear2, numerics):
        solution = simulate_selfsimilar(linear2, [1.0, 2.0], [3.0, 4.0], 0.01, SimulationConfig(), numerics)
        assert solution.kind is SolutionKind.SELF_SIMILAR
        assert np.array_equal(solution.values[0], [3.0, 4.0])
        assert np.allclose(solution.values[-1], [1.0, 2.0])
        middle = np.array([np.interp(0.5, solution.grid, solution.values[:, j]) for j in range(2)])
        assert middle == pytest.approx([1.0, 4.0], abs=1e-3)

    def test_equal_data(self, burgers, numerics):
        solution = simulate_selfsimilar(burgers, [0.3], [0.3], 0.01, SimulationConfig(), numerics)
        assert np.all(solution.values == 0.3)

    @pytest.mark.slow
    def test_burgers_shock_location(self, burgers, numerics):
        solution = simulate_selfsimilar(burgers, [0.0], [1.0], 0.02, SimulationConfig(), numerics)
        assert abs(shock_position(solution.similarity_slice(), 0.5) - 0.5) <= 0.05

    @pytest.mark.slow
    def test_self_similarity_of_classical_solution(self, burgers, numerics):
        check = self_similarity_check(burgers, [0.0], [1.0], 0.01, SimulationConfig(dx=0.01), numerics)
        assert check.times == pytest.approx((1.0, 2.0))
        assert check.distance <= 5.0 * check.reference


class TestLimits:
    def test_equal_data_give_zero_distances(self, linear2, numerics):
        table = compare_limits(linear2, [1.0, 2.0], [1.0, 2.0], [0.1, 0.05], SimulationConfig(dx=0.05), numerics)
        assert table.failed_rows == 0
        for row in table.rows:
            assert (row.d_uz, row.d_ufan, row.d_zfan) == (0.0, 0.0, 0.0)
        assert table.as_array().shape == (2, 5)

    def test_epsilons_must_decrease(self, linear2, numerics):
        with pytest.raises(ValueError):
            compare_limits(linear2, [1.0, 2.0], [3.0, 4.0], [0.05, 0.1], SimulationConfig(), numerics)

    def test_fan_slice(self, burgers, numerics):
        fan = solve_boundary_riemann(burgers, [0.5], [1.0], numerics)
        part = fan_slice(fan, 2.0, (0.0, 3.0), samples=31)
        assert part.values[0, 0] == pytest.approx(1.0)
        assert part.values[-1, 0] == 0.5

    @pytest.mark.slow
    def test_linear_limits_converge(self, linear2, numerics):
        table = compare_limits(linear2, [1.0, 2.0], [3.0, 4.0], [0.04, 0.02, 0.01], SimulationConfig(dx=0.005),
                               numerics)
        distances = [row.d_ufan for row in table.rows]
        assert table.failed_rows == 0
        assert distances[-1] < distances[0]

    def test_worker_threads_keep_row_order(self, linear2, numerics):
        epsilons = [0.2, 0.1, 0.05]
        inline = compare_limits(linear2, [1.0, 2.0], [3.0, 4.0], epsilons, SimulationConfig(dx=0.05), numerics)
        threaded = compare_limits(linear2, [1.0, 2.0], [3.0, 4.0], epsilons, SimulationConfig(dx=0.05, workers=3),
                                  numerics)
        assert [row.epsilon for row in threaded.rows] == epsilons
        np.testing.assert_array_equal(threaded.as_array(), inline.as_array())

    def test_mixing_viscosity_moves_inviscid_trace(self, linear2, numerics):
        plain = solve_boundary_riemann(linear2.with_viscosity(np.eye(2)), [1.0, 2.0], [3.0, 4.0], numerics)
        mixed = solve_boundary_riemann(linear2.with_viscosity(MIXING), [1.0, 2.0], [3.0, 4.0], numerics)
        assert plain.trace == pytest.approx([1.0, 4.0], abs=1e-8)
        assert mixed.trace == pytest.approx([1.0, 5.0], abs=1e-8)

    @pytest.mark.slow
    def test_mixing_viscosity_moves_trace(self, linear2, numerics):
        for epsilon in (0.02, 0.01):
            result = viscosity_dependence_experiment(linear2, [1.0, 2.0], [3.0, 4.0], np.eye(2), MIXING, epsilon,
                                                     SimulationConfig(workers=2), numerics)
            assert all(result.dissipative)
            assert result.fan_gap == pytest.approx(1.0, abs=1e-8)
            assert result.gap >= 0.5
            assert result.trace_1 == pytest.approx([1.0, 4.0], abs=0.1)
            assert result.trace_2 == pytest.approx([1.0, 5.0], abs=0.1)
