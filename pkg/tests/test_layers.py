import numpy as np
import pytest

from brkpyapi.brk_cli.brk_suite import near_sonic_layer
from brkpyapi.brk_core.system_exception import NearSingularException
from brkpyapi.brk_layers.boundary_layer import BoundaryLayerProfile, layer_map_phi, shoot_layer
from brkpyapi.brk_layers.layer_decomposition import decompose_layer
from brkpyapi.brk_layers.layer_exception import LayerException, NoConnectionException
from brkpyapi.brk_layers.stable_subspace import stable_subspace


class TestStableSubspace:
    def test_linear(self, linear2, numerics):
        subspace = stable_subspace(linear2, np.zeros(2), numerics)
        assert subspace.dimension == 1
        assert subspace.eigenvalues == pytest.approx([-1.0])
        assert np.allclose(subspace.basis[:, 0], [1.0, 0.0])

    def test_p_system(self, p_system, numerics):
        subspace = stable_subspace(p_system, np.array([1.0, 0.0]), numerics)
        assert subspace.dimension == 1
        assert np.allclose(subspace.basis.T @ subspace.basis, np.eye(1))

    def test_burgers_unstable(self, burgers, numerics):
        assert stable_subspace(burgers, np.array([0.5]), numerics).dimension == 0

    def test_sonic_equilibrium(self, burgers, numerics):
        with pytest.raises(NearSingularException):
            stable_subspace(burgers, np.array([0.0]), numerics)
        assert stable_subspace(burgers, np.array([0.0]), numerics, exclude_center=True).dimension == 0


class TestShootLayer:
    def test_burgers_tanh_profile(self, burgers, numerics):
        profile = shoot_layer(burgers, [-1.0], [0.0], numerics)
        assert np.max(np.abs(profile.states[:, 0] + np.tanh(profile.y / 2.0))) <= 1e-6
        assert profile.satisfies(numerics) == (True, True)
        assert profile.decay_rate == pytest.approx(1.0, rel=0.1)

    def test_linear_exponential_profile(self, linear2, numerics):
        profile = shoot_layer(linear2, [1.0, 4.0], [3.0, 4.0], numerics)
        assert np.max(np.abs(profile.states[:, 0] - (1.0 + 2.0 * np.exp(-profile.y)))) <= 1e-6
        assert np.allclose(profile.states[:, 1], 4.0, atol=1e-8)
        assert profile.states[0] == pytest.approx([3.0, 4.0], abs=numerics.tol_newton * 10.0)

    def test_trivial(self, linear2, numerics):
        profile = shoot_layer(linear2, [1.0, 4.0], [1.0, 4.0], numerics)
        assert profile.trivial
        assert profile.residual == 0.0

    def test_off_manifold(self, burgers, numerics):
        with pytest.raises(NoConnectionException):
            shoot_layer(burgers, [-1.0], [1.5], numerics)

    def test_off_manifold_linear(self, linear2, numerics):
        with pytest.raises(NoConnectionException):
            shoot_layer(linear2, [1.0, 4.0], [1.0, 5.0], numerics)

    def test_round_trip_dict(self, burgers, numerics):
        profile = shoot_layer(burgers, [-1.0], [-0.5], numerics)
        restored = BoundaryLayerProfile.from_dict(profile.to_dict())
        assert np.array_equal(restored.states, profile.states)
        assert restored.table().shape == (profile.y.size, 2)


class TestLayerMap:
    def test_zero_coordinates_give_equilibrium(self, p_system, numerics):
        eq = np.array([1.0, 0.0])
        assert np.array_equal(layer_map_phi(p_system, eq, [0.0], numerics), eq)

    def test_linear_chart(self, linear2, numerics):
        eq = np.array([1.0, 4.0])
        point = layer_map_phi(linear2, eq, [0.5], numerics)
        assert point == pytest.approx([1.5, 4.0], abs=1e-8)

    def test_wrong_coordinate_count(self, linear2, numerics):
        with pytest.raises(ValueError):
            layer_map_phi(linear2, np.zeros(2), [0.1, 0.2], numerics)


class TestDecomposeLayer:
    def test_family_checked(self, linear2, numerics):
        profile = shoot_layer(linear2, [1.0, 4.0], [3.0, 4.0], numerics)
        with pytest.raises(LayerException):
            decompose_layer(linear2, profile, [1.0, 4.0], 3, numerics)

    @pytest.mark.slow
    def test_perturbation_is_quadratic_in_delta(self, numerics):
        deltas = (0.02, 0.04, 0.08)
        perturbations = []
        for delta in deltas:
            sys, eq, profile = near_sonic_layer(delta, numerics)
            split = decompose_layer(sys, profile, eq, 2, numerics)
            assert split.rate_s is None or split.rate_s >= 0.8 * 0.5 * split.gap
            perturbations.append(split.max_perturbation())
        slope = float(np.polyfit(np.log(deltas), np.log(perturbations), 1)[0])
        assert 1.7 <= slope <= 2.3
