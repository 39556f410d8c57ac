import math

import numpy as np
import pytest

from brkpyapi.brk_core.boundary_regime import RegimeKind
from brkpyapi.brk_core.brk_constants import DEFAULT_NUMERICS, Numerics
from brkpyapi.brk_core.brk_models import MODEL_REGISTRY, build_system
from brkpyapi.brk_core.hyperbolic_system import HyperbolicSystem, SamplingPlan, StateBox, as_state
from brkpyapi.brk_core.spectral import (check_hypotheses, classify_boundary, eigen_decompose,
                                        eigen_signature_compare)
from brkpyapi.brk_core.system_exception import (AmbiguousRegimeException, NearSingularException,
                                                NonHyperbolicException, SystemException)


class TestModels:
    def test_registry_names(self):
        assert sorted(MODEL_REGISTRY) == ["burgers", "cubic", "linear2", "p-system"]

    def test_unknown_model(self):
        with pytest.raises(SystemException, match="unknown model"):
            build_system("euler")

    def test_viscosity_shape_checked(self):
        with pytest.raises(SystemException, match="viscosity has shape"):
            build_system("linear2", {"viscosity": [[1.0]]})

    def test_p_system_parameters_checked(self):
        with pytest.raises(SystemException):
            build_system("p-system", {"k_p": -1.0})

    def test_p_system_drift_shifts_speeds(self, numerics):
        sys = build_system("p-system", {"drift": 0.5})
        spectral = eigen_decompose(sys, np.array([1.0, 0.0]), numerics)
        assert spectral.eigenvalues == pytest.approx([0.5 - math.sqrt(2.0), 0.5 + math.sqrt(2.0)])

    def test_as_state_dimension(self):
        assert as_state(0.5).tolist() == [0.5]
        with pytest.raises(ValueError):
            as_state([1.0, 2.0], 1)

    def test_numerics_updated_is_a_copy(self):
        changed: Numerics = DEFAULT_NUMERICS.updated(tol_rh=1e-9)
        assert changed.tol_rh == 1e-9
        assert DEFAULT_NUMERICS.tol_rh != 1e-9
        assert "tol_rh" in Numerics.field_names()


class TestEigenDecompose:
    def test_burgers(self, burgers, numerics):
        spectral = eigen_decompose(burgers, np.array([0.7]), numerics)
        assert spectral.lam(1) == pytest.approx(0.7)
        assert spectral.r(1).tolist() == [1.0]

    def test_linear_diagonal(self, linear2, numerics):
        spectral = eigen_decompose(linear2, np.array([3.0, -2.0]), numerics)
        assert spectral.eigenvalues.tolist() == [-1.0, 1.0]
        assert np.allclose(np.abs(spectral.right), np.eye(2))

    def test_p_system_at_unit_volume(self, p_system, numerics):
        spectral = eigen_decompose(p_system, np.array([1.0, 0.0]), numerics)
        assert spectral.eigenvalues == pytest.approx([-math.sqrt(2.0), math.sqrt(2.0)], abs=1e-12)

    def test_biorthogonal_and_oriented(self, p_system, numerics):
        u = np.array([1.3, 0.4])
        spectral = eigen_decompose(p_system, u, numerics)
        assert np.allclose(spectral.left @ spectral.right, np.eye(2), atol=numerics.tol_eig)
        for i in (1, 2):
            r = spectral.r(i)
            assert np.linalg.norm(p_system.DF(u) @ r - spectral.lam(i) * r) <= numerics.tol_eig
            assert r[int(np.argmax(np.abs(r)))] > 0.0

    def test_complex_pair_rejected(self, numerics):
        rotation = build_system("linear2", {"a": [[0.0, -1.0], [1.0, 0.0]]})
        with pytest.raises(NonHyperbolicException):
            eigen_decompose(rotation, np.zeros(2), numerics)


class TestHypotheses:
    def test_burgers(self, burgers):
        report = check_hypotheses(burgers)
        assert report.passed
        assert report.max_entropy_residual == pytest.approx(0.0, abs=1e-14)
        assert report.alpha == pytest.approx(1.0)

    def test_p_system(self, p_system):
        report = check_hypotheses(p_system, SamplingPlan(grid_per_axis=4, n_random=20))
        assert report.passed
        assert report.alpha > 0.0

    def test_negative_viscosity_fails(self, linear2):
        report = check_hypotheses(linear2.with_viscosity(-np.eye(2)))
        assert not report.dissipative
        assert report.alpha <= -1.0 + 1e-12
        assert any("dissipative" in f for f in report.failures)

    def test_report_is_json_ready(self, burgers):
        document: dict = check_hypotheses(burgers).to_dict()
        assert document["passed"] is True
        assert document["entropy_present"] is True


class TestSignature:
    def test_identity_viscosity(self, p_system, numerics):
        counts = eigen_signature_compare(p_system, np.array([1.0, 0.0]), numerics)
        assert (counts.neg_DF, counts.pos_DF) == (counts.neg_BinvDF, counts.pos_BinvDF)

    def test_linear_with_coupled_viscosity(self, linear2, numerics):
        sys: HyperbolicSystem = linear2.with_viscosity(np.array([[2.0, 1.0], [1.0, 2.0]]))
        assert tuple(eigen_signature_compare(sys, np.zeros(2), numerics)) == (1, 1, 1, 1)

    def test_p_system_diagonal_viscosity(self, p_system, numerics):
        sys: HyperbolicSystem = p_system.with_viscosity(np.diag([1.0, 2.0]))
        assert tuple(eigen_signature_compare(sys, np.array([1.0, 0.0]), numerics)) == (1, 1, 1, 1)

    def test_sonic_point_is_near_singular(self, burgers, numerics):
        with pytest.raises(NearSingularException):
            eigen_signature_compare(burgers, np.array([0.0]), numerics)


class TestClassifyBoundary:
    def test_linear_non_characteristic(self, linear2):
        regime = classify_boundary(linear2, linear2.region)
        assert regime.kind is RegimeKind.NON_CHARACTERISTIC
        assert regime.p == 1

    def test_burgers_characteristic(self, burgers):
        regime = classify_boundary(burgers, StateBox(lower=[-0.05], upper=[0.05]))
        assert regime.kind is RegimeKind.CHARACTERISTIC
        assert regime.k == 1
        assert regime.outgoing_count(1) == 0

    def test_p_system_non_characteristic(self, p_system):
        regime = classify_boundary(p_system, StateBox(lower=[0.9, -0.1], upper=[1.1, 0.1]))
        assert regime.kind is RegimeKind.NON_CHARACTERISTIC
        assert regime.p == 1

    def test_two_sonic_fields_are_ambiguous(self):
        degenerate = build_system("linear2", {"a": [[-1e-4, 0.0], [0.0, 2e-4]]})
        with pytest.raises(AmbiguousRegimeException):
            classify_boundary(degenerate, degenerate.region)
