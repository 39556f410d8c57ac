import logging
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional

import numpy as np
import scipy.linalg

from brkpyapi.brk_core.boundary_regime import BoundaryRegime, RegimeKind
from brkpyapi.brk_core.brk_constants import DEFAULT_NUMERICS, Numerics
from brkpyapi.brk_core.hyperbolic_system import HyperbolicSystem, SamplingPlan, StateBox, as_state
from brkpyapi.brk_core.system_exception import (
    AmbiguousRegimeException,
    NearSingularException,
    NonHyperbolicException,
)


@dataclass(frozen=True, eq=False)
class SpectralData:
    """
    Ordered eigen-decomposition of DF(U).

    :param eigenvalues: lambda_1 < ... < lambda_n.
    :type eigenvalues: np.ndarray
    :param right: Unit right eigenvectors as columns.
    :type right: np.ndarray
    :param left: Left eigenvectors as rows, inverse of ``right``.
    :type left: np.ndarray
    :param orientation: Index of the component made positive for each column.
    :type orientation: tuple
    """
    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    orientation: tuple

    def r(self, i: int) -> np.ndarray:
        """
        Right eigenvector of the 1-based family i.
        """
        return self.right[:, i - 1]

    def l(self, i: int) -> np.ndarray:
        return self.left[i - 1, :]

    def lam(self, i: int) -> float:
        return float(self.eigenvalues[i - 1])


def orient_columns(vectors: np.ndarray) -> tuple:
    """
    Normalizes every column and flips it so its largest-magnitude
    component is positive (ties: lowest index). Works in place.

    :return: Index of the reference component of each column.
    :rtype: tuple
    """
    reference: List[int] = []
    for j in range(vectors.shape[1]):
        vectors[:, j] /= np.linalg.norm(vectors[:, j])
        idx: int = int(np.argmax(np.abs(vectors[:, j])))
        if vectors[idx, j] < 0.0:
            vectors[:, j] *= -1.0
        reference.append(idx)
    return tuple(reference)


def eigen_decompose(sys: HyperbolicSystem, u: np.ndarray,
                    numerics: Numerics = DEFAULT_NUMERICS) -> SpectralData:
    """
    Eigenvalues and biorthogonal eigenvectors of DF(U), sorted by speed.

    :param sys: Hyperbolic system.
    :type sys: HyperbolicSystem
    :param u: State.
    :type u: np.ndarray
    :param numerics: Tolerances.
    :type numerics: Numerics
    :raises NonHyperbolicException: On a complex pair or a gap below gap_min.
    :return: Spectral data with deterministic orientation.
    :rtype: SpectralData
    """
    a: np.ndarray = sys.DF(u)
    if sys.n == 1:
        return SpectralData(eigenvalues=np.array([a[0, 0]]), right=np.ones((1, 1)),
                            left=np.ones((1, 1)), orientation=(0,))

    w, vr = scipy.linalg.eig(a)
    scale: float = max(1.0, float(np.max(np.abs(w))))
    if np.any(np.abs(w.imag) > numerics.tol_eig * scale):
        raise NonHyperbolicException(f"complex eigenvalues {w.tolist()} at U={np.asarray(u).tolist()}")
    order: np.ndarray = np.argsort(w.real, kind="stable")
    eigenvalues: np.ndarray = w.real[order]
    gaps: np.ndarray = np.diff(eigenvalues)
    if np.any(gaps < numerics.gap_min):
        raise NonHyperbolicException(
            f"eigenvalue gap {float(gaps.min()):.3e} below gap_min={numerics.gap_min} at U={np.asarray(u).tolist()}")

    right: np.ndarray = np.array(vr.real[:, order], dtype=float)
    orientation: tuple = orient_columns(right)
    left: np.ndarray = scipy.linalg.inv(right)
    return SpectralData(eigenvalues=eigenvalues, right=right, left=left, orientation=orientation)


class SignatureCounts(NamedTuple):
    neg_DF: int
    neg_BinvDF: int
    pos_DF: int
    pos_BinvDF: int


def eigen_signature_compare(sys: HyperbolicSystem, u: np.ndarray,
                            numerics: Numerics = DEFAULT_NUMERICS) -> SignatureCounts:
    """
    Counts eigenvalues of DF(U) and B(U)^-1 DF(U) by sign of the real part.

    :raises NearSingularException: If a real part is below tol_eig in magnitude.
    :rtype: SignatureCounts
    """
    a: np.ndarray = sys.DF(u)
    m: np.ndarray = np.linalg.solve(sys.B(u), a)
    w_a: np.ndarray = scipy.linalg.eigvals(a)
    w_m: np.ndarray = scipy.linalg.eigvals(m)
    for label, w in (("DF", w_a), ("B^-1 DF", w_m)):
        if np.any(np.abs(w.real) < numerics.tol_eig):
            raise NearSingularException(f"{label} has an eigenvalue with |Re| < {numerics.tol_eig}: {w.tolist()}")
    return SignatureCounts(neg_DF=int(np.sum(w_a.real < 0)), neg_BinvDF=int(np.sum(w_m.real < 0)),
                           pos_DF=int(np.sum(w_a.real > 0)), pos_BinvDF=int(np.sum(w_m.real > 0)))


@dataclass
class HypothesisReport:
    """
    Sampled certification of strict hyperbolicity, the entropy pair and the
    dissipativity of the viscosity.
    """
    samples: int = 0
    region: dict = field(default_factory=dict)
    min_gap: float = float("inf")
    max_viscosity_condition: float = 0.0
    entropy_present: bool = False
    max_entropy_residual: float = 0.0
    min_hessian_eigenvalue: float = float("inf")
    alpha: float = float("inf")
    hyperbolic: bool = True
    viscosity_invertible: bool = True
    entropy_compatible: bool = False
    dissipative: bool = False
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.hyperbolic and self.viscosity_invertible and self.entropy_compatible and self.dissipative

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "region": self.region,
            "min_gap": self.min_gap,
            "max_viscosity_condition": self.max_viscosity_condition,
            "entropy_present": self.entropy_present,
            "max_entropy_residual": self.max_entropy_residual,
            "min_hessian_eigenvalue": self.min_hessian_eigenvalue,
            "alpha": self.alpha,
            "hyperbolic": self.hyperbolic,
            "viscosity_invertible": self.viscosity_invertible,
            "entropy_compatible": self.entropy_compatible,
            "dissipative": self.dissipative,
            "passed": self.passed,
            "failures": list(self.failures),
        }


def check_hypotheses(sys: HyperbolicSystem, plan: SamplingPlan = SamplingPlan(),
                     numerics: Numerics = DEFAULT_NUMERICS,
                     region: Optional[StateBox] = None) -> HypothesisReport:
    """
    Checks strict hyperbolicity, invertibility of B, the entropy identity
    grad(eta) DF = grad(q), convexity of eta and the estimate
    alpha = min eig sym(D2 eta B) on the sampled points.

    :param sys: Hyperbolic system.
    :type sys: HyperbolicSystem
    :param plan: Sampling plan.
    :type plan: SamplingPlan
    :param numerics: Tolerances.
    :type numerics: Numerics
    :param region: Box to sample, the system region when None.
    :type region: Optional[StateBox]
    :return: The report; failures are listed, never raised.
    :rtype: HypothesisReport
    """
    box: StateBox = region if region is not None else sys.region
    points: np.ndarray = box.sample(plan)
    report: HypothesisReport = HypothesisReport(samples=len(points), region=box.to_dict(),
                                                entropy_present=sys.entropy is not None)
    for u in points:
        try:
            spectral: SpectralData = eigen_decompose(sys, u, numerics)
            if sys.n > 1:
                report.min_gap = min(report.min_gap, float(np.min(np.diff(spectral.eigenvalues))))
        except NonHyperbolicException as e:
            report.hyperbolic = False
            report.failures.append(f"hyperbolicity at U={u.tolist()}: {e}")

        b: np.ndarray = sys.B(u)
        condition: float = float(np.linalg.cond(b))
        report.max_viscosity_condition = max(report.max_viscosity_condition, condition)
        if not np.isfinite(condition) or condition > 1.0 / np.finfo(float).eps:
            report.viscosity_invertible = False
            report.failures.append(f"viscosity singular at U={u.tolist()} (cond={condition:.3e})")

        if sys.entropy is None:
            continue
        residual: float = float(np.linalg.norm(sys.entropy.grad_eta(u) @ sys.DF(u) - sys.entropy.grad_q(u)))
        report.max_entropy_residual = max(report.max_entropy_residual, residual)
        hessian: np.ndarray = np.atleast_2d(sys.entropy.hess_eta(u))
        report.min_hessian_eigenvalue = min(report.min_hessian_eigenvalue,
                                            float(np.min(np.linalg.eigvalsh(0.5 * (hessian + hessian.T)))))
        product: np.ndarray = hessian @ b
        report.alpha = min(report.alpha, float(np.min(np.linalg.eigvalsh(0.5 * (product + product.T)))))

    if sys.entropy is None:
        report.failures.append("no entropy pair: entropy and dissipativity hypotheses not checked")
    else:
        report.entropy_compatible = (report.max_entropy_residual <= numerics.tol_entropy
                                     and report.min_hessian_eigenvalue > 0.0)
        report.dissipative = report.alpha > 0.0
        if not report.entropy_compatible:
            report.failures.append(
                f"entropy pair: residual {report.max_entropy_residual:.3e}, "
                f"min Hessian eigenvalue {report.min_hessian_eigenvalue:.3e}")
        if not report.dissipative:
            report.failures.append(f"viscosity not dissipative: alpha = {report.alpha:.6g}")

    logging.info(f"{sys.name}: hypotheses checked on {report.samples} samples, passed={report.passed}")
    return report


def classify_boundary(sys: HyperbolicSystem, region: StateBox, plan: SamplingPlan = SamplingPlan(),
                      numerics: Numerics = DEFAULT_NUMERICS) -> BoundaryRegime:
    """
    Classifies the boundary x = 0 on a region as non-characteristic or
    characteristic.

    :raises AmbiguousRegimeException: If more than one field violates the gap.
    :rtype: BoundaryRegime
    """
    points: np.ndarray = np.vstack((region.center[None, :], region.sample(plan)))
    speeds: np.ndarray = np.array([eigen_decompose(sys, u, numerics).eigenvalues for u in points])
    violators: List[int] = []
    for i in range(sys.n):
        column: np.ndarray = speeds[:, i]
        crosses: bool = bool(column.min() < 0.0 < column.max())
        if crosses or float(np.min(np.abs(column))) < numerics.c_min:
            violators.append(i)

    if not violators:
        p: int = int(np.sum(speeds[0] > 0.0))
        regime = BoundaryRegime(kind=RegimeKind.NON_CHARACTERISTIC, p=p, c=float(np.min(np.abs(speeds))))
    elif len(violators) == 1:
        k: int = violators[0]
        others: np.ndarray = np.delete(speeds, k, axis=1)
        gap: float = float(np.min(np.abs(others))) if others.size else float("inf")
        regime = BoundaryRegime(kind=RegimeKind.CHARACTERISTIC, k=k + 1, c=gap,
                                k_delta=float(np.max(np.abs(speeds[:, k]))))
    else:
        raise AmbiguousRegimeException(
            f"fields {[i + 1 for i in violators]} all approach zero speed on {region.to_dict()}")
    logging.debug(f"{sys.name}: boundary regime {regime}")
    return regime
