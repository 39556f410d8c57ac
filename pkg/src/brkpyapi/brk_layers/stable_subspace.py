import logging
from dataclasses import dataclass
from typing import List, NamedTuple, Optional

import numpy as np
import scipy.linalg

from brkpyapi.brk_core.brk_constants import DEFAULT_NUMERICS, Numerics
from brkpyapi.brk_core.hyperbolic_system import HyperbolicSystem
from brkpyapi.brk_core.spectral import orient_columns
from brkpyapi.brk_core.system_exception import NearSingularException


def layer_matrix(sys: HyperbolicSystem, u: np.ndarray) -> np.ndarray:
    """
    Linearization B(U)^-1 DF(U) of the layer equation at an equilibrium.
    """
    return np.linalg.solve(sys.B(u), sys.DF(u))


@dataclass(frozen=True, eq=False)
class InvariantSubspace:
    """
    Invariant subspace of the layer matrix M.

    :param basis: Columns spanning the subspace (n x m).
    :type basis: np.ndarray
    :param generator: Restriction Lambda = basis^+ M basis (m x m).
    :type generator: np.ndarray
    :param eigenvalues: Eigenvalues of M in the subspace.
    :type eigenvalues: np.ndarray
    :param signature_consistent: Dimension equals the count of negative eigenvalues of DF, None when not checked.
    :type signature_consistent: Optional[bool]
    """
    basis: np.ndarray
    generator: np.ndarray
    eigenvalues: np.ndarray
    signature_consistent: Optional[bool] = None

    @property
    def dimension(self) -> int:
        return self.basis.shape[1]

    @property
    def slowest_rate(self) -> float:
        return float(np.min(-self.eigenvalues.real)) if self.dimension else float("inf")

    @property
    def fastest_rate(self) -> float:
        return float(np.max(-self.eigenvalues.real)) if self.dimension else 0.0

    def extended(self, vector: np.ndarray, eigenvalue: float, m: np.ndarray) -> "InvariantSubspace":
        """
        Appends an eigenvector of M as a last, non-orthonormal column.
        """
        basis: np.ndarray = np.column_stack((self.basis, vector))
        return InvariantSubspace(basis=basis, generator=np.linalg.pinv(basis) @ m @ basis,
                                 eigenvalues=np.append(self.eigenvalues, eigenvalue))


class SlowMode(NamedTuple):
    eigenvalue: float
    right: np.ndarray
    left: np.ndarray


def slow_mode(sys: HyperbolicSystem, u: np.ndarray) -> SlowMode:
    """
    Eigenvalue of B^-1 DF closest to zero with its right and left eigenvectors,
    normalized so that left . right = 1.
    """
    m: np.ndarray = layer_matrix(sys, u)
    w, vl, vr = scipy.linalg.eig(m, left=True, right=True)
    idx: int = int(np.argmin(np.abs(w.real)))
    right: np.ndarray = np.array(vr[:, idx].real, dtype=float).reshape(-1, 1)
    orient_columns(right)
    left: np.ndarray = np.array(vl[:, idx].real, dtype=float)
    left /= float(left @ right[:, 0])
    return SlowMode(eigenvalue=float(w[idx].real), right=right[:, 0], left=left)


def stable_subspace(sys: HyperbolicSystem, u_bar: np.ndarray, numerics: Numerics = DEFAULT_NUMERICS,
                    exclude_center: bool = False) -> InvariantSubspace:
    """
    Orthonormal basis of the span of eigenvectors of B^-1 DF with Re < -tol_eig.

    :param sys: Hyperbolic system.
    :type sys: HyperbolicSystem
    :param u_bar: Equilibrium.
    :type u_bar: np.ndarray
    :param numerics: Tolerances.
    :type numerics: Numerics
    :param exclude_center: Drop the eigenvalue closest to zero instead of failing on it.
    :type exclude_center: bool
    :raises NearSingularException: If an eigenvalue is near zero and not excluded.
    :return: Basis, restricted generator and eigenvalues.
    :rtype: InvariantSubspace
    """
    m: np.ndarray = layer_matrix(sys, u_bar)
    w, vectors = scipy.linalg.eig(m)
    center: int = int(np.argmin(np.abs(w.real)))
    if abs(w[center].real) < numerics.tol_eig and not exclude_center:
        raise NearSingularException(f"B^-1 DF has eigenvalue {w[center]} near zero at U={u_bar.tolist()}")

    selected: np.ndarray = w.real < -numerics.tol_eig
    if exclude_center:
        selected[center] = False
    order: np.ndarray = np.lexsort((w.imag, w.real))
    columns: List[np.ndarray] = []
    eigenvalues: List[complex] = []
    for i in order:
        if not selected[i]:
            continue
        if abs(w[i].imag) <= numerics.tol_eig * max(1.0, abs(w[i])):
            columns.append(vectors[:, i].real)
            eigenvalues.append(w[i].real)
        elif w[i].imag > 0.0:
            v: np.ndarray = vectors[:, i]
            k: int = int(np.argmax(np.abs(v)))
            v = v * (abs(v[k]) / v[k])
            columns.extend([v.real, v.imag])
            eigenvalues.extend([w[i], np.conj(w[i])])

    n: int = sys.n
    if not columns:
        return InvariantSubspace(basis=np.zeros((n, 0)), generator=np.zeros((0, 0)),
                                 eigenvalues=np.zeros(0), signature_consistent=None)
    raw: np.ndarray = np.column_stack(columns)
    orient_columns(raw)
    q, r = np.linalg.qr(raw)
    signs: np.ndarray = np.where(np.diag(r) < 0.0, -1.0, 1.0)
    q = q * signs
    consistent: Optional[bool] = None
    if not exclude_center:
        consistent = q.shape[1] == int(np.sum(scipy.linalg.eigvals(sys.DF(u_bar)).real < 0.0))
        if not consistent:
            logging.warning(f"stable dimension {q.shape[1]} differs from the negative count of DF at {u_bar.tolist()}")
    return InvariantSubspace(basis=q, generator=q.T @ m @ q, eigenvalues=np.asarray(eigenvalues),
                             signature_consistent=consistent)
