"""Dense spectral analysis of the preconditioned pencils.

Computes all eigenvalues of re_part x = lambda P x (expected to cluster at
1) and of the skew pencil (expected to cluster at 0, reported as the real
symmetric sequence +-mu), counts outliers per cluster radius and verifies
the h^2 bound on the symmetric convection remainder over mesh families.
Everything here is dense on purpose and capped in size: at these dimensions
the dense solvers are the most trustworthy oracle.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla

from . import assembly

DENSE_CAP = 4000
DEFAULT_RADII = (0.1, 0.01)


@dataclass
class SpectralReport:
    """Outlier statistics of one pencil at one cluster radius.

    Eigenvalues on the closed interval boundary count as clustered, matching
    the open-exclusion convention of the cluster definition.
    """

    pencil_id: str
    eigenvalues: np.ndarray
    cluster_center: float
    radius: float
    m_minus: int
    m_plus: int
    p_total: float
    lambda_min: float
    lambda_max: float

    def to_dict(self, with_eigenvalues=False):
        out = {
            "pencil": self.pencil_id,
            "center": self.cluster_center,
            "radius": self.radius,
            "m_minus": self.m_minus,
            "m_plus": self.m_plus,
            "p_total": self.p_total,
            "lambda_min": self.lambda_min,
            "lambda_max": self.lambda_max,
            "n": int(len(self.eigenvalues)),
        }
        if with_eigenvalues:
            out["eigenvalues"] = [float(v) for v in self.eigenvalues]
        return out


def _check_cap(n, cap):
    if n > cap:
        raise ValueError(
            f"dense spectral analysis refused at n = {n} (cap {cap}); "
            "analyze a coarser mesh or raise the cap explicitly")


def re_pencil_spectrum(system, precond, cap=DENSE_CAP):
    """All eigenvalues of the symmetric-definite pencil re_part x = lambda P x."""
    _check_cap(system.n, cap)
    re_dense = system.re_part.toarray()
    re_dense = (re_dense + re_dense.T) / 2.0
    p_dense = precond.matrix.toarray()
    p_dense = (p_dense + p_dense.T) / 2.0
    return np.sort(sla.eigh(re_dense, p_dense, eigvals_only=True))


def im_pencil_spectrum(system, precond, cap=DENSE_CAP):
    """Eigenvalues of the preconditioned skew pencil as a real +-mu sequence.

    The antisymmetric part S is congruence-transformed with the Cholesky
    factor of P into an antisymmetric matrix whose real Schur form is block
    diagonal with 2x2 rotation blocks; each block contributes a +-mu pair,
    so the returned sorted sequence is exactly symmetric about 0.
    """
    _check_cap(system.n, cap)
    n = system.n
    p_dense = precond.matrix.toarray()
    p_dense = (p_dense + p_dense.T) / 2.0
    chol = sla.cholesky(p_dense, lower=True)
    half = sla.solve_triangular(chol, system.skew_part.toarray(), lower=True)
    skew_sym = sla.solve_triangular(chol, half.T, lower=True)
    skew_sym = (skew_sym - skew_sym.T) / 2.0

    schur_t = sla.schur(skew_sym, output="real")[0]
    mus = []
    i = 0
    while i < n - 1:
        lower = schur_t[i + 1, i]
        if abs(lower) > 1e-14:
            mus.append(float(np.sqrt(abs(schur_t[i, i + 1] * lower))))
            i += 2
        else:
            i += 1
    values = np.zeros(n)
    pairs = np.array(mus)
    values[:len(pairs)] = -pairs
    values[n - len(pairs):] = pairs[::-1]
    return np.sort(values)


def outlier_table(eigenvalues, center, radii=DEFAULT_RADII, pencil_id="pencil"):
    """One SpectralReport per radius, counting eigenvalues strictly outside
    [center - radius, center + radius]."""
    eigenvalues = np.sort(np.asarray(eigenvalues, dtype=float))
    n = len(eigenvalues)
    reports = []
    for radius in radii:
        m_minus = int(np.sum(eigenvalues < center - radius))
        m_plus = int(np.sum(eigenvalues > center + radius))
        reports.append(SpectralReport(
            pencil_id=pencil_id,
            eigenvalues=eigenvalues,
            cluster_center=float(center),
            radius=float(radius),
            m_minus=m_minus,
            m_plus=m_plus,
            p_total=100.0 * (m_minus + m_plus) / n,
            lambda_min=float(eigenvalues[0]),
            lambda_max=float(eigenvalues[-1]),
        ))
    return reports


def analyze_pencils(system, precond, radii=DEFAULT_RADII, cap=DENSE_CAP):
    """Outlier reports for both pencils: cluster at 1 (re) and at 0 (im)."""
    re_reports = outlier_table(re_pencil_spectrum(system, precond, cap=cap),
                               center=1.0, radii=radii, pencil_id="re")
    im_reports = outlier_table(im_pencil_spectrum(system, precond, cap=cap),
                               center=0.0, radii=radii, pencil_id="im")
    return re_reports, im_reports


class RemainderNormRow(NamedTuple):
    """One mesh in a family: fineness, inf-norm of the symmetric convection
    remainder, its h^2-normalized ratio and the spectral norm."""

    h: float
    norm_inf: float
    ratio: float
    norm_two: float


def lemma_bound_check(meshes, coeff, quadrature="barycenter"):
    """Rows (h, ||E||_inf, ||E||_inf / h^2, ||E||_2) for a mesh family.

    A bounded ratio across decreasing h is the numerical counterpart of the
    O(h^2) bound on the symmetric part of the convection matrix.
    """
    rows = []
    for mesh in meshes:
        system = assembly.assemble(mesh, coeff, quadrature=quadrature)
        e_mat = assembly.e_matrix(system)
        norm_inf = float(np.max(np.abs(e_mat).sum(axis=1))) if e_mat.nnz else 0.0
        if e_mat.shape[0] <= DENSE_CAP:
            norm_two = float(np.max(np.abs(sla.eigvalsh(e_mat.toarray())))) if e_mat.nnz else 0.0
        else:
            from scipy.sparse.linalg import eigsh
            norm_two = float(abs(eigsh(e_mat, k=1, which="LM",
                                       return_eigenvectors=False)[0])) if e_mat.nnz else 0.0
        rows.append(RemainderNormRow(h=mesh.h, norm_inf=norm_inf,
                                     ratio=norm_inf / mesh.h ** 2, norm_two=norm_two))
    return rows


def element_skew_bound(system, samples=400):
    """Max antisymmetric element weight vs. its theoretical bound 2 h sup|beta|.

    Returns (max_weight, bound); the convection sup-norm is estimated on a
    sample grid plus the element barycenters.
    """
    xs = np.linspace(0.0, 1.0, int(np.sqrt(samples)))
    grid_x, grid_y = np.meshgrid(xs, xs)
    bx, by = system.coeff.beta(grid_x.ravel(), grid_y.ravel())
    sup = float(np.max(np.hypot(np.asarray(bx, float), np.asarray(by, float))))
    max_weight = 0.0
    for element in range(system.mesh.n_triangles):
        weights, _ = assembly.elementary_skew_decomposition(system, element)
        max_weight = max(max_weight, max(abs(w) for w in weights))
    return max_weight, 2.0 * system.mesh.h * sup
