"""P1 finite element assembly over interior nodes with Dirichlet elimination.

Builds the diffusion stiffness matrix, the convection matrix, their
symmetric/antisymmetric split and the load vector in CSR form.  Quadrature
rules are selected by id: the one-point "barycenter" rule is the default,
"vertex" (trapezoidal) and "edge" (edge midpoints) are O(h^2) alternatives,
and "order5" is a 7-point degree-5 rule used as the near-exact reference.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.io
import scipy.sparse as sp

from .coefficients import CoefficientField
from .mesh import TriangularMesh


class AssemblyError(ValueError):
    """Raised when a coefficient violates assembly preconditions."""


def _degree5_rule():
    a = (6.0 - np.sqrt(15.0)) / 21.0
    b = (6.0 + np.sqrt(15.0)) / 21.0
    wa = (155.0 - np.sqrt(15.0)) / 1200.0
    wb = (155.0 + np.sqrt(15.0)) / 1200.0
    points = [(1 / 3, 1 / 3, 1 / 3),
              (a, a, 1 - 2 * a), (a, 1 - 2 * a, a), (1 - 2 * a, a, a),
              (b, b, 1 - 2 * b), (b, 1 - 2 * b, b), (1 - 2 * b, b, b)]
    weights = [9.0 / 40.0, wa, wa, wa, wb, wb, wb]
    return points, weights


#: rule id -> (barycentric points, weights summing to 1)
QUADRATURE_RULES = {
    "barycenter": ([(1 / 3, 1 / 3, 1 / 3)], [1.0]),
    "vertex": ([(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)], [1 / 3] * 3),
    "edge": ([(0.5, 0.5, 0.0), (0.0, 0.5, 0.5), (0.5, 0.0, 0.5)], [1 / 3] * 3),
    "order5": _degree5_rule(),
}


@dataclass
class AssembledSystem:
    """Interior-node matrices of the discrete convection-diffusion operator.

    ``stiffness`` is the symmetric diffusion part, ``convection`` the
    (nonsymmetric) convection part; ``re_part = stiffness + sym(convection)``
    and ``skew_part = antisym(convection)`` give the exact additive split
    ``stiffness + convection = re_part + skew_part``.
    """

    stiffness: sp.csr_matrix
    convection: sp.csr_matrix
    re_part: sp.csr_matrix
    skew_part: sp.csr_matrix
    load: np.ndarray
    mesh: TriangularMesh
    coeff: CoefficientField
    quadrature: str

    @property
    def n(self):
        return self.stiffness.shape[0]

    @property
    def full_matrix(self):
        """The complete operator (stiffness + convection)."""
        return self._full

    def __post_init__(self):
        self._full = (self.stiffness + self.convection).tocsr()


def _geometry(mesh):
    """Element corner coordinates, signed doubled areas and hat gradients."""
    p = mesh.nodes[mesh.triangles]  # (nt, 3, 2)
    det = ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
           - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))
    grad = np.empty_like(p)
    grad[:, 0, 0] = p[:, 1, 1] - p[:, 2, 1]
    grad[:, 0, 1] = p[:, 2, 0] - p[:, 1, 0]
    grad[:, 1, 0] = p[:, 2, 1] - p[:, 0, 1]
    grad[:, 1, 1] = p[:, 0, 0] - p[:, 2, 0]
    grad[:, 2, 0] = p[:, 0, 1] - p[:, 1, 1]
    grad[:, 2, 1] = p[:, 1, 0] - p[:, 0, 0]
    grad /= det[:, None, None]
    return p, det, grad


def _finalize(matrix):
    matrix = matrix.tocsr()
    matrix.sum_duplicates()
    matrix.eliminate_zeros()
    matrix.sort_indices()
    return matrix


def assemble(mesh, coeff, quadrature="barycenter"):
    """Assemble stiffness, convection, their split and the load vector.

    Element contributions use the chosen quadrature rule; rows and columns
    of boundary nodes are eliminated so the system dimension is the number
    of interior nodes.  Raises AssemblyError if the diffusion coefficient is
    nonpositive at any quadrature point (naming the element) and ValueError
    for an unknown rule or a mesh without interior nodes.
    """
    if quadrature not in QUADRATURE_RULES:
        raise ValueError(f"unknown quadrature rule {quadrature!r}; "
                         f"choose from {sorted(QUADRATURE_RULES)}")
    if mesh.n_interior < 1:
        raise ValueError("mesh has no interior nodes; nothing to assemble")

    points, weights = QUADRATURE_RULES[quadrature]
    corners, det, grad = _geometry(mesh)
    area = det / 2.0
    nt = mesh.n_triangles

    gram = np.einsum("kid,kjd->kij", grad, grad)          # grad_i . grad_j
    loc_stiff = np.zeros((nt, 3, 3))
    loc_conv = np.zeros((nt, 3, 3))
    loc_load = np.zeros((nt, 3))
    for (l1, l2, l3), w in zip(points, weights):
        qx = l1 * corners[:, 0, 0] + l2 * corners[:, 1, 0] + l3 * corners[:, 2, 0]
        qy = l1 * corners[:, 0, 1] + l2 * corners[:, 1, 1] + l3 * corners[:, 2, 1]
        a_q = np.asarray(coeff.a(qx, qy), dtype=float)
        if np.any(a_q <= 0):
            bad = int(np.argmin(a_q))
            raise AssemblyError(
                f"diffusion coefficient a = {a_q[bad]:g} is not positive at a "
                f"quadrature point of element {bad}")
        bx, by = coeff.beta(qx, qy)
        f_q = np.asarray(coeff.f(qx, qy), dtype=float)
        phi = np.array([l1, l2, l3])
        loc_stiff += (w * a_q * area)[:, None, None] * gram
        grad_beta = grad[:, :, 0] * np.asarray(bx, float)[:, None] \
            + grad[:, :, 1] * np.asarray(by, float)[:, None]
        loc_conv -= (w * area)[:, None, None] * grad_beta[:, :, None] * phi[None, None, :]
        loc_load += (w * f_q * area)[:, None] * phi[None, :]

    rows = np.repeat(mesh.triangles, 3, axis=1).ravel()
    cols = np.tile(mesh.triangles, (1, 3)).ravel()
    n_all = mesh.n_nodes
    stiff_all = sp.coo_matrix((loc_stiff.ravel(), (rows, cols)), shape=(n_all, n_all))
    conv_all = sp.coo_matrix((loc_conv.ravel(), (rows, cols)), shape=(n_all, n_all))
    load_all = np.zeros(n_all)
    np.add.at(load_all, mesh.triangles.ravel(), loc_load.ravel())

    keep = mesh.interior_nodes
    stiffness = _finalize(stiff_all.tocsr()[keep][:, keep])
    convection = _finalize(conv_all.tocsr()[keep][:, keep])
    sym = _finalize((convection + convection.T) * 0.5)
    skew = _finalize((convection - convection.T) * 0.5)
    re_part = _finalize(stiffness + sym)
    return AssembledSystem(stiffness=stiffness, convection=convection, re_part=re_part,
                           skew_part=skew, load=load_all[keep], mesh=mesh, coeff=coeff,
                           quadrature=quadrature)


def e_matrix(system):
    """Symmetric part of the convection matrix (zero for divergence-free beta)."""
    return _finalize((system.convection + system.convection.T) * 0.5)


#: unit antisymmetric patterns for the three off-diagonal positions of a
#: 3x3 element matrix; the element skew part equals -1/2 * sum(w_r * U_r).
SKEW_PATTERNS = (
    np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]),
    np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, -1.0, 0.0]]),
    np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]),
)


def elementary_skew_decomposition(system, element):
    """Antisymmetric weights and patterns of one element's convection matrix.

    For element K with local convection integrals
    g_ij = int_K (grad phi_i . beta) phi_j (under the system's quadrature
    rule), returns (weights, patterns) with weights
    (g12-g21, g23-g32, g13-g31); the element's skew part is
    -1/2 * sum(weights[r] * patterns[r]).
    """
    mesh = system.mesh
    tri = mesh.triangles[element]
    corners = mesh.nodes[tri]
    det = ((corners[1, 0] - corners[0, 0]) * (corners[2, 1] - corners[0, 1])
           - (corners[2, 0] - corners[0, 0]) * (corners[1, 1] - corners[0, 1]))
    area = det / 2.0
    grad = np.array([
        [corners[1, 1] - corners[2, 1], corners[2, 0] - corners[1, 0]],
        [corners[2, 1] - corners[0, 1], corners[0, 0] - corners[2, 0]],
        [corners[0, 1] - corners[1, 1], corners[1, 0] - corners[0, 0]],
    ]) / det

    points, weights = QUADRATURE_RULES[system.quadrature]
    gamma = np.zeros((3, 3))
    for (l1, l2, l3), w in zip(points, weights):
        q = l1 * corners[0] + l2 * corners[1] + l3 * corners[2]
        bx, by = system.coeff.beta(np.array([q[0]]), np.array([q[1]]))
        gb = grad @ np.array([float(np.asarray(bx).ravel()[0]),
                              float(np.asarray(by).ravel()[0])])
        gamma += w * area * np.outer(gb, [l1, l2, l3])
    w_values = (gamma[0, 1] - gamma[1, 0],
                gamma[1, 2] - gamma[2, 1],
                gamma[0, 2] - gamma[2, 0])
    return w_values, SKEW_PATTERNS


def write_matrixmarket(path, matrix):
    """Export a sparse matrix in MatrixMarket coordinate format."""
    scipy.io.mmwrite(path, sp.coo_matrix(matrix))


def read_matrixmarket(path):
    return sp.csr_matrix(scipy.io.mmread(path))
