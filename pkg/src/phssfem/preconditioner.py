"""Diagonal-scaled Poisson preconditioner.

P = D^{1/2} * L * D^{1/2}, where L is the constant-coefficient stiffness
matrix on the same mesh and D rescales L's diagonal to match the variable
coefficient stiffness diagonal.  Applying P costs one sparse matvec plus
diagonal scalings; solving with P reuses one cached sparse factorization of
L across all outer and inner iterations.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from . import assembly, coefficients


class FactorizationError(RuntimeError):
    """The constant-coefficient stiffness matrix could not be factorized."""


class PhssPreconditioner:
    """Holds the diagonal scaling, the Poisson matrix and its factorization.

    Build with :meth:`build` from the two stiffness matrices, or with
    :meth:`from_system` straight from an assembled system.  Instances are
    immutable after construction; ``apply``/``solve`` are reentrant.
    """

    def __init__(self, diag_sqrt, laplacian, solver):
        self.diag_sqrt = np.asarray(diag_sqrt, dtype=float)
        self.laplacian = laplacian.tocsr()
        self.laplacian_solver = solver
        self._inv_sqrt = 1.0 / self.diag_sqrt
        self.diag_sqrt.setflags(write=False)
        self._matrix = None

    @classmethod
    def build(cls, stiffness_a, stiffness_unit):
        """Preconditioner from the variable and unit coefficient stiffness matrices.

        diag_sqrt_i = sqrt(stiffness_a_ii / stiffness_unit_ii); the sparse
        factorization of stiffness_unit (SuperLU, symmetric mode with a
        fill-reducing ordering) is computed once and cached.
        """
        if stiffness_a.shape != stiffness_unit.shape:
            raise ValueError("stiffness matrices must have equal shape")
        diag_a = stiffness_a.diagonal()
        diag_1 = stiffness_unit.diagonal()
        if np.any(diag_a <= 0) or np.any(diag_1 <= 0):
            bad = int(np.argmin(np.minimum(diag_a, diag_1)))
            raise ValueError(f"nonpositive stiffness diagonal at row {bad}")
        try:
            solver = splu(sp.csc_matrix(stiffness_unit),
                          permc_spec="MMD_AT_PLUS_A",
                          options=dict(SymmetricMode=True))
        except RuntimeError as exc:
            raise FactorizationError(str(exc)) from exc
        probe = solver.solve(np.ones(stiffness_unit.shape[0]))
        if not np.all(np.isfinite(probe)):
            raise FactorizationError("factorization of the Poisson matrix is singular")
        return cls(np.sqrt(diag_a / diag_1), sp.csr_matrix(stiffness_unit), solver)

    @classmethod
    def from_system(cls, system):
        """Build for an assembled system, assembling the unit-coefficient
        stiffness matrix on its mesh with the same quadrature rule."""
        unit = assembly.assemble(system.mesh, coefficients.constant(1.0),
                                 quadrature=system.quadrature)
        return cls.build(system.stiffness, unit.stiffness)

    @property
    def n(self):
        return self.laplacian.shape[0]

    @property
    def matrix(self):
        """P as an explicit sparse matrix (same sparsity as the Poisson matrix)."""
        if self._matrix is None:
            d = sp.diags(self.diag_sqrt)
            self._matrix = (d @ self.laplacian @ d).tocsr()
        return self._matrix

    def _check(self, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (self.n,):
            raise ValueError(f"vector of length {v.shape} does not match n = {self.n}")
        return v

    def apply(self, v):
        """P @ v at sparse-matvec cost."""
        v = self._check(v)
        return self.diag_sqrt * (self.laplacian @ (self.diag_sqrt * v))

    def solve(self, v):
        """P^{-1} @ v via the cached factorization."""
        v = self._check(v)
        return self._inv_sqrt * self.laplacian_solver.solve(self._inv_sqrt * v)
