"""Preconditioned CG and GMRES kernels for the splitting half-steps.

Both kernels stop on the true (unpreconditioned) residual:
||b - A x||_2 <= max(rtol * ||b||_2, atol).  GMRES is left-preconditioned
with classical Gram-Schmidt plus one reorthogonalization pass, so repeated
runs are bit-identical.  ``min_iterations`` forces at least that many steps
even when the start vector already meets the threshold; the outer splitting
iteration uses this to guarantee progress of warm-started inner solves.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


@dataclass
class InnerSolveReport:
    """Outcome of one inner solve."""

    iterations: int
    final_relative_residual: float
    breakdown: bool = False
    converged: bool = False


def _as_matvec(A):
    if callable(A):
        return A
    return lambda v: A @ v


def _as_psolve(M):
    if M is None:
        return lambda v: v
    if hasattr(M, "solve"):
        return M.solve
    return M


def pcg(A, b, M=None, rtol=1e-7, atol=0.0, maxiter=None, x0=None, min_iterations=0,
        callback=None):
    """Preconditioned conjugate gradients for SPD operators.

    Returns (x, InnerSolveReport).  ``M`` may be None, a callable applying
    the inverse preconditioner, or an object with a ``solve`` method.
    Detected indefiniteness (p' A p <= 0) sets the breakdown flag.
    ``callback(x, r)`` is invoked after every iteration with the current
    iterate and true residual.
    """
    matvec = _as_matvec(A)
    psolve = _as_psolve(M)
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    maxiter = n if maxiter is None else int(maxiter)
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)

    norm_b = np.linalg.norm(b)
    if norm_b == 0.0 and min_iterations == 0:
        return np.zeros(n), InnerSolveReport(0, 0.0, converged=True)
    threshold = max(rtol * norm_b, atol)

    r = b - matvec(x)
    res = np.linalg.norm(r)
    if res <= threshold and min_iterations == 0:
        return x, InnerSolveReport(0, res / norm_b if norm_b else 0.0, converged=True)

    z = psolve(r)
    p = z.copy()
    rz = float(r @ z)
    iterations = 0
    breakdown = False
    while iterations < maxiter:
        q = matvec(p)
        pq = float(p @ q)
        if pq <= 0.0 or rz <= 0.0:
            breakdown = True
            break
        step = rz / pq
        x = x + step * p
        r = r - step * q
        iterations += 1
        res = np.linalg.norm(r)
        if callback is not None:
            callback(x, r)
        if res <= threshold and iterations >= min_iterations:
            break
        z = psolve(r)
        rz_next = float(r @ z)
        p = z + (rz_next / rz) * p
        rz = rz_next

    relres = res / norm_b if norm_b else res
    converged = (not breakdown) and res <= threshold
    return x, InnerSolveReport(iterations, relres, breakdown=breakdown, converged=converged)


def pgmres(A, b, M=None, rtol=1e-7, atol=0.0, maxiter=None, restart=None, x0=None,
           min_iterations=0, callback=None):
    """Left-preconditioned GMRES with true-residual stopping.

    Arnoldi runs on M^{-1} A; the reported and tested residual is the true
    relative residual of A x = b.  ``restart`` is the cycle length (default:
    no restart).  A happy Arnoldi breakdown with the residual still above
    the threshold sets the breakdown flag.
    """
    matvec = _as_matvec(A)
    psolve = _as_psolve(M)
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    maxiter = n if maxiter is None else int(maxiter)
    cycle = maxiter if restart is None else max(1, int(restart))
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)

    norm_b = np.linalg.norm(b)
    if norm_b == 0.0 and min_iterations == 0:
        return np.zeros(n), InnerSolveReport(0, 0.0, converged=True)
    threshold = max(rtol * norm_b, atol)

    res = np.linalg.norm(b - matvec(x))
    if res <= threshold and min_iterations == 0:
        return x, InnerSolveReport(0, res / norm_b if norm_b else 0.0, converged=True)

    iterations = 0
    breakdown = False
    done = False
    while iterations < maxiter and not done:
        x_cycle = x.copy()
        z0 = psolve(b - matvec(x_cycle))
        beta = np.linalg.norm(z0)
        if beta == 0.0:
            break
        basis = [z0 / beta]
        hess_cols = []
        steps = min(cycle, maxiter - iterations)
        for j in range(steps):
            w = psolve(matvec(basis[j]))
            col = np.zeros(j + 2)
            for i in range(j + 1):
                col[i] = float(basis[i] @ w)
                w = w - col[i] * basis[i]
            for i in range(j + 1):  # one reorthogonalization pass
                corr = float(basis[i] @ w)
                col[i] += corr
                w = w - corr * basis[i]
            col[j + 1] = np.linalg.norm(w)
            hess_cols.append(col)
            iterations += 1

            hess = np.zeros((j + 2, j + 1))
            for c, column in enumerate(hess_cols):
                hess[:len(column), c] = column
            rhs = np.zeros(j + 2)
            rhs[0] = beta
            y = scipy.linalg.lstsq(hess, rhs, lapack_driver="gelsd")[0]
            x = x_cycle + np.column_stack(basis[:j + 1]) @ y
            residual_vec = b - matvec(x)
            res = np.linalg.norm(residual_vec)
            if callback is not None:
                callback(x, residual_vec)
            happy = col[j + 1] <= 1e-14 * beta
            if (res <= threshold and iterations >= min_iterations) or happy:
                if happy and res > threshold:
                    breakdown = True
                done = True
                break
            if iterations >= maxiter:
                break
            basis.append(w / col[j + 1])

    relres = res / norm_b if norm_b else res
    converged = (not breakdown) and res <= threshold
    return x, InnerSolveReport(iterations, relres, breakdown=breakdown, converged=converged)
