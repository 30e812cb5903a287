"""Outer two-step splitting iterations: HSS, PHSS and inexact PHSS.

One outer iteration alternates two shifted half-step solves,

    (alpha*P + re_part)  x^{k+1/2} = (alpha*P - skew_part) x^k     + b
    (alpha*P + skew_part) x^{k+1}  = (alpha*P - re_part)  x^{k+1/2} + b

with P the diagonal-scaled Poisson preconditioner (PHSS/IPHSS) or the
identity (HSS).  The first half-step is SPD and solved by PCG, the second
by GMRES, both preconditioned with P and warm-started from the current
iterate.  The outer stopping test uses the true residual of the full
system, ||b - A x^k|| <= outer_tol * ||b - A x^0||, from x^0 = 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .krylov import pcg, pgmres

MODES = ("HSS", "PHSS", "IPHSS")


@dataclass
class PhssConfig:
    """Outer-iteration parameters.

    ``inner_tol`` is the relative tolerance handed to the inner solvers in
    HSS/PHSS mode (defaults to ``outer_tol``).  IPHSS instead derives an
    absolute threshold 0.1 * eta^k * ||r_k|| from the residual r_k entering
    outer step k (steps counted from 1), floored at
    ``inexact_floor * outer_tol * ||r_0||`` to avoid over-solving near
    convergence; setting ``inexact_floor = 0`` removes the floor, and
    eta -> 0 then makes the inner solves exact.
    """

    alpha: float = 1.0
    outer_tol: float = 1e-7
    outer_maxit: int = 500
    mode: str = "PHSS"
    eta: float = 0.9
    inner_tol: float | None = None
    inexact_floor: float = 0.1

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not 0 < self.eta < 1:
            raise ValueError(f"eta must lie in (0, 1), got {self.eta}")
        if not 0 < self.outer_tol < 1:
            raise ValueError(f"outer_tol must lie in (0, 1), got {self.outer_tol}")
        if self.inner_tol is not None and not 0 < self.inner_tol < 1:
            raise ValueError(f"inner_tol must lie in (0, 1), got {self.inner_tol}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")


@dataclass
class IterationReport:
    """Per-run convergence record.

    ``residual_history[k]`` is the true relative residual after k outer
    iterations (entry 0 is 1.0); averages are totals divided by the outer
    count.
    """

    outer_iterations: int
    pcg_total: int
    pgmres_total: int
    residual_history: list[float]
    converged: bool
    alpha_used: float
    mode: str
    pcg_per_outer: list[int] = field(default_factory=list)
    pgmres_per_outer: list[int] = field(default_factory=list)
    inner_breakdown: bool = False

    @property
    def pcg_avg_per_outer(self):
        return self.pcg_total / self.outer_iterations if self.outer_iterations else 0.0

    @property
    def pgmres_avg_per_outer(self):
        return self.pgmres_total / self.outer_iterations if self.outer_iterations else 0.0


def _run(system, precond, config, b, mode):
    n = system.n
    b = system.load if b is None else np.asarray(b, dtype=float)
    if b.shape != (n,):
        raise ValueError(f"right-hand side of shape {b.shape} does not match n = {n}")

    re_part = system.re_part
    skew = system.skew_part
    full = system.full_matrix
    alpha = config.alpha
    if mode == "HSS":
        shift = sp.identity(n, format="csr")
        inner_m = None
    else:
        shift = precond.matrix
        inner_m = precond
    half1 = (alpha * shift + re_part).tocsr()
    half2 = (alpha * shift + skew).tocsr()
    inner_tol = config.outer_tol if config.inner_tol is None else config.inner_tol
    # inner residuals are amplified by roughly ||A|| / alpha in the outer
    # residual when the shift is the identity; with the preconditioner the
    # amplification is O(1) by spectral equivalence
    if mode == "HSS":
        amplification = 1.0 + np.max(np.abs(full).sum(axis=1)) / alpha
    else:
        amplification = 1.0
    inner_floor = config.inexact_floor * config.outer_tol / amplification

    x = np.zeros(n)
    r0 = float(np.linalg.norm(b))
    history = [1.0]
    pcg_counts = []
    pgmres_counts = []
    breakdown = False
    if r0 == 0.0:
        return x, IterationReport(0, 0, 0, history, True, alpha, mode)

    residual = r0
    for k in range(config.outer_maxit):
        if residual <= config.outer_tol * r0:
            break
        if mode == "PHSS":
            rtol, atol = inner_tol, 0.0
        else:
            # IPHSS rule; also used for HSS, whose slow outer contraction
            # needs inner accuracy proportional to the shrinking residual
            rtol, atol = 0.0, max(0.1 * config.eta ** (k + 1) * residual,
                                  inner_floor * r0)
        rhs = alpha * (shift @ x) - skew @ x + b
        x_half, rep1 = pcg(half1, rhs, M=inner_m, rtol=rtol, atol=atol,
                           maxiter=10 * n, x0=x, min_iterations=1)
        rhs = alpha * (shift @ x_half) - re_part @ x_half + b
        x, rep2 = pgmres(half2, rhs, M=inner_m, rtol=rtol, atol=atol,
                         maxiter=n, x0=x_half, min_iterations=1)
        pcg_counts.append(rep1.iterations)
        pgmres_counts.append(rep2.iterations)
        breakdown = breakdown or rep1.breakdown or rep2.breakdown
        residual = float(np.linalg.norm(b - full @ x))
        history.append(residual / r0)

    converged = history[-1] <= config.outer_tol
    return x, IterationReport(
        outer_iterations=len(pcg_counts),
        pcg_total=sum(pcg_counts),
        pgmres_total=sum(pgmres_counts),
        residual_history=history,
        converged=converged,
        alpha_used=alpha,
        mode=mode,
        pcg_per_outer=pcg_counts,
        pgmres_per_outer=pgmres_counts,
        inner_breakdown=breakdown,
    )


def phss_solve(system, precond, config=None, b=None):
    """Exact-formulation PHSS: inner solves run at ``inner_tol``."""
    return _run(system, precond, config or PhssConfig(), b, "PHSS")


def iphss_solve(system, precond, config=None, b=None):
    """Inexact PHSS: inner thresholds track the outer residual (0.1 * eta^k)."""
    return _run(system, precond, config or PhssConfig(), b, "IPHSS")


def hss_solve(system, config=None, b=None):
    """Unpreconditioned splitting iteration (identity shift, plain CG/GMRES)."""
    return _run(system, None, config or PhssConfig(), b, "HSS")


def solve(system, precond, config, b=None):
    """Dispatch on ``config.mode``."""
    if config.mode == "HSS":
        return hss_solve(system, config, b)
    if config.mode == "PHSS":
        return phss_solve(system, precond, config, b)
    return iphss_solve(system, precond, config, b)


def convergence_bound(alpha, pencil_eigenvalues):
    """max |alpha - lam| / (alpha + lam) over the given pencil eigenvalues.

    This is the classical bound on the outer contraction factor; it is < 1
    for any alpha > 0 when all eigenvalues are positive.
    """
    lam = np.asarray(pencil_eigenvalues, dtype=float)
    return float(np.max(np.abs(alpha - lam) / (alpha + lam)))


@dataclass
class AlphaEstimate:
    """Result of the optimal-shift probe.

    ``alpha_star = sqrt(lambda_min * lambda_max)`` minimizes the
    convergence bound; ``sigma_star = (sqrt(kappa)-1)/(sqrt(kappa)+1)`` with
    ``kappa = lambda_max / lambda_min`` is its value at the optimum.
    """

    alpha_star: float
    kappa: float
    sigma_star: float
    lambda_min: float
    lambda_max: float
    fallback_used: bool = False
    restarts: int = 0


def optimal_alpha(system, precond, probe_iterations=80, seed=2024):
    """Estimate the extreme eigenvalues of re_part x = lambda P x.

    Runs a Lanczos process for the P-self-adjoint operator P^{-1} re_part
    using P-inner products and full reorthogonalization (so repeated runs
    are deterministic).  On early breakdown the process restarts with a
    fresh vector; if restarts stall, a few power iterations refine the
    upper extreme and the result is flagged.
    """
    re_part = system.re_part
    n = system.n
    rng = np.random.default_rng(seed)
    steps = int(min(probe_iterations, n))

    basis = []          # P-orthonormal Lanczos vectors
    applied = []        # P * v for each basis vector (for reorthogonalization)
    tmat = np.zeros((steps, steps))
    fallback = False

    def p_orthonormalize(v):
        for _ in range(2):
            for u, pu in zip(basis, applied):
                v = v - (pu @ v) * u
        pv = precond.apply(v)
        norm = np.sqrt(max(pv @ v, 0.0))
        return v, pv, norm

    j = 0
    restarts = 0
    while j < steps:
        if j == 0 or restart_needed:
            v = rng.standard_normal(n)
            v, pv, norm = p_orthonormalize(v)
            if norm <= 1e-14 * np.linalg.norm(v):
                break
            v /= norm
            pv /= norm
        basis.append(v)
        applied.append(pv)
        w = precond.solve(re_part @ v)
        tmat[j, j] = float(applied[j] @ w)
        w, pw, beta = p_orthonormalize(w)
        restart_needed = False
        if beta <= max(1e-12, 1e-10 * abs(tmat[j, j])):
            restarts += 1
            if restarts > 2 or j + 1 >= steps:
                j += 1
                break
            restart_needed = True
        else:
            if j + 1 < steps:
                tmat[j, j + 1] = tmat[j + 1, j] = beta
            v = w / beta
            pv = pw / beta
        j += 1

    ritz = np.linalg.eigvalsh(tmat[:j, :j]) if j else np.array([1.0])
    lam_min = float(ritz[0])
    lam_max = float(ritz[-1])

    if lam_min <= 0 or not np.isfinite(lam_min):
        # degenerate probe; refine with plain power iterations on P^{-1} re_part
        fallback = True
        v = rng.standard_normal(n)
        for _ in range(50):
            v = precond.solve(re_part @ v)
            v /= np.linalg.norm(v)
        lam_max = float((v @ (re_part @ v)) / (v @ precond.apply(v)))
        lam_min = min(lam_max, max(lam_min, 1e-12))

    kappa = lam_max / lam_min
    return AlphaEstimate(
        alpha_star=float(np.sqrt(lam_min * lam_max)),
        kappa=float(kappa),
        sigma_star=float((np.sqrt(kappa) - 1.0) / (np.sqrt(kappa) + 1.0)),
        lambda_min=lam_min,
        lambda_max=lam_max,
        fallback_used=fallback,
        restarts=restarts,
    )
