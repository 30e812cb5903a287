import numpy as np
import pytest
import scipy.sparse as sp

import phssfem as pf
from phssfem.krylov import pcg, pgmres


def _random_spd(n, seed):
    rng = np.random.default_rng(seed)
    r = rng.standard_normal((n, n))
    return r @ r.T + n * np.eye(n)


def _random_nonsym(n, seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n, n)) + n * np.eye(n)


def test_pcg_identity_single_iteration():
    b = np.arange(1.0, 9.0)
    x, report = pcg(sp.identity(8, format="csr"), b)
    assert report.iterations == 1
    assert report.converged
    assert np.allclose(x, b, rtol=1e-14)


def test_pcg_perfect_preconditioner(bundle):
    system, _ = bundle("a1", 8)
    stiffness = pf.assemble(pf.structured_unit_square(8), pf.constant(1.0)).stiffness
    exact = pf.PhssPreconditioner.build(stiffness, stiffness)
    b = np.ones(stiffness.shape[0])
    x, report = pcg(stiffness, b, M=exact, rtol=1e-10)
    assert report.iterations == 1
    assert np.linalg.norm(b - stiffness @ x) <= 1e-10 * np.linalg.norm(b)


def test_pcg_matches_direct_solution():
    a = _random_spd(50, seed=1)
    b = np.random.default_rng(2).standard_normal(50)
    direct = np.linalg.solve(a, b)
    x, report = pcg(sp.csr_matrix(a), b, rtol=0.0, atol=0.0, maxiter=50)
    assert np.linalg.norm(x - direct) <= 1e-8 * np.linalg.norm(direct)
    assert report.iterations <= 50


def test_pgmres_matches_direct_solution():
    a = _random_nonsym(50, seed=3)
    b = np.random.default_rng(4).standard_normal(50)
    direct = np.linalg.solve(a, b)
    x, _ = pgmres(sp.csr_matrix(a), b, rtol=0.0, atol=0.0, maxiter=50)
    assert np.linalg.norm(x - direct) <= 1e-8 * np.linalg.norm(direct)


def test_pgmres_identity_single_iteration():
    b = np.linspace(1, 2, 7)
    x, report = pgmres(sp.identity(7, format="csr"), b)
    assert report.iterations == 1
    assert np.allclose(x, b, rtol=1e-12)


def test_pgmres_two_by_two_rotation_exact_in_two():
    # hand Arnoldi: K_1 = span{b} never contains the solution of the pure
    # rotation unless b is special, K_2 is the whole plane
    a = sp.csr_matrix(np.array([[0.0, -1.0], [1.0, 0.0]]))
    b = np.array([1.0, 2.0])
    x, report = pgmres(a, b, rtol=1e-12)
    assert report.iterations == 2
    assert np.allclose(x, [2.0, -1.0], atol=1e-12)


def test_pcg_residual_norm_monotone_on_benchmark(bundle):
    system, precond = bundle("a1", 10)
    half1 = (precond.matrix + system.re_part).tocsr()
    b = system.load
    norms = []
    dense_p = precond.matrix.toarray()
    pcg(half1, b, M=precond, rtol=1e-10,
        callback=lambda x, r: norms.append(np.sqrt(r @ dense_p @ r)))
    assert len(norms) >= 3
    assert all(n2 <= n1 * (1 + 1e-12) for n1, n2 in zip(norms, norms[1:]))


def test_pgmres_residual_norm_monotone_on_benchmark(bundle):
    system, precond = bundle("a1", 10)
    half2 = (precond.matrix + system.skew_part).tocsr()
    b = system.load
    norms = []
    pgmres(half2, b, M=precond, rtol=1e-10,
           callback=lambda x, r: norms.append(np.linalg.norm(r)))
    assert len(norms) >= 3
    assert all(n2 <= n1 * (1 + 1e-12) for n1, n2 in zip(norms, norms[1:]))


def test_pcg_breakdown_on_indefinite():
    a = sp.csr_matrix(np.diag([1.0, -1.0]))
    x, report = pcg(a, np.array([1.0, 1.0]))
    assert report.breakdown
    assert not report.converged


def test_pgmres_breakdown_flag_on_stagnating_happy_exit():
    # singular operator: Arnoldi terminates with a nonzero residual
    a = sp.csr_matrix(np.array([[1.0, 0.0], [0.0, 0.0]]))
    x, report = pgmres(a, np.array([1.0, 1.0]), rtol=1e-10, maxiter=5)
    assert report.breakdown
    assert not report.converged


def test_maxiter_reported_not_silently_accepted():
    a = _random_spd(30, seed=5)
    b = np.ones(30)
    _, report = pcg(sp.csr_matrix(a), b, rtol=1e-14, maxiter=2)
    assert report.iterations == 2
    assert not report.converged
    _, report = pgmres(sp.csr_matrix(_random_nonsym(30, seed=6)), b, rtol=1e-14, maxiter=2)
    assert report.iterations == 2
    assert not report.converged


def test_zero_rhs():
    a = sp.identity(5, format="csr")
    for kernel in (pcg, pgmres):
        x, report = kernel(a, np.zeros(5))
        assert report.converged
        assert report.iterations == 0
        assert np.array_equal(x, np.zeros(5))


def test_warm_start_skips_work():
    a = sp.csr_matrix(_random_spd(20, seed=7))
    b = np.ones(20)
    exact = np.linalg.solve(a.toarray(), b)
    for kernel in (pcg, pgmres):
        x, report = kernel(a, b, x0=exact, rtol=1e-8)
        assert report.iterations == 0
        assert report.converged


def test_min_iterations_forces_progress():
    a = sp.csr_matrix(_random_spd(20, seed=8))
    b = np.ones(20)
    exact = np.linalg.solve(a.toarray(), b)
    for kernel in (pcg, pgmres):
        _, report = kernel(a, b, x0=exact, rtol=1e-8, min_iterations=1)
        assert report.iterations == 1


def test_atol_only_threshold():
    a = sp.csr_matrix(_random_spd(25, seed=9))
    b = np.full(25, 2.0)
    target = 1e-3 * np.linalg.norm(b)
    x, report = pcg(a, b, rtol=0.0, atol=target)
    assert np.linalg.norm(b - a @ x) <= target
    assert report.converged


def test_restarted_gmres_converges():
    a = sp.csr_matrix(_random_nonsym(40, seed=10))
    b = np.ones(40)
    x, report = pgmres(a, b, rtol=1e-10, restart=5, maxiter=200)
    assert report.converged
    assert np.linalg.norm(b - a @ x) <= 1e-10 * np.linalg.norm(b)


def test_callable_operator_and_preconditioner():
    a = _random_spd(15, seed=11)
    b = np.ones(15)
    diag_inv = 1.0 / np.diag(a)
    x, report = pcg(lambda v: a @ v, b, M=lambda v: diag_inv * v, rtol=1e-10)
    assert report.converged
    assert np.linalg.norm(b - a @ x) <= 1e-10 * np.linalg.norm(b)
