"""Shared fixtures: cached assembled systems and an unstructured test mesh."""
import functools

import numpy as np
import pytest
import scipy.spatial

import phssfem as pf


@functools.lru_cache(maxsize=None)
def _bundle(coeff_name, n_sub, quadrature="barycenter"):
    """(system, preconditioner) for a builtin coefficient on a structured mesh."""
    mesh = pf.structured_unit_square(n_sub)
    system = pf.assemble(mesh, pf.builtin(coeff_name), quadrature=quadrature)
    unit = pf.assemble(mesh, pf.constant(1.0), quadrature=quadrature)
    precond = pf.PhssPreconditioner.build(system.stiffness, unit.stiffness)
    return system, precond


@functools.lru_cache(maxsize=None)
def _solve(coeff_name, n_sub, mode, alpha=1.0):
    system, precond = _bundle(coeff_name, n_sub)
    config = pf.PhssConfig(mode=mode, alpha=alpha)
    _, report = pf.solve(system, precond, config)
    return report


@functools.lru_cache(maxsize=None)
def _re_spectrum(coeff_name, n_sub):
    system, precond = _bundle(coeff_name, n_sub)
    return pf.re_pencil_spectrum(system, precond)


@functools.lru_cache(maxsize=None)
def _im_spectrum(coeff_name, n_sub):
    system, precond = _bundle(coeff_name, n_sub)
    return pf.im_pencil_spectrum(system, precond)


@functools.lru_cache(maxsize=None)
def _unstructured_mesh_41():
    """Delaunay mesh of the unit square with exactly 41 interior nodes."""
    rng = np.random.default_rng(7)
    xs = np.linspace(0.0, 1.0, 8)
    grid_x, grid_y = np.meshgrid(xs, xs)
    points = np.column_stack([grid_x.ravel(), grid_y.ravel()])
    interior = ((points[:, 0] > 0) & (points[:, 0] < 1)
                & (points[:, 1] > 0) & (points[:, 1] < 1))
    points[interior] += rng.uniform(-0.04, 0.04, size=(int(interior.sum()), 2))
    extra = np.array([[0.23, 0.37], [0.61, 0.22], [0.47, 0.58],
                      [0.78, 0.71], [0.33, 0.82]])
    points = np.vstack([points, extra])
    triangulation = scipy.spatial.Delaunay(points)
    flags = ((points[:, 0] == 0) | (points[:, 0] == 1)
             | (points[:, 1] == 0) | (points[:, 1] == 1))
    return pf.TriangularMesh(points, triangulation.simplices, flags)


@pytest.fixture(scope="session")
def bundle():
    return _bundle


@pytest.fixture(scope="session")
def solve_cached():
    return _solve


@pytest.fixture(scope="session")
def re_spectrum():
    return _re_spectrum


@pytest.fixture(scope="session")
def im_spectrum():
    return _im_spectrum


@pytest.fixture(scope="session")
def unstructured_mesh():
    return _unstructured_mesh_41()
