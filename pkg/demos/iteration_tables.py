"""Reproduce the iteration-count tables on structured meshes.

For each benchmark diffusion coefficient this runs the exact (PHSS) and
inexact (IPHSS) splitting iterations over a sequence of structured meshes
and prints the outer counts together with the inner PCG/PGMRES averages.
The smooth coefficients converge in a size-independent number of outer
steps (5/6/7 for a1/a2/a3); the piecewise-constant a4 shows the weak
cluster through outer counts that grow with the mesh size.

Usage: python demos/iteration_tables.py [max_subdivisions]
"""
import sys

from phssfem import ExperimentSpec, run_iteration_table

max_n = int(sys.argv[1]) if len(sys.argv) > 1 else 40
sizes = [n for n in (10, 20, 40, 80) if n <= max_n]

for coefficient in ("a1", "a2", "a3", "a4"):
    spec = ExperimentSpec(
        mesh_source={"kind": "structured", "sizes": sizes},
        coefficient=coefficient,
        modes=["PHSS", "IPHSS"],
    )
    print(run_iteration_table(spec).to_markdown())
