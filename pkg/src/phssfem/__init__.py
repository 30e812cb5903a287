"""FE convection-diffusion solvers built on the preconditioned
Hermitian/skew-Hermitian splitting iteration, with a spectral-analysis mode
for the clustering behavior of the preconditioned pencils."""

from .assembly import (AssembledSystem, AssemblyError, QUADRATURE_RULES, assemble,
                       e_matrix, elementary_skew_decomposition, read_matrixmarket,
                       write_matrixmarket)
from .coefficients import (BUILTIN_NAMES, CoefficientField, builtin, constant,
                           from_expressions, manufactured, parse_expression)
from .harness import (ExperimentSpec, Table, run_alpha_study, run_iteration_table,
                      run_outlier_table)
from .krylov import InnerSolveReport, pcg, pgmres
from .mesh import (MeshFormatError, TriangularMesh, dump_triangle_mesh,
                   load_triangle_mesh, mesh_from_json, mesh_to_json,
                   read_triangle_files, refine, structured_unit_square,
                   write_triangle_files)
from .phss import (AlphaEstimate, IterationReport, PhssConfig, convergence_bound,
                   hss_solve, iphss_solve, optimal_alpha, phss_solve, solve)
from .preconditioner import FactorizationError, PhssPreconditioner
from .spectra import (SpectralReport, analyze_pencils, element_skew_bound,
                      im_pencil_spectrum, lemma_bound_check, outlier_table,
                      re_pencil_spectrum)

__version__ = "0.1.0"

__all__ = [
    "AssembledSystem", "AssemblyError", "QUADRATURE_RULES", "assemble", "e_matrix",
    "elementary_skew_decomposition", "read_matrixmarket", "write_matrixmarket",
    "BUILTIN_NAMES", "CoefficientField", "builtin", "constant", "from_expressions",
    "manufactured", "parse_expression",
    "ExperimentSpec", "Table", "run_alpha_study", "run_iteration_table",
    "run_outlier_table",
    "InnerSolveReport", "pcg", "pgmres",
    "MeshFormatError", "TriangularMesh", "dump_triangle_mesh", "load_triangle_mesh",
    "mesh_from_json", "mesh_to_json", "read_triangle_files", "refine",
    "structured_unit_square", "write_triangle_files",
    "AlphaEstimate", "IterationReport", "PhssConfig", "convergence_bound",
    "hss_solve", "iphss_solve", "optimal_alpha", "phss_solve", "solve",
    "FactorizationError", "PhssPreconditioner",
    "SpectralReport", "analyze_pencils", "element_skew_bound", "im_pencil_spectrum",
    "lemma_bound_check", "outlier_table", "re_pencil_spectrum",
]
