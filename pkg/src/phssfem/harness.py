"""Experiment harness: iteration-count tables, outlier tables, alpha studies.

An ExperimentSpec (JSON-serializable) names the mesh family, the
coefficient field, the iteration modes and the tolerances; the run_*
functions return Table objects that render deterministically to CSV,
Markdown or JSON.  Independent mesh runs can execute in parallel when the
PHSSFEM_THREADS environment variable is set; output order always follows
the spec.
"""
from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

from . import assembly, coefficients, mesh as meshmod, phss, spectra
from .preconditioner import PhssPreconditioner

THREADS_ENV = "PHSSFEM_THREADS"


@dataclass
class Table:
    """Rectangular report with deterministic renderings."""

    title: str
    columns: list[str]
    rows: list[list]
    notes: list[str] = field(default_factory=list)
    all_converged: bool = True

    def to_markdown(self):
        def fmt(cell):
            if isinstance(cell, float):
                return f"{cell:.4g}"
            return str(cell)

        lines = [f"### {self.title}", ""]
        lines.append("| " + " | ".join(self.columns) + " |")
        lines.append("|" + "|".join("---" for _ in self.columns) + "|")
        for row in self.rows:
            lines.append("| " + " | ".join(fmt(c) for c in row) + " |")
        for note in self.notes:
            lines.append(f"")
            lines.append(f"_{note}_")
        return "\n".join(lines) + "\n"

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([repr(c) if isinstance(c, float) else c for c in row])
        return buf.getvalue()

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))

    def render(self, output_format):
        if output_format == "csv":
            return self.to_csv()
        if output_format == "markdown":
            return self.to_markdown()
        if output_format == "json":
            return self.to_json()
        raise ValueError(f"unknown output format {output_format!r}")


@dataclass
class ExperimentSpec:
    """Declarative description of one experiment suite.

    ``mesh_source`` is one of
      {"kind": "structured", "sizes": [10, 20, 40]}
      {"kind": "triangle", "files": [["m.node", "m.ele"], ...]}
      {"kind": "refine-chain", "levels": 3, "node": ..., "ele": ...}
      {"kind": "refine-chain", "levels": 3, "structured": 4}
    ``coefficient`` is a builtin name or an expression mapping, ``alpha``
    either {"policy": "fixed", "value": v} or {"policy": "estimate"}.
    """

    mesh_source: dict
    coefficient: object = "a1"
    modes: list[str] = field(default_factory=lambda: ["PHSS", "IPHSS"])
    alpha: dict = field(default_factory=lambda: {"policy": "fixed", "value": 1.0})
    outer_tol: float = 1e-7
    eta: float = 0.9
    quadrature: str = "barycenter"
    radii: list[float] = field(default_factory=lambda: [0.1, 0.01])
    dense_cap: int = spectra.DENSE_CAP
    outer_maxit: int = 500
    output_format: str = "markdown"

    def __post_init__(self):
        if not self.modes:
            raise ValueError("experiment needs at least one iteration mode")
        for mode in self.modes:
            if mode not in phss.MODES:
                raise ValueError(f"unknown mode {mode!r}; choose from {phss.MODES}")
        if not self._mesh_count():
            raise ValueError("experiment needs at least one mesh")
        if self.alpha.get("policy") not in ("fixed", "estimate"):
            raise ValueError("alpha policy must be 'fixed' or 'estimate'")

    def _mesh_count(self):
        src = self.mesh_source
        kind = src.get("kind")
        if kind == "structured":
            return len(src.get("sizes", []))
        if kind == "triangle":
            return len(src.get("files", []))
        if kind == "refine-chain":
            return int(src.get("levels", 0)) + 1
        raise ValueError(f"unknown mesh source kind {kind!r}")

    def meshes(self):
        """Materialize the mesh family in spec order."""
        src = self.mesh_source
        kind = src["kind"]
        if kind == "structured":
            return [meshmod.structured_unit_square(n) for n in src["sizes"]]
        if kind == "triangle":
            return [meshmod.read_triangle_files(node, ele) for node, ele in src["files"]]
        base = (meshmod.structured_unit_square(src["structured"]) if "structured" in src
                else meshmod.read_triangle_files(src["node"], src["ele"]))
        family = [base]
        for _ in range(int(src.get("levels", 0))):
            family.append(meshmod.refine(family[-1]))
        return family

    def coefficient_field(self):
        return coefficients.resolve(self.coefficient)

    def to_dict(self):
        out = asdict(self)
        if isinstance(self.coefficient, coefficients.CoefficientField):
            out["coefficient"] = self.coefficient.extra or self.coefficient.name
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, payload):
        return cls(**payload)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def format_avg_total(total, outer):
    """The tables' "average (total)" cell: 1.6 (8), 2 (12), ..."""
    if outer == 0:
        return f"- ({total})"
    avg = f"{total / outer:.1f}"
    if avg.endswith(".0"):
        avg = avg[:-2]
    return f"{avg} ({total})"


def _map_ordered(worker, items):
    threads = int(os.environ.get(THREADS_ENV, "1") or "1")
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(worker, items))
    return [worker(item) for item in items]


def _prepare(spec, mesh):
    coeff = spec.coefficient_field()
    system = assembly.assemble(mesh, coeff, quadrature=spec.quadrature)
    unit = assembly.assemble(mesh, coefficients.constant(1.0), quadrature=spec.quadrature)
    precond = PhssPreconditioner.build(system.stiffness, unit.stiffness)
    return system, precond


def _resolve_alpha(spec, system, precond):
    if spec.alpha["policy"] == "fixed":
        return float(spec.alpha.get("value", 1.0)), None
    estimate = phss.optimal_alpha(system, precond)
    return estimate.alpha_star, estimate


def _theory_notes(spec):
    coeff = spec.coefficient_field()
    notes = [f"coefficient {coeff.name}; quadrature {spec.quadrature}; "
             f"outer tolerance {spec.outer_tol:g}"]
    if not coeff.inside_theory:
        notes.append(f"outside theory: {coeff.name} is {coeff.smoothness}, "
                     "below the C2 regularity the clustering analysis assumes")
    return notes


def run_iteration_table(spec):
    """Outer/inner iteration counts per mesh size and mode."""
    columns = ["n"]
    for mode in spec.modes:
        columns += [f"{mode} outer", f"{mode} PCG", f"{mode} PGMRES"]

    def one_mesh(mesh):
        system, precond = _prepare(spec, mesh)
        alpha, _ = _resolve_alpha(spec, system, precond)
        row = [int(system.n)]
        converged = True
        for mode in spec.modes:
            config = phss.PhssConfig(alpha=alpha, outer_tol=spec.outer_tol,
                                     outer_maxit=spec.outer_maxit, mode=mode, eta=spec.eta)
            _, report = phss.solve(system, precond, config)
            flag = "" if report.converged else " *"
            row += [f"{report.outer_iterations}{flag}",
                    format_avg_total(report.pcg_total, report.outer_iterations),
                    format_avg_total(report.pgmres_total, report.outer_iterations)]
            converged = converged and report.converged
        return row, converged

    results = _map_ordered(one_mesh, spec.meshes())
    table = Table(title="Outer iterations and PCG/PGMRES averages (totals)",
                  columns=columns, rows=[r for r, _ in results],
                  notes=_theory_notes(spec) + ["* marks a non-converged run"])
    table.all_converged = all(ok for _, ok in results)
    return table


def run_outlier_table(spec):
    """Cluster outlier counts for both preconditioned pencils."""
    columns = ["n", "radius",
               "re m-", "re m+", "re p_tot", "re lambda_min", "re lambda_max",
               "im m-", "im m+", "im p_tot", "im lambda_min", "im lambda_max"]

    def one_mesh(mesh):
        system, precond = _prepare(spec, mesh)
        try:
            re_reports, im_reports = spectra.analyze_pencils(
                system, precond, radii=spec.radii, cap=spec.dense_cap)
        except ValueError as exc:
            return [[int(system.n), "refused", str(exc)] + [""] * 9], True
        rows = []
        for re_rep, im_rep in zip(re_reports, im_reports):
            rows.append([
                int(system.n), float(re_rep.radius),
                re_rep.m_minus, re_rep.m_plus, round(re_rep.p_total, 2),
                float(re_rep.lambda_min), float(re_rep.lambda_max),
                im_rep.m_minus, im_rep.m_plus, round(im_rep.p_total, 2),
                float(im_rep.lambda_min), float(im_rep.lambda_max),
            ])
        return rows, True

    results = _map_ordered(one_mesh, spec.meshes())
    rows = [row for chunk, _ in results for row in chunk]
    return Table(title="Outliers of the preconditioned pencils (cluster at 1 / at 0)",
                 columns=columns, rows=rows, notes=_theory_notes(spec))


def run_alpha_study(spec):
    """Iteration counts at the estimated optimal shift vs. the default 1."""
    columns = ["n", "alpha_star", "lambda_min", "lambda_max", "kappa", "sigma_star"]
    for mode in spec.modes:
        columns += [f"{mode} outer @alpha*", f"{mode} PCG @alpha*",
                    f"{mode} PGMRES @alpha*", f"{mode} outer @alpha=1"]

    def one_mesh(mesh):
        system, precond = _prepare(spec, mesh)
        estimate = phss.optimal_alpha(system, precond)
        row = [int(system.n), float(estimate.alpha_star), float(estimate.lambda_min),
               float(estimate.lambda_max), float(estimate.kappa), float(estimate.sigma_star)]
        converged = True
        for mode in spec.modes:
            for alpha in (estimate.alpha_star, 1.0):
                config = phss.PhssConfig(alpha=alpha, outer_tol=spec.outer_tol,
                                         outer_maxit=spec.outer_maxit, mode=mode,
                                         eta=spec.eta)
                _, report = phss.solve(system, precond, config)
                converged = converged and report.converged
                flag = "" if report.converged else " *"
                if alpha == 1.0:
                    row.append(f"{report.outer_iterations}{flag}")
                else:
                    row += [f"{report.outer_iterations}{flag}",
                            format_avg_total(report.pcg_total, report.outer_iterations),
                            format_avg_total(report.pgmres_total, report.outer_iterations)]
        return row, converged

    results = _map_ordered(one_mesh, spec.meshes())
    table = Table(title="Optimal-shift study",
                  columns=columns, rows=[r for r, _ in results],
                  notes=_theory_notes(spec) + ["* marks a non-converged run"])
    table.all_converged = all(ok for _, ok in results)
    return table
