"""Command-line interface.

Verbs: ``mesh gen|refine|convert``, ``assemble``, ``solve``, ``spectra``,
``table`` and ``alpha-study``.  Experiment verbs accept either direct flags
or a JSON config file mirroring ExperimentSpec.  The exit code is 0 only if
every requested run converged.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import assembly, coefficients, harness, mesh as meshmod, phss, spectra
from .preconditioner import PhssPreconditioner


def _add_mesh_options(parser):
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--structured", type=int, metavar="N",
                       help="structured unit-square mesh with N cells per side")
    group.add_argument("--mesh-prefix", metavar="PREFIX",
                       help="read PREFIX.node / PREFIX.ele (Triangle format)")
    parser.add_argument("--refine", type=int, default=0, metavar="K",
                        help="uniformly refine the mesh K times")


def _add_coeff_options(parser):
    parser.add_argument("--coeff", default="a1",
                        help="builtin field name (a1..a4)")
    parser.add_argument("--a", dest="a_expr", help="diffusion expression in x, y")
    parser.add_argument("--beta-x", help="convection x-component expression")
    parser.add_argument("--beta-y", help="convection y-component expression")
    parser.add_argument("--f", dest="f_expr", default="1", help="load expression")
    parser.add_argument("--quadrature", default="barycenter",
                        choices=sorted(assembly.QUADRATURE_RULES))


def _mesh_from_args(args):
    if args.structured is not None:
        mesh = meshmod.structured_unit_square(args.structured)
    else:
        mesh = meshmod.read_triangle_files(args.mesh_prefix + ".node",
                                           args.mesh_prefix + ".ele")
    for _ in range(args.refine):
        mesh = meshmod.refine(mesh)
    return mesh


def _coeff_from_args(args):
    if args.a_expr:
        beta = (args.beta_x or "0", args.beta_y or "0")
        return coefficients.from_expressions(args.a_expr, beta, args.f_expr)
    return coefficients.builtin(args.coeff)


def _coeff_spec_from_args(args):
    if args.a_expr:
        return {"a": args.a_expr, "beta": [args.beta_x or "0", args.beta_y or "0"],
                "f": args.f_expr}
    return args.coeff


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _cmd_mesh(args):
    if args.mesh_command == "gen":
        mesh = meshmod.structured_unit_square(args.n)
        for _ in range(args.refine):
            mesh = meshmod.refine(mesh)
        meshmod.write_triangle_files(mesh, args.out + ".node", args.out + ".ele")
        print(f"wrote {args.out}.node/.ele: {mesh!r}")
    elif args.mesh_command == "refine":
        mesh = meshmod.read_triangle_files(args.inp + ".node", args.inp + ".ele")
        for _ in range(max(1, args.times)):
            mesh = meshmod.refine(mesh)
        meshmod.write_triangle_files(mesh, args.out + ".node", args.out + ".ele")
        print(f"wrote {args.out}.node/.ele: {mesh!r}")
    else:  # convert
        if args.to_json:
            mesh = meshmod.read_triangle_files(args.inp + ".node", args.inp + ".ele")
            _emit(meshmod.mesh_to_json(mesh), args.out)
        else:
            with open(args.inp) as fh:
                mesh = meshmod.mesh_from_json(fh.read())
            meshmod.write_triangle_files(mesh, args.out + ".node", args.out + ".ele")
            print(f"wrote {args.out}.node/.ele: {mesh!r}")
    return 0


def _cmd_assemble(args):
    mesh = _mesh_from_args(args)
    coeff = _coeff_from_args(args)
    system = assembly.assemble(mesh, coeff, quadrature=args.quadrature)
    prefix = args.out
    for name, matrix in (("stiffness", system.stiffness),
                         ("convection", system.convection),
                         ("re_part", system.re_part),
                         ("skew_part", system.skew_part)):
        assembly.write_matrixmarket(f"{prefix}.{name}.mtx", matrix)
    np.savetxt(f"{prefix}.load.txt", system.load)
    print(f"assembled n = {system.n}; wrote {prefix}.*.mtx and {prefix}.load.txt")
    return 0


def _cmd_solve(args):
    mesh = _mesh_from_args(args)
    coeff = _coeff_from_args(args)
    system = assembly.assemble(mesh, coeff, quadrature=args.quadrature)
    unit = assembly.assemble(mesh, coefficients.constant(1.0), quadrature=args.quadrature)
    precond = PhssPreconditioner.build(system.stiffness, unit.stiffness)
    if args.alpha_opt:
        estimate = phss.optimal_alpha(system, precond)
        alpha = estimate.alpha_star
    else:
        alpha = args.alpha
    config = phss.PhssConfig(alpha=alpha, outer_tol=args.tol, outer_maxit=args.maxit,
                             mode=args.mode, eta=args.eta)
    x, report = phss.solve(system, precond, config)
    payload = {
        "n": system.n,
        "mode": report.mode,
        "alpha": report.alpha_used,
        "converged": report.converged,
        "outer_iterations": report.outer_iterations,
        "pcg_total": report.pcg_total,
        "pgmres_total": report.pgmres_total,
        "final_relative_residual": report.residual_history[-1],
        "solution_norm": float(np.linalg.norm(x)),
    }
    if args.solution:
        np.savetxt(args.solution, x)
        payload["solution_file"] = args.solution
    _emit(json.dumps(payload, indent=2, sort_keys=True), args.out)
    return 0 if report.converged else 1


def _cmd_spectra(args):
    mesh = _mesh_from_args(args)
    coeff = _coeff_from_args(args)
    system = assembly.assemble(mesh, coeff, quadrature=args.quadrature)
    unit = assembly.assemble(mesh, coefficients.constant(1.0), quadrature=args.quadrature)
    precond = PhssPreconditioner.build(system.stiffness, unit.stiffness)
    re_reports, im_reports = spectra.analyze_pencils(system, precond, radii=args.radii,
                                                     cap=args.cap)
    rows = []
    for re_rep, im_rep in zip(re_reports, im_reports):
        rows.append([system.n, re_rep.radius,
                     re_rep.m_minus, re_rep.m_plus, round(re_rep.p_total, 2),
                     re_rep.lambda_min, re_rep.lambda_max,
                     im_rep.m_minus, im_rep.m_plus, round(im_rep.p_total, 2),
                     im_rep.lambda_min, im_rep.lambda_max])
    table = harness.Table(
        title="Outliers of the preconditioned pencils (cluster at 1 / at 0)",
        columns=["n", "radius", "re m-", "re m+", "re p_tot", "re lambda_min",
                 "re lambda_max", "im m-", "im m+", "im p_tot", "im lambda_min",
                 "im lambda_max"],
        rows=rows)
    _emit(table.render(args.format), args.out)
    return 0


def _spec_from_args(args):
    if args.config:
        with open(args.config) as fh:
            payload = json.load(fh)
        return harness.ExperimentSpec.from_dict(payload)
    if args.structured:
        mesh_source = {"kind": "structured", "sizes": args.structured}
    else:
        raise SystemExit("either --config or --structured sizes are required")
    return harness.ExperimentSpec(
        mesh_source=mesh_source,
        coefficient=_coeff_spec_from_args(args),
        modes=args.modes,
        alpha=({"policy": "estimate"} if args.alpha_opt
               else {"policy": "fixed", "value": args.alpha}),
        outer_tol=args.tol, eta=args.eta, quadrature=args.quadrature,
        radii=args.radii, output_format=args.format)


def _cmd_table(args):
    spec = _spec_from_args(args)
    table = harness.run_iteration_table(spec)
    _emit(table.render(args.format), args.out)
    return 0 if table.all_converged else 1


def _cmd_outliers(args):
    spec = _spec_from_args(args)
    table = harness.run_outlier_table(spec)
    _emit(table.render(args.format), args.out)
    return 0


def _cmd_alpha_study(args):
    spec = _spec_from_args(args)
    table = harness.run_alpha_study(spec)
    _emit(table.render(args.format), args.out)
    return 0 if table.all_converged else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="phssfem",
        description="FE convection-diffusion benchmarks for the preconditioned "
                    "Hermitian/skew-Hermitian splitting iteration")
    sub = parser.add_subparsers(dest="command", required=True)

    p_mesh = sub.add_parser("mesh", help="generate, refine or convert meshes")
    mesh_sub = p_mesh.add_subparsers(dest="mesh_command", required=True)
    p_gen = mesh_sub.add_parser("gen", help="structured unit-square mesh")
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--refine", type=int, default=0)
    p_gen.add_argument("--out", required=True, help="output prefix")
    p_ref = mesh_sub.add_parser("refine", help="uniformly refine a Triangle mesh")
    p_ref.add_argument("--in", dest="inp", required=True, help="input prefix")
    p_ref.add_argument("--times", type=int, default=1)
    p_ref.add_argument("--out", required=True, help="output prefix")
    p_conv = mesh_sub.add_parser("convert", help="Triangle <-> canonical JSON")
    p_conv.add_argument("--in", dest="inp", required=True,
                        help="input prefix (Triangle) or JSON file with --from-json")
    p_conv.add_argument("--to-json", action="store_true", default=True)
    p_conv.add_argument("--from-json", dest="to_json", action="store_false")
    p_conv.add_argument("--out", help="output file or prefix")
    p_mesh.set_defaults(func=_cmd_mesh)

    p_asm = sub.add_parser("assemble", help="assemble and export the matrices")
    _add_mesh_options(p_asm)
    _add_coeff_options(p_asm)
    p_asm.add_argument("--out", required=True, help="output prefix for .mtx files")
    p_asm.set_defaults(func=_cmd_assemble)

    p_solve = sub.add_parser("solve", help="run one splitting solve")
    _add_mesh_options(p_solve)
    _add_coeff_options(p_solve)
    p_solve.add_argument("--mode", default="PHSS", choices=phss.MODES)
    p_solve.add_argument("--alpha", type=float, default=1.0)
    p_solve.add_argument("--alpha-opt", action="store_true",
                         help="estimate the optimal shift first")
    p_solve.add_argument("--tol", type=float, default=1e-7)
    p_solve.add_argument("--eta", type=float, default=0.9)
    p_solve.add_argument("--maxit", type=int, default=500)
    p_solve.add_argument("--solution", help="write the solution vector to this file")
    p_solve.add_argument("--out", help="write the JSON report to this file")
    p_solve.set_defaults(func=_cmd_solve)

    p_spec = sub.add_parser("spectra", help="dense pencil spectra and outlier counts")
    _add_mesh_options(p_spec)
    _add_coeff_options(p_spec)
    p_spec.add_argument("--radii", type=float, nargs="+", default=[0.1, 0.01])
    p_spec.add_argument("--cap", type=int, default=spectra.DENSE_CAP)
    p_spec.add_argument("--format", default="markdown", choices=["csv", "markdown", "json"])
    p_spec.add_argument("--out")
    p_spec.set_defaults(func=_cmd_spectra)

    for name, func, help_text in (
            ("table", _cmd_table, "iteration-count table over a mesh family"),
            ("outliers", _cmd_outliers, "outlier table over a mesh family"),
            ("alpha-study", _cmd_alpha_study, "optimal-shift study over a mesh family")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON file mirroring ExperimentSpec")
        p.add_argument("--structured", type=int, nargs="+", metavar="N",
                       help="structured mesh sizes")
        _add_coeff_options(p)
        p.add_argument("--modes", nargs="+", default=["PHSS", "IPHSS"],
                       choices=phss.MODES)
        p.add_argument("--alpha", type=float, default=1.0)
        p.add_argument("--alpha-opt", action="store_true")
        p.add_argument("--tol", type=float, default=1e-7)
        p.add_argument("--eta", type=float, default=0.9)
        p.add_argument("--radii", type=float, nargs="+", default=[0.1, 0.01])
        p.add_argument("--format", default="markdown", choices=["csv", "markdown", "json"])
        p.add_argument("--out")
        p.set_defaults(func=func)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
