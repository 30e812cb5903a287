"""Coefficient fields for the convection-diffusion operator.

A field bundles the scalar diffusion a(x,y), the convection vector
beta(x,y) and the load f(x,y) as vectorized callables.  The four benchmark
diffusion coefficients a1..a4 (with beta = [x, y] and f = 1) are built in;
arbitrary fields can be given as small arithmetic expressions.
"""
from __future__ import annotations

import ast
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

BUILTIN_NAMES = ("a1", "a2", "a3", "a4")


@dataclass(frozen=True)
class CoefficientField:
    """Diffusion/convection/load triple with smoothness metadata.

    ``a`` and ``f`` map (x, y) arrays to arrays; ``beta`` returns the pair
    of component arrays.  ``smoothness`` is the claimed regularity class of
    ``a`` ("C2", "C1", "C0" or "piecewise"); only C2 fields satisfy the
    regularity hypotheses behind the clustering guarantees, the others are
    tagged "outside theory" in harness reports.  ``div_beta_nonneg`` marks
    fields whose convection divergence is claimed nonnegative.
    """

    name: str
    a: Callable
    beta: Callable
    f: Callable
    smoothness: str = "C2"
    div_beta_nonneg: bool = True
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def inside_theory(self):
        return self.smoothness == "C2"

    def divergence_estimate(self, x, y, step=1e-6):
        """Central finite-difference estimate of div beta at the given points."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        bx_p, _ = self.beta(x + step, y)
        bx_m, _ = self.beta(x - step, y)
        _, by_p = self.beta(x, y + step)
        _, by_m = self.beta(x, y - step)
        return (np.asarray(bx_p) - bx_m + np.asarray(by_p) - by_m) / (2 * step)

    def validate(self, samples=100, tol=1e-8):
        """Check positivity of ``a`` and the divergence claim on a sample grid.

        Raises ValueError when ``a`` is nonpositive somewhere on the grid or
        when a divergence-nonnegative field shows div beta < -tol.
        """
        xs = np.linspace(0.0, 1.0, samples)
        X, Y = np.meshgrid(xs, xs)
        amin = float(np.min(self.a(X, Y)))
        if amin <= 0:
            raise ValueError(f"field {self.name!r}: min a = {amin:g} is not positive")
        if self.div_beta_nonneg:
            inner = np.linspace(0.01, 0.99, samples)
            Xi, Yi = np.meshgrid(inner, inner)
            dmin = float(np.min(self.divergence_estimate(Xi, Yi)))
            if dmin < -tol:
                raise ValueError(f"field {self.name!r}: div beta = {dmin:g} below -{tol:g}")
        return amin


def _benchmark_beta(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return x, y


def _unit_load(x, y):
    return np.ones_like(np.asarray(x, dtype=float))


_BUILTIN_A = {
    "a1": (lambda x, y: np.exp(x + y), "C2"),
    "a2": (lambda x, y: np.exp(x + np.abs(y - 0.5) ** 1.5), "C1"),
    "a3": (lambda x, y: np.exp(x + np.abs(y - 0.5)), "C0"),
    "a4": (lambda x, y: np.where(np.asarray(y, dtype=float) < 0.5, 1.0, 10.0), "piecewise"),
}


def builtin(name):
    """One of the benchmark fields a1..a4 (beta = [x, y], f = 1)."""
    try:
        a_func, smooth = _BUILTIN_A[name]
    except KeyError:
        raise ValueError(f"unknown builtin field {name!r}; choose from {BUILTIN_NAMES}") from None
    return CoefficientField(name=name, a=a_func, beta=_benchmark_beta, f=_unit_load,
                            smoothness=smooth)


def constant(a_value=1.0, beta_value=(0.0, 0.0), f_value=1.0):
    """Constant-coefficient field, mostly for tests and the preconditioner."""
    bx, by = float(beta_value[0]), float(beta_value[1])

    def beta(x, y):
        x = np.asarray(x, dtype=float)
        return np.full_like(x, bx), np.full_like(x, by)

    return CoefficientField(
        name=f"const(a={a_value:g})",
        a=lambda x, y: np.full_like(np.asarray(x, dtype=float), float(a_value)),
        beta=beta,
        f=lambda x, y: np.full_like(np.asarray(x, dtype=float), float(f_value)),
        smoothness="C2",
    )


def manufactured():
    """Pure-diffusion field with exact solution sin(pi x) sin(pi y).

    Returns (field, u_exact); the load is chosen so the continuous solution
    of -div(a grad u) = f with a = 1 is exactly u_exact.  Used for
    discretization-order checks.
    """
    def u_exact(x, y):
        return np.sin(np.pi * x) * np.sin(np.pi * y)

    def load(x, y):
        return 2.0 * np.pi ** 2 * np.sin(np.pi * x) * np.sin(np.pi * y)

    def beta(x, y):
        x = np.asarray(x, dtype=float)
        return np.zeros_like(x), np.zeros_like(x)

    fld = CoefficientField(name="manufactured", a=lambda x, y: np.ones_like(np.asarray(x, float)),
                           beta=beta, f=load, smoothness="C2")
    return fld, u_exact


# ---------------------------------------------------------------------------
# expression fields
# ---------------------------------------------------------------------------

_FUNCS = {
    "exp": np.exp,
    "abs": np.abs,
    "sin": np.sin,
    "cos": np.cos,
    "sqrt": np.sqrt,
    "step": lambda t: np.where(np.asarray(t, dtype=float) >= 0, 1.0, 0.0),
}

_ALLOWED_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)
_ALLOWED_UNARY = (ast.USub, ast.UAdd)


def parse_expression(text):
    """Compile an arithmetic expression in x, y into a vectorized callable.

    Supported: + - * / ^ (or **), unary minus, numeric literals, the
    variables x and y, and the functions exp, abs, sin, cos, sqrt, step.
    """
    source = text.replace("^", "**")
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"invalid expression {text!r}: {exc.msg}") from None

    for node in ast.walk(tree):
        if isinstance(node, (ast.Expression, ast.Constant)):
            if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
                raise ValueError(f"invalid literal {node.value!r} in {text!r}")
        elif isinstance(node, ast.BinOp):
            if not isinstance(node.op, _ALLOWED_BINOPS):
                raise ValueError(f"operator not allowed in {text!r}")
        elif isinstance(node, ast.UnaryOp):
            if not isinstance(node.op, _ALLOWED_UNARY):
                raise ValueError(f"operator not allowed in {text!r}")
        elif isinstance(node, ast.Call):
            if (not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS
                    or node.keywords or len(node.args) != 1):
                raise ValueError(f"only single-argument {sorted(_FUNCS)} calls "
                                 f"are allowed in {text!r}")
        elif isinstance(node, ast.Name):
            if node.id not in ("x", "y") and node.id not in _FUNCS:
                raise ValueError(f"unknown name {node.id!r} in {text!r}")
        elif isinstance(node, (ast.Load, *_ALLOWED_BINOPS, *_ALLOWED_UNARY)):
            pass
        else:
            raise ValueError(f"syntax not allowed in expression {text!r}")

    code = compile(tree, "<coefficient>", "eval")

    def func(x, y):
        env = {"x": np.asarray(x, dtype=float), "y": np.asarray(y, dtype=float), **_FUNCS}
        out = eval(code, {"__builtins__": {}}, env)  # noqa: S307 - AST-validated
        return np.broadcast_to(np.asarray(out, dtype=float), np.asarray(x).shape).copy() \
            if np.ndim(out) == 0 else np.asarray(out, dtype=float)

    return func


def from_expressions(a, beta, f="1", name=None, smoothness="C2", div_beta_nonneg=False):
    """Field from expression strings; ``beta`` is a pair of strings."""
    a_fn = parse_expression(a)
    bx_fn = parse_expression(beta[0])
    by_fn = parse_expression(beta[1])
    f_fn = parse_expression(f)

    def beta_fn(x, y):
        return bx_fn(x, y), by_fn(x, y)

    return CoefficientField(
        name=name or f"expr(a={a})",
        a=a_fn, beta=beta_fn, f=f_fn,
        smoothness=smoothness, div_beta_nonneg=div_beta_nonneg,
        extra={"a": a, "beta": list(beta), "f": f},
    )


def resolve(spec):
    """Field from a builtin name or an {'a':..., 'beta': [..,..], 'f':...} mapping."""
    if isinstance(spec, CoefficientField):
        return spec
    if isinstance(spec, str):
        return builtin(spec)
    if isinstance(spec, dict):
        return from_expressions(spec["a"], tuple(spec["beta"]), spec.get("f", "1"),
                                name=spec.get("name"),
                                smoothness=spec.get("smoothness", "C2"))
    raise ValueError(f"cannot interpret coefficient spec {spec!r}")
