"""Command-line front end.

Usage::

    radialfrac constants --q 2 --alpha 2
    radialfrac integrate --q 3 --alpha 0.5 --n-min -4 --n-max 4 --format csv
    radialfrac apply-i --alpha 0.5 --input one.json --output out.json
    radialfrac solve --q 2 --alpha 1 --input a.json --input f.json --u0-re 1
    radialfrac residual --input a.json --input f.json --input u.json
    radialfrac verify

Options can also come from a JSON object given with ``--config``.  Its keys
are the long option names with dashes or underscores, for example
``{"q": 3, "n-min": -5, "input": ["a.json", "f.json"]}``.  An option given on
the command line overrides the config file.

Exit status: 0 on success, 1 for invalid options or documents, 2 when the
solver fails (singular pivot, no convergence), 3 when ``verify`` finds a
failing criterion.
"""

from __future__ import annotations

import argparse
import io
import sys
from dataclasses import dataclass, field

import numpy as np

from . import local_field as lf
from .cauchy import (
    CauchyProblem,
    MatrixCauchyProblem,
    SolveReport,
    residual,
    solve_direct,
    solve_matrix,
    solve_picard,
)
from .exceptions import DocumentError, NoConvergenceError, SingularPivotError
from .local_field import FieldParams
from .radial import (
    MatrixRadialFunction,
    RadialFunction,
    _format_float,
    dumps,
    from_document,
    loads,
    matrix_from_document,
    to_document,
    vector_from_document,
    vector_to_document,
)
from .riesz import AlphaOrder, apply_D, apply_I, constants, trust_margin
from .verification import format_result, run_criteria

__all__ = ["RunConfig", "build_parser", "run", "main"]

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_SOLVER = 2
EXIT_VERIFY = 3

COMMANDS = ("constants", "integrate", "apply-d", "apply-i", "solve", "residual", "verify")

# option name -> default used when neither the command line nor the config sets it
_DEFAULTS = {
    "q": None,
    "alpha": None,
    "n_min": None,
    "n_max": None,
    "input": [],
    "u0_re": 0.0,
    "u0_im": 0.0,
    "dim": 1,
    "output": None,
    "format": None,
    "tol": None,
    "method": "direct",
}


class UsageError(ValueError):
    """Bad command line or configuration (exit status 1)."""


@dataclass
class RunConfig:
    command: str
    q: int | None = None
    alpha: float | None = None
    n_min: int | None = None
    n_max: int | None = None
    input: list = field(default_factory=list)
    u0_re: object = 0.0
    u0_im: object = 0.0
    dim: int = 1
    output: str | None = None
    format: str | None = None
    tol: float | None = None
    method: str = "direct"

    def validate(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.q is not None:
            FieldParams(self.q)
        if self.alpha is not None:
            AlphaOrder(self.alpha)
        if (self.n_min is None) != (self.n_max is None):
            raise UsageError("--n-min and --n-max must be given together")
        if self.n_min is not None and self.n_min > self.n_max:
            raise UsageError(f"n_min={self.n_min} exceeds n_max={self.n_max}")
        if not isinstance(self.dim, int) or self.dim < 1:
            raise UsageError(f"dim must be a positive integer, got {self.dim!r}")
        if self.format not in (None, "json", "csv"):
            raise UsageError(f"format must be json or csv, got {self.format!r}")
        if self.method not in ("direct", "picard"):
            raise UsageError(f"method must be direct or picard, got {self.method!r}")
        if self.tol is not None and not self.tol > 0:
            raise UsageError(f"tol must be positive, got {self.tol!r}")
        return self


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    # every default is None so that unset flags do not shadow the config file
    common.add_argument("--config", help="JSON file with option values (flags win)")
    common.add_argument("--q", type=int, default=None, help="residue field size, q >= 2")
    common.add_argument("--alpha", type=float, default=None, help="order alpha > 0")
    common.add_argument("--n-min", dest="n_min", type=int, default=None)
    common.add_argument("--n-max", dest="n_max", type=int, default=None)
    common.add_argument("--input", action="append", default=None,
                        help="input document; repeat for a, f (and u for residual); '-' is stdin")
    common.add_argument("--u0-re", dest="u0_re", default=None,
                        help="real part of u(0); comma-separated for vector problems")
    common.add_argument("--u0-im", dest="u0_im", default=None,
                        help="imaginary part of u(0); comma-separated for vector problems")
    common.add_argument("--dim", type=int, default=None, help="system size for matrix problems")
    common.add_argument("--output", default=None, help="output path (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default=None,
                        help="output format (default json; verify defaults to text lines)")
    common.add_argument("--tol", type=float, default=None,
                        help="stopping tolerance for the Picard solver")
    common.add_argument("--method", choices=("direct", "picard"), default=None)

    parser = _Parser(prog="radialfrac", description="Radial fractional calculus over local fields.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "constants": "print Gamma_K(alpha), Gamma_K(-alpha), d_alpha and c_alpha",
        "integrate": "tabulate the closed-form radial integrals over a level range",
        "apply-d": "apply D^alpha to a radial function document",
        "apply-i": "apply I^alpha to a radial function document",
        "solve": "solve D^alpha u + a u = f with u(0) = u0",
        "residual": "tabulate D^alpha u + a u - f for given a, f, u",
        "verify": "run the acceptance checks",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = loads(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"config {path}: expected a JSON object")
    out = {}
    for key, value in data.items():
        name = key.replace("-", "_")
        if name not in _DEFAULTS:
            raise UsageError(f"config {path}: unknown option {key!r}")
        if name == "input" and isinstance(value, str):
            value = [value]
        out[name] = value
    return out


def parse_config(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    merged = dict(_DEFAULTS)
    if ns.config:
        merged.update(_load_config(ns.config))
    for name in _DEFAULTS:
        value = getattr(ns, name)
        if value is not None:
            merged[name] = value
    try:
        return RunConfig(command=ns.command, **merged).validate()
    except TypeError as exc:
        raise UsageError(str(exc)) from exc


# --- helpers ---------------------------------------------------------------


def _require(value, flag: str, command: str):
    if value is None:
        raise UsageError(f"{command} needs {flag}")
    return value


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _read_document(path: str, what: str) -> dict:
    try:
        doc = loads(_read_text(path))
    except DocumentError as exc:
        raise DocumentError(f"{what} ({path}): {exc}") from exc
    if not isinstance(doc, dict):
        raise DocumentError(f"{what} ({path}): expected a JSON object")
    return doc


def _inputs(cfg: RunConfig, names) -> list:
    if len(cfg.input) != len(names):
        raise UsageError(
            f"{cfg.command} needs {len(names)} --input document(s) ({', '.join(names)}), "
            f"got {len(cfg.input)}"
        )
    return [_read_document(p, n) for p, n in zip(cfg.input, names)]


def _field_and_order(cfg: RunConfig, docs, need_alpha=True):
    """``q`` and ``alpha`` from the flags, else from the documents."""
    q, alpha = cfg.q, cfg.alpha
    for doc in docs:
        if q is None and "q" in doc:
            q = doc["q"]
        if alpha is None and "alpha" in doc:
            alpha = doc["alpha"]
    fp = FieldParams(_require(q, "--q", cfg.command))
    order = AlphaOrder(_require(alpha, "--alpha", cfg.command)) if need_alpha else None
    return fp, order


def _scalar(doc, what):
    try:
        return from_document(doc)
    except DocumentError as exc:
        raise DocumentError(f"{what}: {exc}") from exc


def _window(cfg: RunConfig, u: RadialFunction) -> RadialFunction:
    """Widen ``u`` to ``--n-min/--n-max`` when those are given."""
    if cfg.n_min is None:
        return u
    return u.widened(cfg.n_min, cfg.n_max)


def _u0(cfg: RunConfig, dim: int) -> np.ndarray:
    def parts(raw, name):
        if isinstance(raw, (int, float)):
            vals = [float(raw)]
        elif isinstance(raw, list):
            vals = [float(x) for x in raw]
        else:
            try:
                vals = [float(x) for x in str(raw).split(",")]
            except ValueError as exc:
                raise UsageError(f"--{name}: not a number list: {raw!r}") from exc
        if len(vals) == 1:
            vals = vals * dim
        if len(vals) != dim:
            raise UsageError(f"--{name} has {len(vals)} entries, dim is {dim}")
        return np.array(vals)

    return parts(cfg.u0_re, "u0-re") + 1j * parts(cfg.u0_im, "u0-im")


def _radial_rows(fp: FieldParams, u: RadialFunction, component=None):
    for n, z in zip(u.levels, u.values):
        row = [int(n), fp.abs_value(int(n)), z.real, z.imag]
        yield row if component is None else [component] + row


def _csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_cell(x) for x in row) + "\n")
    return buf.getvalue()


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return _format_float(float(x))
    return str(x)


_RADIAL_HEADER = ["n", "abs_x", "re", "im"]


# --- commands --------------------------------------------------------------


def cmd_constants(cfg: RunConfig) -> tuple:
    fp, order = _field_and_order(cfg, [])
    c = constants(fp, order)
    out = {
        "q": fp.q,
        "alpha": order.alpha,
        "gamma_K(alpha)": c.gamma_K(order.alpha),
        "gamma_K(-alpha)": c.gamma_K(-order.alpha),
        "d_alpha": c.d_alpha,
        "c_alpha": c.c_alpha_or_none,
        "log_branch": c.is_log_branch,
    }
    if c.is_log_branch:
        out["log_kernel_factor"] = c.log_kernel_factor
        out["notice"] = "alpha = 1: logarithmic kernel, c_alpha is not defined"
    if cfg.format == "csv":
        return _csv(["name", "value"], out.items()), EXIT_OK
    return dumps(out), EXIT_OK


_INTEGRAL_COLUMNS = (
    ("ball_volume", lambda fp, a, n: lf.ball_volume(fp, n), False),
    ("sphere_volume", lambda fp, a, n: lf.sphere_volume(fp, n), False),
    ("sector_fixed_digit", lambda fp, a, n: lf.sector_volume_fixed_digit(fp, n), False),
    ("sector_excluded_digit", lambda fp, a, n: lf.sector_volume_excluded_digit(fp, n), False),
    ("ball_power", lambda fp, a, n: lf.ball_integral_power(fp, a, n), True),
    ("sphere_shifted_power", lambda fp, a, n: lf.sphere_integral_shifted_power(fp, a, n), True),
    ("ball_log", lambda fp, a, n: lf.ball_integral_log(fp, n), False),
    ("sphere_shifted_log", lambda fp, a, n: lf.sphere_integral_shifted_log(fp, n), False),
)


def cmd_integrate(cfg: RunConfig) -> tuple:
    """Closed-form integrals per level; the power columns need ``--alpha``."""
    fp = FieldParams(_require(cfg.q, "--q", cfg.command))
    _require(cfg.n_min, "--n-min/--n-max", cfg.command)
    cols = [c for c in _INTEGRAL_COLUMNS if cfg.alpha is not None or not c[2]]
    header = ["n", "abs_x"] + [c[0] for c in cols]
    rows = [
        [n, fp.abs_value(n)] + [fn(fp, cfg.alpha, n) for _, fn, _ in cols]
        for n in range(cfg.n_min, cfg.n_max + 1)
    ]
    if cfg.format == "csv":
        return _csv(header, rows), EXIT_OK
    doc = {"q": fp.q}
    if cfg.alpha is not None:
        doc["alpha"] = float(cfg.alpha)
    doc["columns"] = header
    doc["rows"] = rows
    return dumps(doc), EXIT_OK


def _cmd_apply(cfg: RunConfig, op) -> tuple:
    (doc,) = _inputs(cfg, ["u"])
    fp, order = _field_and_order(cfg, [doc])
    u = _window(cfg, _scalar(doc, "u"))
    out = op(fp, u, order)
    if cfg.format == "csv":
        return _csv(_RADIAL_HEADER, _radial_rows(fp, out)), EXIT_OK
    return dumps(to_document(out, fp.q, order.alpha)), EXIT_OK


def cmd_apply_d(cfg):
    return _cmd_apply(cfg, apply_D)


def cmd_apply_i(cfg):
    return _cmd_apply(cfg, apply_I)


def _report_document(report: SolveReport) -> dict:
    out = {
        "method": report.method,
        "min_pivot": report.min_pivot,
        "residual_max": report.residual_max,
        "iterations": report.iterations,
        "picard_norms": list(report.picard_norms),
        "head_truncation_estimate": report.head_truncation_estimate,
        "warnings": list(report.warnings),
    }
    if report.decay is not None:
        d = report.decay
        out["decay"] = {"satisfied": d.satisfied, "eps": d.eps, "C_a": d.C_a, "C_f": d.C_f}
    return out


def _problem(cfg: RunConfig, docs, fp, order):
    """Scalar or matrix problem from the a and f documents."""
    if cfg.dim == 1 and "components" not in docs[1]:
        a = _window(cfg, _scalar(docs[0], "a"))
        f = _window(cfg, _scalar(docs[1], "f"))
        return CauchyProblem(fp, order, a, f, complex(_u0(cfg, 1)[0]))
    try:
        if "dim" in docs[0]:
            a = matrix_from_document(docs[0])
        else:
            a = MatrixRadialFunction.from_scalar(from_document(docs[0]))
        f = vector_from_document(docs[1]) if "components" in docs[1] else (from_document(docs[1]),)
    except DocumentError as exc:
        raise DocumentError(f"matrix problem: {exc}") from exc
    if a.dim != cfg.dim or len(f) != cfg.dim:
        raise UsageError(f"--dim {cfg.dim} but a is {a.dim}x{a.dim} and f has {len(f)} components")
    if cfg.n_min is not None:
        raise UsageError("--n-min/--n-max widening is only supported for scalar problems")
    return MatrixCauchyProblem(fp, order, a, tuple(f), _u0(cfg, cfg.dim))


def cmd_solve(cfg: RunConfig) -> tuple:
    docs = _inputs(cfg, ["a", "f"])
    fp, order = _field_and_order(cfg, docs)
    problem = _problem(cfg, docs, fp, order)
    if isinstance(problem, MatrixCauchyProblem):
        report = solve_matrix(problem)
        vs, us = report.v, report.u
    else:
        if cfg.method == "picard":
            kwargs = {} if cfg.tol is None else {"tol": cfg.tol}
            report = solve_picard(problem, **kwargs)
        else:
            report = solve_direct(problem)
        vs, us = (report.v,), (report.u,)
    if cfg.format == "csv":
        if len(us) == 1:
            return _csv(_RADIAL_HEADER, _radial_rows(fp, us[0])), EXIT_OK
        rows = [r for j, u in enumerate(us) for r in _radial_rows(fp, u, j)]
        return _csv(["component"] + _RADIAL_HEADER, rows), EXIT_OK
    if len(us) == 1:
        doc = {"q": fp.q, "alpha": order.alpha, "v": to_document(vs[0]), "u": to_document(us[0])}
    else:
        doc = {"q": fp.q, "alpha": order.alpha, "v": vector_to_document(vs), "u": vector_to_document(us)}
    doc["report"] = _report_document(report)
    return dumps(doc), EXIT_OK


def cmd_residual(cfg: RunConfig) -> tuple:
    docs = _inputs(cfg, ["a", "f", "u"])
    fp, order = _field_and_order(cfg, docs)
    if cfg.dim != 1:
        raise UsageError("residual supports scalar problems only (dim 1)")
    a = _window(cfg, _scalar(docs[0], "a"))
    f = _window(cfg, _scalar(docs[1], "f"))
    u = _window(cfg, _scalar(docs[2], "u"))
    problem = CauchyProblem(fp, order, a, f, u.value_at_zero)
    res = residual(problem, u)
    if cfg.format == "csv":
        rows = (
            [int(n), fp.abs_value(int(n)), z.real, z.imag, bool(t)]
            for n, z, t in zip(res.levels, res.values, res.trusted)
        )
        return _csv(_RADIAL_HEADER + ["trusted"], rows), EXIT_OK
    doc = {
        "q": fp.q,
        "alpha": order.alpha,
        "trust_margin": trust_margin(order),
        "residual_max": res.residual_max,
        "warnings": list(res.warnings),
        "levels": [int(n) for n in res.levels],
        "values": [[z.real, z.imag] for z in res.values],
        "trusted": [bool(t) for t in res.trusted],
    }
    return dumps(doc), EXIT_OK


def cmd_verify(cfg: RunConfig) -> tuple:
    results = run_criteria()
    code = EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY
    if cfg.format == "json":
        doc = {
            "passed": code == EXIT_OK,
            "criteria": [
                {"number": r.number, "title": r.title, "passed": r.passed, "detail": r.detail}
                for r in results
            ],
        }
        return dumps(doc), code
    if cfg.format == "csv":
        rows = ([r.number, r.passed, r.title, r.detail] for r in results)
        return _csv(["number", "passed", "title", "detail"], rows), code
    return "".join(format_result(r) + "\n" for r in results), code


_HANDLERS = {
    "constants": cmd_constants,
    "integrate": cmd_integrate,
    "apply-d": cmd_apply_d,
    "apply-i": cmd_apply_i,
    "solve": cmd_solve,
    "residual": cmd_residual,
    "verify": cmd_verify,
}


def run(cfg: RunConfig) -> tuple:
    """Execute a validated configuration; returns ``(output_text, exit_code)``.

    Library exceptions propagate; :func:`main` maps them to exit codes.
    """
    return _HANDLERS[cfg.command](cfg)


def _emit(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
        text, code = run(cfg)
        _emit(text, cfg.output)
        return code
    except (SingularPivotError, NoConvergenceError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (UsageError, ValueError, TypeError, ZeroDivisionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
