"""Command-line front end.

Every subcommand writes one deterministic artifact (CSV or JSON) to
``--output`` or stdout.  Relative output paths are resolved under
``$JORDANLATTICE_OUTPUT_DIR`` when that variable is set.

Exit status: 0 success, 1 invalid parameters, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import export
from .errors import DomainError, NumericalError
from .metric import factor_metric, hermitize, metric_from_weights
from .model import DEFAULT_T_RANGE, build_operator, parse_word, word_length
from .phase import classify_all_words, ghost_restriction, real_subspace_projector, reduced_hermitize
from .pseudospectrum import (
    DEFAULT_LADDER,
    GridResolutionWarning,
    GridSpec,
    component_report,
    contours,
    resolvent_field,
)
from .spectral import TOL_ABS, TOL_REL, classify, eigenvalues, sweep

OUTPUT_DIR_ENV = "JORDANLATTICE_OUTPUT_DIR"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors are parameter errors: exit 1, not argparse's default 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _finite(text: str) -> float:
    x = float(text)
    if not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return x


def _positive_int(text: str) -> int:
    k = int(text)
    if k < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return k


def _resolve(path: str | None) -> Path | None:
    if path is None or path == "-":
        return None
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def _emit(text: str, path: str | None):
    target = _resolve(path)
    if target is None:
        sys.stdout.write(text)
        return
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", newline="") as fh:
        fh.write(text)


def _sidecar(path: str | None, suffix: str) -> str | None:
    if path is None or path == "-":
        return None
    p = Path(path)
    return str(p.with_name(p.stem + suffix))


def _warn_range(t: float):
    lo, hi = DEFAULT_T_RANGE
    if not lo <= t <= hi:
        print(f"warning: t={t} lies outside the default range [{lo}, {hi}]", file=sys.stderr)


def _operator(args):
    word = parse_word(args.word)
    if len(word) != word_length(args.n):
        raise DomainError(f"word {word} has length {len(word)}; N={args.n} needs {word_length(args.n)}")
    _warn_range(args.t)
    return build_operator(args.n, word, args.t)


# -- subcommands ----------------------------------------------------------


def cmd_matrix(args):
    q = _operator(args)
    _emit(export.operator_json(q) if args.format == "json" else export.operator_csv(q), args.output)


def cmd_classify(args):
    q = _operator(args)
    spec = eigenvalues(q)
    cls = classify(spec, args.tol_abs, args.tol_rel)
    if args.format == "json":
        _emit(export.dumps(export.classification_payload(q, spec, cls)), args.output)
    else:
        _emit(export.classification_csv(spec, cls), args.output)


def cmd_sweep(args):
    word = parse_word(args.word)
    if args.t_min >= args.t_max:
        raise DomainError("need --t-min < --t-max")
    if args.steps < 2:
        raise DomainError("need --steps >= 2")
    for t in (args.t_min, args.t_max):
        _warn_range(t)
    grid = np.linspace(args.t_min, args.t_max, args.steps)
    sr = sweep(args.n, word, grid, tol_abs=args.tol_abs, tol_rel=args.tol_rel, threads=args.threads)
    _emit(export.sweep_json(sr) if args.format == "json" else export.sweep_csv(sr), args.output)


def cmd_pseudospec(args):
    q = _operator(args)
    rmin, rmax, imin, imax, nx, ny = args.grid
    if int(nx) != nx or int(ny) != ny:
        raise DomainError("grid sample counts must be integers")
    grid = GridSpec((rmin, rmax), (imin, imax), int(nx), int(ny))
    ladder = tuple(sorted(set(args.ladder), reverse=True))
    spec = eigenvalues(q)
    cls = classify(spec, args.tol_abs, args.tol_rel)
    fld = resolvent_field(q, grid, threads=args.threads)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GridResolutionWarning)
        rep = component_report(fld, ladder, spec, real_mask=cls.real_mask, strict=args.strict)
    if rep.unresolved:
        print(
            f"warning: {len({c for c, _ in rep.unresolved})} eigenvalue cluster(s) unresolved by the grid "
            "at some ladder values (see 'unresolved' in the report)",
            file=sys.stderr,
        )
    payload = export.report_payload(fld, rep, {"eigenvalues": [export.cplx(z) for z in spec.eigenvalues]})
    if args.format == "json":
        payload["s_values"] = export.matrix_payload(fld.s_values)
        _emit(export.dumps(payload), args.output)
    else:
        _emit(export.field_csv(fld), args.output)
        report_path = args.report or _sidecar(args.output, ".report.json")
        if report_path:
            _emit(export.dumps(payload), report_path)
    if args.contours:
        _emit(export.dumps({"operator": fld.descriptor, **export.contours_payload(contours(fld, ladder))}), args.contours)


def cmd_metric(args):
    q = _operator(args)
    sol = metric_from_weights(q, args.kappa)
    payload = export.metric_payload(q, sol)
    if args.hermitize:
        omega = factor_metric(sol, args.factor)
        payload.update(export.hermitization_payload(hermitize(q, omega)))
    if args.format == "json":
        _emit(export.dumps(payload), args.output)
    else:
        _emit(export.dense_csv(sol.theta), args.output)


def cmd_project(args):
    q = _operator(args)
    cls = classify(eigenvalues(q), args.tol_abs, args.tol_rel)
    rm = real_subspace_projector(q, cls)
    p, a = rm.projector, q.entries
    scale_p = max(np.linalg.norm(p, 2), np.finfo(float).tiny)
    residuals = {
        "idempotency": np.linalg.norm(p @ p - p, 2) / scale_p,
        "commutator": np.linalg.norm(a @ p - p @ a, 2) / (scale_p * np.linalg.norm(a, 2)),
        "trace_minus_dim": abs(np.trace(p).real - rm.reduced_dim),
    }
    if rm.reduced_dim:
        residuals["reduced_intertwining"] = rm.metric.residual
    payload = export.reduced_payload(q, rm, residuals)
    payload["ghost_restriction"] = export.matrix_payload(ghost_restriction(q, rm))
    if rm.reduced_dim and args.hermitize:
        payload["hermitization"] = export.hermitization_payload(reduced_hermitize(rm, args.factor))
    if args.format == "json":
        _emit(export.dumps(payload), args.output)
    else:
        _emit(export.dense_csv(rm.q_reduced), args.output)


def cmd_phase_table(args):
    rows = classify_all_words(args.n, args.t0, tol_abs=args.tol_abs, tol_rel=args.tol_rel, threads=args.threads)
    if args.format == "json":
        _emit(export.dumps(export.phase_table_payload(args.n, args.t0, rows)), args.output)
    else:
        _emit(export.phase_table_csv(rows), args.output)


# -- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="jordanlattice", description=__doc__.split("\n\n")[0], formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--output", "-o", default=None, help="output file (stdout if omitted)")
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="output format")
    common.add_argument("--threads", type=_positive_int, default=1, help="worker threads")
    common.add_argument("--tol-abs", type=_finite, default=TOL_ABS, help="absolute real-classification tolerance")
    common.add_argument("--tol-rel", type=_finite, default=TOL_REL, help="tolerance relative to ||Q||_F")

    op = _Parser(add_help=False)
    op.add_argument("--n", type=int, default=10, help="matrix dimension N")
    op.add_argument("--word", required=True, help="coupling word over {o,e} of length N//2")
    op.add_argument("--t", type=_finite, required=True, help="time parameter")

    factor = _Parser(add_help=False)
    factor.add_argument("--hermitize", action="store_true", help="also factor the metric and Hermitize")
    factor.add_argument("--factor", choices=("sqrt", "cholesky"), default="sqrt", help="metric factorization")

    def add(name, func, parents, help):
        p = sub.add_parser(name, parents=parents, help=help, formatter_class=fmt)
        p.set_defaults(func=func)
        return p

    add("matrix", cmd_matrix, [op, common], "export the operator Q(t)")
    add("classify", cmd_classify, [op, common], "eigenvalues split into real ones and ghost pairs")

    p = add("sweep", cmd_sweep, [common], "eigenvalue trajectories over a time grid")
    p.add_argument("--n", type=int, default=10, help="matrix dimension N")
    p.add_argument("--word", required=True, help="coupling word over {o,e}")
    p.add_argument("--t-min", type=_finite, default=DEFAULT_T_RANGE[0], help="first time sample")
    p.add_argument("--t-max", type=_finite, default=DEFAULT_T_RANGE[1], help="last time sample")
    p.add_argument("--steps", type=int, default=1001, help="number of time samples")

    p = add("pseudospec", cmd_pseudospec, [op, common], "resolvent-norm field and epsilon components")
    p.add_argument(
        "--grid",
        nargs=6,
        type=_finite,
        default=[-1.5, 1.5, -1.5, 1.5, 201, 201],
        metavar=("RE_MIN", "RE_MAX", "IM_MIN", "IM_MAX", "NX", "NY"),
        help="z-plane rectangle and samples per axis",
    )
    p.add_argument("--ladder", nargs="+", type=_finite, default=list(DEFAULT_LADDER), help="epsilon levels")
    p.add_argument("--contours", default=None, help="also write level-set polylines (JSON) here")
    p.add_argument("--report", default=None, help="report path when the field CSV goes to stdout")
    p.add_argument("--strict", action="store_true", help="fail instead of warning on unresolved eigenvalues")

    p = add("metric", cmd_metric, [op, common, factor], "dyadic metric Theta(kappa) and Hermitization")
    p.add_argument("--kappa", nargs="+", type=_finite, default=None, help="weights (default: all ones)")

    add("project", cmd_project, [op, common, factor], "project out ghosts; reduced operator and metric")

    p = add("phase-table", cmd_phase_table, [common], "real counts at -t0 and +t0 for every word")
    p.add_argument("--n", type=int, default=10, help="matrix dimension N")
    p.add_argument("--t0", type=_finite, default=0.1, help="probe time")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "n", 2) < 2:
        print(f"error: --n must be >= 2, got {args.n}", file=sys.stderr)
        return 1
    if args.tol_abs <= 0 or args.tol_rel < 0:
        print("error: need --tol-abs > 0 and --tol-rel >= 0", file=sys.stderr)
        return 1
    try:
        args.func(args)
    except DomainError as exc:
        print(f"error ({args.command}): {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure ({args.command}): {exc}", file=sys.stderr)
        return 2
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
