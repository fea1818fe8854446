"""Command-line front end: solve, verify, lefschetz, caustic, and sweep.

All outputs are deterministic for a fixed seed; JSON keys and CSV headers
are stable schemas.  Usage errors exit 64; unequal-degree refusals exit 65.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys

from . import catalog, caustics, imaging, lefschetz
from .catalog import ControlParams, ModelId
from .errors import (CausticSource, EmptyCriticalSet, IncompleteSolve,
                     InvalidParams, LensError, UnequalDegrees)

EX_USAGE = 64
EX_UNEQUAL = 65

DEFAULT_TRIALS = 1000
DEFAULT_SEED = 42
DEFAULT_TOL = 1e-8


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse front end whose usage failures exit with code 64 and which
    accepts comma-joined negative values such as --y -3,0."""

    def __init__(self, *a, **kw):
        super().__init__(*a, **kw)
        self._negative_number_matcher = re.compile(r"^-\d[\d.,eE+-]*$")

    def error(self, message):
        raise UsageError(message)


def _num(v):
    """Strict-JSON number: non-finite values (on-caustic magnifications)
    serialize as null."""
    v = float(v)
    return v if math.isfinite(v) else None


def _c(z) -> list:
    z = complex(z)
    return [_num(z.real), _num(z.imag)]


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def _parse_pair(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"expected two comma-separated values, got {text!r}")
    return (float(parts[0]), float(parts[1]))


def _parse_window(text):
    parts = text.split(",")
    if len(parts) != 4:
        raise UsageError(f"expected four comma-separated values, got {text!r}")
    return tuple(float(p) for p in parts)


def _parse_resolution(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"expected two comma-separated integers, got {text!r}")
    return (int(parts[0]), int(parts[1]))


def _load_config(path):
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"config line without '=': {line!r}")
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out


def _apply_config(args):
    if not getattr(args, "config", None):
        return
    cfg = _load_config(args.config)
    casts = {
        "model": str, "c": float, "p": float, "y": _parse_pair,
        "trials": int, "seed": int, "tol": float, "window": _parse_window,
        "resolution": _parse_resolution, "output": str, "format": str,
        "samples": int,
    }
    for key, value in cfg.items():
        if key not in casts:
            raise UsageError(f"unknown config key {key!r}")
        if getattr(args, key, None) is None:
            setattr(args, key, casts[key](value))


def _params_from_args(args) -> ControlParams:
    return ControlParams(y=args.y if args.y is not None else (0.0, 0.0),
                         c=args.c, p=args.p)


def _params_doc(params: ControlParams) -> dict:
    out = {}
    if params.c is not None:
        out["c"] = params.c
    if params.p is not None:
        out["p"] = params.p
    return out


def _emit(args, text: str):
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(args, doc):
    _emit(args, json.dumps(doc, indent=2) + "\n")


def _solution_set_doc(ss: imaging.SolutionSet) -> dict:
    return {
        "model": ss.model_id.value,
        "params": _params_doc(ss.params),
        "source": [ss.y[0], ss.y[1]],
        "solutions": [
            {
                "x": [_c(s.position[0]), _c(s.position[1])],
                "real": s.is_real,
                "det_j": _c(s.det_jacobian),
                "mu": _c(s.magnification),
                "residual": _num(s.residual),
            }
            for s in ss.solutions
        ],
        "sum_all": _c(ss.sum_all),
        "sum_real": _num(ss.sum_real),
        "n_real": ss.n_real,
    }


def cmd_solve(args) -> int:
    if args.y is None:
        raise UsageError("solve requires --y")
    model = catalog.instantiate(ModelId.parse(args.model), _params_from_args(args))
    code = 0
    try:
        ss = imaging.solve_images(model)
    except IncompleteSolve as err:
        ss, code = err.solution_set, 2
    except CausticSource as err:
        ss, code = err.solution_set, 3
    _emit_json(args, _solution_set_doc(ss))
    return code


def _model_list(args):
    if args.model == "all":
        return list(ModelId)
    return [ModelId.parse(args.model)]


def cmd_verify(args) -> int:
    trials = args.trials if args.trials is not None else DEFAULT_TRIALS
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    tol = args.tol if args.tol is not None else DEFAULT_TOL
    models = _model_list(args)
    model_docs = []
    ok = True
    for mid in models:
        rep = imaging.verify_invariant(mid, trials=trials, seed=seed, tol=tol)
        ok = ok and rep.passed
        model_docs.append({
            "model": mid.value,
            "box": rep.box.as_dict(),
            "trials": rep.trials,
            "accepted": rep.accepted,
            "rejected_caustic": rep.rejected_caustic,
            "rejected_incomplete": rep.rejected_incomplete,
            "max_defect": rep.max_defect,
            "all_real_trials": rep.all_real_trials,
            "all_real_within_tol": rep.all_real_within_tol,
            "max_real_defect": rep.max_real_defect,
            "pass": rep.passed,
        })
    doc = {
        "command": "verify",
        "rng": imaging.RNG_NAME,
        "seed": seed,
        "trials": trials,
        "tol": tol,
        "models": model_docs,
        "pass": ok,
    }
    _emit_json(args, doc)
    return 0 if ok else 1


def _fmt_complex(z) -> str:
    if z.imag == 0:
        return f"{z.real:g}"
    return f"{z.real:g}{z.imag:+g}i"


def cmd_lefschetz(args) -> int:
    tol = args.tol if args.tol is not None else DEFAULT_TOL
    model = catalog.instantiate(ModelId.parse(args.model), _params_from_args(args))
    try:
        rep = lefschetz.lefschetz_total(model)
    except UnequalDegrees as err:
        pts = ", ".join(f"(0 : {_fmt_complex(p[0])} : {_fmt_complex(p[1])})"
                        for p in err.indeterminacy)
        sys.stderr.write(
            f"lefschetz: {err}; indeterminacy at infinity: {pts}\n")
        return EX_UNEQUAL
    doc = {
        "affine_sum": _c(rep.affine_sum),
        "infinity_fixed_points": [
            {
                "point": [_c(p.point[0]), _c(p.point[1])],
                "lambda": _c(p.multiplier),
                "index": _c(p.index),
            }
            for p in rep.infinity_points
        ],
        "infinity_sum": _c(rep.infinity_sum),
        "total": _c(rep.total),
    }
    _emit_json(args, doc)
    return 0 if abs(rep.total - 1.0) <= tol else 1


CAUSTIC_HEADER = "t,x1,x2,y1,y2,beta,is_cusp"


def cmd_caustic(args) -> int:
    samples = args.samples if args.samples is not None else 2000
    model = catalog.instantiate(ModelId.parse(args.model), _params_from_args(args))
    lines = [CAUSTIC_HEADER]
    try:
        points = caustics.critical_curve(model, samples)
    except EmptyCriticalSet:
        points = []
    if points:
        points = caustics.caustic_map(model, points)
        cusp_ts = caustics.beta_cusp_detect(model, points)
        cusp_rows = set()
        for tc in cusp_ts:
            nearest = min(range(len(points)),
                          key=lambda i: abs(points[i].parameter_t - tc))
            cusp_rows.add(nearest)
        for i, p in enumerate(points):
            lines.append(",".join([
                _fmt(p.parameter_t), _fmt(p.x[0]), _fmt(p.x[1]),
                _fmt(p.caustic_y[0]), _fmt(p.caustic_y[1]), _fmt(p.beta),
                "1" if i in cusp_rows else "0",
            ]))
    _emit(args, "\n".join(lines) + "\n")
    return 0


SWEEP_HEADER = "y1,y2,n_real,sum_real_mu,rejected"


def cmd_sweep(args) -> int:
    if args.window is None or args.resolution is None:
        raise UsageError("sweep requires --window and --resolution")
    model = catalog.instantiate(ModelId.parse(args.model), _params_from_args(args))
    grid = caustics.image_count_grid(model, args.window, args.resolution)
    lines = [SWEEP_HEADER]
    n1, n2 = grid.resolution
    for i2 in range(n2):
        for i1 in range(n1):
            lines.append(",".join([
                _fmt(grid.y1_centers[i1]), _fmt(grid.y2_centers[i2]),
                str(int(grid.counts[i2, i1])), _fmt(grid.real_sums[i2, i1]),
                "1" if grid.rejected[i2, i1] else "0",
            ]))
    _emit(args, "\n".join(lines) + "\n")
    return 0


def _add_common(sp, with_window=False, with_samples=False):
    sp.add_argument("--model", required=False, default=None)
    sp.add_argument("--c", type=float, default=None)
    sp.add_argument("--p", type=float, default=None)
    sp.add_argument("--y", type=_parse_pair, default=None)
    sp.add_argument("--trials", type=int, default=None)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--tol", type=float, default=None)
    sp.add_argument("--output", default=None)
    sp.add_argument("--format", choices=("json", "csv"), default=None)
    sp.add_argument("--config", default=None)
    if with_window:
        sp.add_argument("--window", type=_parse_window, default=None)
        sp.add_argument("--resolution", type=_parse_resolution, default=None)
    if with_samples:
        sp.add_argument("--samples", type=int, default=None)


def build_parser() -> _Parser:
    parser = _Parser(prog="lenslef",
                     description="magnification-invariant verification toolkit")
    sub = parser.add_subparsers(dest="command")
    for name, fn, window, samp in (
        ("solve", cmd_solve, False, False),
        ("verify", cmd_verify, False, False),
        ("lefschetz", cmd_lefschetz, False, False),
        ("caustic", cmd_caustic, False, True),
        ("sweep", cmd_sweep, True, False),
    ):
        sp = sub.add_parser(name)
        _add_common(sp, with_window=window, with_samples=samp)
        sp.set_defaults(func=fn)
    return parser


NATIVE_FORMAT = {"solve": "json", "verify": "json", "lefschetz": "json",
                 "caustic": "csv", "sweep": "csv"}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            raise UsageError("missing subcommand")
        _apply_config(args)
        if args.model is None:
            raise UsageError("missing --model")
        native = NATIVE_FORMAT[args.command]
        if args.format is not None and args.format != native:
            raise UsageError(f"{args.command} emits {native}, not {args.format}")
        return args.func(args)
    except UsageError as err:
        sys.stderr.write(f"usage error: {err}\n")
        return EX_USAGE
    except InvalidParams as err:
        sys.stderr.write(f"usage error: {err}\n")
        return EX_USAGE
    except (OSError, ValueError) as err:
        sys.stderr.write(f"usage error: {err}\n")
        return EX_USAGE
    except LensError as err:
        sys.stderr.write(f"error: {err}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
