"""Command line front end.

Exit codes: 0 success, 1 flagged records, 2 parameter error, 3 I/O or
parse error.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from . import io as gio
from .harness import (
    CorpusError,
    CorpusSpec,
    ParameterError,
    canonical_id,
    derive_params,
    dumps,
    parse_descriptor,
    refinement_study,
    run_corpus,
    scaling_check,
)
from .norms import (
    RadiusSet,
    WeightField,
    a1_constant,
    ap_constant,
    besov_norm,
    lp_norm,
    morrey_norm,
    sobolev_norm,
    w11_seminorm,
    weak_lp_norm,
    weighted_lp_norm,
)
from .rearrange import (
    VARIANTS,
    WeightProfile,
    bp_constant,
    lambda_norm,
    two_weight_conditions,
    weak_lambda_norm,
)
from .spectral import Grid

EXIT_OK, EXIT_FLAGGED, EXIT_PARAM, EXIT_IO = 0, 1, 2, 3

NORM_KINDS = ("lp", "weak-lp", "sobolev", "w11", "besov", "lorentz", "weak-lorentz",
              "morrey", "weighted-lp")
WEIGHT_CLASSES = ("bp", "ap", "a1", "two-weight")


class InputError(Exception):
    """Unreadable or unparsable input (exit 3)."""


def _emit(obj, stream=None):
    (stream or sys.stdout).write(dumps(obj) + "\n")


def _fail(code: int, message: str) -> int:
    sys.stderr.write(f"error: {message}\n")
    _emit({"error": message, "exit": code}, sys.stdout)
    return code


def _default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("SOBOLAB_JOBS", "1")))
    except ValueError:
        return 1


def _provenance(argv, seed=None) -> dict:
    return {
        "argv": list(argv),
        "seed": seed,
        "versions": {
            "sobolab": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
    }


# descriptors ---------------------------------------------------------------

def parse_weight(text: str) -> WeightProfile:
    """``power:c,alpha``, or a JSON file holding a weight record."""
    if text.startswith("power:"):
        try:
            c, alpha = (float(x) for x in text[6:].split(","))
        except ValueError:
            raise InputError(f"bad power weight {text!r}; expected power:c,alpha") from None
        return WeightProfile.power(c, alpha)
    path = Path(text)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise InputError(f"cannot read weight file {text!r}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"weight file {text!r} is not JSON: {exc}") from None
    try:
        return WeightProfile.from_dict(data)
    except (KeyError, TypeError) as exc:
        raise InputError(f"bad weight record in {text!r}: {exc}") from None


def parse_field(text: str, grid: Grid) -> WeightField:
    """``ones``, ``power:exponent[,clip]`` about the box centre, or a file."""
    if text == "ones":
        return WeightField.ones(grid)
    if text.startswith("power:"):
        parts = text[6:].split(",")
        try:
            expo = float(parts[0])
        except ValueError:
            raise InputError(f"bad field descriptor {text!r}") from None
        sampling = parts[1] if len(parts) > 1 else "cell"
        return WeightField.power_distance(grid, expo, sampling=sampling)
    f = _load_function(text)
    return WeightField(f.grid, f.values)


def _load_function(path: str):
    try:
        return gio.load(path)
    except OSError as exc:
        raise InputError(f"cannot read {path!r}: {exc}") from None
    except gio.FormatError as exc:
        raise InputError(f"{path}: {exc}") from None


def _grid_from(args) -> Grid:
    return Grid(args.n, args.G, args.L)


def _function_from(args):
    if args.input:
        return _load_function(args.input)
    if not args.analytic:
        raise ParameterError("give --analytic DESCRIPTOR or --input FILE")
    grid = _grid_from(args)
    try:
        return parse_descriptor(args.analytic, grid)
    except CorpusError as exc:
        raise InputError(str(exc)) from None


def _need(value, name):
    if value is None:
        raise ParameterError(f"--{name} is required")
    return value


# commands ------------------------------------------------------------------

def cmd_norm(args) -> int:
    kind = args.kind
    f = _function_from(args)
    grid = f.grid
    params = {}
    if kind in ("lp", "weak-lp", "sobolev", "lorentz", "weak-lorentz", "morrey", "weighted-lp"):
        p = float(_need(args.p, "p"))
        params["p"] = p
    if kind == "lp":
        value = lp_norm(f, p)
    elif kind == "weak-lp":
        value = weak_lp_norm(f, p)
    elif kind == "sobolev":
        params["s"] = s = float(_need(args.s, "s"))
        value = sobolev_norm(f, s, p)
    elif kind == "w11":
        value = w11_seminorm(f)
    elif kind == "besov":
        params["beta"] = beta = float(_need(args.beta, "beta"))
        params["strict"] = not args.no_strict
        value = besov_norm(f, beta, strict=not args.no_strict)
    elif kind in ("lorentz", "weak-lorentz"):
        w = parse_weight(args.weight or "power:1,0")
        params["weight"] = w.to_dict()
        value = lambda_norm(f, p, w) if kind == "lorentz" else weak_lambda_norm(f, p, w)
    elif kind == "morrey":
        params["a"] = a = float(_need(args.a, "a"))
        radii = RadiusSet.default(grid, args.radii_per_octave)
        params["radii"] = radii.to_dict()
        value = morrey_norm(f, p, a, radii)
    else:
        omega = parse_field(args.field or "ones", grid)
        params["field"] = args.field or "ones"
        value = weighted_lp_norm(f, omega, p)
    _emit({"kind": kind, "params": params, "value": float(value), "grid": grid.to_dict()})
    return EXIT_OK


def cmd_weight(args) -> int:
    cls = args.cls
    out = {"class": cls}
    if cls == "bp":
        p = float(_need(args.p, "p"))
        w = parse_weight(_need(args.weight, "weight"))
        res = bp_constant(w, p)
        out.update(params={"p": p, "weight": w.to_dict()}, value=res.value if res.finite else None,
                   finite=res.finite, reason=res.reason)
    elif cls in ("ap", "a1"):
        grid = _grid_from(args)
        omega = parse_field(args.field or "ones", grid)
        radii = RadiusSet.default(omega.grid, args.radii_per_octave)
        if cls == "ap":
            p = float(_need(args.p, "p"))
            value = ap_constant(omega, p, radii)
            out["params"] = {"p": p, "field": args.field or "ones"}
        else:
            value = a1_constant(omega, radii)
            out["params"] = {"field": args.field or "ones"}
        out.update(value=value, finite=True, grid=omega.grid.to_dict(), radii=radii.to_dict())
    else:
        p = float(_need(args.p, "p"))
        q0 = float(_need(args.q0, "q0"))
        v = parse_weight(args.v or "power:1,0")
        w = parse_weight(args.weight or "power:1,0")
        res = two_weight_conditions(v, w, p, q0, args.variant, q=args.q)
        out.update(params={"p": p, "q0": q0, "q": args.q, "v": v.to_dict(), "w": w.to_dict()})
        out.update(res.to_dict())
    _emit(out)
    return EXIT_OK


def _case_from(args):
    cid = canonical_id(args.case)
    given = {}
    for name in ("s", "s1", "p", "q", "beta", "a", "q0"):
        val = getattr(args, name, None)
        if val is not None:
            given[name] = val
    if getattr(args, "omega_exponent", None) is not None:
        given["omega_exponent"] = args.omega_exponent
    if getattr(args, "weight", None):
        given["w"] = parse_weight(args.weight)
    if getattr(args, "v", None):
        given["v"] = parse_weight(args.v)
    return derive_params(cid, n=args.n, **given)


# narrow enough that a dilation by 1/2 still fits inside L/8
SCALING_SIGMA = (0.0085, 0.0104)


def _corpus_from(args) -> CorpusSpec:
    kw = {}
    if args.sigma:
        try:
            lo, hi = (float(x) for x in args.sigma.split(","))
        except ValueError:
            raise ParameterError(f"bad --sigma {args.sigma!r}; expected lo,hi") from None
        kw["sigma"] = (lo, hi)
    elif args.scaling:
        kw["sigma"] = SCALING_SIGMA
    try:
        return CorpusSpec.parse(args.corpus, seed=args.seed, **kw)
    except CorpusError as exc:
        raise ParameterError(str(exc)) from None


def _run_verify(case, args, argv):
    grid = _grid_from(args)
    corpus = _corpus_from(args)
    prov = _provenance(argv, args.seed)
    report = run_corpus(case, corpus, grid, args.jobs, args.radii_per_octave, prov)
    flagged = report.flagged
    if case.id == "hedberg-pointwise":
        best = max(report.records, key=lambda r: r.ratio if math.isfinite(r.ratio) else -1)
        report.extras["pointwise_constant"] = best.ratio
        report.extras["argmax_cell"] = best.extra.get("argmax")
        report.extras["argmax_member"] = best.index
    if args.scaling:
        sc = scaling_check(case, corpus, grid, jobs=args.jobs,
                           radii_per_octave=args.radii_per_octave)
        report.extras["scaling"] = sc.to_dict()
        flagged = flagged or sc.flagged
    if args.refine:
        G_list = [int(x) for x in args.refine.split(",")]
        rs = refinement_study(case, corpus, G_list, grid.n, grid.L, args.jobs,
                              args.radii_per_octave)
        report.extras["refinement"] = rs.to_dict()
        flagged = flagged or rs.flagged
    return report, flagged


def cmd_verify(args, argv) -> int:
    case = _case_from(args)
    report, flagged = _run_verify(case, args, argv)
    out_dir = Path(args.out_dir)
    stem = args.name or f"{case.id}-seed{args.seed}"
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / f"{stem}.json").write_text(report.to_json())
        (out_dir / f"{stem}.csv").write_text(report.to_csv())
    except OSError as exc:
        raise InputError(f"cannot write report: {exc}") from None
    agg = report.aggregate
    print(f"case={case.id} C_emp={format(agg['max_ratio'], '.17g')} n={agg['count']}")
    return EXIT_FLAGGED if flagged else EXIT_OK


def _parse_axes(specs):
    axes = []
    for spec in specs:
        if "=" not in spec:
            raise ParameterError(f"bad axis {spec!r}; expected name=v1,v2,...")
        name, vals = spec.split("=", 1)
        if name not in ("s", "s1", "p", "q", "beta", "a", "q0", "omega_exponent"):
            raise ParameterError(f"cannot sweep {name!r}")
        try:
            axes.append((name, [float(v) for v in vals.split(",")]))
        except ValueError:
            raise ParameterError(f"bad axis values in {spec!r}") from None
    if not axes:
        raise ParameterError("give at least one --axis")
    return axes


def cmd_sweep(args, argv) -> int:
    axes = _parse_axes(args.axis)
    names = [a[0] for a in axes]
    rows, rejected = [], []
    flagged_any = False
    for point in itertools.product(*(a[1] for a in axes)):
        ns = argparse.Namespace(**vars(args))
        for name, val in zip(names, point):
            setattr(ns, name, val)
        coords = dict(zip(names, point))
        try:
            case = _case_from(ns)
        except ParameterError as exc:
            rejected.append({"point": coords, "reason": str(exc)})
            continue
        report, flagged = _run_verify(case, ns, argv)
        flagged_any = flagged_any or flagged
        rows.append({**coords, "C_emp": report.aggregate["max_ratio"],
                     "mean_ratio": report.aggregate["mean_ratio"],
                     "n": report.aggregate["count"], "flagged": flagged})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names + ["C_emp", "mean_ratio", "n", "flagged"])
    for r in rows:
        w.writerow([format(r[k], ".17g") for k in names]
                   + [format(r["C_emp"], ".17g"), format(r["mean_ratio"], ".17g"), r["n"],
                      int(r["flagged"])])
    if args.csv:
        try:
            Path(args.csv).write_text(buf.getvalue())
        except OSError as exc:
            raise InputError(f"cannot write {args.csv}: {exc}") from None
    _emit({"case": canonical_id(args.case), "axes": {n: v for n, v in axes},
           "rows": rows, "rejected": rejected, "provenance": _provenance(argv, args.seed)})
    return EXIT_FLAGGED if flagged_any else EXIT_OK


# parser --------------------------------------------------------------------

def _add_grid(p, G=512, L=40.0):
    p.add_argument("--n", type=int, default=1, help="dimension (1, 2 or 3)")
    p.add_argument("--G", type=int, default=G, help="points per axis (power of two)")
    p.add_argument("--L", type=float, default=L, help="period")


def _add_case(p):
    for name in ("s", "s1", "p", "q", "beta", "a", "q0"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--omega-exponent", type=float, dest="omega_exponent")
    p.add_argument("--weight", help="Lorentz weight w: power:c,alpha or JSON file")
    p.add_argument("--v", help="right-hand weight v for the two-weight case")
    p.add_argument("--corpus", default="dgauss:24", help="family:count[,mz|,raw]")
    p.add_argument("--sigma", help="bump width range lo,hi as fractions of L")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=_default_jobs())
    p.add_argument("--radii-per-octave", type=int, default=4, dest="radii_per_octave")
    p.add_argument("--scaling", action="store_true", help="add a dilation study")
    p.add_argument("--refine", help="comma-separated G values for a refinement study")
    _add_grid(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sobolab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"sobolab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("norm", help="evaluate one norm")
    p.add_argument("--kind", required=True, choices=NORM_KINDS)
    p.add_argument("--analytic", help="const:c | gauss:A,x0,a | bumps:k,seed | mode:k,A | "
                                      "bandrand:seed,kmin,kmax, optional ,mz")
    p.add_argument("--input", help="grid function file (.json or binary)")
    for name in ("p", "s", "beta", "a"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--weight", help="power:c,alpha or JSON file")
    p.add_argument("--field", help="ones | power:exponent[,clip] | file")
    p.add_argument("--no-strict", action="store_true", help="allow non-mean-zero Besov input")
    p.add_argument("--radii-per-octave", type=int, default=4, dest="radii_per_octave")
    _add_grid(p, G=256, L=1.0)

    p = sub.add_parser("weight", help="check a weight class")
    p.add_argument("--class", required=True, choices=WEIGHT_CLASSES, dest="cls")
    p.add_argument("--p", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--q0", type=float)
    p.add_argument("--weight", help="power:c,alpha or JSON file")
    p.add_argument("--v", help="second weight for two-weight checks")
    p.add_argument("--variant", choices=VARIANTS, default="strong-1")
    p.add_argument("--field", help="ones | power:exponent[,clip] | file")
    p.add_argument("--radii-per-octave", type=int, default=4, dest="radii_per_octave")
    _add_grid(p, G=256, L=1.0)

    p = sub.add_parser("verify", help="measure an inequality constant on a corpus")
    p.add_argument("case", help="thm1, thm2, cor-weak, two-weight, thm3, thm4, hedberg")
    p.add_argument("--out-dir", default=".", dest="out_dir")
    p.add_argument("--name", help="report file stem")
    _add_case(p)

    p = sub.add_parser("sweep", help="verify over a grid of exponents")
    p.add_argument("case")
    p.add_argument("--axis", action="append", default=[], help="name=v1,v2,...")
    p.add_argument("--csv", help="write the sweep table here")
    _add_case(p)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        if args.command == "norm":
            return cmd_norm(args)
        if args.command == "weight":
            return cmd_weight(args)
        if args.command == "verify":
            return cmd_verify(args, argv)
        return cmd_sweep(args, argv)
    except InputError as exc:
        return _fail(EXIT_IO, str(exc))
    except (ParameterError, CorpusError, ValueError) as exc:
        return _fail(EXIT_PARAM, str(exc))


if __name__ == "__main__":
    sys.exit(main())
