"""Command-line front end: ``floatbody <command> [options]``.

Exit codes: 0 success, 1 a verification row failed, 2 malformed input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from .body import GeometryError, body_from_dict, body_to_dict, make_standard_body
from .distances import log_hausdorff
from .floating import FloatingBodyApprox, floating_body
from .isotropic import to_isotropic
from .logconcave import DensityError, make_density
from .measure import section_profile
from .verify import (all_pass, rows_to_csv, thm3_csv, thm3_trend, verify_lemmas,
                     verify_sections, verify_thm1, verify_thm2)


class InputError(Exception):
    pass


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text):
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",") if x.strip()]


def _emit(text: str, path: str | None):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _load_body(path):
    data = _load_json(path)
    if "outer" in data:  # a floating-body file stands for its outer body
        data = data["outer"]
    return body_from_dict(data)


def _body_from_args(args):
    if getattr(args, "body", None):
        return _load_body(args.body)
    if not getattr(args, "shape", None):
        raise InputError("give --body or --shape/--dim")
    params = {}
    if args.shape == "cube" and args.unit_volume:
        params["unit_volume"] = True
    if args.size is not None:
        key = {"cube": "s", "simplex": "scale", "cross_polytope": "r",
               "disk_polygon": "r"}[args.shape]
        params[key] = args.size
    if args.vertices is not None:
        params["n"] = args.vertices
    return make_standard_body(args.shape, args.dim, **params)


def _add_body_args(p, required=False):
    p.add_argument("--body", help="body JSON file")
    p.add_argument("--shape", choices=["cube", "simplex", "cross_polytope", "disk_polygon"])
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--size", type=float, help="half side / scale / radius")
    p.add_argument("--unit-volume", action="store_true", help="cube [-1/2, 1/2]^d")
    p.add_argument("--vertices", type=int, help="vertex count for disk_polygon")


# ---------------------------------------------------------------- commands

def cmd_body(args):
    _emit(_dump(body_to_dict(_body_from_args(args))), args.out)
    return 0


def cmd_compute(args):
    body = _body_from_args(args)
    fb = floating_body(body, args.delta, args.directions, mode=args.mode, seed=args.seed,
                       samples=args.samples)
    _emit(_dump(fb.to_dict()), args.out)
    if args.csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"u{i}" for i in range(body.dim)] + ["depth"])
        for u, t in zip(fb.directions, fb.depths):
            w.writerow([repr(float(x)) for x in u] + [repr(float(t))])
        _emit(buf.getvalue(), args.csv)
    return 0


def cmd_isotropic(args):
    body = _body_from_args(args)
    iso, form = to_isotropic(body)
    out = body_to_dict(iso)
    out["isotropic"] = form.to_dict()
    _emit(_dump(out), args.out)
    return 0


def cmd_distance(args):
    a, b = _load_body(args.a), _load_body(args.b)
    center = None if args.center is None else _floats(args.center)
    rep = log_hausdorff(a, b, center)
    _emit(_dump(rep.to_dict()), args.out)
    if args.csv:
        d = rep.to_dict()
        keys = ["dH", "dLAtCentroid", "dLOptimized", "dBMUpper"]
        text = ",".join(keys + ["witnessDirection"]) + "\n"
        text += ",".join(repr(float(d[k])) for k in keys)
        text += "," + " ".join(repr(x) for x in d["witnessDirection"]) + "\n"
        _emit(text, args.csv)
    return 0


def cmd_profile(args):
    body = _body_from_args(args)
    theta = np.asarray(_floats(args.theta))
    prof = section_profile(body, theta, args.grid)
    _emit(prof.to_csv(), args.csv or args.out)
    return 0


def _finish(rows, args):
    _emit(rows_to_csv(rows), args.csv)
    return 0 if all_pass(rows) else 1


def cmd_verify_thm2(args):
    deltas = _floats(args.deltas) if args.deltas else None
    return _finish(verify_thm2(_ints(args.dims), deltas, args.bodies.split(","),
                               args.directions), args)


def cmd_verify_thm1(args):
    return _finish(verify_thm1(_ints(args.dims), _floats(args.deltas),
                               args.bodies.split(","), args.directions), args)


def cmd_verify_lemmas(args):
    battery = None
    if args.density:
        battery = [make_density(_load_json(p)) for p in args.density]
    return _finish(verify_lemmas(battery), args)


def cmd_verify_sections(args):
    return _finish(verify_sections(_ints(args.dims)), args)


def cmd_thm3_trend(args):
    reports, rows = thm3_trend(_ints(args.dims), args.delta, args.shape,
                               samples=args.samples, seed=args.seed, n=args.directions)
    _emit(thm3_csv(reports), args.out)
    if args.csv:
        _emit(rows_to_csv(rows), args.csv)
    return 0 if all_pass(rows) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="floatbody", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("body", help="write a standard body as JSON")
    _add_body_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_body)

    p = sub.add_parser("compute", help="floating body approximation")
    _add_body_args(p)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--directions", type=int)
    p.add_argument("--mode", choices=["exact", "mc"], default="exact")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("isotropic", help="isotropic position of a body")
    _add_body_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_isotropic)

    p = sub.add_parser("distance", help="distance report between two bodies")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--center", help="comma-separated center for the log-Hausdorff value")
    p.add_argument("--out")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("profile", help="section function and cap masses as CSV")
    _add_body_args(p)
    p.add_argument("--theta", required=True, help="comma-separated direction")
    p.add_argument("--grid", type=int, default=257)
    p.add_argument("--out")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_profile)

    for name, func, deltas in (("verify-thm2", cmd_verify_thm2, None),
                               ("verify-thm1", cmd_verify_thm1, "0.05,0.1,0.2,0.3")):
        p = sub.add_parser(name)
        p.add_argument("--dims", default="2,3")
        p.add_argument("--deltas", default=deltas)
        p.add_argument("--bodies", default="cube,simplex,cross_polytope")
        p.add_argument("--directions", type=int)
        p.add_argument("--csv")
        p.set_defaults(func=func)

    p = sub.add_parser("verify-lemmas")
    p.add_argument("--density", action="append", help="density JSON (repeatable)")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_verify_lemmas)

    p = sub.add_parser("verify-sections")
    p.add_argument("--dims", default="2,3")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_verify_sections)

    p = sub.add_parser("thm3-trend")
    p.add_argument("--dims", default="2..6")
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--shape", default="cube")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--directions", type=int)
    p.add_argument("--out")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_thm3_trend)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except (InputError, GeometryError, DensityError, ValueError, KeyError) as exc:
        print(f"floatbody: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
