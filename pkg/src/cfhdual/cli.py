"""Command-line front end: ``cfhdual <command> [flags]``."""
from __future__ import annotations

import argparse
import json
import sys

import jsonschema
import numpy as np

from . import convergence, export
from .core import build_domain, build_lattice
from .discrete_dual import SCHEMES, assemble
from .errors import (CFHError, CenterTooClose, InvalidN, InvalidWindow, NotOrthogonal,
                     UnequalSides)
from .invariants import identity_residuals
from .reference_dual import reference_dual_lattice
from .samplers import CATALOGUE, make_entry, validate_entry

_NUM = {"type": "number"}
CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "entry": {"type": "string"},
        "params": {"type": "object"},
        "domain": {"type": "array", "items": _NUM, "minItems": 6, "maxItems": 6},
        "n": {"type": "integer"},
        "n_list": {"type": "array", "items": {"type": "integer"}, "minItems": 1},
        "scheme": {"enum": list(SCHEMES)},
        "method": {"enum": ["discrete", "reference"]},
        "reference": {"enum": ["quadrature", "exact"]},
        "m_ref": {"type": "integer", "minimum": 2},
        "safety": {"type": "number", "minimum": 1},
        "grid": {"type": "integer", "minimum": 2},
        "grid_m": {"type": "integer", "minimum": 16},
        "subsamples": {"type": "integer", "minimum": 0},
        "analytic": {"type": "boolean"},
        "slices": {"type": "array", "items": {"type": "integer"}},
        "projection": {"enum": list(export.PROJECTIONS)},
        "format": {"enum": ["obj", "ply"]},
        "out": {"type": "string"},
        "json": {"type": "string"},
        "obj": {"type": "string"},
        "q": {"type": "array", "items": _NUM, "minItems": 4, "maxItems": 4},
    },
}

# config key -> argparse dest
_DEST = {"n_list": "n", "n": "n"}


_USAGE_ERRORS = (InvalidN, InvalidWindow, UnequalSides, CenterTooClose, NotOrthogonal)


class UsageError(Exception):
    pass


def _ints(s):
    return [int(v) for v in str(s).split(",") if v.strip()]


def _floats(s):
    return [float(v) for v in str(s).split(",") if v.strip()]


def build_parser():
    p = argparse.ArgumentParser(prog="cfhdual", description="Discrete duals of conformally flat hypersurfaces.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, n=False, n_list=False):
        sp.add_argument("--config", help="JSON config; its keys override flags")
        sp.add_argument("--entry", default="pseudosphere-cylinder")
        sp.add_argument("--params", default=None, help="JSON object of entry parameters")
        sp.add_argument("--domain", type=_floats, default=None, help="x0,xe,y0,ye,z0,ze")
        sp.add_argument("--out", default=None)
        if n:
            sp.add_argument("--n", type=int, default=16)
        if n_list:
            sp.add_argument("--n", type=_ints, default=[8, 16, 32, 64])

    sp = sub.add_parser("catalogue", help="list entries and parameter schemas")
    sp.add_argument("--config")
    sp.add_argument("--out", default=None)

    sp = sub.add_parser("validate", help="structural identity residuals of an entry")
    common(sp)
    sp.add_argument("--grid", type=int, default=5)
    sp.add_argument("--analytic", action="store_true")

    sp = sub.add_parser("dualize", help="discrete or reference dual on a lattice")
    common(sp, n=True)
    sp.add_argument("--scheme", choices=SCHEMES, default="xbar")
    sp.add_argument("--method", choices=["discrete", "reference"], default="discrete")
    sp.add_argument("--m-ref", dest="m_ref", type=int, default=16)
    sp.add_argument("--obj", default=None, help="also write slice polylines as OBJ")
    sp.add_argument("--projection", choices=export.PROJECTIONS, default="drop_w")
    sp.add_argument("--subsamples", type=int, default=8)

    sp = sub.add_parser("verify", help="dual identity residuals with PASS/FAIL summary")
    common(sp)
    sp.add_argument("--grid", type=int, default=5)
    sp.add_argument("--m-ref", dest="m_ref", type=int, default=16)
    sp.add_argument("--q", type=_floats, default=[0.0, 0.0, 0.0, 5.0])
    sp.add_argument("--analytic", action="store_true")

    sp = sub.add_parser("sweep", help="convergence sweep over n")
    common(sp, n_list=True)
    sp.add_argument("--scheme", choices=SCHEMES, default="xbar")
    sp.add_argument("--reference", choices=["quadrature", "exact"], default="quadrature")
    sp.add_argument("--m-ref", dest="m_ref", type=int, default=16)
    sp.add_argument("--safety", type=float, default=1.1)
    sp.add_argument("--grid-m", dest="grid_m", type=int, default=65)
    sp.add_argument("--subsamples", type=int, default=2)
    sp.add_argument("--json", default=None)

    sp = sub.add_parser("cusp", help="direction reversal through a sigma1 zero")
    common(sp, n=True)
    sp.set_defaults(entry="cusp-pseudosphere", n=64)
    sp.add_argument("--grid", type=int, default=5)

    sp = sub.add_parser("export", help="OBJ/PLY of slice polylines")
    common(sp, n=True)
    sp.set_defaults(n=8)
    sp.add_argument("--scheme", choices=SCHEMES, default="xbar")
    sp.add_argument("--slices", type=_ints, default=None)
    sp.add_argument("--projection", choices=export.PROJECTIONS, default="drop_w")
    sp.add_argument("--format", choices=["obj", "ply"], default="obj")
    sp.add_argument("--subsamples", type=int, default=8)
    return p


def apply_config(args):
    if not getattr(args, "config", None):
        return args
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config: {exc}") from exc
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise UsageError(f"invalid config: {exc.message}") from exc
    for key, val in cfg.items():
        dest = _DEST.get(key, key)
        if not hasattr(args, dest):
            raise UsageError(f"config key {key!r} does not apply to {args.command}")
        if key == "params":
            val = json.dumps(val)
        setattr(args, dest, val)
    return args


def _entry(args):
    params = args.params
    if isinstance(params, str):
        try:
            params = json.loads(params)
        except json.JSONDecodeError as exc:
            raise UsageError(f"--params is not JSON: {exc}") from exc
    try:
        entry = make_entry(args.entry, params)
    except KeyError as exc:
        raise UsageError(f"unknown entry {args.entry!r}") from exc
    except jsonschema.ValidationError as exc:
        raise UsageError(f"invalid params: {exc.message}") from exc
    dom = build_domain(*args.domain) if args.domain else entry.default_domain()
    return entry, dom


def _emit(text, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def cmd_catalogue(args):
    rows = [{"name": k, "description": v["description"], "schema": v["schema"]}
            for k, v in CATALOGUE.items()]
    _emit(_dump(rows), args.out)
    return 0


def cmd_validate(args):
    entry, dom = _entry(args)
    rep = validate_entry(entry, dom, grid=args.grid, analytic=args.analytic)
    _emit(_dump(rep.to_dict()), args.out)
    print(f"validate {entry.name}: {'PASS' if rep.passed else 'FAIL'}", file=sys.stderr)
    return 0 if rep.passed else 1


def _slice_polylines(hyper, slices, subsamples):
    n = hyper.lattice.n
    ks = range(n + 1) if slices is None else slices
    lines = []
    for k in ks:
        if not 0 <= k <= n:
            raise UsageError(f"slice index {k} outside 0..{n}")
        lines.extend(export.polylines_from_surface(hyper.surface(k, subsamples)))
    return lines


def cmd_dualize(args):
    entry, dom = _entry(args)
    L = build_lattice(dom, args.n)
    if args.method == "reference":
        out = reference_dual_lattice(entry, L, args.m_ref).to_dict()
    else:
        H = assemble(entry, L, args.scheme)
        out = H.to_dict()
        if args.obj:
            export.write_obj(args.obj, _slice_polylines(H, None, args.subsamples), args.projection, dom.a)
    out["entry"] = entry.name
    _emit(_dump(out), args.out)
    return 0


def cmd_verify(args):
    entry, dom = _entry(args)
    rep = identity_residuals(entry, dom, grid=args.grid, q=tuple(args.q), m=args.m_ref,
                             analytic=args.analytic)
    d = rep.to_dict()
    d["summary"] = "PASS" if rep.passed else "FAIL"
    _emit(_dump(d), args.out)
    for name in rep.failures():
        print(f"FAIL {name}", file=sys.stderr)
    print(f"verify {entry.name}: {d['summary']}", file=sys.stderr)
    return 0 if rep.passed else 1


def cmd_sweep(args):
    entry, dom = _entry(args)
    n_list = args.n if isinstance(args.n, list) else [args.n]
    for n in n_list:
        build_lattice(dom, n)
    rep = convergence.sweep(entry, args.scheme, n_list, m_ref=args.m_ref, reference=args.reference,
                            subsamples=args.subsamples, domain=dom, safety=args.safety,
                            grid_m=args.grid_m)
    _emit(rep.to_csv(), args.out)
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(_dump(rep.to_dict()))
    print(f"sweep {entry.name} {args.scheme}: slope {rep.fit.slope:.4f}, bounds "
          f"{'satisfied' if rep.all_satisfied else 'VIOLATED'}", file=sys.stderr)
    return 0 if rep.all_satisfied else 1


def cmd_cusp(args):
    entry, dom = _entry(args)
    build_lattice(dom, args.n)
    r = convergence.cusp_experiment(entry, args.n, dom, grid=args.grid)
    _emit(_dump(r), args.out)
    ok = r["reversal"] and r["within_2delta"]
    print(f"cusp {entry.name} n={args.n}: {'PASS' if ok else 'FAIL'}", file=sys.stderr)
    return 0 if ok else 1


def cmd_export(args):
    entry, dom = _entry(args)
    if not args.out:
        raise UsageError("export needs --out")
    H = assemble(entry, build_lattice(dom, args.n), args.scheme)
    lines = _slice_polylines(H, args.slices, args.subsamples)
    writer = export.write_obj if args.format == "obj" else export.write_ply
    nv = writer(args.out, lines, args.projection, dom.a)
    print(f"wrote {nv} vertices, {len(lines)} polylines to {args.out}", file=sys.stderr)
    return 0


COMMANDS = {"catalogue": cmd_catalogue, "validate": cmd_validate, "dualize": cmd_dualize,
            "verify": cmd_verify, "sweep": cmd_sweep, "cusp": cmd_cusp, "export": cmd_export}


def run_command(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        apply_config(args)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CFHError, ValueError) as exc:
        msg = str(exc)
        name = type(exc).__name__
        print(msg if msg.startswith(name) else f"{name}: {msg}", file=sys.stderr)
        usage = isinstance(exc, _USAGE_ERRORS) or not isinstance(exc, CFHError)
        return 2 if usage else 1


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()
