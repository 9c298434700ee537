"""Command-line front end.

Subcommands: classify, curves, kmap, volmap, ik, fk.  Data goes to CSV,
reports to JSON, plots to SVG.  Exit codes: 0 ok, 1 bad input, 2 the
classification sits inside the instability band of a separating surface.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings

import numpy as np

from . import classify as _classify
from . import perf as _perf
from . import singular as _singular
from .contours import marching_squares, svg_document
from .ik import ik_full
from .model import CartesianPoint, JointConfig, Params, fk, to_section

CURVES_CSV_SCHEMA = """\
# ortho3r curves v1
# branches file: branch_id,theta2,theta3,rho,z  (one row per sample)
# points file:   kind,rho,z                      (kind: cusp | node)
"""
ISOMAP_CSV_SCHEMA = """\
# ortho3r isomap v1
# comment header carries kind, r2 and both axes; body is the value
# matrix, one row per d4 (row-major), columns ordered like the d3 axis.
"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit 2; keep 2 for unstable
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_geometry(sp):
    sp.add_argument("--d3", type=float, required=True)
    sp.add_argument("--d4", type=float, required=True)
    sp.add_argument("--r2", type=float, required=True)


def _params(args) -> Params:
    try:
        return Params(args.d3, args.d4, args.r2)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(1)


def _outpath(args, name: str) -> str:
    base = getattr(args, "outdir", None) or os.environ.get("ORTHO3R_OUTDIR", ".")
    os.makedirs(base, exist_ok=True)
    return os.path.join(base, name)


def _parse_range(text: str, default_n: int = 40) -> np.ndarray:
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise ValueError(f"range must be lo:hi or lo:hi:n, got {text!r}")
    lo, hi = float(parts[0]), float(parts[1])
    n = int(parts[2]) if len(parts) == 3 else default_n
    if not (lo > 0 and hi > lo and n >= 2):
        raise ValueError(f"invalid range {text!r}")
    return np.linspace(lo, hi, n)


def cmd_classify(args) -> int:
    p = _params(args)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        report = _classify.classify_topology(p, grid=args.grid)
    if args.json:
        print(json.dumps(report.as_dict(), indent=1))
    else:
        print(f"manipulator d3={p.d3} d4={p.d4} r2={p.r2}")
        print(f"  domain {report.domain}, topology WT{report.wt}")
        print(f"  cusps {report.n_cusps}, nodes {report.n_nodes}, "
              f"aspects {report.n_aspects}")
        print(f"  quaternary {report.quaternary}, toroidal cavity "
              f"{report.has_cavity}, generic {report.generic}")
        nv, n2, n4 = report.census
        print(f"  census: {nv} void / {n2} two-posture / {n4} four-posture regions")
        if report.unstable:
            print("  WARNING: inside the instability band of a separating surface")
    return 2 if report.unstable else 0


def cmd_curves(args) -> int:
    p = _params(args)
    branches = _singular.trace_branches(p, n=args.n)
    pts = _singular.singular_point_set(p)
    bpath = _outpath(args, args.prefix + "_branches.csv")
    rows = ["# ortho3r curves v1", "branch_id,theta2,theta3,rho,z"]
    for br in branches:
        for t2, t3, rho, z in zip(br.theta2, br.theta3, br.rho, br.z):
            rows.append(f"{br.branch_id},{t2:.10g},{t3:.10g},{rho:.10g},{z:.10g}")
    _write(bpath, "\n".join(rows) + "\n")
    ppath = _outpath(args, args.prefix + "_points.csv")
    rows = ["# ortho3r curves v1", "kind,rho,z"]
    for c in pts.cusps:
        rows.append(f"cusp,{c.rho:.10g},{c.z:.10g}")
    for nd in pts.nodes:
        rows.append(f"node,{nd.rho:.10g},{nd.z:.10g}")
    _write(ppath, "\n".join(rows) + "\n")
    written = [bpath, ppath]
    if args.svg:
        colors = {"S1": "#c02020", "S2": "#2040c0", "axis+": "#208020",
                  "axis-": "#208020"}
        joint_paths = [
            (np.column_stack([br.theta3, br.theta2]), colors[br.branch_id])
            for br in branches
        ]
        spath = _outpath(args, args.prefix + "_joint.svg")
        _write(spath, svg_document(joint_paths, title="joint-space branches"))
        sec_paths = [
            (np.column_stack([br.rho, br.z]), colors[br.branch_id])
            for br in branches
        ]
        marks = [(c.rho, c.z, "#000000") for c in pts.cusps]
        marks += [(nd.rho, nd.z, "#b06000") for nd in pts.nodes]
        wpath = _outpath(args, args.prefix + "_section.svg")
        _write(wpath, svg_document(sec_paths, marks, title="workspace section"))
        written += [spath, wpath]
    for path in written:
        print(path)
    return 0


def _map_command(args, kinds) -> int:
    try:
        d3 = _parse_range(args.d3, args.map_res)
        d4 = _parse_range(args.d4, args.map_res)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.kind not in kinds:
        print(f"error: kind must be one of {kinds}", file=sys.stderr)
        return 1
    kind = kinds[args.kind]
    m = _perf.iso_map(kind, d3, d4, args.r2, inner_n=args.inner_res,
                      section_n=args.section_res)
    cpath = _outpath(args, f"{args.prefix}_{kind}.csv")
    _write(cpath, m.to_csv())
    written = [cpath]
    if args.json:
        jpath = _outpath(args, f"{args.prefix}_{kind}.json")
        _write(jpath, json.dumps(m.to_json_dict()) + "\n")
        written.append(jpath)
    if args.svg:
        levels = [float(v) for v in args.levels.split(",")] if args.levels else (
            np.linspace(m.values.min(), m.values.max(), 12)[1:-1]
        )
        paths = []
        palette = ["#204080", "#2f6f9f", "#3f9f9f", "#4fa06f", "#70a040",
                   "#a0a030", "#c08020", "#c05020", "#b02020", "#801040"]
        for li, level in enumerate(levels):
            for poly in marching_squares(m.d3_values, m.d4_values, m.values, level):
                paths.append((poly, palette[li % len(palette)]))
        spath = _outpath(args, f"{args.prefix}_{kind}.svg")
        _write(spath, svg_document(paths, title=f"{kind} iso-values, r2={args.r2}"))
        written.append(spath)
    for path in written:
        print(path)
    return 0


def cmd_kmap(args) -> int:
    return _map_command(args, {"mean": "kinv_mean", "max": "kinv_max"})


def cmd_volmap(args) -> int:
    return _map_command(
        args, {"p4": "p4", "p2": "p2", "ptotal": "p_total", "p_total": "p_total"}
    )


def cmd_fk(args) -> int:
    p = _params(args)
    q = JointConfig(*args.q)
    pt = fk(p, q)
    if args.json:
        print(json.dumps({"x": pt.x, "y": pt.y, "z": pt.z}))
    else:
        s = to_section(pt)
        print(f"x={pt.x:.9g} y={pt.y:.9g} z={pt.z:.9g} (rho={s.rho:.9g})")
    return 0


def cmd_ik(args) -> int:
    p = _params(args)
    target = CartesianPoint(*args.target)
    ps = ik_full(p, target)
    if args.json:
        print(json.dumps({
            "count": len(ps.solutions),
            "residual_max": ps.residual_max,
            "axis_degenerate": ps.axis_degenerate,
            "solutions": [
                {"theta1": q.theta1, "theta2": q.theta2, "theta3": q.theta3,
                 "on_boundary": b}
                for q, b in zip(ps.solutions, ps.boundary_flags)
            ],
        }, indent=1))
    else:
        print(f"{len(ps.solutions)} solutions")
        for q, b in zip(ps.solutions, ps.boundary_flags):
            flag = "  [near-singular]" if b else ""
            print(f"  theta = ({q.theta1:+.9f}, {q.theta2:+.9f}, "
                  f"{q.theta3:+.9f}){flag}")
        if ps.solutions:
            print(f"max residual {ps.residual_max:.3g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="ortho3r",
                 description="3R orthogonal manipulator analysis")
    ap.add_argument("--schema", action="store_true",
                    help="print the CSV schemas and exit")
    sub = ap.add_subparsers(dest="command")

    sp = sub.add_parser("classify", help="workspace-topology report")
    _add_geometry(sp)
    sp.add_argument("--grid", type=int, default=400)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(fn=cmd_classify)

    sp = sub.add_parser("curves", help="singularity branches and section curves")
    _add_geometry(sp)
    sp.add_argument("--n", type=int, default=1024)
    sp.add_argument("--prefix", default="curves")
    sp.add_argument("--outdir", default=None)
    sp.add_argument("--svg", action="store_true")
    sp.set_defaults(fn=cmd_curves)

    for name, fn in (("kmap", cmd_kmap), ("volmap", cmd_volmap)):
        sp = sub.add_parser(name, help=f"{name} iso-value section")
        sp.add_argument("--kind", required=True)
        sp.add_argument("--r2", type=float, required=True)
        sp.add_argument("--d3", required=True, metavar="LO:HI[:N]")
        sp.add_argument("--d4", required=True, metavar="LO:HI[:N]")
        sp.add_argument("--map-res", type=int, default=40)
        sp.add_argument("--inner-res", type=int, default=240)
        sp.add_argument("--section-res", type=int, default=200)
        sp.add_argument("--prefix", default=name)
        sp.add_argument("--outdir", default=None)
        sp.add_argument("--json", action="store_true")
        sp.add_argument("--svg", action="store_true")
        sp.add_argument("--levels", default=None)
        sp.set_defaults(fn=fn)

    sp = sub.add_parser("fk", help="forward kinematics")
    _add_geometry(sp)
    sp.add_argument("--q", type=float, nargs=3, required=True,
                    metavar=("T1", "T2", "T3"))
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(fn=cmd_fk)

    sp = sub.add_parser("ik", help="inverse kinematics")
    _add_geometry(sp)
    sp.add_argument("--target", type=float, nargs=3, required=True,
                    metavar=("X", "Y", "Z"))
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(fn=cmd_ik)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.schema:
        print(CURVES_CSV_SCHEMA)
        print(ISOMAP_CSV_SCHEMA)
        return 0
    if not getattr(args, "command", None):
        ap.print_help()
        return 1
    try:
        return args.fn(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _write(path: str, text: str) -> None:
    with open(path, "w") as fh:
        fh.write(text)


if __name__ == "__main__":
    raise SystemExit(main())
