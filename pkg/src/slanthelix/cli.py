"""Command-line entry point: generate, verify, closure, render, reconstruct.

Exit codes: 0 success, 2 usage or configuration error, 3 a verification
failed.  Floats are written with ``repr`` (shortest round-trip, at most 17
significant digits), so identical input gives byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from . import __version__
from .errors import GeometryError, SphereFitFailed
from .family import (
    SIGN_VARIANT,
    SlantHelixParams,
    a_for_ratio,
    arc_length,
    closure_gap,
    curvature_closed,
    family_curve,
    frame_closed,
    is_closed,
    position,
    torsion_closed,
)
from .frenet import sigma
from .projection import lift_to_sphere, reconstruct_plane
from .spherical import y_indicatrix
from .svg import VIEWS, render
from .verify import FAULTS, run_checks

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 2, 3
MIN_SAMPLES = 16


class UsageError(Exception):
    pass


def fmt(x) -> str:
    x = float(x)
    return repr(x) if math.isfinite(x) else ("nan" if math.isnan(x) else ("inf" if x > 0 else "-inf"))


def _json_default(o):
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    raise TypeError(type(o))


def _clean(o):
    # JSON has no NaN/inf; write them as null
    if isinstance(o, (np.floating, np.bool_)):
        o = o.item()
    if isinstance(o, float) and not math.isfinite(o):
        return None
    if isinstance(o, dict):
        return {k: _clean(v) for k, v in o.items()}
    if isinstance(o, list):
        return [_clean(v) for v in o]
    return o


def dump_json(doc: dict) -> str:
    return json.dumps(_clean(doc), indent=2, sort_keys=False, default=_json_default) + "\n"


@dataclass
class RunConfig:
    params: Optional[SlantHelixParams]
    ratio: Optional[Tuple[int, int]]
    lo: float
    hi: float
    count: int
    tol_scale: float


def parse_theta(text: str) -> Tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"theta range must be lo:hi:count, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"theta range must be lo:hi:count, got {text!r}") from None
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        raise UsageError(f"empty theta range {lo}:{hi}")
    if n < MIN_SAMPLES:
        raise UsageError(f"sample count must be at least {MIN_SAMPLES}, got {n}")
    return lo, hi, n


def parse_ratio(text: str) -> Tuple[int, int]:
    try:
        p, q = (int(v) for v in text.split("/"))
    except ValueError:
        raise UsageError(f"ratio must be p/q with integers, got {text!r}") from None
    return p, q


def tol_scale_from_env() -> float:
    raw = os.environ.get("HELIX_TOL", "1.0")
    try:
        v = float(raw)
    except ValueError:
        raise UsageError(f"HELIX_TOL must be a positive number, got {raw!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise UsageError(f"HELIX_TOL must be a positive number, got {raw!r}")
    return v


def build_config(args, need_params: bool = True) -> RunConfig:
    lo, hi, n = parse_theta(args.theta)
    ratio = parse_ratio(args.ratio) if getattr(args, "ratio", None) else None
    params = None
    if ratio is not None:
        if args.a is not None:
            raise UsageError("give either --a or --ratio, not both")
        a = a_for_ratio(*ratio)
    else:
        a = args.a
    if a is None:
        if need_params:
            raise UsageError("missing --a (or --ratio p/q)")
    else:
        params = SlantHelixParams(a, args.A, args.B)
    return RunConfig(params, ratio, lo, hi, n, tol_scale_from_env())


def metadata(cfg: RunConfig, command: str) -> List[str]:
    p = cfg.params
    lines = [
        f"# slanthelix {command}",
        f"# version {__version__}",
        f"# a={fmt(p.a)} A={fmt(p.A)} B={fmt(p.B)}",
        f"# theta={fmt(cfg.lo)}:{fmt(cfg.hi)}:{cfg.count}",
        f"# sign-variant {SIGN_VARIANT}",
    ]
    if cfg.ratio:
        lines.insert(3, f"# ratio={cfg.ratio[0]}/{cfg.ratio[1]} a={p.a:.7f}")
    return lines


def _or_nan(f):
    try:
        return f()
    except GeometryError:
        return math.nan


def write_out(text: str, out: Optional[str]):
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc.strerror}") from None


GENERATE_HEADER = "theta,s,x,y,z,Tx,Ty,Tz,Nx,Ny,Nz,Bx,By,Bz,kappa,tau,sigma"


def cmd_generate(args) -> int:
    cfg = build_config(args)
    p = cfg.params
    thetas = np.linspace(cfg.lo, cfg.hi, cfg.count)
    curve = family_curve(p)
    X = position(p, thetas)
    T, N, B = frame_closed(p, thetas)
    lines = metadata(cfg, "generate") + [GENERATE_HEADER]
    s = 0.0
    for i, t in enumerate(thetas):
        if i:
            s += arc_length(p, thetas[i - 1], t)
        row = [t, s, *X[i], *T[i], *N[i], *B[i],
               _or_nan(lambda: curvature_closed(p, t)),
               _or_nan(lambda: torsion_closed(p, t)),
               _or_nan(lambda: sigma(curve, t))]
        lines.append(",".join(fmt(v) for v in row))
    write_out("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = build_config(args)
    report = run_checks(cfg.params, cfg.lo, cfg.hi, cfg.count, cfg.tol_scale, args.fault)
    write_out(dump_json(report), args.out)
    return EXIT_OK if report["pass"] else EXIT_FAIL


def cmd_closure(args) -> int:
    cfg = build_config(args)
    p = cfg.params
    res = is_closed(p.a, args.max_denominator, args.tol * cfg.tol_scale)
    doc = {
        "schema": "helix-closure/1",
        "a": p.a,
        "ratio": res.ratio,
        "rational": res.rational,
        "best": res.best,
        "err": res.error,
        "max_denominator": res.max_denominator,
        "tol": res.tol,
        "period": f"{2 * res.q}*pi" if res.rational else None,
    }
    if res.rational:
        probes = np.linspace(cfg.lo, cfg.hi, cfg.count)
        doc["probe_gap"] = closure_gap(p, res.period, probes)
    write_out(dump_json(doc), args.out)
    return EXIT_OK


def render_objects(p: SlantHelixParams, thetas: np.ndarray, names: List[str]) -> dict:
    T, N, B = frame_closed(p, thetas)
    table = {
        "curve": lambda: position(p, thetas),
        "T": lambda: T, "N": lambda: N, "B": lambda: B,
        "Y": lambda: y_indicatrix(p, thetas),
    }
    unknown = [n for n in names if n not in table]
    if unknown:
        raise UsageError(f"unknown objects {unknown}; choose from {sorted(table)}")
    return {n: table[n]() for n in names}


def cmd_render(args) -> int:
    cfg = build_config(args)
    views = [v for v in args.views.split(",") if v]
    bad = [v for v in views if v not in VIEWS]
    if bad or not views:
        raise UsageError(f"unknown views {bad}; choose from {sorted(VIEWS)}")
    thetas = np.linspace(cfg.lo, cfg.hi, cfg.count)
    objects = render_objects(cfg.params, thetas, [o for o in args.objects.split(",") if o])
    title = f"a={cfg.params.a:g} A={cfg.params.A:g} B={cfg.params.B:g}"
    if args.out is None:
        if len(views) > 1:
            raise UsageError("several views need --out (file stem)")
        write_out(render(objects, views[0], title), None)
        return EXIT_OK
    stem = args.out[:-4] if args.out.endswith(".svg") else args.out
    for v in views:
        name = f"{stem}.svg" if len(views) == 1 and args.out.endswith(".svg") else f"{stem}-{v}.svg"
        write_out(render(objects, v, title), name)
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    if args.demo == "circle":
        return _reconstruct_circle(args)
    cfg = build_config(args)
    p = cfg.params
    thetas = np.linspace(cfg.lo, cfg.hi, cfg.count)
    report = {"schema": "helix-reconstruct/1", "sign_variant": SIGN_VARIANT,
              "params": {"a": p.a, "A": p.A, "B": p.B}}
    try:
        lifted = lift_to_sphere(p, thetas, tol=1e-6 * cfg.tol_scale)
    except SphereFitFailed as exc:
        report.update({"status": "sphere-fit-failed", "fit_residual": exc.residual})
        _write_report(report, args)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    dev = float(np.max(np.linalg.norm(lifted - position(p, thetas), axis=1)))
    tol = 1e-6 * cfg.tol_scale
    report.update({"status": "ok", "max_deviation": dev, "tolerance": tol, "pass": dev < tol})
    lines = metadata(cfg, "reconstruct") + ["theta,x,y,z"]
    lines += [",".join(fmt(v) for v in (t, *lifted[i])) for i, t in enumerate(thetas)]
    write_out("\n".join(lines) + "\n", args.out)
    _write_report(report, args)
    return EXIT_OK if dev < tol else EXIT_FAIL


def _reconstruct_circle(args) -> int:
    kappa = args.kappa
    if not kappa > 0:
        raise UsageError("--kappa must be positive for the circle demo")
    length = 2 * math.pi / kappa
    samples = reconstruct_plane(lambda s: kappa, 0.0, length, 129)
    gap = float(np.linalg.norm(samples[-1].position - samples[0].position))
    tol = 1e-6 * tol_scale_from_env()
    lines = [f"# slanthelix reconstruct demo=circle kappa={fmt(kappa)}", "s,x,y,phi"]
    lines += [",".join(fmt(v) for v in (q.s, *q.position, q.phi)) for q in samples]
    write_out("\n".join(lines) + "\n", args.out)
    _write_report({"schema": "helix-reconstruct/1", "demo": "circle", "kappa": kappa,
                   "closure_gap": gap, "tolerance": tol, "pass": gap < tol}, args)
    return EXIT_OK if gap < tol else EXIT_FAIL


def _write_report(report: dict, args):
    text = dump_json(report)
    if args.report:
        write_out(text, args.report)
    elif args.out and args.out != "-":
        write_out(text, str(Path(args.out).with_suffix(".json")))
    else:
        sys.stderr.write(text)


def _add_family_args(sp, theta_default="0.05:3.0915926535897933:200"):
    sp.add_argument("--a", type=float, help="slant constant (nonzero)")
    sp.add_argument("--A", type=float, default=1.0)
    sp.add_argument("--B", type=float, default=0.0)
    sp.add_argument("--ratio", help="closure ratio p/q; sets a = q/sqrt(p^2-q^2)")
    sp.add_argument("--theta", default=theta_default, help="lo:hi:count")
    sp.add_argument("--out", help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="slanthelix", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("generate", help="sample a family member as CSV")
    _add_family_args(sp)
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("verify", help="run the invariant checks, JSON report")
    _add_family_args(sp)
    sp.add_argument("--fault", choices=sorted(FAULTS), help="inject a known generator fault")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("closure", help="decide whether the curve closes")
    _add_family_args(sp, "0:6.283185307179586:100")
    sp.add_argument("--max-denominator", type=int, default=64)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.set_defaults(func=cmd_closure)

    sp = sub.add_parser("render", help="orthographic SVG views")
    _add_family_args(sp, "0:6.283185307179586:1000")
    sp.add_argument("--views", default="xy", help="comma list of xy, xz, yz")
    sp.add_argument("--objects", default="curve", help="comma list of curve, T, N, B, Y")
    sp.set_defaults(func=cmd_render)

    sp = sub.add_parser("reconstruct", help="rebuild the curve by quadrature")
    _add_family_args(sp)
    sp.add_argument("--report", help="path for the JSON comparison")
    sp.add_argument("--demo", choices=["circle"], help="planar constant-curvature sanity run")
    sp.add_argument("--kappa", type=float, default=0.5, help="curvature for --demo circle")
    sp.set_defaults(func=cmd_reconstruct)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, GeometryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
