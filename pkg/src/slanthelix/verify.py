"""Batch of named invariant checks over one family member.

Each check yields ``{check, max_error, tolerance, pass}``; the report is a
plain dict so callers can serialize it deterministically.
"""

from __future__ import annotations

import math
from typing import Callable, List, Optional

import numpy as np

from . import __version__
from .errors import GeometryError
from .family import (
    SIGN_VARIANT,
    SlantHelixParams,
    closure_gap,
    curvature_closed,
    curvature_denominator,
    family_curve,
    frame_closed,
    is_closed,
    regular_arcs,
    speed_weight,
    theta_characterization,
    torsion_closed,
)
from .frenet import frenet_apparatus, sigma
from .numcore import CurveEvaluator, as_float
from .projection import lift_to_sphere, projected_curve, projection_curvature
from .spherical import family_y_curvatures, wong_fit, y_curve, y_indicatrix

SCHEMA = "helix-verify/1"
D_GUARD = 0.05  # keep numeric samples away from cusps where D = 0


def scaled_curve(curve: CurveEvaluator, factors) -> CurveEvaluator:
    """``curve`` with each coordinate multiplied by ``factors``."""
    f = np.asarray(factors, dtype=float)
    jet = None
    if curve.jet is not None:
        jet = lambda t: tuple(f * as_float(d) for d in curve.jet(t))
    return CurveEvaluator(
        lambda t: f * curve(t), curve.lo, curve.hi,
        derivatives=tuple((lambda t, d=d: f * d(t)) for d in curve.derivatives if d is not None),
        jet=jet, orientation=curve.orientation, scale=curve.scale,
        name=f"scaled {curve.name}",
    )


FAULTS = {"z-scale": (1.0, 1.0, 1.01)}


class _Checks:
    def __init__(self, tol_scale: float):
        self.tol_scale = tol_scale
        self.rows: List[dict] = []

    def add(self, name: str, errors, tol: float):
        errors = [e for e in errors if e is not None]
        tol = tol * self.tol_scale
        worst = max(errors) if errors else math.nan
        ok = bool(errors) and math.isfinite(worst) and worst < tol
        self.rows.append({"check": name, "max_error": worst, "tolerance": tol, "pass": ok})


def _cusp_free(p: SlantHelixParams, thetas):
    return [t for t in thetas if abs(float(curvature_denominator(p, t))) >= D_GUARD]


def _safe(f: Callable[[], float]) -> Optional[float]:
    try:
        return f()
    except GeometryError:
        return None


def run_checks(p: SlantHelixParams, lo: float = 0.05, hi: float = math.pi - 0.05,
               count: int = 200, tol_scale: float = 1.0, fault: Optional[str] = None) -> dict:
    curve = family_curve(p)
    plain = family_curve(p, oriented=False)
    if fault is not None:
        curve = scaled_curve(curve, FAULTS[fault])
        plain = scaled_curve(plain, FAULTS[fault])
    grid = np.linspace(lo, hi, count)
    sparse = _cusp_free(p, np.linspace(lo, hi, min(count, 60)))
    ck = _Checks(tol_scale)

    ck.add("sphericity", [abs(np.linalg.norm(curve(t)) - 1) for t in grid], 1e-9)

    T, N, B = frame_closed(p, grid)
    gram = np.stack([T, N, B], axis=1)
    ortho = np.abs(np.einsum("nij,nkj->nik", gram, gram) - np.eye(3)).max(axis=(1, 2))
    ck.add("closed_frame_orthonormal", ortho.tolist(), 1e-10)
    ck.add("slant_angle_closed", np.abs(N[:, 2] - p.a / p.c).tolist(), 1e-8)

    frame_err, n3_err, kap_err, tau_err, sig_err = [], [], [], [], []
    for t in sparse:
        f = _safe(lambda: frenet_apparatus(plain, t))
        if f is None:
            continue
        Tc, Nc, Bc = frame_closed(p, t)
        sw = math.copysign(1.0, float(speed_weight(p, t)))
        sd = math.copysign(1.0, float(curvature_denominator(p, t)))
        frame_err.append(max(np.abs(f.T - sw * Tc).max(), np.abs(f.N - sd * Nc).max(),
                             np.abs(f.B - sw * sd * Bc).max()))
        # the numeric normal points to the center of curvature, sign(D) N
        n3_err.append(abs(sd * f.N[2] - p.a / p.c))
        kap_err.append(abs(f.kappa / curvature_closed(p, t) - 1))
        tau_c = torsion_closed(p, t)
        tau_err.append(abs(f.tau - tau_c) / max(abs(tau_c), 1e-300) if abs(tau_c) > 1e-8 else abs(f.tau))
        sig_err.append(_safe(lambda: abs(sigma(curve, t) + p.a)))
    ck.add("frame_consistency", frame_err, 1e-6)
    ck.add("slant_angle_numeric", n3_err, 1e-6)
    ck.add("curvature_closed_vs_numeric", kap_err, 1e-6)
    ck.add("torsion_closed_vs_numeric", tau_err, 1e-6)
    ck.add("sigma_equals_minus_a", sig_err, 1e-5)

    arcs = regular_arcs(p, max(lo, 0.2), min(hi, math.pi - 0.2), 0.1)
    if arcs:
        a_lo, a_hi = arcs[0]
        stream = [f for f in (_safe(lambda: frenet_apparatus(curve, t)) for t in np.linspace(a_lo, a_hi, 100))
                  if f is not None]
        rec = _safe(lambda: theta_characterization(stream))
        ck.add("theta_recovers_a", [abs(rec.a - p.a)] if rec else [], 1e-4)
        rep = _safe(lambda: wong_fit(curve, np.linspace(a_lo, a_hi, 60)))
        if rep is not None:
            ck.add("wong_radius", [abs(v - 1) for _, v in rep.radius_sq], 1e-6)
            ck.add("wong_ode", [abs(v) for _, v in rep.ode_residual], 1e-4)
            ck.add("wong_sinusoid_radius", [abs(rep.A ** 2 + rep.B ** 2 - 1)], 1e-6)
            ck.add("wong_sinusoid_fit", [rep.fit_residual], 1e-6)
        else:
            ck.add("wong_fit", [], 1e-6)

    proj = projected_curve(plain, np.array([0.0, 0.0, 1.0]))
    kp_err, tp_err = [], []
    for t in sparse:
        f = _safe(lambda: frenet_apparatus(proj, t))
        if f is None:
            continue
        kp = projection_curvature(p, t, curvature_closed(p, t))
        kp_err.append(abs(f.kappa / kp - 1))
        tp_err.append(abs(f.tau))
    ck.add("projection_curvature", kp_err, 1e-5)
    ck.add("projection_torsion", tp_err, 1e-8)

    lifted = _safe(lambda: lift_to_sphere(p, np.linspace(lo, hi, 400)))
    if lifted is not None:
        ref = np.array([curve(t) for t in np.linspace(lo, hi, 400)])
        ck.add("lift_matches_position", np.linalg.norm(lifted - ref, axis=1).tolist(), 1e-6)
    else:
        ck.add("lift_matches_position", [], 1e-6)

    ys = y_indicatrix(p, grid)
    ck.add("y_sphericity", np.abs(np.linalg.norm(ys, axis=1) - 1).tolist(), 1e-10)
    yc = y_curve(p)
    ysig, ykap, ytau = [], [], []
    for t in sparse:
        if curvature_closed(p, t) < 1 + 1e-3:
            continue
        ysig.append(_safe(lambda: abs(sigma(yc, t) - p.a)))
        f = _safe(lambda: frenet_apparatus(yc, t))
        ic = _safe(lambda: family_y_curvatures(p, t))
        if f is None or ic is None:
            continue
        ykap.append(abs(f.kappa / ic.kappa - 1))
        ytau.append(abs(f.tau / ic.tau - 1) if abs(ic.tau) > 1e-8 else abs(f.tau))
    ck.add("y_sigma_equals_a", ysig, 1e-5)
    ck.add("y_curvature", ykap, 1e-5)
    ck.add("y_torsion", ytau, 1e-5)

    closure = is_closed(p.a)
    if closure.rational:
        probes = np.linspace(lo, hi, 100)
        ck.add("closure_period", [closure_gap(p, closure.period, probes)], 1e-9)

    return {
        "schema": SCHEMA,
        "version": __version__,
        "params": {"a": p.a, "A": p.A, "B": p.B},
        "theta": {"lo": lo, "hi": hi, "count": count},
        "sign_variant": SIGN_VARIANT,
        "fault": fault,
        "tol_scale": tol_scale,
        "checks": ck.rows,
        "pass": all(r["pass"] for r in ck.rows),
    }
