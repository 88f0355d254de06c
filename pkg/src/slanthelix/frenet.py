"""Serret-Frenet apparatus for curves under a general parameter.

All quantities use the curve's own parameter ``t``.  The speed ``nu`` converts
``d/dt`` into arc-length derivatives, so the Frenet equations read
``T' = nu kappa N``, ``N' = nu (-kappa T + tau B)``, ``B' = -nu tau N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import mpmath as mp
import numpy as np

from .errors import (
    GeometryError,
    NormalUndefined,
    SpeedZero,
    TorsionCurvatureDegenerate,
)
from .numcore import (
    DEFAULT_DIFF,
    PRECISE_DPS,
    CurveEvaluator,
    DiffConfig,
    as_float,
    Vec3,
    central_difference,
    cross,
    derive,
    derive_all,
    det3,
    dot,
    norm,
)

EPS_SPEED = 1e-12
EPS_RANK = 1e-10  # relative to nu**3
EPS_KT = 1e-12  # floor for kappa**2 + tau**2


@dataclass(frozen=True)
class FrenetData:
    t: float
    speed: float
    T: Vec3
    N: Vec3
    B: Vec3
    kappa: float
    tau: float
    sign: float = 1.0  # orientation of the reference arc length w.r.t. t


def frenet_apparatus(curve: CurveEvaluator, t: float, cfg: DiffConfig = DEFAULT_DIFF) -> FrenetData:
    """Frame, curvature and torsion at ``t`` from the general-parameter formulas.

    ``kappa = |a' x a''| / |a'|**3`` and
    ``tau = det(a', a'', a''') / |a' x a''|**2``.  N is built as ``B x T`` so
    the frame is right-handed by construction.  The curve's orientation sign
    flips T and B (never N, kappa or tau).
    """
    if curve.jet is not None:
        d1, d2, d3 = curve.jet(t)
        if np.asarray(d1).dtype == object:
            return _frenet_precise(t, d1, d2, d3, curve.sign(t))
        d1, d2, d3 = (as_float(d) for d in (d1, d2, d3))
    else:
        d1 = derive(curve, t, 1, cfg)
        d2 = derive(curve, t, 2, cfg)
    nu = norm(d1)
    if nu < EPS_SPEED:
        raise SpeedZero(f"|a'({t})| = {nu:.3g}")
    c = cross(d1, d2)
    cn = norm(c)
    if cn < EPS_RANK * nu**3:
        raise NormalUndefined(f"|a' x a''| = {cn:.3g} at t = {t}")
    if curve.jet is None:
        d3 = derive(curve, t, 3, cfg)
    o = curve.sign(t)
    T = o * d1 / nu
    B = o * c / cn
    N = cross(B, T)
    return FrenetData(t, nu, T, N, B, cn / nu**3, det3(d1, d2, d3) / cn**2, o)


def _frenet_precise(t, d1, d2, d3, o) -> FrenetData:
    """The same formulas on extended-precision derivatives.

    Near a stall d1, d2, d3 are almost parallel, so the cross product and the
    triple product cancel to a tiny fraction of their terms; both are formed
    before rounding to float.
    """
    with mp.workdps(PRECISE_DPS):
        c = cross(d1, d2)
        nu = mp.sqrt(sum(x * x for x in d1))
        cn = mp.sqrt(sum(x * x for x in c))
        det = sum(c[i] * d3[i] for i in range(3))
        if nu < EPS_SPEED:
            raise SpeedZero(f"|a'({t})| = {float(nu):.3g}")
        if cn < EPS_RANK * nu**3:
            raise NormalUndefined(f"|a' x a''| = {float(cn):.3g} at t = {t}")
        T = as_float([o * x / nu for x in d1])
        B = as_float([o * x / cn for x in c])
        kappa, tau = float(cn / nu**3), float(det / cn**2)
    return FrenetData(t, float(nu), T, cross(B, T), B, kappa, tau, o)


def torsion_over_curvature(curve: CurveEvaluator, t: float, cfg: DiffConfig = DEFAULT_DIFF) -> float:
    f = frenet_apparatus(curve, t, cfg)
    return f.tau / f.kappa


def sigma(curve: CurveEvaluator, t: float, cfg: DiffConfig = DEFAULT_DIFF) -> float:
    """Geodesic curvature of the principal-normal indicatrix.

    ``sigma = kappa**2 / (nu (kappa**2 + tau**2)**1.5) * d(tau/kappa)/dt``,
    multiplied by the orientation sign so that ``d/dt / nu`` is the derivative
    along the reference arc length.  tau/kappa is differentiated as one
    composite scalar.
    """
    f = frenet_apparatus(curve, t, cfg)
    kt = f.kappa**2 + f.tau**2
    if kt < EPS_KT:
        raise TorsionCurvatureDegenerate(f"kappa^2 + tau^2 = {kt:.3g} at t = {t}")
    h = cfg.outer_step * curve.step_scale(t)
    ratio_rate = float(central_difference(lambda s: torsion_over_curvature(curve, s, cfg), t, 1, h))
    return curve.sign(t) * f.kappa**2 / (f.speed * kt**1.5) * ratio_rate


def slant_axis(curve: CurveEvaluator, t: float, a: float,
               cfg: DiffConfig = DEFAULT_DIFF) -> Tuple[Vec3, Vec3]:
    """Axis ``U = tau/(a w) T + N + kappa/(a w) B`` with ``w = sqrt(kappa^2+tau^2)``.

    Returns ``(U, U / |U|)``; note ``|U|**2 = 1 + 1/a**2``.  U is constant
    along a slant helix when ``a`` equals the curve's sigma.
    """
    if a == 0:
        raise ValueError("slant_axis needs a != 0")
    f = frenet_apparatus(curve, t, cfg)
    w = math.hypot(f.kappa, f.tau)
    if w * w < EPS_KT:
        raise TorsionCurvatureDegenerate(f"kappa^2 + tau^2 = {w * w:.3g} at t = {t}")
    U = (f.tau / (a * w)) * f.T + f.N + (f.kappa / (a * w)) * f.B
    return U, U / norm(U)


@dataclass
class SlantReport:
    samples: List[Tuple[float, float]] = field(default_factory=list)
    status: List[Tuple[float, str]] = field(default_factory=list)
    sigma_mean: float = math.nan
    sigma_max_dev: float = math.nan
    axis: Optional[Vec3] = None
    axis_cosines: List[Tuple[float, float]] = field(default_factory=list)
    tolerance: float = 1e-5
    is_slant_helix: bool = False

    @property
    def valid_fraction(self) -> float:
        n = len(self.status)
        return sum(1 for _, s in self.status if s == "ok") / n if n else 0.0


def slant_report(curve: CurveEvaluator, grid: Sequence[float],
                 cfg: DiffConfig = DEFAULT_DIFF, tol: float = 1e-5) -> SlantReport:
    """Sample sigma over ``grid`` and decide whether the curve is a slant helix.

    Points where any geometric error fires are tagged and skipped.  The axis
    is evaluated with ``a = mean(sigma)``; the report carries ``<N, axis>``
    for every valid point.
    """
    rep = SlantReport(tolerance=tol)
    for t in grid:
        try:
            rep.samples.append((float(t), sigma(curve, t, cfg)))
            rep.status.append((float(t), "ok"))
        except GeometryError as exc:
            rep.status.append((float(t), type(exc).__name__))
    if rep.valid_fraction < 0.5:
        raise GeometryError(
            f"only {rep.valid_fraction:.0%} of the grid is valid; need at least 50%"
        )
    values = np.array([s for _, s in rep.samples])
    rep.sigma_mean = float(values.mean())
    rep.sigma_max_dev = float(np.abs(values - rep.sigma_mean).max())
    rep.is_slant_helix = rep.sigma_max_dev < tol

    if abs(rep.sigma_mean) > 1e-9:
        axes = []
        for t, _ in rep.samples:
            try:
                axes.append(slant_axis(curve, t, rep.sigma_mean, cfg)[1])
            except GeometryError:
                continue
        if axes:
            mean_axis = np.mean(axes, axis=0)
            rep.axis = mean_axis / norm(mean_axis)
            for t, _ in rep.samples:
                n_vec = frenet_apparatus(curve, t, cfg).N
                rep.axis_cosines.append((t, dot(n_vec, rep.axis)))
    return rep


def frenet_residuals(curve: CurveEvaluator, t: float, cfg: DiffConfig = DEFAULT_DIFF,
                     h: float = 1e-3) -> Tuple[float, float, float]:
    """Norms of the three Frenet-equation residuals at ``t``.

    Frame derivatives are taken by central differences of the frame itself.
    """
    f = frenet_apparatus(curve, t, cfg)
    o = curve.sign(t)
    dT = central_difference(lambda s: frenet_apparatus(curve, s, cfg).T, t, 1, h)
    dN = central_difference(lambda s: frenet_apparatus(curve, s, cfg).N, t, 1, h)
    dB = central_difference(lambda s: frenet_apparatus(curve, s, cfg).B, t, 1, h)
    v = o * f.speed
    r1 = norm(dT - v * f.kappa * f.N)
    r2 = norm(dN - v * (-f.kappa * f.T + f.tau * f.B))
    r3 = norm(dB + v * f.tau * f.N)
    return r1, r2, r3
