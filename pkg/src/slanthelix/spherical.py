"""Sphericity criteria, the Sabban frame and the Y-indicatrix.

The sphericity tests work on anything that yields speed, curvature and
torsion as functions of a parameter: a :class:`CurveEvaluator` (through the
Frenet code) or an :class:`IntrinsicCurve` given directly by its intrinsic
functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    CurvatureDegenerate,
    GeometryError,
    NotOnSphere,
    SpeedZero,
    TorsionDegenerate,
)
from .family import (
    SlantHelixParams,
    _frame_xyz,
    _jet_maps,
    _position_xyz,
    curvature_denominator,
    frame_closed,
    position,
    step_scale,
    theta_jets,
)
from .frenet import frenet_apparatus
from .numcore import (
    DEFAULT_DIFF,
    DEFAULT_QUAD,
    CurveEvaluator,
    DiffConfig,
    Jet,
    QuadConfig,
    Vec3,
    central_difference,
    cross,
    derive,
    dot,
    integrate,
    jet_derivatives,
    norm,
)

EPS_TORSION = 1e-8
EPS_KAPPA_ONE = 1e-9
ON_SPHERE_TOL = 1e-6

# verdict thresholds
RADIUS_TOL = 1e-6
ODE_TOL = 1e-4
FIT_TOL = 1e-6
# below this |d(1/kappa)/ds| the radius criterion cannot separate spheres
# from curves of constant curvature
RATE_FLOOR = 1e-5


@dataclass(frozen=True)
class IntrinsicCurve:
    """A curve known only through ``kappa(t)``, ``tau(t)`` and the speed ``nu(t)``."""

    kappa: Callable[[float], float]
    tau: Callable[[float], float]
    speed: Callable[[float], float] = lambda t: 1.0
    name: str = "intrinsic"


Source = Union[CurveEvaluator, IntrinsicCurve]


def _intrinsic(src: Source, t: float, cfg: DiffConfig) -> Tuple[float, float, float, float]:
    """(nu, kappa, tau, orientation sign) at t."""
    if isinstance(src, IntrinsicCurve):
        return float(src.speed(t)), float(src.kappa(t)), float(src.tau(t)), 1.0
    f = frenet_apparatus(src, t, cfg)
    return f.speed, f.kappa, f.tau, f.sign


def _outer_step(src: Source, t: float, cfg: DiffConfig) -> float:
    scale = src.step_scale(t) if isinstance(src, CurveEvaluator) else max(1.0, abs(t))
    return cfg.outer_step * scale


def _radius_rate(src: Source, t: float, cfg: DiffConfig) -> float:
    """d(1/kappa)/dt."""
    h = _outer_step(src, t, cfg)
    return float(central_difference(lambda s: 1.0 / _intrinsic(src, s, cfg)[1], t, 1, h))


def _require_torsion(tau: float, t: float):
    if abs(tau) <= EPS_TORSION:
        raise TorsionDegenerate(f"|tau| = {abs(tau):.3g} at t = {t}")


def wong_radius(src: Source, t: float, cfg: DiffConfig = DEFAULT_DIFF) -> float:
    """Squared sphere radius ``(1/kappa)^2 + ((1/(nu tau)) (1/kappa)')^2``."""
    nu, kap, tau, _ = _intrinsic(src, t, cfg)
    _require_torsion(tau, t)
    return (1 / kap) ** 2 + (_radius_rate(src, t, cfg) / (nu * tau)) ** 2


def wong_ode_residual(src: Source, t: float, cfg: DiffConfig = DEFAULT_DIFF) -> float:
    """``(1/nu) ((1/(nu tau)) (1/kappa)')' + tau/kappa``; zero on a sphere.

    With ``kappa`` constant the first term vanishes identically, so the
    residual is exactly ``tau/kappa``.
    """
    nu, kap, tau, _ = _intrinsic(src, t, cfg)
    _require_torsion(tau, t)

    def inner(s):
        nu_s, _, tau_s, _ = _intrinsic(src, s, cfg)
        _require_torsion(tau_s, s)
        return _radius_rate(src, s, cfg) / (nu_s * tau_s)

    h = _outer_step(src, t, cfg)
    return float(central_difference(inner, t, 1, h)) / nu + tau / kap


@dataclass
class WongReport:
    radius_sq: List[Tuple[float, float]] = field(default_factory=list)
    ode_residual: List[Tuple[float, float]] = field(default_factory=list)
    status: List[Tuple[float, str]] = field(default_factory=list)
    A: float = math.nan
    B: float = math.nan
    fit_residual: float = math.nan
    radius_rate_max: float = math.nan
    verdicts: dict = field(default_factory=dict)

    @property
    def r(self) -> float:
        return math.hypot(self.A, self.B)

    @property
    def spherical(self) -> bool:
        return bool(self.verdicts) and all(self.verdicts.values())


def signed_radius(src: Source, t: float, cfg: DiffConfig = DEFAULT_DIFF) -> float:
    """``1/kappa`` signed by the curve's orientation.

    Where the reference arc length reverses (the family's cusps) the principal
    normal stays continuous while T flips; carrying the sign keeps the radius
    of curvature a smooth function through those points.
    """
    _, kap, _, o = _intrinsic(src, t, cfg)
    return o / kap


def wong_fit(src: Source, grid: Sequence[float], qcfg: QuadConfig = DEFAULT_QUAD,
             cfg: DiffConfig = DEFAULT_DIFF, min_samples: int = 8) -> WongReport:
    """All three computable sphericity criteria over ``grid``.

    The sinusoidal criterion fits ``1/kappa = A cos(Phi) + B sin(Phi)`` by
    linear least squares, with ``Phi`` the running integral of ``tau ds``
    from the first grid point.  The integration origin is arbitrary, so only
    ``A^2 + B^2`` and the fit residual carry meaning.
    """
    grid = np.asarray(grid, dtype=float)
    rep = WongReport()
    rates = []
    for t in grid:
        t = float(t)
        try:
            nu, kap, tau, o = _intrinsic(src, t, cfg)
            rate = _radius_rate(src, t, cfg) / nu
            rates.append(abs(rate))
            rep.radius_sq.append((t, wong_radius(src, t, cfg)))
            rep.ode_residual.append((t, wong_ode_residual(src, t, cfg)))
            rep.status.append((t, "ok"))
        except GeometryError as exc:
            rep.status.append((t, type(exc).__name__))

    def twist(s):
        nu, _, tau, o = _intrinsic(src, s, cfg)
        return o * nu * tau

    phi = np.zeros(len(grid))
    rho = np.full(len(grid), np.nan)
    for i, t in enumerate(grid):
        if i:
            phi[i] = phi[i - 1] + integrate(twist, grid[i - 1], t, qcfg)
        try:
            rho[i] = signed_radius(src, float(t), cfg)
        except GeometryError:
            pass
    ok = np.isfinite(rho)
    if ok.sum() < min_samples:
        raise GeometryError(f"sinusoidal fit needs {min_samples} valid samples, got {int(ok.sum())}")
    M = np.column_stack([np.cos(phi[ok]), np.sin(phi[ok])])
    (rep.A, rep.B), *_ = np.linalg.lstsq(M, rho[ok], rcond=None)
    rep.fit_residual = float(np.max(np.abs(M @ np.array([rep.A, rep.B]) - rho[ok])))
    rep.radius_rate_max = max(rates) if rates else 0.0

    r2 = np.array([v for _, v in rep.radius_sq])
    res = np.array([v for _, v in rep.ode_residual])
    # the radius criterion presumes a non-constant radius of curvature;
    # a constant one satisfies the formula off the sphere (circular helix)
    rep.verdicts["radius"] = bool(
        len(r2) and np.ptp(r2) < RADIUS_TOL and rep.radius_rate_max > RATE_FLOOR)
    rep.verdicts["ode"] = bool(len(res) and np.max(np.abs(res)) < ODE_TOL)
    rep.verdicts["sinusoidal"] = bool(rep.fit_residual < FIT_TOL)
    return rep


@dataclass(frozen=True)
class SabbanFrame:
    alpha: Vec3
    T: Vec3
    Y: Vec3


def sabban_frame(curve: CurveEvaluator, t: float, cfg: DiffConfig = DEFAULT_DIFF) -> SabbanFrame:
    """Frame ``{alpha, T, alpha x T}`` along a curve on the unit sphere."""
    x = curve(t)
    if abs(norm(x) - 1) >= ON_SPHERE_TOL:
        raise NotOnSphere(f"|alpha({t})| = {norm(x):.9g}")
    d1 = derive(curve, t, 1, cfg)
    nu = norm(d1)
    if nu < 1e-12:
        raise SpeedZero(f"|alpha'({t})| = {nu:.3g}")
    T = curve.sign(t) * d1 / nu
    return SabbanFrame(x, T, cross(x, T))


def _y_xyz(p: SlantHelixParams, theta):
    x = _position_xyz(p, theta)
    T = _frame_xyz(p, theta)[0]
    return (x[1] * T[2] - x[2] * T[1], x[2] * T[0] - x[0] * T[2], x[0] * T[1] - x[1] * T[0])


def y_indicatrix(p: SlantHelixParams, theta):
    """``position x T`` with the closed-form tangent; scalar or array theta."""
    if isinstance(theta, Jet):
        return _y_xyz(p, theta)
    return np.stack(_y_xyz(p, np.asarray(theta, dtype=float)), axis=-1)


def binormal_height(p: SlantHelixParams, theta: float) -> float:
    """``<alpha, B>`` from the closed forms; zero exactly where kappa = 1."""
    return float(np.dot(position(p, theta), frame_closed(p, theta)[2]))


def y_orientation(p: SlantHelixParams, theta: float) -> float:
    """Orientation of the Y curve that makes its sigma equal ``+a``.

    ``-sign(a <alpha, B>)``; reversing the orientation flips sigma.
    """
    return -1.0 if p.a * binormal_height(p, theta) >= 0 else 1.0


def y_torsion_sign(p: SlantHelixParams, theta: float) -> float:
    """Sign relating the torsions of Y and of the curve (see y_curvatures).

    ``-sign(<alpha, B> D)``; note ``<alpha, B> = B cos u - A sin u``.
    """
    return -1.0 if binormal_height(p, theta) * float(curvature_denominator(p, theta)) >= 0 else 1.0


def y_curve(p: SlantHelixParams, exact_derivatives: bool = True) -> CurveEvaluator:
    f = lambda j: y_indicatrix(p, j)
    return CurveEvaluator(
        lambda t: y_indicatrix(p, t),
        derivatives=_jet_maps(f) if exact_derivatives else (),
        jet=(lambda t: theta_jets(f, t, 3)) if exact_derivatives else None,
        orientation=lambda t: y_orientation(p, t),
        scale=lambda t: step_scale(p, t),
        name=f"Y-indicatrix(a={p.a:g}, A={p.A:g}, B={p.B:g})",
    )


@dataclass(frozen=True)
class IndicatrixCurvatures:
    kappa: float
    tau: float
    sigma: float


def y_curvatures(kappa: float, tau: float, a: float, sign: float = 1.0) -> IndicatrixCurvatures:
    """Curvature and torsion of the Y-indicatrix of a unit-sphere slant helix.

    ``kappa / sqrt(kappa^2 - 1)`` and ``sign * tau / sqrt(kappa^2 - 1)``, with
    sigma ``a``.  The torsion sign is not fixed by kappa and tau alone: for
    the family it is ``y_torsion_sign``, which is +1 wherever
    ``<alpha, B>`` and ``D`` have opposite signs.
    """
    if not kappa > 1 + EPS_KAPPA_ONE:
        raise CurvatureDegenerate(f"kappa = {kappa!r} must exceed 1")
    root = math.sqrt(kappa * kappa - 1)
    return IndicatrixCurvatures(kappa / root, sign * tau / root, a)


def family_y_curvatures(p: SlantHelixParams, theta: float) -> IndicatrixCurvatures:
    from .family import curvature_closed, torsion_closed

    return y_curvatures(curvature_closed(p, theta), torsion_closed(p, theta), p.a,
                        y_torsion_sign(p, theta))
