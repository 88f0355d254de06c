"""Projection of a family member along its axis and rebuilding it by quadrature.

The family's axis is the z-axis.  Projected onto the xy-plane the curve is a
plane curve whose curvature and tangent angle are known in closed form; the
pipeline here integrates those back to the plane curve and then lifts it to
the sphere with the height rate, fixing integration constants by a sphere
fit rather than by reading off a closed-form point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import mpmath as mp
import numpy as np

from .errors import SphereFitFailed
from .family import SlantHelixParams, speed_weight
from .numcore import DEFAULT_QUAD, PRECISE_DPS, CurveEvaluator, QuadConfig, Vec3, dot, integrate

SPHERE_FIT_TOL = 1e-6


@dataclass(frozen=True)
class AxisAngles:
    """Cosines of the angles between the axis and T, N, B, plus sin of the first."""

    cos1: float
    cos2: float
    cos3: float
    sin1: float


@dataclass(frozen=True)
class PlanarSample:
    s: float
    position: np.ndarray  # (x, y)
    phi: float
    kappa: float


def project(curve: CurveEvaluator, axis: Vec3, t: float) -> Vec3:
    """Orthogonal projection of ``curve(t)`` onto the plane normal to ``axis``."""
    axis = np.asarray(axis, dtype=float)
    if abs(math.sqrt(dot(axis, axis)) - 1) > 1e-10:
        raise ValueError("axis must be a unit vector")
    x = curve(t)
    return x - dot(x, axis) * axis


def projected_curve(curve: CurveEvaluator, axis: Vec3) -> CurveEvaluator:
    """The projection as a curve; analytic derivatives are projected too."""
    axis = np.asarray(axis, dtype=float)

    def proj(v):
        v = np.asarray(v, dtype=float)
        return v - dot(v, axis) * axis

    def proj_precise(v):
        # extended-precision jets stay unrounded (linear map, exact axis)
        if np.asarray(v).dtype != object:
            return proj(v)
        with mp.workdps(PRECISE_DPS):
            h = sum(v[i] * axis[i] for i in range(3))
            return np.array([v[i] - h * axis[i] for i in range(3)], dtype=object)

    derivatives = tuple((lambda t, d=d: proj(d(t))) for d in curve.derivatives if d is not None)
    jet = None
    if curve.jet is not None:
        jet = lambda t: tuple(proj_precise(d) for d in curve.jet(t))
    return CurveEvaluator(
        lambda t: proj(curve(t)), curve.lo, curve.hi,
        derivatives=derivatives, jet=jet, scale=curve.scale,
        name=f"projection of {curve.name}",
    )


def axis_angles(p: SlantHelixParams, theta: float) -> AxisAngles:
    c = p.c
    st = math.sin(theta)
    return AxisAngles(-math.cos(theta) / c, p.a / c, st / c, math.sqrt(p.a ** 2 + st * st) / c)


def projection_curvature(p: SlantHelixParams, theta: float, kappa: float) -> float:
    """Curvature of the projected curve, ``(1+a^2) sin(theta) kappa / (a^2+sin^2)^1.5``."""
    st = math.sin(theta)
    return (1 + p.a ** 2) * st * kappa / (p.a ** 2 + st * st) ** 1.5


def projection_curvature_from_angles(angles: AxisAngles, kappa: float) -> float:
    """Same curvature from the axis angles: ``cos3 / sin1**3 * kappa``."""
    return angles.cos3 / angles.sin1 ** 3 * kappa


def tangent_angle(p: SlantHelixParams, theta):
    """Continuous tangent angle ``k theta - beta`` of the projected curve.

    ``beta`` is the branch of ``arctan(k tan(theta))`` that is continuous in
    theta and vanishes at 0.  Writing it as ``theta`` plus the angle between
    ``(cos, |k| sin)`` and ``(cos, sin)`` avoids any branch cut: that angle's
    cosine term ``cos^2 + |k| sin^2`` never vanishes.
    """
    theta = np.asarray(theta, dtype=float)
    k = p.k
    s, c = np.sin(theta), np.cos(theta)
    offset = np.arctan2((abs(k) - 1) * s * c, c * c + abs(k) * s * s)
    beta = math.copysign(1.0, k) * (theta + offset)
    phi = k * theta - beta
    return float(phi) if phi.ndim == 0 else phi


def projected_speed(p: SlantHelixParams, theta: float) -> float:
    """Signed ``ds_pi/dtheta`` along the heading ``(cos phi, sin phi)``.

    The arc-length element times sin(theta_1); the tangent angle tracks
    ``sign(a) T``, hence the extra sign.
    """
    return math.copysign(1.0, p.a) * float(speed_weight(p, theta)) * axis_angles(p, theta).sin1


def reconstruct_plane(kappa: Callable[[float], float], lo: float, hi: float,
                      n: int = 201, cfg: QuadConfig = DEFAULT_QUAD,
                      speed: Optional[Callable[[float], float]] = None,
                      phi: Optional[Callable[[float], float]] = None) -> List[PlanarSample]:
    """Plane curve with curvature ``kappa`` from its intrinsic equation.

    The parameter runs over ``n`` equally spaced points of ``[lo, hi]``.  With
    ``speed`` omitted the parameter is arc length; otherwise ``ds/dt = speed``.
    ``phi`` may supply the tangent angle in closed form; by default it is the
    running integral of ``kappa ds``.  The curve starts at the origin heading
    along +x (angle measured from ``phi(lo)``).
    """
    if n < 2:
        raise ValueError("need at least 2 samples")
    grid = np.linspace(lo, hi, n)
    ds = (lambda t: 1.0) if speed is None else speed
    rate = lambda t: kappa(t) * ds(t)

    if phi is None:
        nodes = np.zeros(n)
        for i in range(1, n):
            nodes[i] = nodes[i - 1] + integrate(rate, grid[i - 1], grid[i], cfg)

        def angle(t, i):
            # running angle from the nearest node at or left of t
            return nodes[i] + integrate(rate, grid[i], t, cfg) if t > grid[i] else nodes[i]
    else:
        phi0 = phi(lo)
        nodes = np.array([phi(t) - phi0 for t in grid])

        def angle(t, i):
            return phi(t) - phi0

    s = np.zeros(n)
    xy = np.zeros((n, 2))
    for i in range(1, n):
        a, b = grid[i - 1], grid[i]
        s[i] = s[i - 1] + integrate(ds, a, b, cfg)
        xy[i, 0] = xy[i - 1, 0] + integrate(lambda t: math.cos(angle(t, i - 1)) * ds(t), a, b, cfg)
        xy[i, 1] = xy[i - 1, 1] + integrate(lambda t: math.sin(angle(t, i - 1)) * ds(t), a, b, cfg)
    return [PlanarSample(float(s[i]), xy[i].copy(), float(nodes[i]), float(kappa(grid[i])))
            for i in range(n)]


def fit_sphere(points: np.ndarray) -> Tuple[np.ndarray, float, float]:
    """Algebraic least-squares sphere ``|x|^2 = 2 x.c + d``.

    Returns ``(center, radius, max | |x - center| - 1 |)``; the last entry
    measures misfit against the unit sphere.
    """
    pts = np.asarray(points, dtype=float)
    M = np.column_stack([2 * pts, np.ones(len(pts))])
    sol, *_ = np.linalg.lstsq(M, np.sum(pts ** 2, axis=1), rcond=None)
    center = sol[:3]
    radius = math.sqrt(max(sol[3] + center @ center, 0.0))
    residual = float(np.max(np.abs(np.linalg.norm(pts - center, axis=1) - 1)))
    return center, radius, residual


def lift_to_sphere(p: SlantHelixParams, grid: Sequence[float],
                   cfg: QuadConfig = DEFAULT_QUAD, tol: float = SPHERE_FIT_TOL) -> np.ndarray:
    """Rebuild the curve on the sphere by quadrature in theta.

    ``dx = cos(phi) ds_pi``, ``dy = sin(phi) ds_pi``, ``dz = cos(theta_1) ds``
    with the closed-form tangent angle ``phi``.  The starting point is then
    fixed by fitting a sphere to the cloud and moving its center to the
    origin.  Raises SphereFitFailed when the fit misses the unit sphere by
    ``tol`` or more.
    """
    grid = np.asarray(grid, dtype=float)
    if len(grid) < 4 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be increasing with at least 4 points")
    rates = (
        lambda t: math.cos(tangent_angle(p, t)) * projected_speed(p, t),
        lambda t: math.sin(tangent_angle(p, t)) * projected_speed(p, t),
        lambda t: axis_angles(p, t).cos1 * float(speed_weight(p, t)),
    )
    pts = np.zeros((len(grid), 3))
    for i in range(1, len(grid)):
        for j, g in enumerate(rates):
            pts[i, j] = pts[i - 1, j] + integrate(g, grid[i - 1], grid[i], cfg)
    center, radius, residual = fit_sphere(pts)
    if not residual < tol:
        raise SphereFitFailed(
            f"lifted samples miss the unit sphere by {residual:.3g} (radius {radius:.9g})", residual)
    return pts - center


def register_planar(src: np.ndarray, dst: np.ndarray,
                    allow_reflection: bool = True) -> Tuple[np.ndarray, float]:
    """Rigidly move ``src`` onto corresponding points ``dst`` (Procrustes).

    Returns the moved points and the largest remaining pointwise distance,
    which bounds the Hausdorff distance between the two sample sets.
    """
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    ms, md = src.mean(axis=0), dst.mean(axis=0)
    U, _, Vt = np.linalg.svd((src - ms).T @ (dst - md))
    R = U @ Vt
    if not allow_reflection and np.linalg.det(R) < 0:
        U[:, -1] *= -1
        R = U @ Vt
    moved = (src - ms) @ R + md
    return moved, float(np.max(np.linalg.norm(moved - dst, axis=1)))
