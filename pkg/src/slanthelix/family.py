"""Closed-form spherical slant helices on the unit sphere.

The family is indexed by ``a != 0`` and ``(A, B)`` on the unit circle, with
curve parameter ``theta``.  Shorthand used throughout::

    c = sqrt(1 + a^2)      k = c / a        u = sin(theta) / a
    D = A cos u + B sin u  (1/curvature, up to sign)
    P = B cos u - A sin u  (P^2 + D^2 = 1)

Every closed form accepts scalar or array ``theta``; vector results carry the
xyz axis last.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence

import mpmath as mp
import numpy as np

from .errors import (
    CurvatureSingular,
    DegenerateRecovery,
    InvalidParams,
    InvalidRatio,
    ParameterSingular,
    UnwrapFailed,
)
from .frenet import FrenetData
from .numcore import DEFAULT_QUAD, CurveEvaluator, Jet, QuadConfig, as_float, integrate, jet_derivatives

EPS_CURV = 1e-9
EPS_SIN = 1e-12
# below this |sin(theta)| float jets lose ~eps/sin^4 in torsion
PRECISE_BELOW = 0.05
THETA_GUARD = 1e-3
DEFAULT_MAX_DENOMINATOR = 64
# slant angle rate below which tau/kappa counts as constant; numeric frames carry ~1e-8 noise
FROZEN_TOL = 1e-6
DEFAULT_CLOSURE_TOL = 1e-9

# The printed z(s) of the general family and of the a=1 worked example differ
# in the sign of the A*sin(theta)*sin(u) term.  Only the variant below keeps
# |alpha| = 1 for all parameters; see tests/test_family.py::test_sign_variant.
SIGN_VARIANT = "z=(cos(u)(-aA+B sin)-sin(u)(aB+A sin))/sqrt(1+a^2)"


@dataclass(frozen=True)
class SlantHelixParams:
    a: float
    A: float = 1.0
    B: float = 0.0
    theta_lo: float = 0.0
    theta_hi: float = math.pi

    def __post_init__(self):
        a, A, B = float(self.a), float(self.A), float(self.B)
        if not all(map(math.isfinite, (a, A, B))):
            raise InvalidParams("a, A, B must be finite")
        if a == 0:
            raise InvalidParams("a must be nonzero")
        r = math.hypot(A, B)
        if abs(r - 1) >= 1e-9:
            raise InvalidParams(f"A^2 + B^2 must equal 1 (got {r * r!r})")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "A", A / r)
        object.__setattr__(self, "B", B / r)

    @property
    def c(self) -> float:
        return math.sqrt(1 + self.a * self.a)

    @property
    def k(self) -> float:
        """Winding rate of the normal indicatrix, also the closure ratio."""
        return self.c / self.a


def _u(p: SlantHelixParams, theta):
    return np.sin(theta) / p.a


def curvature_denominator(p: SlantHelixParams, theta):
    u = _u(p, theta)
    return p.A * np.cos(u) + p.B * np.sin(u)


def _constants(p: SlantHelixParams, theta):
    """(a, A, B, c, k); rederived at full precision for precise jets, where
    the rounding of c and k to floats would otherwise dominate near stalls."""
    if isinstance(theta, Jet) and theta.precise:
        a, A, B = mp.mpf(p.a), mp.mpf(p.A), mp.mpf(p.B)
        r = mp.sqrt(A * A + B * B)
        c = mp.sqrt(1 + a * a)
        return a, A / r, B / r, c, c / a
    return p.a, p.A, p.B, p.c, p.k


def _position_xyz(p: SlantHelixParams, theta):
    # generic in theta: works for floats, arrays and Jets
    a, A, B, c, k = _constants(p, theta)
    st, ct = np.sin(theta), np.cos(theta)
    u = st / a
    cu, su = np.cos(u), np.sin(u)
    ck, sk = np.cos(k * theta), np.sin(k * theta)
    P = B * cu - A * su
    Q = cu * (A + a * B * st) + (B - a * A * st) * su
    x = (c * ct * sk * P - ck * Q) / c
    y = -(c * ct * ck * P + sk * Q) / c
    z = (cu * (-a * A + B * st) - su * (a * B + A * st)) / c
    return x, y, z


def position(p: SlantHelixParams, theta):
    if isinstance(theta, Jet):
        return _position_xyz(p, theta)
    return np.stack(_position_xyz(p, np.asarray(theta, dtype=float)), axis=-1)


def _frame_xyz(p: SlantHelixParams, theta):
    a, _, _, c, k = _constants(p, theta)
    st, ct = np.sin(theta), np.cos(theta)
    ck, sk = np.cos(k * theta), np.sin(k * theta)
    T = (a * ct * ck / c + st * sk, a * ct * sk / c - st * ck, -ct / c)
    N = (ck / c, sk / c, 0 * st + a / c)
    Bv = (-a * st * ck / c + ct * sk, -a * st * sk / c - ct * ck, st / c)
    return T, N, Bv


def frame_closed(p: SlantHelixParams, theta):
    """The printed T, N, B of the family.

    This is the frame whose curvature is the signed ``1/D``: it equals the
    Frenet frame of the theta-parametrization where ``D > 0`` and
    ``sin(theta) > 0``.  N has constant height ``a/c`` by construction.
    """
    if isinstance(theta, Jet):
        return _frame_xyz(p, theta)
    theta = np.asarray(theta, dtype=float)
    return tuple(np.stack(v, axis=-1) for v in _frame_xyz(p, theta))


def curvature_closed(p: SlantHelixParams, theta: float) -> float:
    d = float(curvature_denominator(p, theta))
    if abs(d) < EPS_CURV:
        raise CurvatureSingular(f"A cos u + B sin u = {d:.3g} at theta = {theta}")
    return 1.0 / abs(d)


def torsion_closed(p: SlantHelixParams, theta: float) -> float:
    """Torsion ``-cot(theta) / D``.

    The sign is the one the general-parameter torsion formula produces on
    ``position``; the opposite sign does not survive that check.
    """
    s = math.sin(theta)
    if abs(s) < EPS_SIN:
        raise ParameterSingular(f"sin(theta) = {s:.3g}")
    d = float(curvature_denominator(p, theta))
    if abs(d) < EPS_CURV:
        raise CurvatureSingular(f"A cos u + B sin u = {d:.3g} at theta = {theta}")
    return -math.cos(theta) / s / d


def speed_weight(p: SlantHelixParams, theta):
    """Signed arc-length element ``ds/dtheta = sin(theta) D / a``."""
    return np.sin(theta) * curvature_denominator(p, theta) / p.a


def orientation(p: SlantHelixParams, theta: float) -> float:
    """Direction of the reference arc length relative to increasing theta.

    Chosen so that sigma of the family equals ``-a`` everywhere it is defined.
    """
    return -1.0 if p.a * float(curvature_denominator(p, theta)) >= 0 else 1.0


def step_scale(p: SlantHelixParams, theta: float) -> float:
    """Local theta scale: shrinks toward the stalls at sin(theta) = 0."""
    return min(1.0, abs(math.sin(theta)))


def theta_jets(f, t: float, order: int = 3) -> list:
    """Derivatives of ``f`` in theta, switching to extended precision near
    the stalls where the speed (and with it the float jets) degenerates."""
    return jet_derivatives(f, t, order, precise=abs(math.sin(t)) < PRECISE_BELOW)


def _jet_maps(f):
    return tuple((lambda t, k=k: as_float(theta_jets(f, t, k)[k - 1])) for k in (1, 2, 3))


def family_curve(p: SlantHelixParams, lo: float = None, hi: float = None,
                 oriented: bool = True, exact_derivatives: bool = True) -> CurveEvaluator:
    """The family member as a CurveEvaluator in theta.

    Derivatives of ``position`` come from Taylor-mode differentiation of the
    position formula itself (never from the closed-form frame or curvatures),
    or from finite differences when ``exact_derivatives`` is False.  The
    closed forms are entire in theta, so the default domain is unbounded;
    degeneracies at sin(theta) = 0 surface as SpeedZero from the Frenet code.
    """
    lo = -math.inf if lo is None else lo
    hi = math.inf if hi is None else hi
    return CurveEvaluator(
        lambda t: position(p, t),
        lo, hi,
        derivatives=_jet_maps(lambda j: position(p, j)) if exact_derivatives else (),
        jet=(lambda t: theta_jets(lambda j: position(p, j), t, 3)) if exact_derivatives else None,
        orientation=(lambda t: orientation(p, t)) if oriented else None,
        scale=lambda t: step_scale(p, t),
        name=f"slant-helix(a={p.a:g}, A={p.A:g}, B={p.B:g})",
    )


def guarded_grid(p: SlantHelixParams, n: int, lo: float = None, hi: float = None,
                 guard: float = THETA_GUARD) -> np.ndarray:
    lo = (p.theta_lo if lo is None else lo) + guard
    hi = (p.theta_hi if hi is None else hi) - guard
    return np.linspace(lo, hi, n)


def regular_arcs(p: SlantHelixParams, lo: float, hi: float, guard: float = 0.05,
                 resolution: int = 20001) -> List[tuple]:
    """Maximal sub-intervals of ``[lo, hi]`` where ``|D| >= guard``.

    ``D = 0`` marks a cusp (infinite curvature, zero speed), so each returned
    interval is a regular arc.  Sorted longest first.
    """
    t = np.linspace(lo, hi, resolution)
    ok = np.abs(curvature_denominator(p, t)) >= guard
    arcs, start = [], None
    for i, flag in enumerate(ok):
        if flag and start is None:
            start = i
        if start is not None and (not flag or i == len(t) - 1):
            end = i if flag else i - 1
            if end > start:
                arcs.append((float(t[start]), float(t[end])))
            start = None
    return sorted(arcs, key=lambda ab: ab[0] - ab[1])


def arc_length(p: SlantHelixParams, theta0: float, theta1: float,
               cfg: QuadConfig = DEFAULT_QUAD) -> float:
    if theta1 < theta0:
        raise ValueError("arc_length requires theta0 <= theta1")
    return integrate(lambda t: abs(float(speed_weight(p, t))), theta0, theta1, cfg)


def arc_length_numeric(p: SlantHelixParams, theta0: float, theta1: float,
                       cfg: QuadConfig = DEFAULT_QUAD, h: float = 1e-4) -> float:
    """Same length from the finite-difference speed |d position / d theta|."""
    from .numcore import central_difference

    def speed(t):
        return float(np.linalg.norm(central_difference(lambda s: position(p, s), t, 1, h)))

    return integrate(speed, theta0, theta1, cfg)


def _fd_weights(x0: float, xs: np.ndarray, m: int) -> np.ndarray:
    """Fornberg weights for the m-th derivative at x0 from nodes xs."""
    n = len(xs)
    c = np.zeros((n, m + 1))
    c1, c4 = 1.0, xs[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5, c4 = 1.0, c4, xs[i] - x0
        for j in range(i):
            c3 = xs[i] - xs[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


def sampled_derivative(t: np.ndarray, y: np.ndarray, width: int = 5) -> np.ndarray:
    """Derivative of samples on any increasing grid, 4th order for width 5."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(t)
    if n < width:
        raise ValueError(f"need at least {width} samples")
    out = np.empty(n)
    half = width // 2
    for i in range(n):
        j0 = min(max(i - half, 0), n - width)
        idx = slice(j0, j0 + width)
        out[i] = _fd_weights(t[i], t[idx], 1) @ y[idx]
    return out


@dataclass
class ThetaCharacterization:
    a: float
    a_samples: np.ndarray
    theta: np.ndarray
    t: np.ndarray


def theta_characterization(stream: Sequence[FrenetData]) -> ThetaCharacterization:
    """Recover the slant angle function and the constant ``a``.

    ``theta = atan2(kappa, tau)`` per sample (unwrapped) and
    ``a = theta_s / sqrt(kappa^2 + tau^2)`` where ``theta_s`` is the derivative
    along the reference arc length.
    """
    t = np.array([f.t for f in stream])
    kap = np.array([f.kappa for f in stream])
    tau = np.array([f.tau for f in stream])
    nu = np.array([f.speed for f in stream])
    sgn = np.array([f.sign for f in stream])
    if np.any(kap <= 0):
        raise ValueError("theta characterization requires kappa > 0")
    raw = np.arctan2(kap, tau)
    if len(raw) > 1 and np.max(np.abs(np.diff(raw))) > math.pi / 2:
        raise UnwrapFailed("consecutive slant angles jump by more than pi/2")
    theta = np.unwrap(raw)
    dtheta = sampled_derivative(t, theta)
    if np.max(np.abs(dtheta)) < FROZEN_TOL * max(1.0, float(np.max(np.abs(theta)))):
        raise DegenerateRecovery("slant angle is frozen (tau/kappa constant); a is undefined")
    a_samples = sgn * dtheta / (nu * np.hypot(kap, tau))
    return ThetaCharacterization(float(np.median(a_samples)), a_samples, theta, t)


@dataclass(frozen=True)
class ClosureResult:
    ratio: float
    rational: bool
    p: int
    q: int
    error: float
    max_denominator: int
    tol: float

    @property
    def period(self) -> float:
        return 2 * math.pi * self.q if self.rational else math.inf

    @property
    def best(self) -> str:
        return f"{self.p}/{self.q}"


def closure_ratio(a: float) -> float:
    return math.sqrt(1 + a * a) / a


def is_closed(a: float, max_denominator: int = DEFAULT_MAX_DENOMINATOR,
              tol: float = DEFAULT_CLOSURE_TOL) -> ClosureResult:
    """Decide whether ``sqrt(1+a^2)/a`` is (numerically) rational.

    The best approximation with denominator <= max_denominator comes from
    the continued-fraction expansion (``Fraction.limit_denominator``).
    """
    if isinstance(a, SlantHelixParams):
        a = a.a
    if a == 0:
        raise InvalidParams("a must be nonzero")
    if max_denominator < 1:
        raise ValueError("max_denominator must be positive")
    r = closure_ratio(a)
    best = Fraction(r).limit_denominator(max_denominator)
    err = abs(r - best.numerator / best.denominator)
    return ClosureResult(r, err < tol, best.numerator, best.denominator, err,
                         max_denominator, tol)


def a_for_ratio(p: int, q: int) -> float:
    """``a`` with ``sqrt(1+a^2)/a = p/q``; needs p > q >= 1."""
    if not (isinstance(p, int) and isinstance(q, int)) or q < 1 or p <= q:
        raise InvalidRatio(f"ratio {p}/{q} unreachable: need integers p > q >= 1")
    return q / math.sqrt(p * p - q * q)


def closure_gap(p: SlantHelixParams, period: float, thetas: Sequence[float]) -> float:
    """max |alpha(theta + period) - alpha(theta)| over the probes."""
    thetas = np.asarray(thetas, dtype=float)
    return float(np.max(np.linalg.norm(position(p, thetas + period) - position(p, thetas), axis=-1)))


def family_members(a_values: Sequence[float], A: float = 1.0, B: float = 0.0) -> List[SlantHelixParams]:
    return [SlantHelixParams(a, A, B) for a in a_values]
