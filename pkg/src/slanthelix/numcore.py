"""Vector algebra, finite differences and adaptive quadrature.

Vectors are plain ``numpy`` arrays of shape ``(3,)``; :func:`vec3` is the
validating constructor used at module boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import mpmath as mp
import numpy as np

from .errors import DomainExceeded, GeometryError, ToleranceNotMet

Vec3 = np.ndarray


def vec3(x, y=None, z=None) -> Vec3:
    """Build a finite 3-vector from three scalars or one 3-sequence."""
    if y is None and z is None:
        v = np.asarray(x, dtype=float).reshape(3)
    else:
        v = np.array([x, y, z], dtype=float)
    if not np.all(np.isfinite(v)):
        raise GeometryError(f"non-finite vector component in {v!r}")
    return v


def dot(u: Vec3, v: Vec3) -> float:
    return float(u[0] * v[0] + u[1] * v[1] + u[2] * v[2])


def cross(u: Vec3, v: Vec3) -> Vec3:
    return np.array([
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ])


def det3(u: Vec3, v: Vec3, w: Vec3) -> float:
    """Scalar triple product <u x v, w>."""
    return dot(cross(u, v), w)


def norm(u: Vec3) -> float:
    return math.sqrt(dot(u, u))


@dataclass(frozen=True)
class CurveEvaluator:
    """A parametrized space curve ``point(t)`` on ``[lo, hi]``.

    ``derivatives`` optionally holds analytic maps for orders 1..3 (``None``
    entries fall back to finite differences); ``jet`` optionally returns all
    three at once, which is cheaper when they share work.  ``orientation`` optionally maps
    ``t`` to +1/-1 and records whether the reference arc length increases
    (+1) or decreases (-1) with ``t``; it only affects oriented quantities
    such as T, N and sigma.
    """

    point: Callable[[float], Vec3]
    lo: float = -math.inf
    hi: float = math.inf
    derivatives: Sequence[Optional[Callable[[float], Vec3]]] = field(default=())
    jet: Optional[Callable[[float], Sequence[Vec3]]] = None
    orientation: Optional[Callable[[float], float]] = None
    # local parameter length scale replacing max(1, |t|) in step sizes
    scale: Optional[Callable[[float], float]] = None
    name: str = "curve"

    def __call__(self, t: float) -> Vec3:
        return np.asarray(self.point(t), dtype=float)

    def analytic(self, order: int) -> Optional[Callable[[float], Vec3]]:
        if 1 <= order <= len(self.derivatives):
            return self.derivatives[order - 1]
        return None

    def step_scale(self, t: float) -> float:
        return self.scale(t) if self.scale is not None else max(1.0, abs(t))

    def sign(self, t: float) -> float:
        if self.orientation is None:
            return 1.0
        return 1.0 if self.orientation(t) >= 0 else -1.0


@dataclass(frozen=True)
class DiffConfig:
    """Central-difference spacings, one per derivative order.

    Each spacing is multiplied by the curve's step scale, ``max(1, |t|)``
    unless the curve supplies its own.  Higher orders use wider steps because
    roundoff grows like eps / h**k.
    """

    step: float = 1e-4
    step2: float = 2e-3
    step3: float = 6e-3
    # spacing for differentiating derived scalars such as tau/kappa
    outer_step: float = 4e-3

    def __post_init__(self):
        for name in ("step", "step2", "step3", "outer_step"):
            if not getattr(self, name) > 0:
                raise ValueError(f"DiffConfig.{name} must be > 0")

    def h(self, order: int, t: float, scale: float = None) -> float:
        base = {1: self.step, 2: self.step2, 3: self.step3}[order]
        return base * (max(1.0, abs(t)) if scale is None else scale)


@dataclass(frozen=True)
class QuadConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 200_000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("quadrature tolerances must be > 0")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


DEFAULT_DIFF = DiffConfig()
DEFAULT_QUAD = QuadConfig()
# digits for extended-precision jets
PRECISE_DPS = 34

# 4th-order central stencils: (offsets, weights, divisor power)
_STENCILS = {
    1: ((-2, -1, 1, 2), (1 / 12, -8 / 12, 8 / 12, -1 / 12)),
    2: ((-2, -1, 0, 1, 2), (-1 / 12, 16 / 12, -30 / 12, 16 / 12, -1 / 12)),
    3: ((-3, -2, -1, 1, 2, 3), (1 / 8, -1, 13 / 8, -13 / 8, 1, -1 / 8)),
}


def central_difference(f: Callable[[float], np.ndarray], t: float, order: int, h: float):
    """4th-order central difference of any scalar- or array-valued ``f``."""
    offsets, weights = _STENCILS[order]
    acc = 0.0
    for k, c in zip(offsets, weights):
        acc = acc + c * np.asarray(f(t + k * h), dtype=float)
    return acc / h**order


def stencil_reach(order: int, h: float) -> float:
    return max(_STENCILS[order][0]) * h


def derive(f: CurveEvaluator, t: float, k: int, cfg: DiffConfig = DEFAULT_DIFF) -> Vec3:
    """k-th derivative of ``f`` at ``t`` (k in 1..3).

    Analytic derivatives attached to ``f`` take precedence.
    """
    if k not in (1, 2, 3):
        raise ValueError(f"derivative order must be 1, 2 or 3, got {k}")
    exact = f.analytic(k)
    if exact is not None:
        return np.asarray(exact(t), dtype=float)
    h = cfg.h(k, t, f.step_scale(t))
    reach = stencil_reach(k, h)
    if t - reach < f.lo or t + reach > f.hi:
        raise DomainExceeded(
            f"order-{k} stencil [{t - reach:.6g}, {t + reach:.6g}] leaves "
            f"domain [{f.lo:.6g}, {f.hi:.6g}]"
        )
    return central_difference(f, t, k, h)


def derive_all(f: CurveEvaluator, t: float, cfg: DiffConfig = DEFAULT_DIFF):
    """First, second and third derivatives of ``f`` at ``t``."""
    if f.jet is not None:
        return tuple(as_float(d) for d in f.jet(t))
    return tuple(derive(f, t, k, cfg) for k in (1, 2, 3))


def integrate(g: Callable[[float], float], lo: float, hi: float,
              cfg: QuadConfig = DEFAULT_QUAD) -> float:
    """Adaptive Simpson quadrature of a scalar function on ``[lo, hi]``.

    Panels are refined depth-first from the left, so the result is
    deterministic for a fixed configuration.  Raises ToleranceNotMet when the
    subdivision budget runs out.
    """
    if hi < lo:
        raise ValueError("integrate requires lo <= hi")
    if hi == lo:
        return 0.0

    # seed with 8 panels so symmetric integrands cannot fake convergence
    n0 = 8
    xs = np.linspace(lo, hi, 2 * n0 + 1)
    ys = [float(g(x)) for x in xs]
    total_width = hi - lo
    stack = []
    for i in range(n0 - 1, -1, -1):
        a, m, b = xs[2 * i], xs[2 * i + 1], xs[2 * i + 2]
        fa, fm, fb = ys[2 * i], ys[2 * i + 1], ys[2 * i + 2]
        whole = (b - a) * (fa + 4 * fm + fb) / 6
        stack.append((a, b, fa, fm, fb, whole))

    result = 0.0
    splits = 0
    while stack:
        a, b, fa, fm, fb, whole = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = float(g(lm)), float(g(rm))
        left = (m - a) * (fa + 4 * flm + fm) / 6
        right = (b - m) * (fm + 4 * frm + fb) / 6
        delta = left + right - whole
        local_abs = cfg.abs_tol * (b - a) / total_width
        if abs(delta) <= 15 * max(local_abs, cfg.rel_tol * abs(left + right)) or b - a < 1e-14 * total_width:
            result += left + right + delta / 15
            continue
        splits += 1
        if splits > cfg.max_subdivisions:
            raise ToleranceNotMet(
                f"adaptive Simpson needed more than {cfg.max_subdivisions} "
                f"subdivisions on [{lo}, {hi}]"
            )
        stack.append((m, b, fm, frm, fb, right))
        stack.append((a, m, fa, flm, fm, left))
    if not math.isfinite(result):
        raise ToleranceNotMet(f"non-finite integral on [{lo}, {hi}]")
    return result


def cumulative_integral(g: Callable[[float], float], grid: Sequence[float],
                        cfg: QuadConfig = DEFAULT_QUAD) -> np.ndarray:
    """Running integral of ``g`` from ``grid[0]`` to every grid point."""
    grid = np.asarray(grid, dtype=float)
    out = np.zeros(len(grid))
    for i in range(1, len(grid)):
        out[i] = out[i - 1] + integrate(g, grid[i - 1], grid[i], cfg)
    return out


class Jet:
    """Truncated Taylor series ``sum c[k] (t - t0)**k`` for forward-mode
    derivatives.  Supports the arithmetic and trig used by the closed forms;
    ``np.sin``/``np.cos`` dispatch to the methods below.

    Coefficients are floats, or mpmath numbers (object array) when the jet
    was seeded with ``precise=True``.
    """

    __slots__ = ("c", "_sc")
    __array_priority__ = 1000

    def __init__(self, coeffs):
        c = np.asarray(coeffs)
        self.c = c if c.dtype == object else c.astype(float)
        self._sc = None

    @property
    def precise(self) -> bool:
        return self.c.dtype == object

    @classmethod
    def variable(cls, t0: float, order: int, precise: bool = False) -> "Jet":
        if precise:
            c = np.array([mp.mpf(0)] * (order + 1), dtype=object)
            c[0] = mp.mpf(t0)
        else:
            c = np.zeros(order + 1)
            c[0] = t0
        if order >= 1:
            c[1] = 1
        return cls(c)

    def _scalar(self, other):
        return other if self.precise else float(other)

    def _lift(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        c = self.c * 0
        c[0] = self._scalar(other)
        return Jet(c)

    def __add__(self, other):
        return Jet(self.c + self._lift(other).c)

    __radd__ = __add__

    def __sub__(self, other):
        return Jet(self.c - self._lift(other).c)

    def __rsub__(self, other):
        return Jet(self._lift(other).c - self.c)

    def __neg__(self):
        return Jet(-self.c)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c * self._scalar(other))
        return Jet(np.convolve(self.c, other.c)[: len(self.c)])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c / self._scalar(other))
        n = len(self.c)
        q = self.c * 0
        for k in range(n):
            q[k] = (self.c[k] - np.dot(q[:k], other.c[k:0:-1])) / other.c[0]
        return Jet(q)

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def _sincos(self):
        # the pair is cached because the closed forms take sin and cos of
        # the same argument
        if self._sc is None:
            x = self.c.tolist()
            n = len(x)
            sin, cos = (mp.sin, mp.cos) if self.precise else (math.sin, math.cos)
            s, co = [sin(x[0])] + [0.0] * (n - 1), [cos(x[0])] + [0.0] * (n - 1)
            for k in range(1, n):
                s[k] = sum(j * x[j] * co[k - j] for j in range(1, k + 1)) / k
                co[k] = -sum(j * x[j] * s[k - j] for j in range(1, k + 1)) / k
            if self.precise:
                s, co = np.array(s, dtype=object), np.array(co, dtype=object)
            self._sc = (Jet(s), Jet(co))
        return self._sc

    def sin(self):
        return self._sincos()[0]

    def cos(self):
        return self._sincos()[1]

    def derivative(self, order: int) -> float:
        return float(self.c[order] * math.factorial(order))


def as_float(v) -> np.ndarray:
    return np.asarray(v, dtype=float)


def jet_derivatives(f: Callable, t: float, order: int = 3, precise: bool = False) -> list:
    """Exact derivatives 1..order of a vector map built from Jet-aware ops.

    ``precise`` carries the series in PRECISE_DPS-digit arithmetic, for
    points where the float evaluation cancels badly; the results are then
    mpmath numbers (see ``as_float``).
    """
    if precise:
        # mpmath values are returned unrounded (object arrays); arithmetic on
        # them keeps the extra digits only inside mp.workdps(PRECISE_DPS)
        with mp.workdps(PRECISE_DPS):
            out = f(Jet.variable(t, order, precise=True))
            return [np.array([comp.c[k] * math.factorial(k) for comp in out], dtype=object)
                    for k in range(1, order + 1)]
    out = f(Jet.variable(t, order))
    return [np.array([comp.derivative(k) for comp in out]) for k in range(1, order + 1)]
