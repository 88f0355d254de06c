"""Frenet apparatus, sigma and slant diagnostics on reference curves and the family."""

import math

import mpmath as mp
import numpy as np
import pytest

from slanthelix.curves import circle, circular_helix, line
from slanthelix.errors import GeometryError, NormalUndefined, TorsionCurvatureDegenerate
from slanthelix.family import SlantHelixParams, family_curve, guarded_grid
from slanthelix.frenet import (
    frenet_apparatus,
    frenet_residuals,
    sigma,
    slant_axis,
    slant_report,
)
from slanthelix.numcore import CurveEvaluator, cross, dot

EX1 = SlantHelixParams(1.0)


def test_circle_radius_two():
    f = frenet_apparatus(circle(2.0), 0.0)
    assert f.kappa == pytest.approx(0.5, abs=1e-9)
    assert abs(f.tau) < 1e-6
    np.testing.assert_allclose(f.T, [0, 1, 0], atol=1e-12)


def test_helix_curvature_and_torsion():
    # oracle: symbolic differentiation of (cos t, sin t, t) gives 1/2 and 1/2
    for t in (0.0, 1.3, -4.0):
        f = frenet_apparatus(circular_helix(1.0, 1.0), t)
        assert f.kappa == pytest.approx(0.5, abs=1e-9)
        assert f.tau == pytest.approx(0.5, abs=1e-7)


def test_line_has_no_normal():
    with pytest.raises(NormalUndefined):
        frenet_apparatus(line(), 0.3)


def test_frame_is_right_handed_and_orthonormal():
    cur = family_curve(EX1)
    for t in guarded_grid(EX1, 50, guard=0.1):
        f = frenet_apparatus(cur, t)
        M = np.stack([f.T, f.N, f.B])
        assert np.abs(M @ M.T - np.eye(3)).max() < 1e-8
        assert np.linalg.norm(cross(f.T, f.N) - f.B) < 1e-8


def test_general_parameter_formulas_against_high_precision():
    # oracle: 40-digit derivatives of an anisotropic helix-like curve
    mp.mp.dps = 40
    g = [lambda t: 2 * mp.cos(t), lambda t: mp.sin(t), lambda t: t ** 2 / 3]
    curve = CurveEvaluator(lambda t: np.array([2 * math.cos(t), math.sin(t), t * t / 3]))
    t0 = mp.mpf("0.9")
    d = [mp.matrix([mp.diff(gi, t0, k) for gi in g]) for k in (1, 2, 3)]

    def crs(u, v):
        return mp.matrix([u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]])

    c = crs(d[0], d[1])
    kappa = mp.norm(c) / mp.norm(d[0]) ** 3
    tau = sum(c[i] * d[2][i] for i in range(3)) / mp.norm(c) ** 2
    f = frenet_apparatus(curve, 0.9)
    assert f.kappa == pytest.approx(float(kappa), rel=1e-8)
    assert f.tau == pytest.approx(float(tau), rel=1e-6)


def test_serret_frenet_residuals():
    for curve, t in [(circular_helix(1.0, 0.5), 0.4), (family_curve(EX1), 1.0), (family_curve(EX1), 2.2)]:
        f = frenet_apparatus(curve, t)
        bound = 1e-5 * f.speed * (f.kappa + abs(f.tau) + 1)
        assert max(frenet_residuals(curve, t)) < bound


def test_sigma_helix_is_zero():
    assert abs(sigma(circular_helix(1.0, 1.0), 0.7)) < 1e-7


def test_sigma_constant_ratio_curve_is_zero():
    # scaled helix: tau/kappa constant
    assert abs(sigma(circular_helix(3.0, 0.4), -2.0)) < 1e-7


def test_sigma_example_one():
    assert sigma(family_curve(EX1), 1.0) == pytest.approx(-1, abs=1e-5)


def test_sigma_planar_circle_degenerate():
    # kappa > 0 but tau = 0: tau/kappa constant, sigma = 0
    assert abs(sigma(circle(2.0), 0.1)) < 1e-7


def test_sigma_rejects_vanishing_curvature_and_torsion():
    flat = CurveEvaluator(lambda t: np.array([t, 1e-7 * t ** 2, 0.0]))
    with pytest.raises((TorsionCurvatureDegenerate, NormalUndefined)):
        sigma(flat, 0.5)


def test_slant_axis_example_one():
    cur = family_curve(EX1)
    U1, u1 = slant_axis(cur, 0.7, -1.0)
    _, u2 = slant_axis(cur, 2.1, -1.0)
    np.testing.assert_allclose(u1, u2, atol=1e-6)
    assert abs(abs(u1[2]) - 1) < 1e-6
    assert dot(U1, U1) == pytest.approx(1 + 1 / 1.0 ** 2, abs=1e-10)


def test_slant_axis_norm_identity():
    cur = family_curve(SlantHelixParams(2.5, 0.6, 0.8))
    U, _ = slant_axis(cur, 1.1, 0.37)
    assert dot(U, U) == pytest.approx(1 + 1 / 0.37 ** 2, rel=1e-10)
    with pytest.raises(ValueError):
        slant_axis(cur, 1.1, 0.0)


def test_slant_report_example_one():
    grid = np.linspace(0.1, math.pi - 0.1, 200)
    rep = slant_report(family_curve(EX1), grid)
    assert rep.valid_fraction == 1.0
    assert rep.sigma_mean == pytest.approx(-1, abs=1e-5)
    assert rep.sigma_max_dev < 1e-5
    assert rep.is_slant_helix
    n3 = np.array([c for _, c in rep.axis_cosines])
    # the axis may come out as -z; compare the angle cosine up to that sign
    assert np.max(np.abs(np.abs(n3) - 1 / math.sqrt(2))) < 1e-8


def test_slant_report_helix_is_degenerate_slant():
    rep = slant_report(circular_helix(1.0, 1.0), np.linspace(0, 5, 40))
    assert abs(rep.sigma_mean) < 1e-7
    assert rep.is_slant_helix
    assert rep.axis is None


def test_slant_report_tags_bad_points():
    # grid touching sin(theta) = 0 where the speed vanishes
    grid = np.linspace(0.0, math.pi, 41)
    rep = slant_report(family_curve(EX1), grid)
    bad = [s for _, s in rep.status if s != "ok"]
    assert bad and len(bad) < len(grid) / 2
    assert rep.sigma_max_dev < 1e-5


def test_slant_report_needs_half_the_grid():
    with pytest.raises(GeometryError):
        slant_report(line(), np.linspace(0, 1, 10))
