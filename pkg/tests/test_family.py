"""Closed-form family: position, frame, curvatures, recovery and closure."""

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slanthelix.curves import circular_helix
from slanthelix.errors import (
    CurvatureSingular,
    DegenerateRecovery,
    InvalidParams,
    InvalidRatio,
    ParameterSingular,
    UnwrapFailed,
)
from slanthelix.family import (
    SlantHelixParams,
    a_for_ratio,
    arc_length,
    arc_length_numeric,
    closure_gap,
    curvature_closed,
    curvature_denominator,
    family_curve,
    frame_closed,
    is_closed,
    position,
    regular_arcs,
    sampled_derivative,
    speed_weight,
    theta_characterization,
    torsion_closed,
)
from slanthelix.frenet import FrenetData, frenet_apparatus, sigma
from slanthelix.projection import lift_to_sphere

R2 = math.sqrt(2)
EX1 = SlantHelixParams(1.0)

params_st = st.builds(
    lambda la, ph, neg: SlantHelixParams((-1 if neg else 1) * math.exp(la), math.cos(ph), math.sin(ph)),
    st.floats(math.log(0.2), math.log(5)), st.floats(0, 2 * math.pi), st.booleans())


def example1_printed(th):
    """The worked a=1, A=1, B=0 curve exactly as printed (z included)."""
    s, c = np.sin(th), np.cos(th)
    inner = -np.cos(s) + s * np.sin(s)
    x = -c * np.sin(R2 * th) * np.sin(s) + np.cos(R2 * th) * inner / R2
    y = c * np.cos(R2 * th) * np.sin(s) + np.sin(R2 * th) * inner / R2
    z = inner / R2
    return np.stack([x, y, z], axis=-1)


def z_candidates(p, th):
    """Readings of the printed general z: the sign of the A sin(theta) sin(u)
    term and whether 1/sqrt(1+a^2) covers both terms."""
    a, A, B, c = p.a, p.A, p.B, p.c
    st_, u = np.sin(th), np.sin(th) / p.a
    out = {}
    for sgn in (1, -1):
        first = np.cos(u) * (-a * A + B * st_)
        second = np.sin(u) * (a * B + sgn * A * st_)
        out[(sgn, "both")] = (first - second) / c
        out[(sgn, "first")] = first / c - second
    return out


# -- sign variant -----------------------------------------------------------

def test_sign_variant():
    th = np.linspace(0, 2 * math.pi, 1000)
    members = [SlantHelixParams(1.0), SlantHelixParams(0.4, 0.6, -0.8), SlantHelixParams(3.0, 0, 1)]
    survivors = []
    for key in z_candidates(EX1, 0.0):
        ok = True
        for p in members:
            xyz = position(p, th)
            xyz[:, 2] = z_candidates(p, th)[key]
            ok &= np.max(np.abs(np.linalg.norm(xyz, axis=1) - 1)) < 1e-9
        if ok:
            survivors.append(key)
    assert survivors == [(1, "both")]
    for p in members:
        np.testing.assert_allclose(position(p, th)[:, 2], z_candidates(p, th)[(1, "both")], atol=1e-15)
        # the quadrature pipeline rebuilds the same curve
        g = np.linspace(0.05, math.pi - 0.05, 300)
        assert np.max(np.linalg.norm(lift_to_sphere(p, g) - position(p, g), axis=1)) < 1e-6


def test_example1_fixture():
    th = np.linspace(-1, 7, 100)
    ours = position(EX1, th)
    printed = example1_printed(th)
    np.testing.assert_allclose(ours[:, :2], printed[:, :2], atol=1e-12)
    # printed z carries +sin(theta) sin(sin(theta)); the sphere needs the minus sign
    fixed = (-np.cos(np.sin(th)) - np.sin(th) * np.sin(np.sin(th))) / R2
    np.testing.assert_allclose(ours[:, 2], fixed, atol=1e-12)
    assert np.max(np.abs(np.linalg.norm(printed, axis=1) - 1)) > 1e-2


def test_example1_frame_fixture():
    th = np.linspace(0, 6, 100)
    T, N, B = frame_closed(EX1, th)
    s, c = np.sin(th), np.cos(th)
    np.testing.assert_allclose(N, np.stack([np.cos(R2 * th) / R2, np.sin(R2 * th) / R2, np.full_like(th, 1 / R2)], -1), atol=1e-15)
    np.testing.assert_allclose(T[:, 0], c * np.cos(R2 * th) / R2 + np.sin(R2 * th) * s, atol=1e-15)
    np.testing.assert_allclose(T[:, 2], -c / R2, atol=1e-15)
    np.testing.assert_allclose(B, np.stack([-s * np.cos(R2 * th) / R2 + np.sin(R2 * th) * c,
                                            -s * np.sin(R2 * th) / R2 - np.cos(R2 * th) * c, s / R2], -1), atol=1e-15)
    # the printed second tangent component swaps sin and cos; it is not a unit vector
    T2_printed = s * np.cos(R2 * th) / R2 - np.sin(R2 * th) * c
    assert np.max(np.abs(T[:, 0] ** 2 + T2_printed ** 2 + T[:, 2] ** 2 - 1)) > 1e-2
    np.testing.assert_allclose(T[:, 1], c * np.sin(R2 * th) / R2 - s * np.cos(R2 * th), atol=1e-15)


# -- position and frame -----------------------------------------------------

def test_position_examples():
    np.testing.assert_allclose(position(EX1, 0.0), [-1 / R2, 0, -1 / R2], atol=1e-15)
    assert np.linalg.norm(position(SlantHelixParams(2, 0, 1), 0.7)) == pytest.approx(1, abs=1e-9)
    np.testing.assert_allclose(position(EX1, 1.2), example1_printed(1.2)[:2].tolist() + [position(EX1, 1.2)[2]], atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(params_st)
def test_sphericity(p):
    th = np.linspace(-3, 9, 1000)
    assert np.max(np.abs(np.linalg.norm(position(p, th), axis=1) - 1)) < 1e-9


def test_frame_examples():
    T, _, _ = frame_closed(EX1, 0.0)
    np.testing.assert_allclose(T, [1 / R2, 0, -1 / R2], atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(params_st, st.floats(-5, 5))
def test_frame_orthonormal(p, th):
    M = np.stack(frame_closed(p, th))
    assert np.abs(M @ M.T - np.eye(3)).max() < 1e-10
    assert M[1, 2] == pytest.approx(p.a / p.c, abs=1e-15)
    assert np.linalg.norm(np.cross(M[0], M[1]) - M[2]) < 1e-10


@settings(max_examples=15, deadline=None)
@given(params_st)
def test_frame_consistency(p):
    plain = family_curve(p, oriented=False)
    for th in np.linspace(0.1, math.pi - 0.1, 12):
        D = float(curvature_denominator(p, th))
        if abs(D) < 0.05:
            continue
        f = frenet_apparatus(plain, th)
        T, N, B = frame_closed(p, th)
        sw, sd = np.sign(float(speed_weight(p, th))), np.sign(D)
        np.testing.assert_allclose(f.T, sw * T, atol=1e-6)
        np.testing.assert_allclose(f.N, sd * N, atol=1e-6)
        np.testing.assert_allclose(f.B, sw * sd * B, atol=1e-6)


# -- curvature, torsion, speed ---------------------------------------------

def _mp_curvatures(a, A, B, th):
    """Oracle: 40-digit general-parameter curvature and torsion of position."""
    mp.mp.dps = 40
    a, A, B = mp.mpf(a), mp.mpf(A), mp.mpf(B)
    c = mp.sqrt(1 + a * a)
    k = c / a

    def comps(t):
        s, co = mp.sin(t), mp.cos(t)
        u = s / a
        P = B * mp.cos(u) - A * mp.sin(u)
        Q = mp.cos(u) * (A + a * B * s) + (B - a * A * s) * mp.sin(u)
        return [(c * co * mp.sin(k * t) * P - mp.cos(k * t) * Q) / c,
                -(c * co * mp.cos(k * t) * P + mp.sin(k * t) * Q) / c,
                (mp.cos(u) * (-a * A + B * s) - mp.sin(u) * (a * B + A * s)) / c]

    t0 = mp.mpf(th)
    d = [[mp.diff(lambda t, i=i: comps(t)[i], t0, n) for i in range(3)] for n in (1, 2, 3)]
    cr = [d[0][1] * d[1][2] - d[0][2] * d[1][1], d[0][2] * d[1][0] - d[0][0] * d[1][2],
          d[0][0] * d[1][1] - d[0][1] * d[1][0]]
    cn = mp.sqrt(sum(x * x for x in cr))
    nu = mp.sqrt(sum(x * x for x in d[0]))
    return float(cn / nu ** 3), float(sum(cr[i] * d[2][i] for i in range(3)) / cn ** 2)


def test_curvature_examples():
    kap, _ = _mp_curvatures(1, 1, 0, math.pi / 2)
    assert curvature_closed(EX1, math.pi / 2) == pytest.approx(kap, rel=1e-12)
    assert curvature_closed(EX1, math.pi / 2) == pytest.approx(1.850816, abs=1e-6)
    assert curvature_closed(EX1, 0.0) == 1.0


@settings(max_examples=60, deadline=None)
@given(params_st, st.floats(0, 2 * math.pi))
def test_curvature_at_least_one(p, th):
    try:
        assert curvature_closed(p, th) >= 1.0
    except CurvatureSingular:
        pass


def test_curvature_singular():
    # A=0, B=1: D = sin(sin(theta)/a) vanishes at theta = 0
    with pytest.raises(CurvatureSingular):
        curvature_closed(SlantHelixParams(1.0, 0, 1), 0.0)


def test_torsion_examples():
    assert torsion_closed(EX1, math.pi / 2) == pytest.approx(0, abs=1e-15)
    _, tau = _mp_curvatures(1, 1, 0, 1.0)
    assert torsion_closed(EX1, 1.0) == pytest.approx(tau, rel=1e-12)
    # the sign is negative: -cot(1)/cos(sin 1)
    assert torsion_closed(EX1, 1.0) == pytest.approx(-1 / math.tan(1) / math.cos(math.sin(1)), rel=1e-14)
    with pytest.raises(ParameterSingular):
        torsion_closed(EX1, 0.0)


@pytest.mark.parametrize("a,A,B,th", [(0.7, 0.6, 0.8, 0.9), (-2.2, 1, 0, 2.4), (4.0, -0.28, 0.96, 1.7)])
def test_curvatures_match_high_precision(a, A, B, th):
    p = SlantHelixParams(a, A, B)
    kap, tau = _mp_curvatures(p.a, p.A, p.B, th)
    assert curvature_closed(p, th) == pytest.approx(kap, rel=1e-12)
    assert torsion_closed(p, th) == pytest.approx(tau, rel=1e-12)


@settings(max_examples=15, deadline=None)
@given(params_st)
def test_curvatures_match_numeric(p):
    cur = family_curve(p)
    for th in np.linspace(0.1, math.pi - 0.1, 12):
        if abs(float(curvature_denominator(p, th))) < 0.05:
            continue
        f = frenet_apparatus(cur, th)
        assert f.kappa == pytest.approx(curvature_closed(p, th), rel=1e-6)
        tau = torsion_closed(p, th)
        if abs(tau) > 1e-6:
            assert f.tau == pytest.approx(tau, rel=1e-6)


def test_speed_weight():
    th = np.linspace(0, 3, 7)
    np.testing.assert_allclose(speed_weight(EX1, th), np.sin(th) * np.cos(np.sin(th)), atol=1e-15)
    assert speed_weight(EX1, 0.0) == 0
    d1 = frenet_apparatus(family_curve(EX1, exact_derivatives=False), 1.0).speed
    assert abs(float(speed_weight(EX1, 1.0))) == pytest.approx(d1, abs=1e-8)


def test_arc_length():
    assert arc_length(EX1, 0.4, 0.4) == 0
    assert arc_length(EX1, 0.2, 1.0) == pytest.approx(arc_length_numeric(EX1, 0.2, 1.0), abs=1e-8)
    p = SlantHelixParams(a_for_ratio(3, 2))
    period = 4 * math.pi
    assert arc_length(p, 0.3, 0.3 + period) == pytest.approx(arc_length(p, 1.1, 1.1 + period), abs=1e-8)
    with pytest.raises(ValueError):
        arc_length(EX1, 1.0, 0.0)


def test_sigma_constancy_member():
    p = SlantHelixParams(2.3, 0.6, 0.8)
    cur = family_curve(p)
    for th in np.linspace(0.1, math.pi - 0.1, 15):
        assert sigma(cur, th) == pytest.approx(-p.a, abs=1e-5)


# -- params -----------------------------------------------------------------

def test_params_validation():
    with pytest.raises(InvalidParams):
        SlantHelixParams(0.0)
    with pytest.raises(InvalidParams):
        SlantHelixParams(1.0, 1.0, 0.1)
    with pytest.raises(InvalidParams):
        SlantHelixParams(math.nan)
    p = SlantHelixParams(1.0, 0.6, 0.8 + 5e-10)
    assert abs(p.A ** 2 + p.B ** 2 - 1) < 1e-12


# -- theta characterization -------------------------------------------------

def _stream(curve, grid):
    return [frenet_apparatus(curve, t) for t in grid]


def test_theta_characterization_example1():
    rec = theta_characterization(_stream(family_curve(EX1), np.linspace(0.2, math.pi - 0.2, 150)))
    assert rec.a == pytest.approx(1.0, abs=1e-4)
    assert np.ptp(rec.a_samples) < 1e-4
    kap = np.array([curvature_closed(EX1, t) for t in rec.t])
    tau = np.array([torsion_closed(EX1, t) for t in rec.t])
    mask = np.abs(tau) > 1e-3
    np.testing.assert_allclose(np.tan(rec.theta[mask]), (kap / tau)[mask], rtol=1e-8)


def test_theta_characterization_recovers_other_members():
    for p in (SlantHelixParams(2.5, 0.6, 0.8), SlantHelixParams(-0.8, 1, 0)):
        lo, hi = regular_arcs(p, 0.2, math.pi - 0.2, 0.1)[0]
        rec = theta_characterization(_stream(family_curve(p), np.linspace(lo, hi, 120)))
        assert rec.a == pytest.approx(p.a, abs=1e-4)


def test_theta_characterization_helix_degenerate():
    with pytest.raises(DegenerateRecovery):
        theta_characterization(_stream(circular_helix(1.0, 1.0), np.linspace(0, 3, 20)))


def test_theta_characterization_coarse_grid():
    e = np.eye(3)
    # tau swinging between +5 and -5 moves atan2(kappa, tau) by ~2.7 per sample
    stream = [FrenetData(0.1 * i, 1.0, *e, 1.0, 5.0 * (-1) ** i) for i in range(5)]
    with pytest.raises(UnwrapFailed):
        theta_characterization(stream)


def test_sampled_derivative_uneven_grid():
    t = np.sort(np.random.default_rng(3).uniform(0, 2, 40))
    np.testing.assert_allclose(sampled_derivative(t, np.sin(t)), np.cos(t), atol=1e-5)


# -- closure ----------------------------------------------------------------

def test_closure_examples():
    r = is_closed(1 / math.sqrt(3))
    assert r.rational and (r.p, r.q) == (2, 1) and r.period == pytest.approx(2 * math.pi)
    r = is_closed(1.0)
    assert not r.rational and r.q <= 64
    r = is_closed(SlantHelixParams(a_for_ratio(3, 2)))
    assert r.rational and (r.p, r.q) == (3, 2) and r.period == pytest.approx(4 * math.pi)


def test_closure_continued_fraction_convergents():
    # oracle: convergents of sqrt(2) = [1; 2, 2, 2, ...]
    assert is_closed(1.0, max_denominator=12).best == "17/12"
    assert is_closed(1.0, max_denominator=12).error == pytest.approx(2.45e-3, abs=1e-5)
    assert is_closed(1.0, max_denominator=64).best == "41/29"


def test_a_for_ratio():
    assert a_for_ratio(2, 1) == pytest.approx(0.5773503, abs=1e-7)
    assert a_for_ratio(3, 2) == pytest.approx(2 / math.sqrt(5), rel=1e-15)
    with pytest.raises(InvalidRatio):
        a_for_ratio(1, 1)
    with pytest.raises(InvalidRatio):
        a_for_ratio(2, 3)


@pytest.mark.parametrize("pq", [(2, 1), (3, 2), (4, 3), (5, 2)])
def test_closure_gap(pq):
    p = SlantHelixParams(a_for_ratio(*pq), 0.6, 0.8)
    probes = np.random.default_rng(0).uniform(-5, 5, 100)
    assert closure_gap(p, 2 * math.pi * pq[1], probes) < 1e-9


def test_regular_arcs():
    p = SlantHelixParams(0.3, 1, 0)
    arcs = regular_arcs(p, 0.1, math.pi - 0.1, 0.1)
    assert len(arcs) >= 2
    for lo, hi in arcs:
        D = curvature_denominator(p, np.linspace(lo, hi, 200))
        assert np.all(np.abs(D) >= 0.1 - 1e-3)


@pytest.mark.parametrize("th", [1e-3, 0.01, math.pi - 1e-3])
def test_numeric_frenet_near_stall(th):
    # speed ~ sin(theta) and d1, d2, d3 nearly parallel: float64 jets lose
    # ~eps/sin^4 here, the extended-precision path does not
    p = SlantHelixParams(1.323, 0.6, 0.8)
    kap, tau = _mp_curvatures(p.a, p.A, p.B, th)
    f = frenet_apparatus(family_curve(p), th)
    assert f.kappa == pytest.approx(kap, rel=1e-12)
    assert f.tau == pytest.approx(tau, rel=1e-12)
    assert sigma(family_curve(p), th) == pytest.approx(-p.a, abs=1e-7)
