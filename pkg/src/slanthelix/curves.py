"""Reference curves used as fixtures and sanity cases."""

import math

import numpy as np

from .numcore import CurveEvaluator


def circle(radius=1.0, lo=-math.inf, hi=math.inf):
    return CurveEvaluator(
        lambda t: np.array([radius * math.cos(t), radius * math.sin(t), 0.0]),
        lo, hi, name=f"circle(r={radius})",
    )


def circular_helix(radius=1.0, pitch=1.0, lo=-math.inf, hi=math.inf):
    """(r cos t, r sin t, c t); kappa = r/(r^2+c^2), tau = c/(r^2+c^2)."""
    return CurveEvaluator(
        lambda t: np.array([radius * math.cos(t), radius * math.sin(t), pitch * t]),
        lo, hi, name=f"helix(r={radius}, c={pitch})",
    )


def line(direction=(1.0, 1.0, 1.0), lo=-math.inf, hi=math.inf):
    d = np.asarray(direction, dtype=float)
    return CurveEvaluator(lambda t: t * d, lo, hi, name="line")


def great_circle(lo=-math.inf, hi=math.inf):
    return circle(1.0, lo, hi)
