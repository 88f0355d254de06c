"""Closed-form spherical slant helices and the numerics that check them."""

from .family import SlantHelixParams, a_for_ratio, family_curve, is_closed, position
from .frenet import frenet_apparatus, sigma, slant_report
from .numcore import CurveEvaluator, DiffConfig, QuadConfig

__version__ = "0.1.0"
