"""Moebius map M_w(z) = (w z - 1)/(z - w) and its argument lift g.

g is the continuous, strictly decreasing function with g(0) = -1/2 and
e(g(t)) = M_w(e(t)). Its derivative is minus the Poisson kernel,

    g'(t) = -(1 - w^2) / (1 - 2 w cos(2 pi t) + w^2),

and the antiderivative on |s| <= 1/2 is (1/pi) atan(k tan(pi s)) with
k = (1 + w)/(1 - w). Writing that as atan2(k sin, cos) removes the
tan singularity at s = +-1/2; branches are unwound with g(t + n) = g(t) - n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .core import _squeeze
from .errors import DomainError


def _check_w(w: float):
    if not 0.0 < w < 1.0:
        raise DomainError(f"the lift needs 0 < w < 1, got w={w!r}")


def moebius(w: float, z):
    z = np.asarray(z, dtype=complex)
    if np.any(z == w):
        raise DomainError(f"z = w = {w!r} is the pole of the Moebius map")
    out = (w * z - 1.0) / (z - w)
    return _squeeze(out)


def poisson_kernel(w: float, t):
    """(1 - w^2) / (1 - 2 w cos(2 pi t) + w^2)."""
    t = np.asarray(t, dtype=float)
    out = (1.0 - w * w) / (1.0 - 2.0 * w * np.cos(2 * np.pi * t) + w * w)
    return _squeeze(out)


def lift_g(w: float, t):
    _check_w(w)
    t = np.asarray(t, dtype=float)
    m = np.round(t)
    s = t - m  # in [-1/2, 1/2]
    k = (1.0 + w) / (1.0 - w)
    ps = np.pi * s
    out = -0.5 - m - np.arctan2(k * np.sin(ps), np.cos(ps)) / np.pi
    return _squeeze(out)


def lift_g_derivative(w: float, t):
    _check_w(w)
    return -poisson_kernel(w, t)


def lift_g_quadrature(w: float, t: float) -> float:
    """Independent oracle: g(t) = -1/2 - int_0^t Poisson kernel, by adaptive quadrature."""
    _check_w(w)
    if t == 0.0:
        return -0.5
    # split at half-integers where the kernel peaks for w near 1
    lo, hi = sorted((0.0, float(t)))
    pts = [lo] + [k + 0.5 for k in range(math.floor(lo - 0.5) + 1, math.ceil(hi - 0.5))
                  if lo < k + 0.5 < hi] + [hi]
    pts += [float(k) for k in range(math.ceil(lo), math.floor(hi) + 1) if lo < k < hi]
    pts = sorted(set(pts))
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        total += integrate.quad(lambda u: poisson_kernel(w, u), a, b,
                                epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    return -0.5 - math.copysign(total, t)


def lift_g_arctan(w: float, t):
    """The arctan phase expression, only meaningful modulo 1/2.

    Returns (1/2pi) atan((1-w^2) sin(2 pi t) / (2w - (1+w^2) cos(2 pi t))), the
    principal-branch form of the phase of M_w(e(t)); agrees with g(t) modulo
    1/2 (the arctan cannot see the sign of the denominator).
    """
    _check_w(w)
    t = np.asarray(t, dtype=float)
    num = (1 - w * w) * np.sin(2 * np.pi * t)
    den = 2 * w - (1 + w * w) * np.cos(2 * np.pi * t)
    out = np.arctan(num / den) / (2 * np.pi)
    return _squeeze(out)


@dataclass(frozen=True)
class LiftFunction:
    """Callable wrapper around the lift for a fixed w."""

    w: float

    def __post_init__(self):
        _check_w(self.w)

    def __call__(self, t):
        return lift_g(self.w, t)

    def derivative(self, t):
        return lift_g_derivative(self.w, t)

    @property
    def slope_bounds(self) -> tuple[float, float]:
        """Range of -g': [(1-w)/(1+w), (1+w)/(1-w)]."""
        w = self.w
        return (1 - w) / (1 + w), (1 + w) / (1 - w)
