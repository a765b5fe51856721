"""Parameters, geometry and the L2 inner product on Omega = [0,1] u [alpha,beta].

Angles are in cycles throughout: ``e(x) = exp(2 pi i x)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from numbers import Rational
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import DomainError

TOL = 1e-10
# w closer than this to 0 or 1 is treated as the closed-form regime
REGIME_EPS = 1e-12


def _squeeze(out):
    out = np.asarray(out)
    return out[()] if out.ndim == 0 else out


def e(x):
    """Normalized exponential ``exp(2 pi i x)``; accepts scalars or arrays."""
    if np.isscalar(x):
        if not math.isfinite(x):
            raise DomainError(f"e(x) needs a finite argument, got {x!r}")
        # exact values at quarter periods keep the closed-form tests clean
        r = math.remainder(float(x), 1.0)
        if r == 0.0:
            return 1 + 0j
        if r == 0.5 or r == -0.5:
            return -1 + 0j
        if r == 0.25:
            return 1j
        if r == -0.25:
            return -1j
        return complex(math.cos(2 * math.pi * r), math.sin(2 * math.pi * r))
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("e(x) needs finite arguments")
    return np.exp(2j * np.pi * np.remainder(x, 1.0))


@dataclass(frozen=True)
class BoundaryParams:
    """The four U(2) parameters (w, phi, psi, theta) of the boundary matrix."""

    w: float
    phi: float = 0.0
    psi: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        for name in ("w", "phi", "psi", "theta"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite, got {v!r}")
        if not 0.0 <= self.w <= 1.0:
            raise DomainError(f"w must lie in [0, 1], got {self.w!r}")

    @property
    def regime(self) -> str:
        """'off-diagonal' (w=0), 'diagonal' (w=1) or 'generic'."""
        if self.w <= REGIME_EPS:
            return "off-diagonal"
        if self.w >= 1.0 - REGIME_EPS:
            return "diagonal"
        return "generic"

    @property
    def matrix(self) -> np.ndarray:
        return boundary_matrix(self)

    def with_(self, **changes) -> BoundaryParams:
        return replace(self, **changes)


def boundary_matrix(p: BoundaryParams) -> np.ndarray:
    w = p.w
    s = math.sqrt(max(0.0, 1.0 - w * w))
    return np.array(
        [
            [w * e(p.phi), -s * e(p.theta - p.psi)],
            [s * e(p.psi), w * e(p.theta - p.phi)],
        ],
        dtype=complex,
    )


def _as_exact(x) -> Fraction | None:
    if isinstance(x, Rational):
        return Fraction(x)
    return None


@dataclass(frozen=True)
class IntervalPair:
    """Geometry I1 = [0,1], I2 = [alpha, beta].

    The rationality of ``beta - alpha`` cannot be read off floats, so it is
    declared: ``length_ratio`` carries an exact p/q, ``irrational=True``
    marks an irrational length, and neither means "unknown" (float-mode
    classification only). Endpoints given as ``int``/``Fraction`` make the
    length exact automatically.
    """

    alpha: float | Fraction
    beta: float | Fraction
    length_ratio: Fraction | None = None
    irrational: bool = False
    touching: bool = field(default=False, init=False)

    def __post_init__(self):
        a, b = float(self.alpha), float(self.beta)
        if not (math.isfinite(a) and math.isfinite(b)):
            raise DomainError("alpha and beta must be finite")
        if a < 1.0:
            raise DomainError(f"need alpha >= 1, got alpha={a!r}")
        if not b > a:
            raise DomainError(f"need alpha < beta, got alpha={a!r}, beta={b!r}")
        if self.length_ratio is not None and self.irrational:
            raise DomainError("length cannot be tagged both rational and irrational")
        if self.length_ratio is not None:
            lr = Fraction(self.length_ratio)
            if lr <= 0:
                raise DomainError("length_ratio must be positive")
            if abs(float(lr) - (b - a)) > 1e-9 * max(1.0, b - a):
                raise DomainError(
                    f"length_ratio {lr} disagrees with beta-alpha={b - a!r}"
                )
            object.__setattr__(self, "length_ratio", lr)
        elif not self.irrational:
            ea, eb = _as_exact(self.alpha), _as_exact(self.beta)
            if ea is not None and eb is not None:
                object.__setattr__(self, "length_ratio", eb - ea)
        object.__setattr__(self, "touching", a == 1.0)

    @classmethod
    def rational(cls, alpha, p: int, q: int = 1) -> IntervalPair:
        """Second interval [alpha, alpha + p/q] with the length tagged exact."""
        lr = Fraction(p, q)
        ea = _as_exact(alpha)
        beta = ea + lr if ea is not None else float(alpha) + float(lr)
        return cls(alpha, beta, length_ratio=lr)

    @property
    def a(self) -> float:
        return float(self.alpha)

    @property
    def b(self) -> float:
        return float(self.beta)

    @property
    def length2(self) -> float:
        """Length of the second interval, beta - alpha."""
        if self.length_ratio is not None:
            return float(self.length_ratio)
        return self.b - self.a

    @property
    def total_length(self) -> float:
        return 1.0 + self.length2

    @property
    def is_rational(self) -> bool | None:
        if self.length_ratio is not None:
            return True
        if self.irrational:
            return False
        return None

    @property
    def exact_endpoints(self) -> tuple[Fraction, Fraction] | None:
        ea, eb = _as_exact(self.alpha), _as_exact(self.beta)
        if ea is None or eb is None:
            return None
        return ea, eb

    def translated(self, c) -> IntervalPair:
        return IntervalPair(
            self.alpha + c,
            self.beta + c,
            length_ratio=self.length_ratio,
            irrational=self.irrational,
        )


def interval_exp_integral(t, a: float, b: float):
    """Closed form of the integral of e(t x) over [a, b] (vectorized in t)."""
    t = np.asarray(t, dtype=float)
    ell = b - a
    out = ell * np.sinc(t * ell) * np.exp(1j * np.pi * t * (a + b))
    return _squeeze(out)


def exp_overlap(t, d: IntervalPair):
    """<e_t | 1> on Omega, the integral of e(t x) over both intervals."""
    return interval_exp_integral(t, 0.0, 1.0) + interval_exp_integral(t, d.a, d.b)


@dataclass(frozen=True)
class PiecewiseExp:
    """The function (a chi_I1 + b chi_I2) e_lam on Omega."""

    lam: float
    a: complex = 1.0
    b: complex = 1.0

    def __call__(self, x, d: IntervalPair):
        x = np.asarray(x, dtype=float)
        amp = np.where(
            (x >= 0.0) & (x <= 1.0),
            self.a,
            np.where((x >= d.a) & (x <= d.b), self.b, 0.0),
        )
        return amp * e(self.lam * x)

    def boundary_values(self, d: IntervalPair) -> tuple[complex, complex, complex, complex]:
        """One-sided endpoint values (f(0), f(1), f(alpha), f(beta)).

        Using the per-interval amplitude keeps alpha = 1 unambiguous:
        f(1) is the limit from I1, f(alpha) the limit from I2.
        """
        return (
            complex(self.a),
            self.a * e(self.lam),
            self.b * e(self.lam * d.a),
            self.b * e(self.lam * d.b),
        )

    def norm_sq(self, d: IntervalPair) -> float:
        return abs(self.a) ** 2 + abs(self.b) ** 2 * d.length2


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples on uniform grids covering I1 and I2 (endpoints included)."""

    geometry: IntervalPair
    v1: np.ndarray
    v2: np.ndarray

    @property
    def x1(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, len(self.v1))

    @property
    def x2(self) -> np.ndarray:
        return np.linspace(self.geometry.a, self.geometry.b, len(self.v2))

    @classmethod
    def sample(cls, f: Callable, d: IntervalPair, points_per_unit: int = 2048) -> GridFunction:
        n1 = points_per_unit + 1
        n2 = max(2, int(round(points_per_unit * d.length2))) + 1
        x1 = np.linspace(0.0, 1.0, n1)
        x2 = np.linspace(d.a, d.b, n2)
        v1 = np.asarray(f(x1), dtype=complex) * np.ones(n1)
        v2 = np.asarray(f(x2), dtype=complex) * np.ones(n2)
        return cls(d, v1, v2)

    @classmethod
    def zeros_like(cls, other: GridFunction) -> GridFunction:
        return cls(other.geometry, np.zeros_like(other.v1), np.zeros_like(other.v2))

    def _check(self, other: GridFunction):
        if other.geometry != self.geometry or len(other.v1) != len(self.v1) or len(other.v2) != len(self.v2):
            raise DomainError("grid functions live on different domains or grids")

    def __add__(self, other: GridFunction) -> GridFunction:
        self._check(other)
        return GridFunction(self.geometry, self.v1 + other.v1, self.v2 + other.v2)

    def __sub__(self, other: GridFunction) -> GridFunction:
        self._check(other)
        return GridFunction(self.geometry, self.v1 - other.v1, self.v2 - other.v2)

    def scale(self, c: complex) -> GridFunction:
        return GridFunction(self.geometry, c * self.v1, c * self.v2)

    def inner(self, other: GridFunction) -> complex:
        self._check(other)
        return complex(
            integrate.trapezoid(self.v1 * np.conj(other.v1), self.x1)
            + integrate.trapezoid(self.v2 * np.conj(other.v2), self.x2)
        )

    def norm(self) -> float:
        return math.sqrt(max(0.0, self.inner(self).real))

    def sup(self) -> float:
        return float(max(np.max(np.abs(self.v1)), np.max(np.abs(self.v2))))


def _quad_complex(f: Callable, a: float, b: float) -> complex:
    re = integrate.quad(lambda x: complex(f(x)).real, a, b, limit=200, epsabs=1e-13, epsrel=1e-12)[0]
    im = integrate.quad(lambda x: complex(f(x)).imag, a, b, limit=200, epsabs=1e-13, epsrel=1e-12)[0]
    return complex(re, im)


def inner_product(f, g, d: IntervalPair | None = None) -> complex:
    """<f | g> = int_I1 f conj(g) + int_I2 f conj(g).

    Two ``PiecewiseExp`` use the closed-form antiderivative; two
    ``GridFunction`` use the trapezoid rule; plain callables ``f(x)`` fall
    back to adaptive quadrature.
    """
    if isinstance(f, GridFunction) or isinstance(g, GridFunction):
        if not (isinstance(f, GridFunction) and isinstance(g, GridFunction)):
            raise DomainError("cannot pair a grid function with an analytic one")
        if d is not None and f.geometry != d:
            raise DomainError("grid function geometry differs from the requested domain")
        return f.inner(g)
    if d is None:
        raise DomainError("analytic inner product needs the geometry")
    if isinstance(f, PiecewiseExp) and isinstance(g, PiecewiseExp):
        t = f.lam - g.lam
        return complex(
            f.a * np.conj(g.a) * interval_exp_integral(t, 0.0, 1.0)
            + f.b * np.conj(g.b) * interval_exp_integral(t, d.a, d.b)
        )
    fx = (lambda x: f(x, d)) if isinstance(f, PiecewiseExp) else f
    gx = (lambda x: g(x, d)) if isinstance(g, PiecewiseExp) else g

    def integrand(x):
        return complex(fx(x)) * complex(gx(x)).conjugate()

    return _quad_complex(integrand, 0.0, 1.0) + _quad_complex(integrand, d.a, d.b)
