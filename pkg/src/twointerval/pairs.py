"""Spectral-pair classification, the spectral-set criterion and tilings.

P_B is *spectral* when every eigenfunction has equal amplitudes on the two
intervals, i.e. the eigenfunctions are plain exponentials e_lambda.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np
from numpy.polynomial import polynomial as P

from .core import BoundaryParams, IntervalPair, interval_exp_integral
from .errors import DomainError

INT_TOL = 1e-9
CIRCLE_TOL = 1e-8


@dataclass(frozen=True)
class Condition:
    id: str
    satisfied: bool
    residual: float
    exact: bool = False


@dataclass(frozen=True)
class PairVerdict:
    regime: str
    is_spectral_operator: bool
    conditions: tuple[Condition, ...]
    spectrum_description: dict | None = None

    def failing(self) -> list[str]:
        return [c.id for c in self.conditions if not c.satisfied]


def _dist_to_multiple(x, step=1):
    """Distance from x to the nearest multiple of step; exact for Fractions."""
    if isinstance(x, Fraction):
        step = Fraction(step)
        r = x - step * round(x / step)
        return abs(r)
    r = x / step
    return abs(r - round(r)) * step


def _member(cid: str, x, step=1, tol=INT_TOL) -> Condition:
    res = _dist_to_multiple(x, step)
    exact = isinstance(x, Fraction)
    ok = res == 0 if exact else res <= tol
    return Condition(cid, bool(ok), float(res), exact)


def _beta_ratio(d: IntervalPair):
    """beta / (1 + beta - alpha), exact when the endpoints are exact."""
    ex = d.exact_endpoints
    if ex is not None:
        a, b = ex
        return b / (1 + b - a)
    return d.b / d.total_length


def w_set(alpha: int) -> list[float]:
    """{cos(2 pi (1+2k)/(4 alpha))}, one period of k, deduplicated."""
    vals = sorted(math.cos(2 * math.pi * (1 + 2 * k) / (4 * alpha)) for k in range(2 * alpha))
    out: list[float] = []
    for v in vals:
        if not out or v - out[-1] > 1e-12:
            out.append(v)
    return out


def classify_pair(p: BoundaryParams, d: IntervalPair, tol: float = INT_TOL) -> PairVerdict:
    regime = p.regime
    L = d.total_length
    if regime == "diagonal":
        # every eigenfunction lives on a single interval
        return PairVerdict(regime, False, (Condition("w<1", False, 0.0, True),), None)

    if regime == "off-diagonal":
        ratio = _beta_ratio(d)
        c1 = _member("beta/(1+beta-alpha) in N", ratio, tol=tol)
        if ratio <= 0:
            c1 = Condition(c1.id, False, c1.residual, c1.exact)
        phase = -p.psi + (p.theta - 0.5) * (1 - d.a) / L
        c2 = _member("-psi+(theta-1/2)(1-alpha)/(1+beta-alpha) in Z", phase, tol=tol)
        conds = (c1, c2)
        ok = all(c.satisfied for c in conds)
        desc = {"offsets": [(0.5 - p.theta) / L], "spacing": 1.0 / L} if ok else None
        return PairVerdict(regime, ok, conds, desc)

    ex = d.exact_endpoints
    alpha = ex[0] if ex is not None else d.a
    c_alpha = _member("alpha integer", alpha, tol=tol)
    if c_alpha.satisfied and not float(alpha) > 1.0:
        c_alpha = Condition("alpha integer", False, c_alpha.residual, c_alpha.exact)
    gap = (d.length_ratio - 1) if d.length_ratio is not None else d.length2 - 1.0
    c_beta = Condition("beta=alpha+1", bool(gap == 0) if isinstance(gap, Fraction) else abs(gap) <= tol,
                       float(abs(gap)), isinstance(gap, Fraction))
    c_theta = _member("theta-2phi in Z", p.theta - 2 * p.phi, tol=tol)
    c_psi = _member("psi+(alpha-1)phi in Z/2", p.psi + (d.a - 1) * p.phi, 0.5, tol=tol)
    k_alpha = max(2, round(float(alpha)))
    w_res = min(abs(p.w - v) for v in w_set(k_alpha))
    c_w = Condition("w in {cos(2pi(1+2k)/(4alpha))}", bool(w_res <= tol and c_alpha.satisfied), float(w_res))
    # the +-branches each force psi + (alpha-1) phi = +-(1/4 - alpha lt); the 1/2 Z condition
    # above only records their sum, so the parity tying it to k is checked here
    lt = math.acos(p.w) / (2 * math.pi)
    c_par = _member("psi+(alpha-1)phi+alpha*acos(w)/2pi-1/4 in Z",
                    p.psi + (d.a - 1) * p.phi + d.a * lt - 0.25, tol=tol)
    conds = (c_alpha, c_beta, c_theta, c_psi, c_w, c_par)
    ok = all(c.satisfied for c in conds)
    desc = None
    if ok:
        desc = {"offsets": sorted([(-p.phi - lt) % 1.0, (-p.phi + lt) % 1.0]), "spacing": 1.0}
    return PairVerdict(regime, ok, conds, desc)


@dataclass(frozen=True)
class SetVerdict:
    is_spectral_set: bool
    reason: str
    conditions: tuple[Condition, ...] = field(default_factory=tuple)


def spectral_set_criterion(d: IntervalPair, tol: float = INT_TOL) -> SetVerdict:
    """[0,1] u [alpha,beta] is spectral iff beta/(1+beta-alpha) in Z, or alpha in Z, alpha>1, beta=alpha+1."""
    ratio = _beta_ratio(d)
    c1 = _member("beta/(1+beta-alpha) in Z", ratio, tol=tol)
    ex = d.exact_endpoints
    alpha = ex[0] if ex is not None else d.a
    c2 = _member("alpha integer > 1", alpha, tol=tol)
    if c2.satisfied and not float(alpha) > 1.0:
        c2 = Condition(c2.id, False, c2.residual, c2.exact)
    gap = (d.length_ratio - 1) if d.length_ratio is not None else d.length2 - 1.0
    c3 = Condition("beta=alpha+1", bool(gap == 0) if isinstance(gap, Fraction) else abs(gap) <= tol,
                   float(abs(gap)), isinstance(gap, Fraction))
    if c1.satisfied:
        k = round(float(ratio))
        return SetVerdict(True, f"beta/(1+beta-alpha) = {k} is an integer: lattice tile by "
                                f"{float(d.total_length):g}Z", (c1, c2, c3))
    if c2.satisfied and c3.satisfied:
        a = round(float(alpha))
        return SetVerdict(True, f"alpha = {a} is an integer and beta = alpha + 1: tiles by "
                                f"{{0..{a - 1}}} + {2 * a}Z", (c1, c2, c3))
    return SetVerdict(False, "neither beta/(1+beta-alpha) in Z nor (alpha in Z, beta = alpha + 1)", (c1, c2, c3))


def corollary_tiling_set(d: IntervalPair) -> tuple[list[Fraction], Fraction] | None:
    """Tiling set (F, c) meaning F + cZ, as given by the spectral => tile corollaries."""
    v = spectral_set_criterion(d)
    if not v.is_spectral_set:
        return None
    ex = d.exact_endpoints
    a = ex[0] if ex is not None else Fraction(d.a)
    b = ex[1] if ex is not None else Fraction(d.b)
    if v.conditions[0].satisfied:
        return [Fraction(0)], 1 + b - a
    k = round(a)
    return [Fraction(j) for j in range(k)], Fraction(2 * k)


@dataclass(frozen=True)
class TilingResult:
    tiles: bool
    witness: Fraction | None = None
    coverage: int | None = None


def _exact(x) -> Fraction:
    return Fraction(x) if isinstance(x, Rational) else Fraction(float(x))


def tiles_with(d: IntervalPair, offsets, period, window=None) -> TilingResult:
    """Check sum_{a in F + cZ} chi_Omega(t - a) = 1 for a.e. t in the window.

    Works in exact rational arithmetic on interval endpoints (floats are
    converted exactly), sweeping the elementary segments between breakpoints.
    """
    c = _exact(period)
    if c <= 0:
        raise DomainError("tiling period must be positive")
    F = [_exact(f) for f in offsets]
    a, b = (_exact(x) for x in (d.exact_endpoints or (d.alpha, d.beta)))
    pieces0 = [(Fraction(0), Fraction(1)), (a, b)]
    lo, hi = (-c, 2 * c) if window is None else (_exact(window[0]), _exact(window[1]))
    pieces = []
    for f in F:
        for s, t in pieces0:
            kmin = math.floor((lo - t - f) / c)
            kmax = math.ceil((hi - s - f) / c)
            for k in range(kmin, kmax + 1):
                u, v = s + f + k * c, t + f + k * c
                if v > lo and u < hi:
                    pieces.append((max(u, lo), min(v, hi)))
    points = sorted({lo, hi, *(u for u, _ in pieces), *(v for _, v in pieces)})
    events: dict[Fraction, int] = {}
    for u, v in pieces:
        events[u] = events.get(u, 0) + 1
        events[v] = events.get(v, 0) - 1
    count = 0
    for x0, x1 in zip(points[:-1], points[1:]):
        count += events.get(x0, 0)
        if count != 1:
            return TilingResult(False, (x0 + x1) / 2, count)
    return TilingResult(True)


# ---------------------------------------------------------------- polynomials


@dataclass(frozen=True)
class CharPolynomial:
    """p(z) = (z - 1)(1 + z^alpha (1 + z + ... + z^(beta-alpha-1))), ascending coefficients."""

    alpha: int
    beta: int
    coefficients: tuple[int, ...]

    def __call__(self, z):
        return P.polyval(z, self.coefficients)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def factored(self) -> str:
        m = self.beta - self.alpha
        inner = "+".join(["1"] + [f"z^{j}" if j > 1 else "z" for j in range(1, m)])
        za = f"z^{self.alpha}" if self.alpha > 1 else "z"
        return f"(z-1)(1+{za}({inner}))" if m > 1 else f"(z-1)(1+{za})"

    def roots(self) -> np.ndarray:
        return polished_roots(self.coefficients)

    @property
    def roots_on_circle(self) -> np.ndarray:
        return roots_on_unit_circle(self)


def build_char_polynomial(d: IntervalPair) -> CharPolynomial:
    vals = []
    for x in (d.alpha, d.beta):
        fx = Fraction(x) if isinstance(x, Rational) else Fraction(float(x))
        if fx.denominator != 1:
            raise DomainError(f"characteristic polynomial needs integer endpoints, got {x!r}")
        vals.append(int(fx))
    a, b = vals
    if not 1 < a < b:
        raise DomainError("need integers 1 < alpha < beta")
    coef = [0] * (b + 1)
    # (z - 1) + z^beta - z^alpha
    coef[0] -= 1
    coef[1] += 1
    coef[b] += 1
    coef[a] -= 1
    return CharPolynomial(a, b, tuple(coef))


def polished_roots(coefficients) -> np.ndarray:
    """Companion-matrix roots followed by one Newton step each."""
    c = np.asarray(coefficients, dtype=float)
    r = P.polyroots(c)
    dc = P.polyder(c)
    out = []
    for z in r:
        fp = P.polyval(z, dc)
        if abs(fp) > 1e-12:
            z = z - P.polyval(z, c) / fp
        out.append(z)
    return np.array(out, dtype=complex)


def roots_on_unit_circle(poly: CharPolynomial | tuple, tol: float = CIRCLE_TOL) -> np.ndarray:
    """Angles (cycles, in [0,1)) of the roots with ||z| - 1| < tol."""
    coef = poly.coefficients if isinstance(poly, CharPolynomial) else poly
    r = polished_roots(coef)
    on = r[np.abs(np.abs(r) - 1.0) < tol]
    ang = np.mod(np.angle(on) / (2 * np.pi), 1.0)
    ang[np.abs(ang - 1.0) < 1e-12] = 0.0
    return np.sort(ang)


# ---------------------------------------------------------------- Gram matrix


def gram_matrix(lambdas, d: IntervalPair) -> np.ndarray:
    """G[i, j] = <e_lambda_i | e_lambda_j> on Omega (closed form)."""
    lam = np.asarray(lambdas, dtype=float)
    t = lam[:, None] - lam[None, :]
    return np.asarray(interval_exp_integral(t, 0.0, 1.0) + interval_exp_integral(t, d.a, d.b))
