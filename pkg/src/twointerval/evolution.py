"""Unitary group U(t) of P_B by truncated eigenfunction expansion.

U(t) acts on the eigenfunction u_n by the multiplier e(-lambda_n t), so that
(U(t) f)(x) = f(x - t) inside an interval and mass leaving x = 1 or x = beta
re-enters at 0 and alpha through the boundary matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy import integrate

from .core import BoundaryParams, GridFunction, IntervalPair, PiecewiseExp, e, inner_product
from .errors import DomainError
from .spectrum import SpectrumSlice, spectrum

DEFAULT_TRUNCATION = 128
POINTS_PER_UNIT = 2048


def _as_range(n_range) -> range:
    if isinstance(n_range, range):
        return n_range
    if isinstance(n_range, int):
        return range(-n_range, n_range + 1)
    lo, hi = n_range
    return range(int(lo), int(hi) + 1)


def eigenbasis(p: BoundaryParams, d: IntervalPair, n_range) -> tuple[list[PiecewiseExp], SpectrumSlice]:
    """Orthogonal eigenbasis for the branch range; multiplicity-2 points contribute two vectors."""
    sl = spectrum(p, d, branches=_as_range(n_range))
    modes = [u for entry in sl for u in entry.basis()]
    return modes, sl


def _check_basis(modes: Sequence[PiecewiseExp], sl: SpectrumSlice):
    """Every multiplicity-2 eigenvalue must come with both of its basis vectors."""
    for entry in sl:
        if entry.multiplicity != 2:
            continue
        vs = [(u.a, u.b) for u in modes if abs(u.lam - entry.lam) <= 1e-12]
        if len(vs) < 2 or abs(np.linalg.det(np.array(vs[:2], dtype=complex))) < 1e-12:
            raise DomainError(f"eigenvalue {entry.lam!r} has multiplicity 2; both basis vectors are needed")


@dataclass(frozen=True, eq=False)
class WaveState:
    """f = sum_k c_k u_k with u_k = (a_k chi_I1 + b_k chi_I2) e_lambda_k.

    ``residual`` and ``residual_sup`` are the L2 and sup truncation errors
    measured when the state was expanded (zero for exact eigen-combinations).
    """

    params: BoundaryParams
    geometry: IntervalPair
    modes: tuple[PiecewiseExp, ...]
    coeffs: np.ndarray
    residual: float = 0.0
    residual_sup: float = 0.0
    time: float = 0.0

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([u.lam for u in self.modes])

    @property
    def norms_sq(self) -> np.ndarray:
        return np.array([u.norm_sq(self.geometry) for u in self.modes])

    def norm(self) -> float:
        return math.sqrt(float(np.sum(np.abs(self.coeffs) ** 2 * self.norms_sq)))

    def _amplitudes(self):
        a = np.array([complex(u.a) for u in self.modes])
        b = np.array([complex(u.b) for u in self.modes])
        return a, b

    def values(self, x, interval: int) -> np.ndarray:
        """Evaluate on points x of interval 1 or 2 (one-sided at shared endpoints)."""
        a, b = self._amplitudes()
        amp = (a if interval == 1 else b) * self.coeffs
        x = np.asarray(x, dtype=float)
        # chunk over x to keep the K x N phase matrix bounded
        out = np.empty(x.shape, dtype=complex)
        flat, res = x.ravel(), out.ravel()
        step = max(1, 4_000_000 // max(1, len(amp)))
        for i in range(0, len(flat), step):
            ph = e(np.outer(flat[i:i + step], self.lambdas))
            res[i:i + step] = ph @ amp
        return out

    def to_grid(self, points_per_unit: int = POINTS_PER_UNIT) -> GridFunction:
        d = self.geometry
        g = GridFunction.sample(lambda x: np.zeros_like(x), d, points_per_unit)
        return GridFunction(d, self.values(g.x1, 1), self.values(g.x2, 2))

    def boundary_values(self) -> np.ndarray:
        """(f(0), f(1), f(alpha), f(beta)) from the expansion."""
        d = self.geometry
        bv = np.array([u.boundary_values(d) for u in self.modes], dtype=complex)
        return self.coeffs @ bv

    def boundary_residual(self) -> float:
        f0, f1, fa, fb = self.boundary_values()
        lhs = self.params.matrix @ np.array([f1, fb])
        return float(np.linalg.norm(lhs - np.array([f0, fa])))


def from_modes(p: BoundaryParams, d: IntervalPair, modes: Sequence[PiecewiseExp], coeffs) -> WaveState:
    c = np.asarray(coeffs, dtype=complex)
    if c.shape != (len(modes),):
        raise DomainError("one coefficient per mode is required")
    return WaveState(p, d, tuple(modes), c)


def expand(f, p: BoundaryParams, d: IntervalPair, n_range=DEFAULT_TRUNCATION,
           basis: Sequence[PiecewiseExp] | None = None,
           points_per_unit: int = POINTS_PER_UNIT) -> WaveState:
    """Project f onto the eigenbasis over ``n_range``.

    f may be a GridFunction (trapezoid rule), a PiecewiseExp or a list of
    (coefficient, PiecewiseExp) pairs (closed forms), or a callable of x
    (sampled on the default grid).
    """
    modes, sl = eigenbasis(p, d, n_range)
    if basis is not None:
        _check_basis(basis, sl)
        modes = list(basis)
    norms = np.array([u.norm_sq(d) for u in modes])

    if isinstance(f, PiecewiseExp):
        f = [(1.0, f)]
    if isinstance(f, list):
        terms = [(complex(c), u) for c, u in f]
        c = np.array([sum(cf * inner_product(g, u, d) for cf, g in terms) for u in modes]) / norms
        f_sq = sum((ci * np.conj(cj) * inner_product(gi, gj, d)).real
                   for ci, gi in terms for cj, gj in terms)
        res = math.sqrt(max(0.0, f_sq - float(np.sum(np.abs(c) ** 2 * norms))))
        # no grid here, so the L2 residual stands in for the sup error
        return WaveState(p, d, tuple(modes), c, residual=res, residual_sup=res)

    if callable(f) and not isinstance(f, GridFunction):
        f = GridFunction.sample(f, d, points_per_unit)
    if not isinstance(f, GridFunction):
        raise DomainError(f"cannot expand object of type {type(f).__name__}")
    if f.geometry != d:
        raise DomainError("grid function lives on a different geometry")

    lam = np.array([u.lam for u in modes])
    a = np.array([complex(u.a) for u in modes])
    b = np.array([complex(u.b) for u in modes])
    E1 = e(np.outer(lam, f.x1)) * a[:, None]
    E2 = e(np.outer(lam, f.x2)) * b[:, None]
    num = (integrate.trapezoid(f.v1[None, :] * np.conj(E1), f.x1, axis=1)
           + integrate.trapezoid(f.v2[None, :] * np.conj(E2), f.x2, axis=1))
    c = num / norms
    r = GridFunction(d, f.v1 - c @ E1, f.v2 - c @ E2)
    return WaveState(p, d, tuple(modes), c, residual=r.norm(), residual_sup=r.sup())


def evolve(state: WaveState, t: float) -> WaveState:
    """U(t) state: multiply c_k by e(-lambda_k t)."""
    if not math.isfinite(t):
        raise DomainError("evolution time must be finite")
    return replace(state, coeffs=state.coeffs * e(-state.lambdas * t), time=state.time + t)


def reconstruct(state: WaveState, points_per_unit: int = POINTS_PER_UNIT) -> GridFunction:
    return state.to_grid(points_per_unit)


def generator_residual(state: WaveState, dt: float) -> float:
    """|| (U(dt) f - f)/dt + 2 pi i P_B f || in L2, for a finite eigen-combination."""
    diff = (evolve(state, dt).coeffs - state.coeffs) / dt
    exact = -2j * np.pi * state.lambdas * state.coeffs
    return math.sqrt(float(np.sum(np.abs(diff - exact) ** 2 * state.norms_sq)))


# ---------------------------------------------------------------- test packets


@dataclass(frozen=True)
class Bump:
    """C-infinity bump exp(1 - 1/(1 - r^2)) with r = (x - center)/half_width."""

    center: float
    half_width: float

    @property
    def support(self) -> tuple[float, float]:
        return self.center - self.half_width, self.center + self.half_width

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        r = (x - self.center) / self.half_width
        out = np.zeros_like(x)
        m = np.abs(r) < 1.0
        out[m] = np.exp(1.0 - 1.0 / (1.0 - r[m] ** 2))
        return out.astype(complex)

    def shifted(self, s: float) -> Bump:
        return Bump(self.center + s, self.half_width)


@dataclass(frozen=True)
class TranslationReport:
    t: float
    deviation: float
    residual_sup: float
    budget: float

    @property
    def passed(self) -> bool:
        return self.deviation <= self.budget


def check_translation(p: BoundaryParams, d: IntervalPair, t: float, bump: Bump,
                      n_range=DEFAULT_TRUNCATION, points_per_unit: int = POINTS_PER_UNIT) -> TranslationReport:
    """Compare U(t) f with the shifted bump f(x - t) where both points stay inside I1."""
    lo, hi = bump.support
    if t < 0:
        raise DomainError("translation check needs t >= 0")
    if lo <= t or hi >= 1.0 - t:
        raise DomainError(f"bump support [{lo}, {hi}] is within t={t} of an endpoint of I1")
    s0 = expand(bump, p, d, n_range, points_per_unit=points_per_unit)
    g = reconstruct(evolve(s0, t), points_per_unit)
    m1 = g.x1 >= t
    m2 = g.x2 >= d.a + t
    dev = max(
        float(np.max(np.abs(g.v1[m1] - bump(g.x1[m1] - t)))),
        float(np.max(np.abs(g.v2[m2]))) if m2.any() else 0.0,
    )
    return TranslationReport(t, dev, s0.residual_sup, 3.0 * s0.residual_sup)


@dataclass(frozen=True)
class TransitionReport:
    w: float
    mass_at_0: float
    mass_at_alpha: float
    phase_0: complex
    phase_alpha: complex
    residual: float

    @property
    def expected_mass_0(self) -> float:
        return self.w ** 2

    @property
    def expected_mass_alpha(self) -> float:
        return 1.0 - self.w ** 2


def _window_overlap(v, x, shape, lo, hi):
    m = (x >= lo) & (x <= hi)
    f = v[m]
    s = shape(x[m])
    mass = integrate.trapezoid(np.abs(f) ** 2, x[m])
    ov = integrate.trapezoid(f * np.conj(s), x[m])
    return float(mass), complex(ov)


def _unit(z: complex) -> complex:
    return z / abs(z) if abs(z) > 1e-8 else 0j


def check_transition_probabilities(p: BoundaryParams, d: IntervalPair, eps: float = 0.2,
                                   t: float | None = None, n_range=256,
                                   points_per_unit: int = POINTS_PER_UNIT) -> TransitionReport:
    """Send a bump supported in (1 - eps, 1) across x = 1 and measure where it re-enters.

    Measurement windows are [0, eps + t] and [alpha, alpha + eps + t].
    """
    t = 1.25 * eps if t is None else t
    width = eps + t
    if not 0 < eps < t:
        raise DomainError("need 0 < eps < t so the whole bump has crossed x = 1")
    if width >= 1.0 or width > d.length2:
        raise DomainError(f"measurement windows of width {width} overlap or leave the intervals")
    bump = Bump(1.0 - eps / 2, eps / 2 * 0.999)
    s0 = expand(bump, p, d, n_range, points_per_unit=points_per_unit)
    g = reconstruct(evolve(s0, t), points_per_unit)
    total = s0.norm() ** 2
    m0, o0 = _window_overlap(g.v1, g.x1, bump.shifted(t - 1.0), 0.0, width)
    ma, oa = _window_overlap(g.v2, g.x2, bump.shifted(d.a + t - 1.0), d.a, d.a + width)
    return TransitionReport(p.w, m0 / total, ma / total, _unit(o0), _unit(oa), s0.residual)


def check_boundary_invariance(state: WaveState, times: Sequence[float]) -> float:
    """max over t of |B (f(1), f(beta)) - (f(0), f(alpha))| for U(t) state."""
    return max(evolve(state, t).boundary_residual() for t in times)


def bump_state(p: BoundaryParams, d: IntervalPair, center: float, half_width: float,
               n_range=DEFAULT_TRUNCATION, points_per_unit: int = POINTS_PER_UNIT) -> WaveState:
    return expand(Bump(center, half_width), p, d, n_range, points_per_unit=points_per_unit)


def window_mass(g: GridFunction, interval: int, lo: float, hi: float) -> float:
    x, v = (g.x1, g.v1) if interval == 1 else (g.x2, g.v2)
    m = (x >= lo) & (x <= hi)
    return float(integrate.trapezoid(np.abs(v[m]) ** 2, x[m]))

