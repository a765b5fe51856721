"""Eigenvalues and eigenfunctions of P_B on [0,1] u [alpha,beta].

lambda is an eigenvalue iff

    F(lambda) = (e(phi+lambda) - w) e(theta-phi+(beta-alpha) lambda) - (w e(phi+lambda) - 1) = 0.

For 0 < w < 1 this is linearized by the lift g into h(lambda) in Z with the
strictly increasing h(t) = theta - phi + (beta-alpha) t - g(phi + t); branch n
is the unique root of h = n. w = 0 and w = 1 have lattice closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np

from .core import (
    BoundaryParams,
    IntervalPair,
    PiecewiseExp,
    TOL,
    _squeeze,
    e,
    exp_overlap,
)
from .errors import SolverError, StructuralError, WrongPathError
from .moebius import lift_g, lift_g_derivative

RESIDUAL_TOL = 1e-9
COINCIDE_TOL = 1e-9


@dataclass(frozen=True)
class EigenvalueEntry:
    """One point of the spectrum; eigenfunction (a chi_I1 + b chi_I2) e_lambda.

    A multiplicity-2 point (only possible at w = 1) has eigenspace spanned
    by chi_I1 e_lambda and chi_I2 e_lambda; ``coeff_a``/``coeff_b`` then hold
    the first of the two and ``basis()`` returns both.
    """

    n: int
    lam: float
    multiplicity: int
    coeff_a: complex
    coeff_b: complex
    residual: float = 0.0

    def basis(self) -> list[PiecewiseExp]:
        if self.multiplicity == 2:
            return [PiecewiseExp(self.lam, 1.0, 0.0), PiecewiseExp(self.lam, 0.0, 1.0)]
        return [PiecewiseExp(self.lam, self.coeff_a, self.coeff_b)]

    @property
    def mode(self) -> PiecewiseExp:
        return PiecewiseExp(self.lam, self.coeff_a, self.coeff_b)


@dataclass(frozen=True)
class SpectrumSlice:
    entries: tuple[EigenvalueEntry, ...]
    window: tuple[float, float]
    structure: str
    lattice: dict = field(default_factory=dict)

    def __post_init__(self):
        lams = [x.lam for x in self.entries]
        if any(b <= a for a, b in zip(lams[:-1], lams[1:])):
            raise SolverError("spectrum slice is not strictly increasing")

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([x.lam for x in self.entries])

    @property
    def multiplicities(self) -> np.ndarray:
        return np.array([x.multiplicity for x in self.entries])

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def master_residual(p: BoundaryParams, d: IntervalPair, lam):
    """F(lambda); zero exactly on the spectrum."""
    lam = np.asarray(lam, dtype=float)
    z = e(p.phi + lam)
    out = (z - p.w) * e(p.theta - p.phi + d.length2 * lam) - (p.w * z - 1.0)
    return _squeeze(out)


def _require_generic(p: BoundaryParams, what: str):
    if p.regime != "generic":
        raise WrongPathError(
            f"{what} needs 0 < w < 1; w={p.w!r} is handled by the "
            f"{'closedFormW0' if p.regime == 'off-diagonal' else 'closedFormW1'} path"
        )


def h_function(p: BoundaryParams, d: IntervalPair, t):
    _require_generic(p, "h")
    t = np.asarray(t, dtype=float)
    out = p.theta - p.phi + d.length2 * t - lift_g(p.w, p.phi + t)
    return _squeeze(out)


def h_derivative(p: BoundaryParams, d: IntervalPair, t):
    _require_generic(p, "h")
    return d.length2 - lift_g_derivative(p.w, p.phi + np.asarray(t, dtype=float))


def branch_bracket(p: BoundaryParams, d: IntervalPair, n: int) -> tuple[float, float]:
    """Certified bracket for h(t) = n.

    h(t) - h(0) - (1 + beta - alpha) t is a difference of values of the
    periodic function g(u) + u, whose oscillation is below 1.
    """
    L = d.total_length
    h0 = float(h_function(p, d, 0.0))
    return (n - h0 - 1.0) / L, (n - h0 + 1.0) / L


def generic_coefficient(p: BoundaryParams, d: IntervalPair, lam: float) -> complex:
    """Amplitude a on I1 for the eigenfunction normalized to b = 1."""
    s = math.sqrt(1.0 - p.w * p.w)
    return s * e(p.theta - p.psi + d.b * lam) / (p.w * e(p.phi + lam) - 1.0)


def _solve_h(p: BoundaryParams, d: IntervalPair, n: int) -> float:
    lo, hi = branch_bracket(p, d, n)
    flo = float(h_function(p, d, lo)) - n
    fhi = float(h_function(p, d, hi)) - n
    if not (flo <= 0.0 <= fhi):
        raise SolverError(f"bracket [{lo}, {hi}] does not enclose branch {n}")
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    # bisection down to a narrow bracket; Newton alone can overshoot when w ~ 1
    for _ in range(200):
        if hi - lo <= 1e-6 * max(1.0, abs(lo)):
            break
        mid = 0.5 * (lo + hi)
        fm = float(h_function(p, d, mid)) - n
        if fm == 0.0:
            return mid
        if fm < 0.0:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    best = (math.inf, x)
    for _ in range(60):
        fx = float(h_function(p, d, x)) - n
        if fx == 0.0:
            return x
        best = min(best, (abs(fx), x))
        if fx < 0.0:
            lo = x
        else:
            hi = x
        # h is only known to a few ulps, so stop once the bracket is that tight
        if hi - lo <= 8 * np.spacing(max(abs(lo), abs(hi), 1.0)):
            return best[1]
        step = fx / float(h_derivative(p, d, x))
        xn = x - step
        if not lo <= xn <= hi:
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= 2 * np.spacing(max(abs(x), 1.0)):
            return best[1] if best[0] < abs(float(h_function(p, d, xn)) - n) else xn
        x = xn
    raise SolverError(f"Newton refinement for branch {n} did not converge")


def solve_branch(p: BoundaryParams, d: IntervalPair, n: int) -> EigenvalueEntry:
    """lambda_n, the solution of h(lambda) = n, with its eigenfunction."""
    _require_generic(p, "solveBranch")
    lam = _solve_h(p, d, int(n))
    hres = abs(float(h_function(p, d, lam)) - n)
    if hres > 1e-12 * max(1.0, abs(n)):
        raise SolverError(f"branch {n}: |h - n| = {hres:.3e}")
    res = abs(master_residual(p, d, lam))
    if res > RESIDUAL_TOL:
        raise SolverError(f"branch {n}: master residual {res:.3e}")
    return EigenvalueEntry(
        n=int(n),
        lam=lam,
        multiplicity=1,
        coeff_a=generic_coefficient(p, d, lam),
        coeff_b=1.0 + 0j,
        residual=float(res),
    )


def branch_range(p: BoundaryParams, d: IntervalPair, lo: float, hi: float) -> range:
    """Branch indices covering [lo, hi]; may include one extra index at either end."""
    _require_generic(p, "branch_range")
    # h is only accurate to a few ulps; over-include and let callers filter on lambda
    h_lo, h_hi = float(h_function(p, d, lo)), float(h_function(p, d, hi))
    return range(
        math.ceil(h_lo - 1e-9 * max(1.0, abs(h_lo))),
        math.floor(h_hi + 1e-9 * max(1.0, abs(h_hi))) + 1,
    )


def _generic_structure(d: IntervalPair) -> tuple[str, dict]:
    if d.length_ratio is not None:
        r = d.length_ratio
        return "rational-periodic", {"period": r.denominator, "points_per_period": r.numerator + r.denominator}
    if d.irrational:
        return "aperiodic", {}
    return "unclassified", {}


def generic_spectrum(p, d, window=None, branches=None) -> SpectrumSlice:
    _require_generic(p, "generic spectrum")
    if branches is None:
        lo, hi = window
        branches = branch_range(p, d, lo, hi)
    entries = tuple(solve_branch(p, d, n) for n in branches)
    if window is None:
        window = (entries[0].lam, entries[-1].lam) if entries else (0.0, 0.0)
    else:
        entries = tuple(x for x in entries if window[0] <= x.lam <= window[1])
    structure, meta = _generic_structure(d)
    return SpectrumSlice(entries, (float(window[0]), float(window[1])), structure, meta)


# ---------------------------------------------------------------- w = 0


def w0_eigenvalue(p: BoundaryParams, d: IntervalPair, n: int) -> float:
    return (0.5 - p.theta + n) / d.total_length


def w0_coefficient(p: BoundaryParams, d: IntervalPair, lam: float) -> complex:
    # a = -e(theta - psi + beta lambda), from the first row of the boundary condition
    return -e(p.theta - p.psi + d.b * lam)


def closed_form_w0(p: BoundaryParams, d: IntervalPair, window=None, branches=None) -> SpectrumSlice:
    if p.regime != "off-diagonal":
        raise WrongPathError(f"closedFormW0 needs w = 0, got w={p.w!r}")
    L = d.total_length
    if branches is None:
        lo, hi = window
        branches = range(math.ceil(lo * L - 0.5 + p.theta - 1e-12),
                         math.floor(hi * L - 0.5 + p.theta + 1e-12) + 1)
    entries = []
    for n in branches:
        lam = w0_eigenvalue(p, d, n)
        if window is not None and not window[0] - 1e-12 <= lam <= window[1] + 1e-12:
            continue
        entries.append(EigenvalueEntry(
            n=int(n), lam=lam, multiplicity=1,
            coeff_a=w0_coefficient(p, d, lam), coeff_b=1.0 + 0j,
            residual=float(abs(master_residual(p, d, lam))),
        ))
    if window is None:
        window = (entries[0].lam, entries[-1].lam) if entries else (0.0, 0.0)
    meta = {"offset": (0.5 - p.theta) / L, "spacing": 1.0 / L}
    return SpectrumSlice(tuple(entries), (float(window[0]), float(window[1])), "single-lattice", meta)


# ---------------------------------------------------------------- w = 1


def _snap(x) -> Fraction:
    if isinstance(x, Rational):
        return Fraction(x)
    # float phases are read as the nearest rational with a modest denominator
    return Fraction(x).limit_denominator(10**9)


def _w1_raw(p: BoundaryParams, d: IntervalPair, lo: float, hi: float):
    ell = d.length2
    pts = []
    for j in range(math.ceil(lo + p.phi), math.floor(hi + p.phi) + 1):
        pts.append((-p.phi + j, 1, j))
    for k in range(math.ceil(ell * lo - p.phi + p.theta), math.floor(ell * hi - p.phi + p.theta) + 1):
        pts.append(((p.phi - p.theta + k) / ell, 2, k))
    pts.sort(key=lambda x: x[0])
    exact = d.length_ratio is not None
    if exact:
        ell_q, phi_q, theta_q = d.length_ratio, _snap(p.phi), _snap(p.theta)

    def same(u, v):
        (x1, s1, i1), (x2, s2, i2) = u, v
        if s1 == s2:
            return False
        if exact:
            j, k = (i1, i2) if s1 == 1 else (i2, i1)
            return ell_q * (j - phi_q) == phi_q - theta_q + k
        return abs(x1 - x2) <= COINCIDE_TOL

    merged = []
    for pt in pts:
        if merged and same(merged[-1][-1], pt):
            merged[-1].append(pt)
        else:
            merged.append([pt])
    out = []
    for group in merged:
        lam = next((x[0] for x in group if x[1] == 1), group[0][0])
        if len(group) == 2:
            out.append((lam, 2, 1.0 + 0j, 0j))
        elif group[0][1] == 1:
            out.append((lam, 1, 1.0 + 0j, 0j))
        else:
            out.append((lam, 1, 0j, 1.0 + 0j))
    return out


def closed_form_w1(p: BoundaryParams, d: IntervalPair, window=None, branches=None) -> SpectrumSlice:
    """Lambda_1 u Lambda_2 with Lambda_1 = -phi + Z, Lambda_2 = (phi - theta + Z)/(beta - alpha).

    Branch index n counts distinct points with n = 0 at the least point >= 0.
    """
    if p.regime != "diagonal":
        raise WrongPathError(f"closedFormW1 needs w = 1, got w={p.w!r}")
    dens = max(1.0, 1.0 / d.length2)
    if branches is not None:
        n0, n1 = min(branches), max(branches)
        lo, hi = min(0.0, (n0 - 2) / dens - 1.0), max(0.0, (n1 + 2) / dens + 1.0)
    else:
        lo, hi = window
    gen_lo, gen_hi = min(lo, 0.0), max(hi, 0.0)
    raw = _w1_raw(p, d, gen_lo, gen_hi)
    zero_at = next(i for i, x in enumerate(raw) if x[0] >= 0.0) if raw and raw[-1][0] >= 0.0 else len(raw)
    entries = []
    for i, (lam, mult, a, b) in enumerate(raw):
        n = i - zero_at
        if branches is not None:
            if n not in branches:
                continue
        elif not lo <= lam <= hi:
            continue
        entries.append(EigenvalueEntry(n=n, lam=lam, multiplicity=mult, coeff_a=a, coeff_b=b,
                                       residual=float(abs(master_residual(p, d, lam)))))
    if branches is not None and len(entries) != len(branches):
        raise SolverError("w = 1 enumeration window too small for the requested branches")
    if window is None:
        window = (entries[0].lam, entries[-1].lam) if entries else (0.0, 0.0)
    ell = d.length2
    meta = {
        "cosets": [
            {"offset": (-p.phi) % 1.0, "spacing": 1.0},
            {"offset": ((p.phi - p.theta) / ell) % (1.0 / ell), "spacing": 1.0 / ell},
        ]
    }
    return SpectrumSlice(tuple(entries), (float(window[0]), float(window[1])), "lattice-union", meta)


# ---------------------------------------------------------------- dispatch


def spectrum(p: BoundaryParams, d: IntervalPair, window=None, branches=None) -> SpectrumSlice:
    """Spectrum over a window [lo, hi] or a branch-index range, in any w-regime."""
    if (window is None) == (branches is None):
        raise ValueError("give exactly one of window or branches")
    if branches is not None:
        branches = range(min(branches), max(branches) + 1) if not isinstance(branches, range) else branches
    regime = p.regime
    if regime == "off-diagonal":
        return closed_form_w0(p, d, window, branches)
    if regime == "diagonal":
        return closed_form_w1(p, d, window, branches)
    return generic_spectrum(p, d, window, branches)


# ---------------------------------------------------------------- structure


def separation_delta(d: IntervalPair, rel_tol: float = 1e-12) -> float:
    """Largest delta with |<e_t | 1>| > L/2 for all |t| <= delta.

    Marches from t = 0 in steps certified by the Lipschitz bound
    | d/dt |<e_t|1>| | <= 2 pi int_Omega |x| dx, so no crossing is skipped.
    """
    L = d.total_length
    lip = 2.0 * math.pi * (0.5 + 0.5 * (d.b ** 2 - d.a ** 2))
    t = 0.0
    for _ in range(1_000_000):
        v = abs(exp_overlap(t, d)) - 0.5 * L
        if v <= rel_tol * L:
            return t
        t += v / lip
    raise SolverError("separation march did not converge")


def gap_lower_bound(p: BoundaryParams, d: IntervalPair) -> float:
    """Per-operator certified gap: 1 / max h' for 0 < w < 1."""
    _require_generic(p, "gap_lower_bound")
    w = p.w
    return 1.0 / (d.length2 + (1 + w) / (1 - w))


def unit_window_count(d: IntervalPair) -> int:
    """Number of eigenvalues in [lambda_n, lambda_n + 1): integers in [0, 1 + beta - alpha)."""
    L = d.length_ratio + 1 if d.length_ratio is not None else d.total_length
    c = math.ceil(L)
    return int(c)


@dataclass(frozen=True)
class LatticeDecomposition:
    offsets: tuple[float, ...]
    period: int
    shift_error: float


def lattice_decomposition(p: BoundaryParams, d: IntervalPair, samples=range(-5, 5)) -> LatticeDecomposition:
    """Finite set L in [lambda_0, lambda_0 + q) with spectrum = L + qZ when beta - alpha = p/q."""
    _require_generic(p, "latticeDecomposition")
    if d.length_ratio is None:
        raise StructuralError("latticeDecomposition needs an exact rational length tag")
    r = d.length_ratio
    q, count = r.denominator, r.numerator + r.denominator
    offsets = tuple(solve_branch(p, d, n).lam for n in range(count))
    err = 0.0
    for n in samples:
        a = solve_branch(p, d, n).lam
        b = solve_branch(p, d, n + count).lam
        err = max(err, abs(b - (a + q)))
    if err > RESIDUAL_TOL:
        raise SolverError(f"shift identity violated by {err:.3e}")
    lam0 = offsets[0]
    if not all(lam0 <= x < lam0 + q for x in offsets):
        raise SolverError("lattice representatives escape [lambda_0, lambda_0 + q)")
    return LatticeDecomposition(offsets, q, err)


def fractional_orbit(p: BoundaryParams, d: IntervalPair, count: int) -> np.ndarray:
    """Fractional parts [lambda_n] for n = 0 .. count-1 (irrational length only)."""
    _require_generic(p, "fractionalOrbit")
    if not d.irrational:
        raise StructuralError("fractionalOrbit needs a length tagged irrational")
    lams = np.array([solve_branch(p, d, n).lam for n in range(count)])
    return np.mod(lams, 1.0)


def covering_radius(points) -> float:
    """Half the largest circular gap between points of [0, 1)."""
    x = np.sort(np.mod(np.asarray(points, dtype=float), 1.0))
    if len(x) == 0:
        return 0.5
    gaps = np.diff(np.concatenate([x, [x[0] + 1.0]]))
    return float(gaps.max() / 2.0)


def asymptotic_bounds(lam0: float, k: int, d: IntervalPair) -> tuple[float, float]:
    c = lam0 + (k - 1) / d.total_length
    return c - 1.0, c + 1.0
