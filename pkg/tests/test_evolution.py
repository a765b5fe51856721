import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twointerval.core import BoundaryParams, GridFunction, IntervalPair, PiecewiseExp
from twointerval.errors import DomainError
from twointerval.evolution import (
    Bump,
    check_boundary_invariance,
    check_transition_probabilities,
    check_translation,
    eigenbasis,
    evolve,
    expand,
    from_modes,
    generator_residual,
)
from twointerval.spectrum import spectrum


@pytest.fixture
def combo(std_params, d23):
    rng = np.random.default_rng(7)
    modes, _ = eigenbasis(std_params, d23, range(-5, 5))
    return from_modes(std_params, d23, modes, rng.normal(size=10) + 1j * rng.normal(size=10))


def test_exact_eigenfunction_expands_to_unit_vector(std_params, d23):
    sl = spectrum(std_params, d23, branches=range(-8, 9))
    u3 = next(x for x in sl if x.n == 3).mode
    s = expand(u3, std_params, d23, range(-8, 9))
    k = [i for i, m in enumerate(s.modes) if m.lam == u3.lam][0]
    assert abs(s.coeffs[k] - 1) < 1e-12
    others = np.delete(np.abs(s.coeffs), k)
    assert others.max() < 1e-10
    assert s.residual < 1e-6


def test_generic_eigenfunction_expansion():
    p, d = BoundaryParams(0.4, 0.1, 0.2, 0.3), IntervalPair(2.0, 3.7)
    sl = spectrum(p, d, branches=range(-6, 7))
    u = sl.entries[9].mode
    s = expand(u, p, d, range(-6, 7))
    assert abs(s.coeffs[9] - 1) < 1e-12
    assert np.delete(np.abs(s.coeffs), 9).max() < 1e-10


def test_residual_decreases_with_truncation(std_params, d23):
    f = GridFunction.sample(lambda x: np.where(x <= 1.0, 1.0, 0.0), d23)
    res = [expand(f, std_params, d23, n).residual for n in (8, 16, 32, 64)]
    assert all(a > b for a, b in zip(res, res[1:]))


def test_pythagoras(std_params, d23):
    f = GridFunction.sample(Bump(0.4, 0.25), d23)
    s = expand(f, std_params, d23, 64)
    total = f.norm() ** 2
    assert total == pytest.approx(s.norm() ** 2 + s.residual ** 2, rel=1e-8)


def test_pythagoras_closed_form(std_params, d23):
    f = [(1.0, PiecewiseExp(0.1, 1.0, 0.0))]
    s = expand(f, std_params, d23, 16)
    assert 1.0 == pytest.approx(s.norm() ** 2 + s.residual ** 2, rel=1e-12)


def test_multiplicity_two_needs_both_vectors():
    p, d = BoundaryParams(1.0), IntervalPair(2, 4)
    modes, _ = eigenbasis(p, d, range(-2, 3))
    partial = [m for m in modes if not (m.lam == 0.0 and m.b == 1.0)]
    with pytest.raises(DomainError):
        expand(PiecewiseExp(0.0), p, d, range(-2, 3), basis=partial)
    s = expand(PiecewiseExp(0.0), p, d, range(-2, 3), basis=modes)
    assert s.residual < 1e-12


def test_evolve_identity_and_unitarity(combo):
    assert np.array_equal(evolve(combo, 0.0).coeffs, combo.coeffs)
    for t in (0.3, -2.1, 17.5):
        assert abs(evolve(combo, t).norm() - combo.norm()) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5))
def test_group_law(t1, t2):
    p, d = BoundaryParams(0.6, 0.1, 0.2, 0.3), IntervalPair(2, 3)
    modes, _ = eigenbasis(p, d, range(-4, 4))
    s = from_modes(p, d, modes, np.arange(1, 9) * (1 + 1j))
    a = evolve(evolve(s, t1), t2).coeffs
    b = evolve(s, t1 + t2).coeffs
    assert np.max(np.abs(a - b)) < 1e-12


def test_w0_periodic_dynamics():
    d = IntervalPair(2, Fraction(7, 2))
    p = BoundaryParams(0.0, 0.1, 0.2, 0.3)
    modes, _ = eigenbasis(p, d, range(-6, 7))
    s = from_modes(p, d, modes, np.linspace(1, 2, len(modes)))
    ratio = evolve(s, d.total_length).coeffs / s.coeffs
    assert np.allclose(ratio, ratio[0], atol=1e-12)
    assert abs(ratio[0] - np.exp(-2j * np.pi * (0.5 - p.theta))) < 1e-12


def test_generator_limit(combo):
    r = [generator_residual(combo, dt) for dt in (1e-2, 1e-3, 1e-4)]
    assert r[0] > r[1] > r[2]
    assert r[2] < 1e-2 * r[0] * 1.1


def test_boundary_invariance(combo):
    assert check_boundary_invariance(combo, [0.1, 0.7, 3.2]) < 1e-9


def test_boundary_invariance_w1_double_point():
    p, d = BoundaryParams(1.0, 0.0, 0.3, 0.0), IntervalPair(2, 4)
    modes = [PiecewiseExp(1.0, 1.0, 0.0), PiecewiseExp(1.0, 0.0, 1.0)]
    s = from_modes(p, d, modes, [0.6, 0.8j])
    assert check_boundary_invariance(s, [0.0, 0.4, 2.5]) < 1e-10


def test_translation(std_params, d23):
    r = check_translation(std_params, d23, 0.1, Bump(0.5, 0.2), n_range=128)
    assert r.passed
    devs = [check_translation(std_params, d23, 0.1, Bump(0.5, 0.2), n_range=n).deviation for n in (16, 32, 64)]
    assert devs[0] > devs[1] > devs[2]


def test_translation_at_zero_time_is_truncation_error(std_params, d23):
    r = check_translation(std_params, d23, 0.0, Bump(0.5, 0.2), n_range=64)
    assert r.deviation <= r.residual_sup * (1 + 1e-12)


def test_translation_precondition(std_params, d23):
    with pytest.raises(DomainError):
        check_translation(std_params, d23, 0.2, Bump(0.7, 0.2))


@pytest.mark.parametrize("w,m0,ma", [(1.0, 1.0, 0.0), (0.0, 0.0, 1.0)])
def test_transition_limits(d23, w, m0, ma):
    r = check_transition_probabilities(BoundaryParams(w, 0.1, 0.2, 0.3), d23, n_range=128)
    assert r.mass_at_0 == pytest.approx(m0, abs=1e-6)
    assert r.mass_at_alpha == pytest.approx(ma, abs=1e-6)


def test_transition_split_and_phases(std_params, d23):
    r = check_transition_probabilities(std_params, d23, n_range=256)
    assert r.mass_at_0 == pytest.approx(r.expected_mass_0, rel=0.05)
    assert r.mass_at_alpha == pytest.approx(r.expected_mass_alpha, rel=0.05)
    assert abs(r.phase_0 - np.exp(2j * np.pi * std_params.phi)) < 1e-6
    assert abs(r.phase_alpha - np.exp(2j * np.pi * std_params.psi)) < 1e-6


def test_transition_window_precondition():
    with pytest.raises(DomainError):
        check_transition_probabilities(BoundaryParams(0.5), IntervalPair(2.0, 2.3))
