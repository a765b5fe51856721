import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twointerval.core import BoundaryParams, IntervalPair, e
from twointerval.errors import StructuralError, WrongPathError
from twointerval.spectrum import (
    branch_bracket,
    closed_form_w0,
    closed_form_w1,
    covering_radius,
    fractional_orbit,
    gap_lower_bound,
    generic_coefficient,
    h_function,
    lattice_decomposition,
    master_residual,
    separation_delta,
    solve_branch,
    spectrum,
    unit_window_count,
    w0_coefficient,
)

params = st.builds(
    BoundaryParams,
    st.floats(0.02, 0.98),
    st.floats(-1, 1),
    st.floats(-1, 1),
    st.floats(-1, 1),
)
geoms = st.builds(lambda a, ell: IntervalPair(a, a + ell), st.floats(1.0, 4.0), st.floats(0.1, 3.0))


@settings(max_examples=40, deadline=None)
@given(params, geoms, st.integers(-30, 30))
def test_branch_solves_master_equation(p, d, n):
    x = solve_branch(p, d, n)
    assert abs(master_residual(p, d, x.lam)) < 1e-9
    assert abs(h_function(p, d, x.lam) - n) < 1e-12 * max(1, abs(n))
    lo, hi = branch_bracket(p, d, n)
    assert lo <= x.lam <= hi


@settings(max_examples=30, deadline=None)
@given(params, geoms)
def test_eigenfunction_satisfies_boundary_condition(p, d):
    for n in (-3, 0, 4):
        u = solve_branch(p, d, n).mode
        f0, f1, fa, fb = u.boundary_values(d)
        assert np.allclose(p.matrix @ [f1, fb], [f0, fa], atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(params, geoms)
def test_branches_strictly_increase(p, d):
    lam = spectrum(p, d, branches=range(-10, 11)).lambdas
    assert np.all(np.diff(lam) > 0)
    assert np.diff(lam).min() >= gap_lower_bound(p, d) * (1 - 1e-9)


def test_wrong_path_errors(d23):
    with pytest.raises(WrongPathError):
        solve_branch(BoundaryParams(0.0), d23, 0)
    with pytest.raises(WrongPathError):
        closed_form_w0(BoundaryParams(0.5), d23, branches=range(3))
    with pytest.raises(WrongPathError):
        closed_form_w1(BoundaryParams(0.5), d23, branches=range(3))


def test_window_or_branches_exclusive(d23):
    with pytest.raises(ValueError):
        spectrum(BoundaryParams(0.5), d23)
    with pytest.raises(ValueError):
        spectrum(BoundaryParams(0.5), d23, window=(0, 1), branches=range(2))


def test_w0_eigenfunctions_satisfy_boundary_condition():
    d = IntervalPair(Fraction(5, 2), 4)
    p = BoundaryParams(0.0, 0.3, 0.17, 0.41)
    for x in closed_form_w0(p, d, branches=range(-4, 5)):
        f0, f1, fa, fb = x.mode.boundary_values(d)
        assert np.allclose(p.matrix @ [f1, fb], [f0, fa], atol=1e-12)
        # the alternative form e(-psi - (1 - alpha) lambda) of the same amplitude
        assert abs(w0_coefficient(p, d, x.lam) - e(-p.psi - (1 - d.a) * x.lam)) < 1e-12


def test_w0_limit_of_generic_branches(d23):
    # the generic branch n tends to the w=0 point with index n-1
    p = BoundaryParams(1e-7, 0.1, 0.2, 0.3)
    q = p.with_(w=0.0)
    for n in range(-3, 4):
        assert solve_branch(p, d23, n).lam == pytest.approx(
            closed_form_w0(q, d23, branches=[n - 1]).entries[0].lam, abs=1e-6)


def test_w1_branch_indexing():
    sl = closed_form_w1(BoundaryParams(1.0), IntervalPair(2, 4), branches=range(-3, 4))
    assert [x.n for x in sl] == list(range(-3, 4))
    assert sl.entries[3].lam == 0.0 and sl.entries[3].multiplicity == 2


def test_w1_exact_coincidence_with_float_phase():
    # Lambda_1 = -0.1 + Z meets Lambda_2 = (0.1 - 0.3 + k)/2 at lambda = -0.1 when k = 0
    d = IntervalPair.rational(2, 2)
    sl = closed_form_w1(BoundaryParams(1.0, 0.1, 0.0, 0.3), d, window=(-1, 1))
    doubles = [x.lam for x in sl if x.multiplicity == 2]
    assert doubles == pytest.approx([-0.1, 0.9])


def test_w1_boundary_conditions():
    d = IntervalPair(2, 4)
    p = BoundaryParams(1.0, 0.2, 0.5, 0.7)
    for x in closed_form_w1(p, d, window=(-3, 3)):
        for u in x.basis():
            f0, f1, fa, fb = u.boundary_values(d)
            assert np.allclose(p.matrix @ [f1, fb], [f0, fa], atol=1e-12)


def test_generic_coefficient_reproduces_table_value():
    p = BoundaryParams(math.sqrt(0.5), -0.125, 0.125, -0.25)
    d = IntervalPair(2, 4)
    lam = spectrum(p, d, window=(0.1, 0.3)).entries[0].lam
    assert abs(generic_coefficient(p, d, lam) - (1.61716 - 0.455719j)) < 1e-5


def test_separation_delta_values():
    assert separation_delta(IntervalPair(2, 3)) == pytest.approx(0.16252, abs=1e-5)
    assert separation_delta(IntervalPair(2, 4)) == pytest.approx(0.13548, abs=1e-5)
    d = IntervalPair(2, 4)
    delta = separation_delta(d)
    from twointerval.core import exp_overlap

    t = np.linspace(0, delta, 2001)[:-1]
    assert np.all(np.abs(exp_overlap(t, d)) > d.total_length / 2)


@pytest.mark.parametrize("ell,count", [(Fraction(1), 2), (Fraction(1, 2), 2), (Fraction(3, 2), 3), (Fraction(2), 3)])
def test_unit_window_count(ell, count):
    p = BoundaryParams(0.4, 0.1, 0.2, 0.3)
    d = IntervalPair.rational(2, ell.numerator, ell.denominator)
    assert unit_window_count(d) == count
    for n in range(-3, 3):
        lam = solve_branch(p, d, n).lam
        inside = spectrum(p, d, window=(lam, lam + 1 - 1e-12))
        assert len(inside) == count


def test_lattice_decomposition_needs_tag():
    p = BoundaryParams(0.4)
    with pytest.raises(StructuralError):
        lattice_decomposition(p, IntervalPair(2.0, 3.5))
    with pytest.raises(StructuralError):
        fractional_orbit(p, IntervalPair(2, 3), 10)


def test_structure_labels():
    p = BoundaryParams(0.4)
    assert spectrum(p, IntervalPair.rational(2, 3, 2), branches=range(3)).structure == "rational-periodic"
    assert spectrum(p, IntervalPair(2.0, 2.0 + math.sqrt(2), irrational=True), branches=range(3)).structure == "aperiodic"
    assert spectrum(p, IntervalPair(2.0, 3.7), branches=range(3)).structure == "unclassified"


def test_orbit_covering_radius_shrinks():
    p = BoundaryParams(1 / math.sqrt(3), -0.125, 0.0, -0.25)
    d = IntervalPair(3.0, 3.0 + math.sqrt(2), irrational=True)
    radii = [covering_radius(fractional_orbit(p, d, n)) for n in (10, 100, 400)]
    assert radii[0] > radii[1] > radii[2]
