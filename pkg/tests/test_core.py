import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twointerval.core import (
    BoundaryParams,
    GridFunction,
    IntervalPair,
    PiecewiseExp,
    boundary_matrix,
    e,
    exp_overlap,
    inner_product,
)
from twointerval.errors import DomainError

angles = st.floats(-3.0, 3.0, allow_nan=False)


def test_e_quarter_periods_exact():
    assert e(0.25) == 1j
    assert e(-0.5) == -1
    assert e(3.0) == 1


def test_e_rejects_nan():
    with pytest.raises(DomainError):
        e(float("nan"))


@given(st.floats(0.0, 1.0), angles, angles, angles)
def test_boundary_matrix_is_unitary(w, phi, psi, theta):
    B = boundary_matrix(BoundaryParams(w, phi, psi, theta))
    assert np.allclose(B @ B.conj().T, np.eye(2), atol=1e-12)


def test_boundary_matrix_off_diagonal_at_w0():
    B = boundary_matrix(BoundaryParams(0.0, 0.0, 0.0, 0.0))
    assert np.allclose(B, [[0, -1], [1, 0]])


def test_boundary_matrix_w1_is_diagonal():
    B = BoundaryParams(1.0, 0.1, 0.3, 0.2).matrix
    assert B[0, 1] == 0 and B[1, 0] == 0


@pytest.mark.parametrize("w", [-0.1, 1.0000001, float("nan")])
def test_w_out_of_range(w):
    with pytest.raises(DomainError):
        BoundaryParams(w)


def test_regimes():
    assert BoundaryParams(0.0).regime == "off-diagonal"
    assert BoundaryParams(1.0).regime == "diagonal"
    assert BoundaryParams(0.5).regime == "generic"


@pytest.mark.parametrize("a,b", [(0.5, 2.0), (2.0, 2.0), (3.0, 2.0)])
def test_bad_geometry(a, b):
    with pytest.raises(DomainError):
        IntervalPair(a, b)


def test_touching_intervals_allowed():
    d = IntervalPair(1, 2)
    assert d.touching


def test_exact_length_from_exact_endpoints():
    assert IntervalPair(Fraction(5, 2), 3).length_ratio == Fraction(1, 2)
    assert IntervalPair(2.0, 3.5).length_ratio is None
    assert IntervalPair.rational(2, 3, 2).beta == Fraction(7, 2)


def test_conflicting_tags():
    with pytest.raises(DomainError):
        IntervalPair(2.0, 3.0, length_ratio=Fraction(1), irrational=True)
    with pytest.raises(DomainError):
        IntervalPair(2.0, 3.0, length_ratio=Fraction(3, 2))


def test_norm_of_exponential_is_total_length(d23):
    assert inner_product(PiecewiseExp(0.37), PiecewiseExp(0.37), d23) == pytest.approx(2.0)


def test_exponentials_orthogonal_on_spectral_set(d23):
    assert abs(inner_product(PiecewiseExp(0.0), PiecewiseExp(0.25), d23)) < 1e-15


def test_closed_form_matches_quadrature():
    d = IntervalPair(2.3, 4.1)
    f, g = PiecewiseExp(0.7, 1 + 2j, -0.5j), PiecewiseExp(-1.3, 0.4, 2.0)
    closed = inner_product(f, g, d)
    quad = inner_product(lambda x: f(x, d), lambda x: g(x, d), d)
    assert abs(closed - quad) < 1e-10


def test_grid_inner_product_close_to_closed_form(d23):
    f, g = PiecewiseExp(0.3), PiecewiseExp(1.1, 0.5, 1j)
    gf = GridFunction.sample(lambda x: f(x, d23), d23)
    gg = GridFunction.sample(lambda x: g(x, d23), d23)
    assert abs(gf.inner(gg) - inner_product(f, g, d23)) < 1e-5


def test_grid_and_analytic_do_not_mix(d23):
    gf = GridFunction.sample(lambda x: np.ones_like(x), d23)
    with pytest.raises(DomainError):
        inner_product(gf, PiecewiseExp(0.0), d23)


def test_grid_domain_mismatch(d23):
    a = GridFunction.sample(lambda x: np.ones_like(x), d23)
    b = GridFunction.sample(lambda x: np.ones_like(x), IntervalPair(2, 4))
    with pytest.raises(DomainError):
        a + b


def test_exp_overlap_at_zero(d23):
    assert exp_overlap(0.0, d23) == pytest.approx(2.0)


@settings(max_examples=50)
@given(st.floats(-20, 20), st.floats(1.0, 5.0), st.floats(0.1, 3.0))
def test_overlap_bounded_by_length(t, a, ell):
    d = IntervalPair(a, a + ell)
    assert abs(exp_overlap(t, d)) <= d.total_length + 1e-12


def test_boundary_values_one_sided_when_touching():
    d = IntervalPair(1, 2)
    f0, f1, fa, fb = PiecewiseExp(0.0, 2.0, 3.0).boundary_values(d)
    assert f1 == 2.0 and fa == 3.0
