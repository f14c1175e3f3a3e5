from fractions import Fraction as Q

import pytest
from hypothesis import given, settings, strategies as st

from formacalc.algebra import (PiecewisePoly, Poly, TensorDensity, bump, hat, lambda_nk,
                               merge_sign, multi_indices, multiindex_factorial,
                               ordered_tuples, permutation_sign, q_from_json, q_json,
                               wedge_sign)
from formacalc.errors import DomainError

coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@st.composite
def polys(draw, nvars=2, max_degree=3):
    pool = multi_indices(nvars, max_degree)
    items = draw(st.lists(st.tuples(st.sampled_from(pool), coeffs), max_size=5))
    terms = {}
    for e, c in items:
        terms[e] = terms.get(e, 0) + c
    return Poly(nvars, terms)


@given(polys(), polys(), polys())
@settings(max_examples=60, deadline=None)
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a - a == Poly.zero(2)


@given(polys(), polys())
@settings(max_examples=60, deadline=None)
def test_derivative_is_a_derivation(a, b):
    for i in range(2):
        assert (a * b).diff(i) == a.diff(i) * b + a * b.diff(i)


@given(polys(), st.lists(coeffs, min_size=2, max_size=2))
@settings(max_examples=40, deadline=None)
def test_shift_then_evaluate(p, point):
    assert p.shift(point).evaluate([0, 0]) == p.evaluate(point)


def test_compose_substitutes():
    x, y = Poly.var(2, 0), Poly.var(2, 1)
    p = x * x * y + Poly.const(2, 3)
    q = p.compose([x + y, x * y])
    assert q == (x + y) * (x + y) * (x * y) + Poly.const(2, 3)


def test_truncate_keeps_low_y_degree():
    x, y = Poly.var(2, 0), Poly.var(2, 1)
    p = x ** 3 + x * y + y ** 2 * x + y ** 3
    assert p.truncate(1, 1) == x ** 3 + x * y


def test_permutation_and_merge_signs():
    assert permutation_sign((1, 2, 3)) == 1
    assert permutation_sign((2, 1, 3)) == -1
    assert permutation_sign((3, 1, 2)) == 1
    assert permutation_sign((1, 1)) == 0
    assert merge_sign((1,), (0,)) == (-1, (0, 1))
    assert merge_sign((0, 2), (1,)) == (-1, (0, 1, 2))
    assert merge_sign((0,), (0,)) == (0, None)


def test_wedge_sign_against_top_form():
    assert wedge_sign((1,), (2,), 2) == 1
    assert wedge_sign((2,), (1,), 2) == -1
    assert wedge_sign((1,), (1,), 2) == 0
    assert wedge_sign((1, 3), (2,), 3) == -1


def test_ordered_tuples_and_lambda_counts():
    assert ordered_tuples(3, 2) == [(1, 2), (1, 3), (2, 3)]
    # |Λ^r_{n,k}| = C(n + k, r)
    assert len(lambda_nk(2, 1, 2)) == 3
    assert len(lambda_nk(2, 2, 2)) == 6
    assert multiindex_factorial((2, 3)) == 12


def test_rational_json_round_trip():
    for v in (Q(0), Q(3), Q(-7, 4)):
        assert q_from_json(q_json(v)) == v
    assert q_json(Q(-7, 4)) == "-7/4"


# oracle values: sympy integration of the same piecewise functions
def test_bump_integrals_match_oracle():
    b = bump(0, 1)
    assert b.integral() == Q(1, 2)
    assert b.moment(3) == Q(7, 80)
    g = bump(0, 1, normalize=True)
    assert g.integral() == 1
    assert g.cumulative()(Q(1, 2)) == Q(1, 2)
    assert g.cumulative()(Q(1, 4)) == Q(3, 32)


def test_hat_moments_match_oracle():
    h = hat(0, 2)
    assert h.integral() == 1
    assert h.moment(2) == Q(7, 6)


def test_bump_and_hat_are_continuous_and_compact():
    for f in (bump(-1, 2), hat(0, 3), bump(0, 1).mul_poly((1, 2, 3))):
        assert f.is_continuous()
        assert f.is_compact()
    indicator = PiecewisePoly.on_interval(0, 1, (1,))
    assert not indicator.is_continuous()


def test_bump_is_c1():
    b = bump(0, 1)
    assert b.derivative().is_continuous()


def test_cumulative_of_derivative_recovers_continuous_density():
    f = bump(-1, 1).mul_poly((2, -1))
    assert f.derivative().cumulative() == f


def test_piecewise_canonical_form():
    a = PiecewisePoly((0, 1, 2), ((1,), (1,)))
    b = PiecewisePoly.on_interval(0, 2, (1,))
    assert a == b
    assert (a - b).is_zero()


def test_degenerate_supports_are_rejected():
    with pytest.raises(DomainError):
        bump(1, 1)
    with pytest.raises(DomainError):
        hat(2, 1)
    with pytest.raises(DomainError):
        TensorDensity(1, [(1, [PiecewisePoly((0,), (), 1)])])


def test_tensor_density_equality_is_canonical():
    f = hat(0, 2)
    left = PiecewisePoly.on_interval(0, 1, (0, 1))
    right = PiecewisePoly.on_interval(1, 2, (2, -1))
    whole = TensorDensity(2, [(1, [f, bump(0, 1)])])
    pieces = TensorDensity(2, [(1, [left, bump(0, 1)]), (1, [right, bump(0, 1)])])
    assert whole == pieces
    assert whole.integral() == Q(1, 2)
    assert not (whole - pieces.scale(2)).is_zero()


def test_tensor_density_integrates_polynomials():
    tau = TensorDensity(2, [(3, [hat(0, 2), bump(0, 1)])])
    x = Poly.var(2, 0)
    # 3 * ∫x^2 hat * ∫bump = 3 * 7/6 * 1/2
    assert tau.integrate_poly(x * x) == Q(7, 4)
