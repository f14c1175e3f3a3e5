import itertools
import random
from fractions import Fraction as Q

import pytest
from hypothesis import given, settings, strategies as st

from formacalc.errors import NotInvertible, OrderExhausted, SpaceMismatch
from formacalc.formal import (DiffOp, FormalFunction, PointDistribution, Space,
                              diffop_apply, diffop_commutator_with_fn,
                              diffop_order_certificate, expected_jet_pairing,
                              ff_external_product, ff_invert, ff_mul, ff_value, jet_dimension,
                              jet_of, jet_pairing_matrix, pdist_pair)
from formacalc.generators import random_diffop, random_function, random_point

S11 = Space(1, 1, 3)
x = FormalFunction.x(S11, 1)
y = FormalFunction.y(S11, 1)
one = FormalFunction.const(S11, 1)


def test_unit_and_difference_of_squares():
    f = x * x + y
    assert ff_mul(f, one) == f
    assert (x + y) * (x - y) == x * x - y * y


def test_truncated_product():
    s = Space(0, 1, 2)
    yy = FormalFunction.y(s, 1)
    u = FormalFunction.const(s, 1)
    prod = (u + yy) * (u - yy + yy * yy)
    assert prod == u
    assert prod.known_order == 2


def test_values():
    f = one + x + y.scale(3) + x * y * y
    assert ff_value(f, [2]) == 3
    assert ff_value(y, [Q(7, 3)]) == 0
    assert ff_value(FormalFunction.zero(S11), [1]) == 0


def test_invert_geometric_series():
    s = Space(0, 1, 2)
    yy = FormalFunction.y(s, 1)
    u = FormalFunction.const(s, 1)
    g = ff_invert(u + yy, [], 3)
    assert g == u - yy + yy * yy
    assert ff_invert(FormalFunction.const(S11, 2), [0]) == FormalFunction.const(S11, Q(1, 2))
    with pytest.raises(NotInvertible):
        ff_invert(x, [0])


def test_invert_is_exact_in_the_jet():
    rng = random.Random(5)
    for _ in range(20):
        f = random_function(S11, rng) + one.scale(7)
        a = random_point(1, rng)
        if f.value(a) == 0:
            continue
        g = ff_invert(f, a, 3)
        assert jet_of(f * g - one, a, 3).is_zero()


def test_space_mismatch():
    with pytest.raises(SpaceMismatch):
        x + FormalFunction.x(Space(2, 1, 3), 1)


def test_y_derivative_lowers_known_order():
    f = y * y * x
    g = f.diff_y(1)
    assert g.known_order == 2
    assert g.agrees_with((y * x).scale(2))
    with pytest.raises(OrderExhausted):
        f.diff_y(1, times=4)


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_ring_axioms_and_derivations(seed):
    rng = random.Random(seed)
    space = Space(2, 1, 3)
    f, g, h = (random_function(space, rng) for _ in range(3))
    assert (f * g) * h == f * (g * h)
    assert f * (g + h) == f * g + f * h
    assert f * g == g * f
    for i in (1, 2):
        assert (f * g).diff_x(i) == f.diff_x(i) * g + f * g.diff_x(i)
    lhs = (f * g).diff_y(1)
    assert lhs == f.diff_y(1) * g + f * g.diff_y(1)


def test_diffop_examples():
    s = Space(1, 1, 3)
    dy = DiffOp.partial(s, (0,), (1,))
    assert diffop_apply(dy, y * y).agrees_with(y.scale(2))
    assert diffop_apply(DiffOp.identity(s), x * y) == x * y
    euler = DiffOp(s, {((1,), (0,)): x})
    assert diffop_apply(euler, x ** 3) == (x ** 3).scale(3)


def test_commutator_examples():
    s = Space(1, 1, 3)
    dy = DiffOp.partial(s, (0,), (1,))
    assert diffop_commutator_with_fn(dy, y).agrees_with(DiffOp.identity(s))
    mult = DiffOp.multiplication(x * x + y)
    assert diffop_commutator_with_fn(mult, x).is_zero()
    dxx = DiffOp.partial(s, (2,), (0,))
    assert diffop_commutator_with_fn(dxx, x).agrees_with(DiffOp.partial(s, (1,), (0,), 2))


def test_order_certificate_examples():
    s = Space(1, 1, 3)
    dxdy = DiffOp.partial(s, (1,), (1,))
    assert diffop_order_certificate(dxdy, 2)
    assert not diffop_order_certificate(dxdy, 1)
    assert diffop_order_certificate(DiffOp(s), 0)


def test_commutator_lowers_order():
    rng = random.Random(11)
    space = Space(1, 1, 4)
    for order in (1, 2, 3):
        for _ in range(5):
            op = random_diffop(space, order, rng)
            f = random_function(space, rng)
            assert diffop_commutator_with_fn(op, f).order() <= max(op.order() - 1, 0)


def test_jet_examples():
    s = Space(1, 0, 0)
    xx = FormalFunction.x(s, 1)
    jet = jet_of(xx * xx, [1], 3)
    # 1 + 2(x-1) + (x-1)^2
    assert jet.coeffs == {(0,): 1, (1,): 2, (2,): 1}
    assert jet_of(y, [Q(5, 2)], 2).coefficient((0,), (1,)) == 1
    assert jet_dimension(1, 1, 2) == 3
    assert jet_of(x, [0], 2).dimension() == 3


def test_jet_needs_known_coefficients():
    f = y.truncated(1)
    with pytest.raises(OrderExhausted):
        jet_of(f, [0], 3)


def test_point_distribution_examples():
    s = Space(1, 1, 3)
    eta = PointDistribution.derivative(1, 1, [0], (1,), (1,))
    assert pdist_pair(eta, x * y) == 1
    assert pdist_pair(PointDistribution.dirac(1, 1, [Q(3)]), FormalFunction.const(s, 1)) == 1


@pytest.mark.parametrize("n,k", [(1, 0), (0, 1), (1, 1), (2, 1)])
def test_jet_pairing_is_diagonal(n, k):
    basis, rows = jet_pairing_matrix(n, k, [Q(1, 2)] * n, 3)
    assert rows == expected_jet_pairing(basis)
    assert len(basis) == jet_dimension(n, k, 3)


def test_external_product():
    s1, s2 = Space(1, 1, 3), Space(1, 1, 2)
    g = FormalFunction.x(s2, 1) * FormalFunction.y(s2, 1)
    prod = ff_external_product(FormalFunction.const(s1, 1), g)
    target = Space(2, 2, 2)
    assert prod == FormalFunction.x(target, 2) * FormalFunction.y(target, 2)
    xx = ff_external_product(FormalFunction.x(s1, 1), FormalFunction.x(s2, 1))
    assert xx == FormalFunction.x(target, 1) * FormalFunction.x(target, 2)
    e = ff_external_product(x + y, FormalFunction.y(s2, 1))
    assert e == (FormalFunction.x(target, 1) + FormalFunction.y(target, 1)) * FormalFunction.y(
        target, 2)


def test_formal_function_json_round_trip():
    f = x * y.scale(Q(-3, 4)) + one
    assert FormalFunction.from_json(f.to_json()) == f


def test_jet_basis_enumeration():
    for n, k, r in [(1, 1, 1), (2, 1, 3), (1, 2, 4), (2, 2, 5)]:
        count = sum(1 for e in itertools.product(range(r), repeat=n + k) if sum(e) < r)
        assert jet_dimension(n, k, r) == count
