import random
from fractions import Fraction as Q

import pytest
import sympy

from formacalc.algebra import PiecewisePoly, Poly, TensorDensity, bump, hat
from formacalc.derham import Form, d, kunneth
from formacalc.dual import (Density, DualForm, boxtimes, dual_d, pair_density, pair_dualform,
                            split_dualform, zeta)
from formacalc.errors import DegreeMismatch, OrderExhausted
from formacalc.formal import FormalFunction, Space
from formacalc.generators import random_dualform, random_form

from support import dual_basis, form_basis

S11 = Space(1, 1, 3)


def tau1(profile, weight=1):
    return TensorDensity(1, [(weight, [profile])])


def test_pair_density_examples():
    tau = tau1(hat(0, 2), 5)
    assert tau.integral() == 5
    f = FormalFunction.y(S11, 1) ** 2 * 3
    assert pair_density(f, Density.of(S11, tau, (2,))) == 30
    one = FormalFunction.const(S11, 1)
    assert pair_density(one, Density.of(S11, tau)) == 5
    assert pair_density(FormalFunction.y(S11, 1), Density.of(S11, tau)) == 0


def test_pair_density_needs_known_order():
    f = FormalFunction(S11, Poly.const(2, 1), 1)
    with pytest.raises(OrderExhausted):
        pair_density(f, Density.of(S11, tau1(bump(0, 1)), (2,)))


def test_pair_dualform_signs():
    s1 = Space(1, 0, 0)
    f = FormalFunction.x(s1, 1) + 1
    tau = tau1(bump(0, 1))
    eta = DualForm(s1, 1, {(): Density.of(s1, tau)})
    assert pair_dualform(Form.dx(s1, 1) * f, eta) == tau.integrate_poly(f.poly)

    s2 = Space(2, 0, 0)
    tau2 = TensorDensity(2, [(1, [bump(0, 1), hat(0, 2)])])
    g = FormalFunction.x(s2, 2)
    eta2 = DualForm(s2, 1, {(0,): Density.of(s2, tau2)})
    assert pair_dualform(Form.dx(s2, 2) * g, eta2) == -tau2.integrate_poly(g.poly)
    # repeated index: ε = 0
    eta3 = DualForm(s2, 1, {(1,): Density.of(s2, tau2)})
    assert pair_dualform(Form.dx(s2, 2) * g, eta3) == 0


def test_pair_degree_mismatch():
    eta = DualForm.top(Density.of(S11, tau1(bump(0, 1))))
    with pytest.raises(DegreeMismatch):
        pair_dualform(Form.dx(S11, 1), eta)


def test_dual_d_in_one_variable():
    s = Space(1, 0, 0)
    prof = bump(-1, 1).mul_poly((1, 2))
    eta = DualForm(s, 1, {(): Density.of(s, tau1(prof))})
    assert dual_d(eta) == DualForm.top(Density.of(s, tau1(prof.derivative())))
    rng = random.Random(0)
    for _ in range(5):
        f = random_form(s, 0, rng)
        # r + 1 = 1 here, so the adjointness sign is (-1)^{0+1}
        assert pair_dualform(f, dual_d(eta)) == -pair_dualform(d(f), eta)


def test_dual_d_in_one_formal_variable():
    s = Space(0, 1, 3)
    tau = TensorDensity.scalar(1)
    eta = DualForm(s, 1, {(): Density.of(s, tau, (1,))})
    out = dual_d(eta)
    assert out == DualForm.top(Density.of(s, tau, (2,))).scale(-1)


@pytest.mark.parametrize("space", [Space(1, 0, 0), Space(0, 1, 3), Space(1, 1, 3),
                                   Space(2, 1, 3), Space(1, 2, 3)])
def test_adjointness_and_dd(space):
    rng = random.Random(space.n + 7 * space.k)
    for _ in range(10):
        r = rng.randint(0, space.nvars - 1)
        w = random_form(space, r, rng)
        eta = random_dualform(space, r + 1, rng)
        assert pair_dualform(w, dual_d(eta)) == (-1) ** (r + 1) * pair_dualform(d(w), eta)
        if r + 1 >= 2:
            assert dual_d(dual_d(eta)).is_zero()


def test_zeta_examples():
    s = Space(1, 1, 3)
    g = bump(0, 1, normalize=True)
    assert zeta(DualForm.top(Density.of(s, tau1(g)))) == 1
    assert zeta(DualForm.top(Density.of(s, tau1(g), (1,)))) == 0
    assert zeta(DualForm.zero(s, 0)) == 0
    with pytest.raises(DegreeMismatch):
        zeta(DualForm.zero(s, 1))


def test_zeta_is_pairing_with_one():
    rng = random.Random(3)
    for space in (Space(1, 1, 3), Space(2, 0, 0)):
        eta = random_dualform(space, 0, rng)
        one = Form.function(FormalFunction.const(space, 1))
        assert zeta(eta) == pair_dualform(one, eta)


def test_boxtimes_degree_zero_is_plain_tensor():
    s = Space(1, 0, 0)
    a = DualForm.top(Density.of(s, tau1(bump(0, 1))))
    b = DualForm.top(Density.of(s, tau1(hat(0, 2))))
    prod = boxtimes(a, b)
    tensor = TensorDensity(2, [(1, [bump(0, 1), hat(0, 2)])])
    assert prod == DualForm.top(Density.of(Space(2, 0, 0), tensor))


def test_boxtimes_picks_up_degree_sign():
    s = Space(1, 0, 0)
    eta1 = DualForm(s, 1, {(): Density.of(s, tau1(bump(0, 1)))})
    eta2 = DualForm(s, 1, {(): Density.of(s, tau1(hat(0, 2)))})
    w = Form.dx(s, 1)
    lhs = pair_dualform(kunneth(w, w), boxtimes(eta1, eta2))
    assert lhs == -pair_dualform(w, eta1) * pair_dualform(w, eta2)
    assert lhs == -Q(1, 2)


@pytest.mark.parametrize("f1,f2", [((1, 0), (1, 0)), ((1, 1), (0, 1)), ((0, 2), (1, 0)),
                                   ((2, 0), (1, 1)), ((1, 1), (1, 1))])
def test_boxtimes_duality_on_bases(f1, f2):
    s1, s2 = Space(*f1, 2), Space(*f2, 2)
    for r1 in range(s1.nvars + 1):
        for r2 in range(s2.nvars + 1):
            for w1 in form_basis(s1, r1, x_degree=0):
                for e1 in dual_basis(s1, r1, profiles=1):
                    p1 = pair_dualform(w1, e1)
                    for w2 in form_basis(s2, r2, x_degree=0):
                        for e2 in dual_basis(s2, r2, profiles=1):
                            lhs = pair_dualform(kunneth(w1, w2), boxtimes(e1, e2))
                            assert lhs == (-1) ** (r1 * r2) * p1 * pair_dualform(w2, e2)


def test_split_dualform_inverts_boxtimes():
    rng = random.Random(17)
    s1, s2 = Space(1, 1, 3), Space(1, 0, 0)
    prod = s1.product(s2)
    for r in range(prod.nvars + 1):
        eta = random_dualform(prod, r, rng)
        total = DualForm.zero(prod, r)
        for c, a, b in split_dualform(eta, s1, s2):
            total = total + boxtimes(a, b).scale(c)
        assert total == eta


@pytest.mark.parametrize("space,degree", [(Space(1, 1, 2), 1), (Space(1, 1, 2), 0),
                                          (Space(2, 0, 0), 1)])
def test_truncated_pairing_is_nondegenerate(space, degree):
    forms = form_basis(space, degree)
    duals = dual_basis(space, degree)
    assert len(forms) == len(duals)
    rows = [[pair_dualform(w, e) for e in duals] for w in forms]
    assert sympy.Matrix(rows).rank() == len(forms)


def test_dualform_json_round_trip():
    rng = random.Random(5)
    eta = random_dualform(S11, 1, rng)
    assert DualForm.from_json(eta.to_json()) == eta


def test_discontinuous_density_is_representable():
    indicator = PiecewisePoly.on_interval(0, 1, (1,))
    eta = DualForm.top(Density.of(Space(1, 0, 0), tau1(indicator)))
    assert zeta(eta) == 1
