"""Basis enumerators shared by the unit and acceptance tests."""

import itertools
from fractions import Fraction as Q

from formacalc.algebra import Poly, TensorDensity, bump, hat, lambda_nk
from formacalc.derham import Form
from formacalc.dual import Density, DualForm

# linearly independent continuous profiles, one per "density slot"
PROFILES = (bump(0, 1), hat(-1, 1).mul_poly((Q(1, 2), 1)), bump(Q(-1, 2), 2).mul_poly((0, 1)))


def joint(space, I, J):
    return tuple(i - 1 for i in I) + tuple(space.n + j - 1 for j in J)


def exponents(nvars, bound):
    return itertools.product(range(bound + 1), repeat=nvars)


def form_basis(space, degree, x_degree=1, y_degree=1):
    """Monomial forms z^e dz_B with every x-exponent <= x_degree and every
    y-exponent <= y_degree."""
    out = []
    for I, J in lambda_nk(space.n, space.k, degree):
        B = joint(space, I, J)
        for ex in exponents(space.n, x_degree):
            for ey in exponents(space.k, y_degree):
                mono = Poly(space.nvars, {ex + ey: 1})
                out.append(Form(space, degree, {B: mono}))
    return out


def dual_basis(space, degree, profiles=2, y_degree=1):
    """Dual forms (τ_1 ⊗ ... ⊗ τ_n)(y*)^L e*_T over product profiles; square
    against form_basis when profiles = x_degree + 1."""
    out = []
    nv = space.nvars
    for I, J in lambda_nk(space.n, space.k, nv - degree):
        T = joint(space, I, J)
        for choice in itertools.product(range(profiles), repeat=space.n):
            tau = TensorDensity(space.n, [(1, [PROFILES[c] for c in choice])])
            for L in exponents(space.k, y_degree):
                out.append(DualForm(space, degree, {T: Density(space, {L: tau})}))
    return out
