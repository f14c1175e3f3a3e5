"""Seeded random generators for polynomials, forms, densities and morphisms.

All generators take a ``random.Random`` instance so that runs are reproducible.
"""

import random
from fractions import Fraction

from .algebra import Poly, TensorDensity, bump, hat, lambda_nk, multi_indices
from .formal import FormalFunction


def make_rng(seed=None):
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def random_rational(rng, bound=5, denominators=(1, 1, 1, 2, 3)):
    num = rng.randint(-bound, bound)
    return Fraction(num, rng.choice(denominators))


def random_poly(nvars, rng, max_degree=3, nterms=4, bound=5, y_start=None, y_min=0):
    """Random polynomial; with ``y_start`` set, only monomials whose y-part
    (variables from y_start on) has degree >= y_min are produced."""
    exps = multi_indices(nvars, max_degree)
    if y_start is not None and y_min:
        exps = [e for e in exps if sum(e[y_start:]) >= y_min]
    terms = {}
    for _ in range(nterms):
        if not exps:
            break
        e = rng.choice(exps)
        terms[e] = terms.get(e, 0) + random_rational(rng, bound)
    return Poly(nvars, terms)


def random_function(space, rng, max_degree=3, nterms=4):
    return FormalFunction(space, random_poly(space.nvars, rng, max_degree, nterms))


def random_form(space, degree, rng, max_degree=3, nterms=3):
    from .derham import Form
    bases = lambda_nk(space.n, space.k, degree)
    terms = {}
    if not bases:
        return Form.zero(space, degree)
    for _ in range(rng.randint(1, max(1, min(len(bases), 4)))):
        I, J = rng.choice(bases)
        b = tuple(i - 1 for i in I) + tuple(space.n + j - 1 for j in J)
        terms[b] = random_poly(space.nvars, rng, max_degree, nterms)
    return Form(space, degree, terms)


def random_profile(rng, lo_range=(-2, 1)):
    """A continuous compactly supported piecewise polynomial vanishing at the
    ends of its support: a bump or hat times a low-degree polynomial."""
    lo = Fraction(rng.randint(*lo_range), rng.choice((1, 2)))
    hi = lo + Fraction(rng.randint(1, 4), rng.choice((1, 2)))
    base = bump(lo, hi) if rng.random() < 0.6 else hat(lo, hi)
    coeffs = [random_rational(rng, 3) for _ in range(rng.randint(1, 3))]
    if not any(coeffs):
        coeffs[0] = Fraction(1)
    return base.mul_poly(coeffs)


def random_tensor_density(naxes, rng, nterms=2):
    terms = []
    for _ in range(rng.randint(1, nterms)):
        terms.append((random_rational(rng, 4, (1, 2)) or 1,
                      [random_profile(rng) for _ in range(naxes)]))
    return TensorDensity(naxes, terms)


def random_density(space, rng, max_y=2, nterms=2):
    from .dual import Density
    ys = multi_indices(space.k, max_y)
    terms = {}
    for _ in range(rng.randint(1, nterms)):
        L = rng.choice(ys)
        tau = random_tensor_density(space.n, rng)
        terms[L] = terms[L] + tau if L in terms else tau
    return Density(space, terms)


def random_dualform(space, degree, rng, max_y=2, nterms=2):
    from .dual import DualForm
    nv = space.nvars
    stars = lambda_nk(space.n, space.k, nv - degree)
    terms = {}
    for _ in range(rng.randint(1, max(1, min(len(stars), nterms)))):
        I, J = rng.choice(stars)
        T = tuple(i - 1 for i in I) + tuple(space.n + j - 1 for j in J)
        terms[T] = random_density(space, rng, max_y)
    return DualForm(space, degree, terms)


def random_morphism(source, target, rng, max_degree=2, nterms=3):
    """Random morphism with polynomial images; y'-images have zero reduction."""
    from .morphisms import Morphism
    nv = source.nvars
    xs = [FormalFunction(source, random_poly(nv, rng, max_degree, nterms))
          for _ in range(target.n)]
    ys = [FormalFunction(source, random_poly(nv, rng, max_degree, nterms,
                                             y_start=source.n, y_min=1))
          for _ in range(target.k)]
    return Morphism(source, target, xs, ys)


def random_diffop(space, order, rng, max_degree=2, nterms=3):
    """Random operator Σ f_{I,J} ∂_x^I ∂_y^J of normal-form order exactly ``order``."""
    from .formal import DiffOp
    keys = multi_indices(space.nvars, order)
    top = [e for e in keys if sum(e) == order]
    terms = {}
    chosen = [rng.choice(top)] + [rng.choice(keys) for _ in range(nterms - 1)]
    for e in chosen:
        f = random_function(space, rng, max_degree, 2)
        if f.is_zero():
            f = FormalFunction.const(space, rng.randint(1, 5))
        key = (e[:space.n], e[space.n:])
        terms[key] = terms[key] + f if key in terms else f
    op = DiffOp(space, terms)
    if op.order() != order:
        return random_diffop(space, order, rng, max_degree, nterms)
    return op


def random_point(n, rng):
    return [Fraction(rng.randint(-3, 3), rng.choice((1, 2))) for _ in range(n)]
