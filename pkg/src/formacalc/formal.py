"""Formal functions on (R^n)^(k), differential operators, jets and point
distributions.

A formal function is stored as one polynomial in the joint variables
``x1..xn, y1..yk``; its y-part is a truncated power series, known only up to
y-degree ``known_order``.
"""

import random
from dataclasses import dataclass
from fractions import Fraction

from .algebra import (Poly, as_q, multi_indices, multiindex_binomial, multiindex_factorial,
                      q_json, q_str)
from .errors import (InternalInconsistency, NotInvertible, OrderExhausted, SpaceMismatch)


@dataclass(frozen=True)
class Space:
    """Coordinate model (R^n)^(k); series in y are stored modulo (y)^(order+1)."""

    n: int
    k: int
    order: int = 0

    def __post_init__(self):
        if min(self.n, self.k, self.order) < 0:
            raise ValueError(f"negative space parameter in {self}")

    @property
    def nvars(self):
        return self.n + self.k

    def names(self):
        return [f"x{i + 1}" for i in range(self.n)] + [f"y{j + 1}" for j in range(self.k)]

    def compatible(self, other):
        return self.n == other.n and self.k == other.k

    def product(self, other):
        orders = [s.order for s in (self, other) if s.k]
        order = min(orders) if orders else min(self.order, other.order)
        return Space(self.n + other.n, self.k + other.k, order)

    def with_order(self, order):
        return Space(self.n, self.k, order)

    def __str__(self):
        return f"({self.n},{self.k},{self.order})"

    def to_json(self):
        return {"n": self.n, "k": self.k, "order": self.order}

    @classmethod
    def from_json(cls, data):
        return cls(data["n"], data["k"], data["order"])


def require_same_space(a, b):
    if a != b:
        raise SpaceMismatch(f"space mismatch: {a} vs {b}")


def product_index_maps(s1, s2):
    """Joint-variable relabelings of the two factors inside s1 x s2."""
    n3 = s1.n + s2.n
    m1 = [i for i in range(s1.n)] + [n3 + j for j in range(s1.k)]
    m2 = [s1.n + i for i in range(s2.n)] + [n3 + s1.k + j for j in range(s2.k)]
    return m1, m2


class FormalFunction:
    """Truncated formal function sum_J f_J(x) y^J."""

    __slots__ = ("space", "poly", "known_order")

    def __init__(self, space, poly, known_order=None):
        if poly.nvars != space.nvars:
            raise ValueError(f"polynomial has {poly.nvars} variables, space needs {space.nvars}")
        if space.k == 0 or known_order is None:
            known_order = space.order
        if known_order < 0:
            raise OrderExhausted("no y-coefficients are known")
        if known_order > space.order:
            raise ValueError("known_order exceeds the space truncation")
        self.space = space
        self.known_order = known_order
        self.poly = poly.truncate(space.n, known_order) if space.k else poly

    # constructors
    @classmethod
    def const(cls, space, c):
        return cls(space, Poly.const(space.nvars, c))

    @classmethod
    def zero(cls, space):
        return cls(space, Poly.zero(space.nvars))

    @classmethod
    def x(cls, space, i):
        """The coordinate x_i (1-based)."""
        return cls(space, Poly.var(space.nvars, i - 1))

    @classmethod
    def y(cls, space, j):
        """The formal variable y_j (1-based)."""
        return cls(space, Poly.var(space.nvars, space.n + j - 1))

    @classmethod
    def from_coeffs(cls, space, coeffs, known_order=None):
        """Build from a map J -> Poly over the n smooth variables."""
        terms = {}
        for j, p in coeffs.items():
            for e, c in p.terms.items():
                terms[tuple(e) + tuple(j)] = c
        return cls(space, Poly(space.nvars, terms), known_order)

    @property
    def coeffs(self):
        n = self.space.n
        out = {}
        for e, c in self.poly.terms.items():
            j = e[n:]
            out.setdefault(j, {})[e[:n]] = c
        return {j: Poly(n, t) for j, t in out.items()}

    def coefficient(self, j):
        return self.coeffs.get(tuple(j), Poly.zero(self.space.n))

    def reduction(self):
        return self.coefficient((0,) * self.space.k)

    def is_zero(self):
        return self.poly.is_zero()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = FormalFunction.const(self.space, other)
        if not isinstance(other, FormalFunction):
            return NotImplemented
        return (self.space == other.space and self.known_order == other.known_order
                and self.poly == other.poly)

    __hash__ = None

    def agrees_with(self, other):
        """Equal as far as both operands are known."""
        require_same_space(self.space, other.space)
        return (self - other).is_zero()

    def truncated(self, known_order):
        return FormalFunction(self.space, self.poly, min(known_order, self.known_order))

    # ring operations
    def _lift(self, other):
        if isinstance(other, FormalFunction):
            require_same_space(self.space, other.space)
            return other
        if isinstance(other, (int, Fraction)):
            return FormalFunction(self.space, Poly.const(self.space.nvars, other),
                                  self.known_order)
        return None

    def __add__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return FormalFunction(self.space, self.poly + other.poly,
                              min(self.known_order, other.known_order))

    __radd__ = __add__

    def __neg__(self):
        return FormalFunction(self.space, -self.poly, self.known_order)

    def __sub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        return FormalFunction(self.space, self.poly.scale(c), self.known_order)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._lift(other)
        if other is None:
            return NotImplemented
        ko = min(self.known_order, other.known_order)
        if self.space.k:
            poly = self.poly.mul_truncated(other.poly, self.space.n, ko)
        else:
            poly = self.poly * other.poly
        return FormalFunction(self.space, poly, ko)

    __rmul__ = __mul__

    def __pow__(self, power):
        out = FormalFunction(self.space, Poly.one(self.space.nvars), self.known_order)
        for _ in range(power):
            out = out * self
        return out

    # calculus
    def diff_x(self, i, times=1):
        """Partial derivative in x_i (1-based)."""
        return FormalFunction(self.space, self.poly.diff(i - 1, times), self.known_order)

    def diff_y(self, j, times=1):
        """Partial derivative in y_j (1-based); the known order drops by ``times``."""
        ko = self.known_order - times
        if times and ko < 0:
            raise OrderExhausted(
                f"d/dy{j}^{times} of a series known to y-order {self.known_order}")
        return FormalFunction(self.space, self.poly.diff(self.space.n + j - 1, times), ko)

    def diff(self, xi, yj):
        """∂_x^I ∂_y^J for multi-indices I (length n) and J (length k)."""
        ko = self.known_order - sum(yj)
        if sum(yj) and ko < 0:
            raise OrderExhausted(
                f"y-derivative of order {sum(yj)} exceeds known order {self.known_order}")
        return FormalFunction(self.space, self.poly.diff_multi(tuple(xi) + tuple(yj)),
                              ko if self.space.k else None)

    def value(self, point):
        point = [as_q(p) for p in point]
        if len(point) != self.space.n:
            raise SpaceMismatch(f"point has {len(point)} coordinates, space has n={self.space.n}")
        return self.poly.evaluate(point + [0] * self.space.k)

    def format(self):
        return self.poly.format(self.space.names())

    def __repr__(self):
        return f"FormalFunction({self.format()} on {self.space}, known_order={self.known_order})"

    def to_json(self):
        return {"type": "formal_function", "space": self.space.to_json(),
                "known_order": self.known_order, "poly": self.poly.to_json()}

    @classmethod
    def from_json(cls, data):
        return cls(Space.from_json(data["space"]), Poly.from_json(data["poly"]),
                   data["known_order"])


def ff_mul(f, g):
    return f * g


def ff_value(f, point):
    return f.value(point)


def ff_external_product(f, g):
    """f(x, y) * g(x', y') on the product space, variables of f first in each block."""
    space = f.space.product(g.space)
    m1, m2 = product_index_maps(f.space, g.space)
    p = f.poly.embed(space.nvars, m1) * g.poly.embed(space.nvars, m2)
    kos = [h.known_order for h in (f, g) if h.space.k]
    ko = min(kos + [space.order]) if kos else None
    return FormalFunction(space, p.truncate(space.n, ko) if space.k else p, ko)


# ----------------------------------------------------------------------- jets

def jet_dimension(n, k, r):
    return len(multi_indices(n + k, r - 1))


class Jet:
    """Element of O_a / m_a^r in the basis (x - a)^I y^J, |I| + |J| < r.

    ``poly`` is a joint polynomial in the shifted variables u = x - a and y.
    """

    __slots__ = ("n", "k", "basepoint", "order", "poly")

    def __init__(self, n, k, basepoint, order, poly):
        self.n, self.k, self.order = n, k, order
        self.basepoint = tuple(as_q(a) for a in basepoint)
        if len(self.basepoint) != n:
            raise SpaceMismatch("basepoint dimension differs from n")
        self.poly = poly.truncate_total(order - 1)

    @property
    def coeffs(self):
        return dict(self.poly.terms)

    def coefficient(self, xi, yj=()):
        return self.poly.coefficient(tuple(xi) + tuple(yj))

    def basis(self):
        return multi_indices(self.n + self.k, self.order - 1)

    def dimension(self):
        return len(self.basis())

    def is_zero(self):
        return self.poly.is_zero()

    def _check(self, other):
        if (self.n, self.k, self.basepoint, self.order) != (other.n, other.k, other.basepoint,
                                                            other.order):
            raise SpaceMismatch("jets at different points or orders")

    def __add__(self, other):
        self._check(other)
        return Jet(self.n, self.k, self.basepoint, self.order, self.poly + other.poly)

    def __sub__(self, other):
        self._check(other)
        return Jet(self.n, self.k, self.basepoint, self.order, self.poly - other.poly)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Jet(self.n, self.k, self.basepoint, self.order, self.poly.scale(other))
        self._check(other)
        prod = self.poly.mul_truncated(other.poly, 0, self.order - 1)
        return Jet(self.n, self.k, self.basepoint, self.order, prod)

    def __eq__(self, other):
        if not isinstance(other, Jet):
            return NotImplemented
        return (self.n, self.k, self.basepoint, self.order) == (
            other.n, other.k, other.basepoint, other.order) and self.poly == other.poly

    __hash__ = None

    def constant(self):
        return self.poly.constant_term()

    def vector(self):
        """Coordinates in the canonical basis order."""
        return [self.poly.coefficient(e) for e in self.basis()]

    def to_formal(self, space):
        """Undo the basepoint shift, giving a polynomial representative."""
        back = [-a for a in self.basepoint] + [0] * self.k
        return FormalFunction(space, self.poly.shift(back),
                              min(space.order, max(self.order - 1, 0)))

    def format(self):
        names = [f"(x{i + 1}-{a})" if a else f"x{i + 1}" for i, a in enumerate(self.basepoint)]
        return self.poly.format(names + [f"y{j + 1}" for j in range(self.k)])

    def __repr__(self):
        return f"Jet({self.format()} at {list(self.basepoint)}, order {self.order})"

    def to_json(self):
        return {"type": "jet", "n": self.n, "k": self.k,
                "basepoint": [q_json(a) for a in self.basepoint], "order": self.order,
                "poly": self.poly.to_json()}


def jet_of(f, point, r):
    """Taylor coefficients of f at ``point`` in the jet basis of order r."""
    space = f.space
    if space.k and r - 1 > f.known_order:
        raise OrderExhausted(f"jet of order {r} needs y-coefficients up to {r - 1}, "
                             f"known only to {f.known_order}")
    point = [as_q(a) for a in point]
    if len(point) != space.n:
        raise SpaceMismatch("basepoint dimension differs from n")
    shifted = f.poly.shift(point + [0] * space.k)
    return Jet(space.n, space.k, point, r, shifted)


def ff_invert(f, around, r=None):
    """Inverse of f in the jet algebra at ``around`` (geometric series), returned as
    a polynomial formal function g with jet_of(f*g - 1, around, r) = 0.

    Nonzero constants are inverted globally.
    """
    space = f.space
    if f.poly.degree() <= 0:
        c = f.poly.constant_term()
        if not c:
            raise NotInvertible("zero is not invertible")
        return FormalFunction(space, Poly.const(space.nvars, 1 / c), f.known_order)
    if r is None:
        r = (f.known_order + 1) if space.k else space.order + 1
    jet = jet_of(f, around, r)
    c = jet.constant()
    if not c:
        raise NotInvertible(f"value at ({', '.join(q_str(a) for a in jet.basepoint)}) is zero; "
                            "not invertible in the stalk")
    unit = Jet(jet.n, jet.k, jet.basepoint, r, Poly.one(space.nvars))
    u = jet * (1 / c) - unit
    term = unit
    acc = unit
    for _ in range(1, r):
        term = term * u * -1
        acc = acc + term
    inv = acc * (1 / c)
    g = inv.to_formal(space)
    return g.truncated(f.known_order) if space.k else g


# ------------------------------------------------------- differential operators

class DiffOp:
    """Finite sum of f_{I,J} ∂_x^I ∂_y^J with formal-function coefficients."""

    __slots__ = ("space", "terms")

    def __init__(self, space, terms=None):
        self.space = space
        clean = {}
        for (i, j), f in (terms or {}).items():
            i, j = tuple(i), tuple(j)
            if len(i) != space.n or len(j) != space.k:
                raise ValueError(f"multi-index ({i},{j}) does not match {space}")
            if isinstance(f, (int, Fraction)):
                f = FormalFunction.const(space, f)
            require_same_space(space, f.space)
            if (i, j) in clean:
                f = clean[(i, j)] + f
            clean[(i, j)] = f
        self.terms = {key: f for key, f in clean.items() if not f.is_zero()}

    @classmethod
    def identity(cls, space):
        return cls(space, {((0,) * space.n, (0,) * space.k): 1})

    @classmethod
    def multiplication(cls, f):
        return cls(f.space, {((0,) * f.space.n, (0,) * f.space.k): f})

    @classmethod
    def partial(cls, space, xi, yj, coeff=1):
        return cls(space, {(tuple(xi), tuple(yj)): coeff})

    def order(self):
        """Normal-form order; -1 for the zero operator."""
        return max((sum(i) + sum(j) for i, j in self.terms), default=-1)

    def is_zero(self):
        return not self.terms

    def agrees_with(self, other):
        """Equal coefficientwise as far as the coefficients are known."""
        return all(f.is_zero() for f in (self - other).terms.values())

    def __add__(self, other):
        require_same_space(self.space, other.space)
        terms = dict(self.terms)
        for key, f in other.terms.items():
            terms[key] = terms[key] + f if key in terms else f
        return DiffOp(self.space, terms)

    def __neg__(self):
        return DiffOp(self.space, {key: -f for key, f in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def left_multiply(self, f):
        return DiffOp(self.space, {key: f * c for key, c in self.terms.items()})

    def apply(self, f):
        require_same_space(self.space, f.space)
        out = FormalFunction.zero(self.space).truncated(f.known_order)
        for (i, j), coeff in self.terms.items():
            out = out + coeff * f.diff(i, j)
        return out

    def compose(self, other):
        """Normal form of self ∘ other, by Leibniz' rule."""
        require_same_space(self.space, other.space)
        n = self.space.n
        out = {}
        for (ai, aj), a in self.terms.items():
            outer = ai + aj
            for (bi, bj), b in other.terms.items():
                inner = bi + bj
                for c in multi_indices(len(outer), sum(outer)):
                    if any(x > y for x, y in zip(c, outer)):
                        continue
                    coeff = a * b.diff(c[:n], c[n:]).scale(multiindex_binomial(outer, c))
                    rest = tuple(o - x + y for o, x, y in zip(outer, c, inner))
                    key = (rest[:n], rest[n:])
                    out[key] = out[key] + coeff if key in out else coeff
        return DiffOp(self.space, out)

    def commutator_with_fn(self, g):
        """[D, g] = D ∘ g - g ∘ D in normal form: only terms differentiating g survive."""
        require_same_space(self.space, g.space)
        n = self.space.n
        out = {}
        for (ai, aj), a in self.terms.items():
            outer = ai + aj
            for c in multi_indices(len(outer), sum(outer)):
                if not sum(c) or any(x > y for x, y in zip(c, outer)):
                    continue
                coeff = a * g.diff(c[:n], c[n:]).scale(multiindex_binomial(outer, c))
                rest = tuple(o - x for o, x in zip(outer, c))
                key = (rest[:n], rest[n:])
                out[key] = out[key] + coeff if key in out else coeff
        return DiffOp(self.space, out)

    def format(self):
        if not self.terms:
            return "0"
        parts = []
        names_x = [f"dx{i + 1}" for i in range(self.space.n)]
        names_y = [f"dy{j + 1}" for j in range(self.space.k)]
        for (i, j), f in sorted(self.terms.items(), reverse=True):
            ops = [(nm if p == 1 else f"{nm}^{p}") for nm, p in zip(names_x + names_y, i + j)
                   if p]
            parts.append(f"({f.format()})" + ("∘" + "∘".join(ops) if ops else ""))
        return " + ".join(parts)

    def __repr__(self):
        return f"DiffOp({self.format()})"

    def to_json(self):
        return {"type": "diffop", "space": self.space.to_json(),
                "terms": [{"x": list(i), "y": list(j), "coeff": f.to_json()}
                          for (i, j), f in sorted(self.terms.items())]}


def diffop_apply(op, f):
    return op.apply(f)


def diffop_commutator_with_fn(op, g):
    return op.commutator_with_fn(g)


def _random_test_function(space, rng, degree):
    """Generic polynomial: every degree-1 monomial with a large random coefficient plus
    a few higher monomials of degree <= ``degree``."""
    nv = space.nvars
    terms = {}
    for i in range(nv):
        e = [0] * nv
        e[i] = 1
        terms[tuple(e)] = rng.choice([-1, 1]) * rng.randint(1, 997)
    pool = multi_indices(nv, degree)
    for e in rng.sample(pool, min(3, len(pool))):
        terms[e] = terms.get(e, 0) + rng.randint(-9, 9)
    return FormalFunction(space, Poly(nv, terms))


def diffop_order_certificate(op, r, trials=8, rng=None):
    """Decide order(op) <= r by iterated commutators with random test functions and
    cross-check against the normal form."""
    rng = rng or random.Random(0)
    by_normal_form = op.order() <= r
    # test functions are exact polynomials: lift to a space where their y-derivatives stay known
    top = max(op.order(), r) + 2
    lifted = op.space.with_order(op.space.order + top)
    lifted_op = DiffOp(lifted, {key: FormalFunction(lifted, f.poly, f.known_order)
                                for key, f in op.terms.items()})
    by_commutators = True
    for _ in range(trials):
        current = lifted_op
        for _ in range(r + 1):
            current = current.commutator_with_fn(_random_test_function(lifted, rng, top))
            if current.is_zero():
                break
        if not current.is_zero():
            by_commutators = False
            break
    if by_commutators != by_normal_form:
        raise InternalInconsistency(
            f"commutator test says {by_commutators}, normal form order {op.order()} vs r={r}")
    return by_normal_form


# ------------------------------------------------------- point distributions

class PointDistribution:
    """sum c_{I,J} Ev_a ∘ ∂_x^I ∂_y^J."""

    __slots__ = ("n", "k", "basepoint", "terms")

    def __init__(self, n, k, basepoint, terms=None):
        self.n, self.k = n, k
        self.basepoint = tuple(as_q(a) for a in basepoint)
        if len(self.basepoint) != n:
            raise SpaceMismatch("basepoint dimension differs from n")
        clean = {}
        for (i, j), c in (terms or {}).items():
            c = as_q(c)
            key = (tuple(i), tuple(j))
            if len(key[0]) != n or len(key[1]) != k:
                raise ValueError("multi-index does not match (n, k)")
            clean[key] = clean.get(key, 0) + c
        self.terms = {key: c for key, c in clean.items() if c}

    @classmethod
    def dirac(cls, n, k, basepoint):
        return cls(n, k, basepoint, {((0,) * n, (0,) * k): 1})

    @classmethod
    def derivative(cls, n, k, basepoint, xi, yj, c=1):
        return cls(n, k, basepoint, {(tuple(xi), tuple(yj)): c})

    def to_json(self):
        return {"type": "point_distribution", "n": self.n, "k": self.k,
                "basepoint": [q_json(a) for a in self.basepoint],
                "terms": [{"x": list(i), "y": list(j), "c": q_json(c)}
                          for (i, j), c in sorted(self.terms.items())]}


def pdist_pair(eta, f):
    """⟨η, f⟩ = Σ c_{I,J} (∂_x^I ∂_y^J f)(a)."""
    if (eta.n, eta.k) != (f.space.n, f.space.k):
        raise SpaceMismatch("distribution and function live on different spaces")
    total = Fraction(0)
    for (i, j), c in eta.terms.items():
        if f.space.k and sum(j) > f.known_order:
            raise OrderExhausted(f"∂_y^{j} needs y-order {sum(j)}, known {f.known_order}")
        total += c * f.poly.diff_multi(i + j).evaluate(list(eta.basepoint) + [0] * eta.k)
    return total


def jet_pairing_matrix(n, k, point, r):
    """Matrix of ⟨Ev_a ∂^I ∂^J, (x-a)^{I'} y^{J'}⟩ over the order-r jet basis."""
    space = Space(n, k, max(r - 1, 0))
    basis = multi_indices(n + k, r - 1)
    point = [as_q(a) for a in point]
    rows = []
    for e in basis:
        eta = PointDistribution.derivative(n, k, point, e[:n], e[n:])
        row = []
        for e2 in basis:
            mono = Poly.monomial(e2).shift([-a for a in point] + [0] * k)
            row.append(pdist_pair(eta, FormalFunction(space, mono)))
        rows.append(row)
    return basis, rows


def expected_jet_pairing(basis):
    return [[multiindex_factorial(e) if e == e2 else Fraction(0) for e2 in basis]
            for e in basis]
