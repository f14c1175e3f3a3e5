"""Differential forms on (R^n)^(k).

A basis element is an increasing tuple of joint variable indices (x's are
0..n-1, y's are n..n+k-1), so the dx-block automatically precedes the
dy-block. Coefficients are joint polynomials sharing one known y-order.
"""

from fractions import Fraction
from math import comb

from .algebra import Poly, as_q, lambda_nk, merge_sign, permutation_sign
from .errors import DegreeMismatch, OrderExhausted, SpaceMismatch
from .formal import FormalFunction, product_index_maps, require_same_space


class Form:
    """Σ f_B dz_B over increasing index tuples B of length ``degree``."""

    __slots__ = ("space", "degree", "terms", "known_order")

    def __init__(self, space, degree, terms=None, known_order=None):
        if space.k == 0 or known_order is None:
            known_order = space.order
        if known_order < 0:
            raise OrderExhausted("no y-coefficients are known")
        self.space = space
        self.degree = degree
        self.known_order = known_order
        clean = {}
        for basis, p in (terms or {}).items():
            basis = tuple(basis)
            if len(basis) != degree or list(basis) != sorted(set(basis)):
                raise ValueError(f"bad basis tuple {basis} for degree {degree}")
            if basis and (basis[0] < 0 or basis[-1] >= space.nvars):
                raise ValueError(f"basis index out of range in {basis}")
            if isinstance(p, FormalFunction):
                require_same_space(space, p.space)
                known_order = min(known_order, p.known_order)
                p = p.poly
            if p.nvars != space.nvars:
                raise ValueError("coefficient has the wrong variable count")
            clean[basis] = clean[basis] + p if basis in clean else p
        if space.k:
            self.known_order = known_order
            clean = {b: p.truncate(space.n, known_order) for b, p in clean.items()}
        self.terms = {b: p for b, p in clean.items() if not p.is_zero()}

    # constructors
    @classmethod
    def zero(cls, space, degree, known_order=None):
        return cls(space, degree, {}, known_order)

    @classmethod
    def function(cls, f):
        return cls(f.space, 0, {(): f.poly}, f.known_order)

    @classmethod
    def basis(cls, space, xs=(), ys=(), coeff=1):
        """coeff * dx_xs dy_ys with 1-based index tuples."""
        idx = tuple(i - 1 for i in xs) + tuple(space.n + j - 1 for j in ys)
        if len(set(idx)) != len(idx):
            return cls.zero(space, len(idx))
        merged = tuple(sorted(idx))
        sign = permutation_sign(idx)
        if isinstance(coeff, FormalFunction):
            return cls(space, len(idx), {merged: coeff.scale(sign)})
        return cls(space, len(idx), {merged: Poly.const(space.nvars, as_q(coeff) * sign)})

    @classmethod
    def dx(cls, space, i):
        return cls.basis(space, (i,), ())

    @classmethod
    def dy(cls, space, j):
        return cls.basis(space, (), (j,))

    # inspection
    def is_zero(self):
        return not self.terms

    def coefficient(self, basis):
        basis = tuple(basis)
        return FormalFunction(self.space, self.terms.get(basis, Poly.zero(self.space.nvars)),
                              self.known_order)

    def split_basis(self, basis):
        """(I, J) as 1-based x- and y-index tuples."""
        n = self.space.n
        return (tuple(b + 1 for b in basis if b < n), tuple(b - n + 1 for b in basis if b >= n))

    def terms_ij(self):
        return {self.split_basis(b): self.coefficient(b) for b in self.terms}

    def __eq__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        return (self.space == other.space and self.degree == other.degree
                and self.known_order == other.known_order and self.terms == other.terms)

    __hash__ = None

    def agrees_with(self, other):
        return (self - other).is_zero()

    def truncated(self, known_order):
        return Form(self.space, self.degree, self.terms, min(known_order, self.known_order))

    # linear structure
    def _check(self, other):
        require_same_space(self.space, other.space)
        if self.degree != other.degree:
            raise DegreeMismatch(f"degree {self.degree} vs {other.degree}")

    def __add__(self, other):
        if isinstance(other, FormalFunction):
            other = Form.function(other)
        if not isinstance(other, Form):
            return NotImplemented
        self._check(other)
        terms = dict(self.terms)
        for b, p in other.terms.items():
            terms[b] = terms[b] + p if b in terms else p
        return Form(self.space, self.degree, terms, min(self.known_order, other.known_order))

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return Form(self.space, self.degree, {b: p.scale(c) for b, p in self.terms.items()},
                    self.known_order)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if isinstance(other, FormalFunction):
            return wedge(Form.function(other), self)
        if isinstance(other, Form):
            return wedge(self, other)
        return NotImplemented

    __rmul__ = __mul__

    def format(self):
        if not self.terms:
            return "0"
        names = self.space.names()
        parts = []
        for b in sorted(self.terms, key=lambda t: (len(t), t)):
            basis = "^".join("d" + names[i] for i in b)
            coeff = self.terms[b]
            text = coeff.format(names)
            if not basis:
                parts.append(text if len(coeff.terms) == 1 or len(self.terms) == 1
                             else f"({text})")
            elif coeff == 1:
                parts.append(basis)
            elif coeff == -1:
                parts.append("-" + basis)
            elif len(coeff.terms) == 1:
                parts.append(f"{text}*{basis}")
            else:
                parts.append(f"({text})*{basis}")
        text = parts[0]
        for p in parts[1:]:
            text += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return text

    def __repr__(self):
        return f"Form[{self.degree}]({self.format()} on {self.space})"

    def to_json(self):
        return {"type": "form", "space": self.space.to_json(), "degree": self.degree,
                "known_order": self.known_order,
                "terms": [{"basis": list(b), "coeff": self.terms[b].to_json()}
                          for b in sorted(self.terms)]}

    @classmethod
    def from_json(cls, data):
        from .formal import Space
        return cls(Space.from_json(data["space"]), data["degree"],
                   {tuple(t["basis"]): Poly.from_json(t["coeff"]) for t in data["terms"]},
                   data["known_order"])


def as_form(value):
    if isinstance(value, FormalFunction):
        return Form.function(value)
    return value


def wedge(w1, w2):
    w1, w2 = as_form(w1), as_form(w2)
    require_same_space(w1.space, w2.space)
    space = w1.space
    ko = min(w1.known_order, w2.known_order)
    terms = {}
    for b1, p1 in w1.terms.items():
        for b2, p2 in w2.terms.items():
            sign, merged = merge_sign(b1, b2)
            if not sign:
                continue
            prod = p1.mul_truncated(p2, space.n, ko) if space.k else p1 * p2
            if sign < 0:
                prod = -prod
            terms[merged] = terms[merged] + prod if merged in terms else prod
    return Form(space, w1.degree + w2.degree, terms, ko)


def d(w):
    """Exterior derivative: d(f dz_B) = Σ_z ∂_z f dz ∧ dz_B."""
    w = as_form(w)
    space = w.space
    nv = space.nvars
    ko = w.known_order
    if space.k and w.degree < nv:
        ko -= 1
        if ko < 0:
            raise OrderExhausted(f"d needs known y-order >= 1, have {w.known_order}")
    terms = {}
    for b, p in w.terms.items():
        for z in range(nv):
            if z in b:
                continue
            dp = p.diff(z)
            if dp.is_zero():
                continue
            sign, merged = merge_sign((z,), b)
            if sign < 0:
                dp = -dp
            terms[merged] = terms[merged] + dp if merged in terms else dp
    return Form(space, w.degree + 1, terms, ko)


def pullback_form(phi, w):
    """φ^♮(f dz'_B) = d(φ* z'_{b_1}) ∧ ... ∧ d(φ* z'_{b_r}) ∧ φ*(f)."""
    from .morphisms import pullback
    w = as_form(w)
    if not phi.target.compatible(w.space):
        raise SpaceMismatch(f"form on {w.space} cannot be pulled back into {phi.target}")
    images = list(phi.x_pullbacks) + list(phi.y_pullbacks)
    differentials = {}
    out = None
    for b, p in w.terms.items():
        term = Form.function(pullback(phi, FormalFunction(w.space, p, w.known_order)))
        for z in reversed(b):
            if z not in differentials:
                differentials[z] = d(Form.function(images[z]))
            term = wedge(differentials[z], term)
        out = term if out is None else out + term
    if out is None:
        ko = phi.budget(FormalFunction(w.space, Poly.zero(w.space.nvars), w.known_order))
        if phi.source.k and w.degree and w.degree < phi.source.nvars:
            ko -= 1
        return Form.zero(phi.source, w.degree, max(ko, 0))
    return out


def embed_form(w, space, index_map, known_order=None):
    terms = {}
    for b, p in w.terms.items():
        nb = tuple(index_map[i] for i in b)
        merged = tuple(sorted(nb))
        sign = permutation_sign(nb)
        q = p.embed(space.nvars, index_map)
        terms[merged] = q if sign > 0 else -q
    return Form(space, w.degree, terms, known_order)


def product_known_order(space, *parts):
    kos = [p.known_order for p in parts if p.space.k]
    return min(kos + [space.order]) if kos and space.k else None


def kunneth(w1, w2):
    """Ψ(ω1 ⊗ ω2) = p1^♮(ω1) ∧ p2^♮(ω2) on the product space."""
    w1, w2 = as_form(w1), as_form(w2)
    space = w1.space.product(w2.space)
    ko = product_known_order(space, w1, w2)
    m1, m2 = product_index_maps(w1.space, w2.space)
    return wedge(embed_form(w1, space, m1, ko), embed_form(w2, space, m2, ko))


def kunneth_sign(i1, j1, i2, j2):
    """(-1)^{|J1| |I2|}: the sign relating Ψ(dx_I1 dy_J1 ⊗ dx_I2 dy_J2) to the
    normal-form basis element of the product."""
    return -1 if (len(j1) * len(i2)) % 2 else 1


def split_form(w, s1, s2):
    """Write ω on s1 × s2 as Σ c Ψ(ω1 ⊗ ω2) with monomial factors.

    Returns a list of (c, ω1, ω2).
    """
    space = w.space
    if space != s1.product(s2) and not (space.n == s1.n + s2.n and space.k == s1.k + s2.k):
        raise SpaceMismatch(f"{space} is not {s1} x {s2}")
    m1, m2 = product_index_maps(s1, s2)
    inv1 = {v: i for i, v in enumerate(m1)}
    inv2 = {v: i for i, v in enumerate(m2)}
    ko1 = min(w.known_order, s1.order) if s1.k else None
    ko2 = min(w.known_order, s2.order) if s2.k else None
    out = []
    for b, p in w.terms.items():
        b1 = tuple(z for z in b if z in inv1)
        b2 = tuple(z for z in b if z in inv2)
        sign, _ = merge_sign(b1, b2)
        lb1 = tuple(inv1[z] for z in b1)
        lb2 = tuple(inv2[z] for z in b2)
        for e, c in p.terms.items():
            e1 = tuple(e[v] for v in m1)
            e2 = tuple(e[v] for v in m2)
            f1 = Form(s1, len(lb1), {lb1: Poly(s1.nvars, {e1: c * sign})}, ko1)
            f2 = Form(s2, len(lb2), {lb2: Poly(s2.nvars, {e2: 1})}, ko2)
            out.append((Fraction(1), f1, f2))
    return out


def graded_dimension(n, k, r):
    """|Λ_{n,k}^r| = C(n + k, r)."""
    return len(lambda_nk(n, k, r))


def kunneth_dimension_count(n1, k1, n2, k2, r):
    """Σ_{r1 + r2 = r} |Λ^{r1}_{n1,k1}| |Λ^{r2}_{n2,k2}|."""
    return sum(graded_dimension(n1, k1, r1) * graded_dimension(n2, k2, r - r1)
               for r1 in range(r + 1))


def binomial_dimension(n, k, r):
    return comb(n + k, r)
