"""Compactly supported formal densities and dual de Rham forms.

A Density is Σ_L τ_L (y*)^L with each τ_L a compactly supported TensorDensity
on the n smooth axes. A DualForm of degree r is Σ_T η_T e*_T where T runs over
increasing joint-index tuples of length n + k - r (x's first, then y's), so it
pairs with r-forms.
"""

from fractions import Fraction

from .algebra import TensorDensity, merge_sign, multiindex_factorial
from .errors import DegreeMismatch, OrderExhausted, SpaceMismatch
from .formal import product_index_maps


def _require_compatible(a, b):
    if not a.compatible(b):
        raise SpaceMismatch(f"space mismatch: {a} vs {b}")


class Density:
    __slots__ = ("space", "terms")

    def __init__(self, space, terms=None):
        self.space = space
        clean = {}
        for L, tau in (terms or {}).items():
            L = tuple(L)
            if len(L) != space.k or min(L, default=0) < 0:
                raise ValueError(f"bad y*-exponent {L} for {space}")
            if tau.naxes != space.n:
                raise ValueError(f"density has {tau.naxes} axes, space needs {space.n}")
            clean[L] = clean[L] + tau if L in clean else tau
        self.terms = {L: t for L, t in clean.items() if not t.is_zero()}

    @classmethod
    def zero(cls, space):
        return cls(space)

    @classmethod
    def of(cls, space, tau, L=None):
        return cls(space, {tuple(L) if L else (0,) * space.k: tau})

    def is_zero(self):
        return not self.terms

    def y_degree(self):
        return max((sum(L) for L in self.terms), default=-1)

    def __eq__(self, other):
        if not isinstance(other, Density):
            return NotImplemented
        return self.space.compatible(other.space) and (self - other).is_zero()

    __hash__ = None

    def __add__(self, other):
        _require_compatible(self.space, other.space)
        terms = dict(self.terms)
        for L, t in other.terms.items():
            terms[L] = terms[L] + t if L in terms else t
        return Density(self.space, terms)

    def scale(self, c):
        return Density(self.space, {L: t.scale(c) for L, t in self.terms.items()})

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        if isinstance(c, (int, Fraction)):
            return self.scale(c)
        return NotImplemented

    __rmul__ = __mul__

    def d_x(self, i):
        """∂_{x_i*}: derivative of every density along axis i (0-based)."""
        return Density(self.space, {L: t.derivative(i) for L, t in self.terms.items()})

    def m_y(self, j):
        """Multiplication by y_j* (0-based j)."""
        out = {}
        for L, t in self.terms.items():
            L2 = L[:j] + (L[j] + 1,) + L[j + 1:]
            out[L2] = t
        return Density(self.space, out)

    def tensor(self, other, space):
        out = {}
        for L1, t1 in self.terms.items():
            for L2, t2 in other.terms.items():
                L = L1 + L2
                t = t1.tensor(t2)
                out[L] = out[L] + t if L in out else t
        return Density(space, out)

    def base_integral(self):
        """∫ τ_0, the integral of the (y*)^0 component."""
        tau = self.terms.get((0,) * self.space.k)
        return tau.integral() if tau is not None else Fraction(0)

    def format(self):
        if not self.terms:
            return "0"
        parts = []
        for L in sorted(self.terms):
            ys = "*".join(f"ystar{j + 1}^{e}" if e > 1 else f"ystar{j + 1}"
                          for j, e in enumerate(L) if e)
            body = self.terms[L].format()
            parts.append(f"({body})" + (f"*{ys}" if ys else ""))
        return " + ".join(parts)

    def __repr__(self):
        return f"Density({self.format()})"

    def to_json(self):
        return {"type": "density", "space": self.space.to_json(),
                "terms": [{"L": list(L), "tau": self.terms[L].to_json()}
                          for L in sorted(self.terms)]}

    @classmethod
    def from_json(cls, data):
        from .formal import Space
        return cls(Space.from_json(data["space"]),
                   {tuple(t["L"]): TensorDensity.from_json(t["tau"]) for t in data["terms"]})


def pair_density(f, eta):
    """⟨f, Σ τ_L (y*)^L⟩ = Σ_L L! ∫ f_L τ_L."""
    _require_compatible(f.space, eta.space)
    total = Fraction(0)
    for L, tau in eta.terms.items():
        if f.space.k and sum(L) > f.known_order:
            raise OrderExhausted(f"pairing needs y-order {sum(L)}, function known to "
                                 f"{f.known_order}")
        coeff = f.coefficient(L)
        if coeff.is_zero():
            continue
        total += multiindex_factorial(L) * tau.integrate_poly(coeff)
    return total


class DualForm:
    __slots__ = ("space", "degree", "terms")

    def __init__(self, space, degree, terms=None):
        nv = space.nvars
        if not 0 <= degree <= nv:
            raise DegreeMismatch(f"dual degree {degree} outside 0..{nv}")
        self.space = space
        self.degree = degree
        clean = {}
        for T, dens in (terms or {}).items():
            T = tuple(T)
            if len(T) != nv - degree or list(T) != sorted(set(T)):
                raise ValueError(f"bad star tuple {T} for dual degree {degree}")
            if T and (T[0] < 0 or T[-1] >= nv):
                raise ValueError(f"star index out of range in {T}")
            _require_compatible(space, dens.space)
            clean[T] = clean[T] + dens if T in clean else dens
        self.terms = {T: v for T, v in clean.items() if not v.is_zero()}

    @classmethod
    def zero(cls, space, degree):
        return cls(space, degree)

    @classmethod
    def basis(cls, space, star, density):
        """density * e*_star with ``star`` an increasing joint-index tuple."""
        return cls(space, space.nvars - len(star), {tuple(star): density})

    @classmethod
    def top(cls, density):
        """The degree-0 dual form density * dx_1* .. dy_k*."""
        space = density.space
        return cls(space, 0, {tuple(range(space.nvars)): density})

    def is_zero(self):
        return not self.terms

    def density(self, star):
        return self.terms.get(tuple(star), Density.zero(self.space))

    def __eq__(self, other):
        if not isinstance(other, DualForm):
            return NotImplemented
        return (self.space.compatible(other.space) and self.degree == other.degree
                and (self - other).is_zero())

    __hash__ = None

    def __add__(self, other):
        if not isinstance(other, DualForm):
            return NotImplemented
        _require_compatible(self.space, other.space)
        if self.degree != other.degree:
            raise DegreeMismatch(f"dual degree {self.degree} vs {other.degree}")
        terms = dict(self.terms)
        for T, v in other.terms.items():
            terms[T] = terms[T] + v if T in terms else v
        return DualForm(self.space, self.degree, terms)

    def scale(self, c):
        return DualForm(self.space, self.degree, {T: v.scale(c) for T, v in self.terms.items()})

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        if isinstance(c, (int, Fraction)):
            return self.scale(c)
        return NotImplemented

    __rmul__ = __mul__

    def format(self):
        if not self.terms:
            return "0"
        names = self.space.names()
        parts = []
        for T in sorted(self.terms):
            stars = "^".join(f"d{names[i]}*" for i in T)
            parts.append(f"[{self.terms[T].format()}]" + (f"*{stars}" if stars else ""))
        return " + ".join(parts)

    def __repr__(self):
        return f"DualForm[{self.degree}]({self.format()})"

    def to_json(self):
        return {"type": "dualform", "space": self.space.to_json(), "degree": self.degree,
                "terms": [{"star": list(T), "density": self.terms[T].to_json()}
                          for T in sorted(self.terms)]}

    @classmethod
    def from_json(cls, data):
        from .formal import Space
        return cls(Space.from_json(data["space"]), data["degree"],
                   {tuple(t["star"]): Density.from_json(t["density"]) for t in data["terms"]})


def pairing_sign(S, T):
    """ε(S, T): sign of e_S ∧ e_T against the top form (0 unless complementary)."""
    sign, _ = merge_sign(tuple(S), tuple(T))
    return sign


def pair_dualform(w, eta):
    """⟨Σ f_S dz_S, Σ τ_T e*_T⟩ = Σ ε(S, T) ⟨f_S, τ_T⟩."""
    from .derham import as_form
    from .formal import FormalFunction
    w = as_form(w)
    _require_compatible(w.space, eta.space)
    if w.degree != eta.degree:
        raise DegreeMismatch(f"form of degree {w.degree} vs dual form of degree {eta.degree}")
    total = Fraction(0)
    for S, p in w.terms.items():
        f = FormalFunction(w.space, p, w.known_order)
        for T, dens in eta.terms.items():
            eps = pairing_sign(S, T)
            if eps:
                total += eps * pair_density(f, dens)
    return total


def _insert_sign(z, T):
    return -1 if sum(1 for t in T if t < z) % 2 else 1


def dual_d(eta):
    """Dual coboundary, degree r + 1 -> r, adjoint to d:
    ⟨dual_d(η), ω⟩ = (-1)^{r+1} ⟨η, dω⟩.

    Each free index z ∉ T is inserted into the star tuple; an x-index contributes
    ∂_{x*}τ, a y-index contributes -y*·τ, both with the insertion parity.
    """
    space = eta.space
    if eta.degree == 0:
        raise DegreeMismatch("dual_d lowers degree; degree-0 dual forms have no image")
    n = space.n
    out = {}
    for T, dens in eta.terms.items():
        for z in range(space.nvars):
            if z in T:
                continue
            sign = _insert_sign(z, T)
            term = dens.d_x(z) if z < n else -dens.m_y(z - n)
            if term.is_zero():
                continue
            T2 = tuple(sorted(T + (z,)))
            term = term if sign > 0 else -term
            out[T2] = out[T2] + term if T2 in out else term
    return DualForm(space, eta.degree - 1, out)


def zeta(eta):
    """ζ(η) for a degree-0 dual form: ∫ τ_0 of the top component."""
    if eta.degree != 0:
        raise DegreeMismatch(f"zeta needs dual degree 0, got {eta.degree}")
    return eta.density(tuple(range(eta.space.nvars))).base_integral()


def boxtimes_sign(n1, k1, r1, t1, n2, k2, r2, t2):
    """(-1)^a, a = t2 k1 + n2 r1 + n2 t1 + r2 k1 + n1 r2 + r1 t2 + t1 t2,
    with t_i the number of x-indices missing from the star tuple."""
    a = t2 * k1 + n2 * r1 + n2 * t1 + r2 * k1 + n1 * r2 + r1 * t2 + t1 * t2
    return -1 if a % 2 else 1


def _star_sign(s1, eta1_degree, T1, s2, eta2_degree, T2):
    t1 = s1.n - sum(1 for z in T1 if z < s1.n)
    t2 = s2.n - sum(1 for z in T2 if z < s2.n)
    return boxtimes_sign(s1.n, s1.k, eta1_degree, t1, s2.n, s2.k, eta2_degree, t2)


def boxtimes(eta1, eta2):
    """η1 ⊠ η2 on the product space; dual to Ψ up to (-1)^{r1 r2}."""
    s1, s2 = eta1.space, eta2.space
    space = s1.product(s2)
    m1, m2 = product_index_maps(s1, s2)
    out = {}
    for T1, d1 in eta1.terms.items():
        for T2, d2 in eta2.terms.items():
            sign = _star_sign(s1, eta1.degree, T1, s2, eta2.degree, T2)
            T = tuple(sorted([m1[z] for z in T1] + [m2[z] for z in T2]))
            dens = d1.tensor(d2, space)
            dens = dens if sign > 0 else -dens
            out[T] = out[T] + dens if T in out else dens
    return DualForm(space, eta1.degree + eta2.degree, out)


def split_dualform(eta, s1, s2):
    """Write η on s1 × s2 as Σ c η1 ⊠ η2 with single-term factors; returns
    a list of (c, η1, η2)."""
    space = eta.space
    if space.n != s1.n + s2.n or space.k != s1.k + s2.k:
        raise SpaceMismatch(f"{space} is not {s1} x {s2}")
    m1, m2 = product_index_maps(s1, s2)
    inv1 = {v: i for i, v in enumerate(m1)}
    inv2 = {v: i for i, v in enumerate(m2)}
    out = []
    for T, dens in eta.terms.items():
        T1 = tuple(inv1[z] for z in T if z in inv1)
        T2 = tuple(inv2[z] for z in T if z in inv2)
        deg1 = s1.nvars - len(T1)
        deg2 = s2.nvars - len(T2)
        sign = _star_sign(s1, deg1, T1, s2, deg2, T2)
        for L, tau in dens.terms.items():
            L1, L2 = L[:s1.k], L[s1.k:]
            for w, left, right in tau.split(s1.n):
                e1 = DualForm(s1, deg1, {T1: Density(s1, {L1: TensorDensity(s1.n, [(w, left)])})})
                e2 = DualForm(s2, deg2, {T2: Density(s2, {L2: TensorDensity(s2.n, [(1, right)])})})
                out.append((Fraction(sign), e1, e2))
    return out
