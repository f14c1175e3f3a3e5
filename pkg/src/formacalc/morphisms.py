"""Coordinate morphisms (R^n)^(k) -> (R^m)^(l) and their pullbacks."""

from dataclasses import dataclass

from .algebra import Poly, as_q, multi_indices, multiindex_factorial
from .errors import DomainError, OrderExhausted, SpaceMismatch
from .formal import FormalFunction, Space, jet_of


class Morphism:
    """A morphism given by the images of the target coordinates x'_i and formal
    variables y'_j, as formal functions on the source. Every y-image must have zero
    reduction (it lands in the maximal ideal at every point)."""

    __slots__ = ("source", "target", "x_pullbacks", "y_pullbacks")

    def __init__(self, source, target, x_pullbacks, y_pullbacks=()):
        x_pullbacks, y_pullbacks = list(x_pullbacks), list(y_pullbacks)
        if len(x_pullbacks) != target.n or len(y_pullbacks) != target.k:
            raise SpaceMismatch(f"need {target.n} x-images and {target.k} y-images")
        for f in x_pullbacks + y_pullbacks:
            if f.space != source:
                raise SpaceMismatch(f"image lives on {f.space}, expected {source}")
        for j, f in enumerate(y_pullbacks):
            if not f.reduction().is_zero():
                raise DomainError(f"image of y'{j + 1} has nonzero reduction")
        self.source = source
        self.target = target
        self.x_pullbacks = tuple(x_pullbacks)
        self.y_pullbacks = tuple(y_pullbacks)

    @classmethod
    def identity(cls, space):
        return cls(space, space,
                   [FormalFunction.x(space, i + 1) for i in range(space.n)],
                   [FormalFunction.y(space, j + 1) for j in range(space.k)])

    def base_map(self, point):
        """The underlying point map: values of the x-images at ``point``."""
        return [f.value(point) for f in self.x_pullbacks]

    def budget(self, g=None):
        """Largest y-order up to which a pullback is determined by the data."""
        if not self.source.k:
            return self.source.order
        orders = [self.source.order] + [f.known_order for f in self.x_pullbacks + self.y_pullbacks]
        if g is not None and g.space.k:
            orders.append(g.known_order)
        return min(orders)

    def __eq__(self, other):
        if not isinstance(other, Morphism):
            return NotImplemented
        return (self.source == other.source and self.target.compatible(other.target)
                and all(a.agrees_with(b) for a, b in zip(self.x_pullbacks, other.x_pullbacks))
                and all(a.agrees_with(b) for a, b in zip(self.y_pullbacks, other.y_pullbacks)))

    __hash__ = None

    def format(self):
        parts = [f"x'{i + 1} = {f.format()}" for i, f in enumerate(self.x_pullbacks)]
        parts += [f"y'{j + 1} = {f.format()}" for j, f in enumerate(self.y_pullbacks)]
        return "; ".join(parts)

    def __repr__(self):
        return f"Morphism({self.source} -> {self.target}: {self.format()})"

    def to_json(self):
        return {"type": "morphism", "source": self.source.to_json(),
                "target": self.target.to_json(),
                "x_pullbacks": [f.to_json() for f in self.x_pullbacks],
                "y_pullbacks": [f.to_json() for f in self.y_pullbacks]}


def pullback(phi, g):
    """φ*(g) = Σ_K T(g_K) Π_j φ*(y'_j)^{K_j}, where T is the Taylor pullback
    T(h) = Σ_I (∂^I h / I! ∘ φ̄) (φ*(x') - φ̄)^I of the smooth part."""
    if not phi.target.compatible(g.space):
        raise SpaceMismatch(f"function on {g.space} cannot be pulled back along a morphism "
                            f"into {phi.target}")
    src = phi.source
    budget = phi.budget(g)
    if budget < 0:
        raise OrderExhausted("truncation budget exhausted")
    space = src
    nv = src.nvars
    m = phi.target.n

    def on_source(poly):
        return FormalFunction(space, poly, budget)

    reductions = [f.reduction().embed(nv, list(range(src.n))) for f in phi.x_pullbacks]
    deltas = [on_source(f.poly) - on_source(r) for f, r in zip(phi.x_pullbacks, reductions)]
    ys = [on_source(f.poly) for f in phi.y_pullbacks]
    max_deg = budget if src.k else 0

    delta_powers = {}

    def delta_power(exps):
        if exps not in delta_powers:
            out = on_source(Poly.one(nv))
            for d, p in zip(deltas, exps):
                if p:
                    out = out * d ** p
            delta_powers[exps] = out
        return delta_powers[exps]

    def taylor(h):
        # h: Poly over the m target smooth variables
        out = on_source(Poly.zero(nv))
        for exps in multi_indices(m, min(max_deg, max(h.degree(), 0))):
            dh = h.diff_multi(exps)
            if dh.is_zero():
                continue
            outer = dh.compose(reductions) if m else Poly.const(nv, dh.constant_term())
            term = on_source(outer).scale(1 / multiindex_factorial(exps))
            out = out + term * delta_power(exps)
        return out

    result = on_source(Poly.zero(nv))
    for kexp, coeff in g.coeffs.items():
        if sum(kexp) > max_deg:
            continue
        part = taylor(coeff)
        for y, p in zip(ys, kexp):
            if p:
                part = part * y ** p
        result = result + part
    return result


def compose(psi, phi):
    """ψ ∘ φ (first φ, then ψ); pullback(compose(ψ, φ), g) = φ*(ψ*(g))."""
    if not phi.target.compatible(psi.source):
        raise SpaceMismatch(f"cannot compose: {phi.target} vs {psi.source}")
    return Morphism(phi.source, psi.target, [pullback(phi, f) for f in psi.x_pullbacks],
                    [pullback(phi, f) for f in psi.y_pullbacks])


@dataclass(frozen=True)
class JetMap:
    """Matrix of φ*_a between jet spaces; columns indexed by target basis monomials."""

    source_basis: tuple
    target_basis: tuple
    matrix: tuple  # rows: source basis, columns: target basis
    source_point: tuple
    target_point: tuple
    order: int

    def column(self, target_exps):
        j = self.target_basis.index(tuple(target_exps))
        return [row[j] for row in self.matrix]

    def __call__(self, jet):
        coords = [jet.poly.coefficient(e) for e in self.target_basis]
        return [sum((a * c for a, c in zip(row, coords)), as_q(0)) for row in self.matrix]

    def to_json(self):
        from .algebra import q_json
        return {"type": "jet_map", "order": self.order,
                "source_basis": [list(e) for e in self.source_basis],
                "target_basis": [list(e) for e in self.target_basis],
                "matrix": [[q_json(v) for v in row] for row in self.matrix]}


def jet_map(phi, point, r):
    """The local homomorphism O_{φ̄(a)}/m^r -> O_a/m^r in monomial bases."""
    point = [as_q(a) for a in point]
    image = phi.base_map(point)
    tgt = phi.target
    tgt_space = Space(tgt.n, tgt.k, max(tgt.order, r - 1))
    tgt_basis = tuple(multi_indices(tgt.nvars, r - 1))
    src_basis = tuple(multi_indices(phi.source.nvars, r - 1))
    columns = []
    for e in tgt_basis:
        mono = Poly.monomial(e).shift([-b for b in image] + [0] * tgt.k)
        jet = jet_of(pullback(phi, FormalFunction(tgt_space, mono)), point, r)
        columns.append([jet.poly.coefficient(s) for s in src_basis])
    matrix = tuple(tuple(col[i] for col in columns) for i in range(len(src_basis)))
    return JetMap(src_basis, tgt_basis, matrix, tuple(point), tuple(image), r)
