"""Exact coefficient arithmetic.

Scalars are :class:`fractions.Fraction`. Smooth coefficients are modeled by
multivariate polynomials (:class:`Poly`), compactly supported densities by
piecewise polynomials on the line (:class:`PiecewisePoly`) and finite sums of
their tensor products (:class:`TensorDensity`).
"""

from bisect import bisect_right
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from math import comb, factorial

from .errors import DomainError

Q = Fraction


def as_q(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(f"not an exact scalar: {value!r}")


def q_json(value):
    value = as_q(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def q_from_json(text):
    return Fraction(text)


def q_str(value):
    return q_json(value)


# ---------------------------------------------------------------- multi-indices

def multiindex_factorial(exps):
    out = 1
    for e in exps:
        out *= factorial(e)
    return Fraction(out)


def multiindex_binomial(top, bottom):
    out = 1
    for t, b in zip(top, bottom):
        out *= comb(t, b)
    return out


def multi_indices(nvars, max_degree):
    """All exponent vectors over ``nvars`` variables with total degree <= max_degree,
    in graded lexicographic order (low degree first)."""
    if max_degree < 0:
        return []
    out = []
    for deg in range(max_degree + 1):
        out.extend(multi_indices_of_degree(nvars, deg))
    return out


@lru_cache(maxsize=None)
def multi_indices_of_degree(nvars, degree):
    if nvars == 0:
        return ((),) if degree == 0 else ()
    out = []
    for first in range(degree, -1, -1):
        for rest in multi_indices_of_degree(nvars - 1, degree - first):
            out.append((first,) + rest)
    return tuple(out)


def ordered_tuples(n, r):
    """Lambda_n^r: strictly increasing r-tuples from 1..n (empty when r > n)."""
    if r < 0:
        return []
    return list(combinations(range(1, n + 1), r))


def lambda_nk(n, k, r):
    """Lambda_{n,k}^r as pairs (I, J) of ordered tuples with |I| + |J| = r."""
    out = []
    for s in range(0, r + 1):
        for i in ordered_tuples(n, s):
            for j in ordered_tuples(k, r - s):
                out.append((i, j))
    return out


def permutation_sign(seq):
    """Parity of the permutation sorting ``seq``; 0 if an entry repeats."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def merge_sign(a, b):
    """Sign and merged tuple for e_a ^ e_b with a, b increasing; (0, None) on overlap."""
    if set(a) & set(b):
        return 0, None
    inversions = 0
    j = 0
    for x in a:
        while j < len(b) and b[j] < x:
            j += 1
        inversions += j
    return (-1 if inversions % 2 else 1), tuple(sorted(a + b))


def wedge_sign(a, b, n):
    """Constant c with e_a ^ e_b = c * e_1 ^ ... ^ e_n; zero unless a, b partition 1..n."""
    a, b = tuple(a), tuple(b)
    if set(a) & set(b) or set(a) | set(b) != set(range(1, n + 1)) or len(a) + len(b) != n:
        return Fraction(0)
    return Fraction(permutation_sign(a + b))


# ------------------------------------------------------------------ polynomials

def _grlex_key(exps):
    return (sum(exps), exps)


class Poly:
    """Multivariate polynomial with rational coefficients over ``nvars`` variables.

    Treat instances as immutable; ``terms`` maps exponent tuples to nonzero
    Fractions.
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars, terms=None, _trusted=False):
        self.nvars = nvars
        if _trusted:
            self.terms = terms
            return
        clean = {}
        if terms:
            for exps, c in terms.items():
                exps = tuple(exps)
                if len(exps) != nvars:
                    raise ValueError(f"exponent {exps} does not match {nvars} variables")
                c = as_q(c)
                if c:
                    clean[exps] = clean.get(exps, 0) + c
                    if not clean[exps]:
                        del clean[exps]
        self.terms = clean

    # constructors
    @classmethod
    def zero(cls, nvars):
        return cls(nvars, {}, _trusted=True)

    @classmethod
    def const(cls, nvars, c):
        c = as_q(c)
        return cls(nvars, {(0,) * nvars: c} if c else {}, _trusted=True)

    @classmethod
    def one(cls, nvars):
        return cls.const(nvars, 1)

    @classmethod
    def var(cls, nvars, index):
        exps = [0] * nvars
        exps[index] = 1
        return cls(nvars, {tuple(exps): Fraction(1)}, _trusted=True)

    @classmethod
    def monomial(cls, exps, c=1):
        exps = tuple(exps)
        return cls(len(exps), {exps: c})

    # inspection
    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def degree(self):
        return max((sum(e) for e in self.terms), default=-1)

    def constant_term(self):
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def items(self):
        """Terms in canonical (graded lexicographic, descending) order."""
        return sorted(self.terms.items(), key=lambda t: _grlex_key(t[0]), reverse=True)

    def coefficient(self, exps):
        return self.terms.get(tuple(exps), Fraction(0))

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == Poly.const(self.nvars, other).terms
        return NotImplemented

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    # arithmetic
    def _coerce(self, other):
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError(f"variable count mismatch: {self.nvars} vs {other.nvars}")
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.const(self.nvars, other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return Poly(self.nvars, out, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()}, _trusted=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        c = as_q(c)
        if not c:
            return Poly.zero(self.nvars)
        return Poly(self.nvars, {e: v * c for e, v in self.terms.items()}, _trusted=True)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self.mul_truncated(other)

    __rmul__ = __mul__

    def mul_truncated(self, other, start=0, bound=None):
        """Product dropping terms whose degree in variables ``start:`` exceeds ``bound``."""
        out = {}
        n = self.nvars
        for e1, c1 in self.terms.items():
            d1 = sum(e1[start:]) if bound is not None else 0
            if bound is not None and d1 > bound:
                continue
            for e2, c2 in other.terms.items():
                if bound is not None and d1 + sum(e2[start:]) > bound:
                    continue
                e = tuple(e1[i] + e2[i] for i in range(n))
                v = out.get(e, 0) + c1 * c2
                if v:
                    out[e] = v
                else:
                    del out[e]
        return Poly(n, out, _trusted=True)

    def __pow__(self, power):
        if not isinstance(power, int) or power < 0:
            raise ValueError("polynomial powers must be non-negative integers")
        out = Poly.one(self.nvars)
        base = self
        while power:
            if power & 1:
                out = out * base
            power >>= 1
            if power:
                base = base * base
        return out

    def truncate(self, start, bound):
        """Drop terms whose degree in variables ``start:`` exceeds ``bound``."""
        return Poly(self.nvars, {e: c for e, c in self.terms.items()
                                 if sum(e[start:]) <= bound}, _trusted=True)

    def truncate_total(self, bound):
        return Poly(self.nvars, {e: c for e, c in self.terms.items() if sum(e) <= bound},
                    _trusted=True)

    # calculus
    def diff(self, index, times=1):
        if times == 0:
            return self
        out = {}
        for e, c in self.terms.items():
            p = e[index]
            if p < times:
                continue
            f = 1
            for m in range(p - times + 1, p + 1):
                f *= m
            ne = e[:index] + (p - times,) + e[index + 1:]
            out[ne] = out.get(ne, 0) + c * f
        return Poly(self.nvars, {e: c for e, c in out.items() if c}, _trusted=True)

    def diff_multi(self, exps):
        out = self
        for i, t in enumerate(exps):
            if t:
                out = out.diff(i, t)
        return out

    def evaluate(self, point):
        point = [as_q(p) for p in point]
        if len(point) != self.nvars:
            raise ValueError(f"point has {len(point)} coordinates, expected {self.nvars}")
        total = Fraction(0)
        for e, c in self.terms.items():
            v = c
            for x, p in zip(point, e):
                if p:
                    v *= x ** p
            total += v
        return total

    def partial_evaluate(self, assignment):
        """Substitute constants for some variables; ``assignment`` maps index -> value.
        The variable count is unchanged (substituted variables disappear from terms)."""
        out = {}
        for e, c in self.terms.items():
            v = c
            ne = list(e)
            for i, val in assignment.items():
                if e[i]:
                    v *= as_q(val) ** e[i]
                ne[i] = 0
            if v:
                ne = tuple(ne)
                out[ne] = out.get(ne, 0) + v
        return Poly(self.nvars, {e: c for e, c in out.items() if c}, _trusted=True)

    def compose(self, images, truncate=None):
        """Substitute ``images[i]`` (Polys over a common variable set) for variable i.

        ``truncate`` is an optional (start, bound) pair applied after each product.
        """
        if len(images) != self.nvars:
            raise ValueError("compose needs one image per variable")
        if not images:
            return self
        m = images[0].nvars
        start, bound = truncate if truncate else (0, None)
        powers = [[Poly.one(m)] for _ in images]

        def power(i, p):
            cache = powers[i]
            while len(cache) <= p:
                cache.append(cache[-1].mul_truncated(images[i], start, bound))
            return cache[p]

        out = Poly.zero(m)
        for e, c in self.terms.items():
            term = Poly.const(m, c)
            for i, p in enumerate(e):
                if p:
                    term = term.mul_truncated(power(i, p), start, bound)
            out = out + term
        return out

    def shift(self, point):
        """The polynomial x -> p(x + point)."""
        images = [Poly.var(self.nvars, i) + as_q(a) for i, a in enumerate(point)]
        return self.compose(images)

    def embed(self, nvars, index_map):
        """Relabel variable i as ``index_map[i]`` inside a ring with ``nvars`` variables."""
        out = {}
        for e, c in self.terms.items():
            ne = [0] * nvars
            for i, p in enumerate(e):
                ne[index_map[i]] += p
            out[tuple(ne)] = c
        return Poly(nvars, out)

    # output
    def format(self, names):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.items():
            mono = "*".join(
                (names[i] if p == 1 else f"{names[i]}^{p}") for i, p in enumerate(e) if p)
            if not mono:
                body = q_str(abs(c))
            elif abs(c) == 1:
                body = mono
            else:
                body = f"{q_str(abs(c))}*{mono}"
            parts.append(("-" if c < 0 else "+", body))
        text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self):
        return f"Poly({self.nvars}, {self.format([f'v{i + 1}' for i in range(self.nvars)])})"

    def to_json(self):
        return {"type": "poly", "nvars": self.nvars,
                "terms": [[list(e), q_json(c)] for e, c in self.items()]}

    @classmethod
    def from_json(cls, data):
        return cls(data["nvars"], {tuple(e): q_from_json(c) for e, c in data["terms"]})


# ------------------------------------------------------- univariate helpers

def _u_trim(coeffs):
    coeffs = list(coeffs)
    while coeffs and not coeffs[-1]:
        coeffs.pop()
    return tuple(coeffs)


def u_add(a, b):
    n = max(len(a), len(b))
    return _u_trim((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n))


def u_scale(a, c):
    if not c:
        return ()
    return tuple(x * c for x in a)


def u_mul(a, b):
    if not a or not b:
        return ()
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _u_trim(out)


def u_deriv(a):
    return _u_trim(a[i] * i for i in range(1, len(a)))


def u_antideriv(a):
    if not a:
        return ()
    return (Fraction(0),) + tuple(c / (i + 1) for i, c in enumerate(a))


def u_eval(a, x):
    v = Fraction(0)
    for c in reversed(a):
        v = v * x + c
    return v


def u_definite(a, lo, hi):
    prim = u_antideriv(a)
    return u_eval(prim, hi) - u_eval(prim, lo)


# ------------------------------------------------------ piecewise polynomials

class PiecewisePoly:
    """Piecewise polynomial on the real line.

    Zero left of ``breaks[0]``; ``pieces[i]`` (low-to-high coefficient tuple)
    on ``[breaks[i], breaks[i+1])``; the constant ``tail`` from the last
    breakpoint on. Compactly supported iff ``tail == 0``.
    """

    __slots__ = ("breaks", "pieces", "tail")

    def __init__(self, breaks=(), pieces=(), tail=0):
        breaks = tuple(as_q(b) for b in breaks)
        pieces = [_u_trim(as_q(c) for c in p) for p in pieces]
        tail = as_q(tail)
        if breaks and len(pieces) != len(breaks) - 1:
            raise ValueError("need exactly one piece per interval")
        if not breaks and (pieces or tail):
            raise ValueError("a nonzero piecewise polynomial needs breakpoints")
        if any(b2 <= b1 for b1, b2 in zip(breaks, breaks[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        self.breaks, self.pieces, self.tail = self._canonical(list(breaks), pieces, tail)

    @staticmethod
    def _canonical(breaks, pieces, tail):
        if not breaks:
            return (), (), Fraction(0)
        # merge equal neighbours
        i = 0
        while i < len(pieces) - 1:
            if pieces[i] == pieces[i + 1]:
                del pieces[i + 1]
                del breaks[i + 1]
            else:
                i += 1
        while pieces and not pieces[0]:
            pieces.pop(0)
            breaks.pop(0)
        tail_poly = (tail,) if tail else ()
        while pieces and pieces[-1] == tail_poly:
            pieces.pop()
            breaks.pop()
        if not pieces and not tail:
            return (), (), Fraction(0)
        return tuple(breaks), tuple(pieces), tail

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def on_interval(cls, lo, hi, coeffs):
        """A single polynomial piece on [lo, hi), zero elsewhere."""
        return cls((lo, hi), (tuple(coeffs),))

    def key(self):
        return (self.breaks, self.pieces, self.tail)

    def __eq__(self, other):
        if not isinstance(other, PiecewisePoly):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def is_zero(self):
        return not self.breaks

    def is_compact(self):
        return self.tail == 0

    def support(self):
        if not self.breaks:
            return None
        return (self.breaks[0], self.breaks[-1])

    def __call__(self, x):
        x = as_q(x)
        if not self.breaks or x < self.breaks[0]:
            return Fraction(0)
        i = bisect_right(self.breaks, x) - 1
        if i >= len(self.pieces):
            return self.tail
        return u_eval(self.pieces[i], x)

    def is_continuous(self):
        if not self.breaks:
            return True
        if u_eval(self.pieces[0], self.breaks[0]) if self.pieces else self.tail:
            return False
        for i in range(len(self.pieces) - 1):
            b = self.breaks[i + 1]
            if u_eval(self.pieces[i], b) != u_eval(self.pieces[i + 1], b):
                return False
        return not self.pieces or u_eval(self.pieces[-1], self.breaks[-1]) == self.tail

    def on_grid(self, grid):
        """Pieces of ``self`` restricted to each interval of the sorted ``grid``
        (which must contain every breakpoint)."""
        out = []
        for lo in grid[:-1]:
            if not self.breaks or lo < self.breaks[0]:
                out.append(())
            else:
                i = bisect_right(self.breaks, lo) - 1
                out.append(self.pieces[i] if i < len(self.pieces) else
                           ((self.tail,) if self.tail else ()))
        return out

    def _binary(self, other, op, tail_op):
        grid = sorted(set(self.breaks) | set(other.breaks))
        if not grid:
            return PiecewisePoly()
        a, b = self.on_grid(grid), other.on_grid(grid)
        return PiecewisePoly(grid, [op(x, y) for x, y in zip(a, b)],
                             tail_op(self.tail, other.tail))

    def __add__(self, other):
        if not isinstance(other, PiecewisePoly):
            return NotImplemented
        return self._binary(other, u_add, lambda s, t: s + t)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = as_q(c)
        return PiecewisePoly(self.breaks, [u_scale(p, c) for p in self.pieces], self.tail * c)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, PiecewisePoly):
            return NotImplemented
        return self._binary(other, u_mul, lambda s, t: s * t)

    __rmul__ = __mul__

    def mul_poly(self, coeffs):
        """Multiply by a global polynomial given as a coefficient tuple (compact only)."""
        if not self.is_compact():
            raise DomainError("cannot multiply a tailed piecewise polynomial by a polynomial")
        coeffs = _u_trim(as_q(c) for c in coeffs)
        return PiecewisePoly(self.breaks, [u_mul(p, coeffs) for p in self.pieces])

    def derivative(self):
        """Classical derivative on each open piece; jump discontinuities are not
        represented, so integration by parts identities need continuous input."""
        return PiecewisePoly(self.breaks, [u_deriv(p) for p in self.pieces])

    def integral(self):
        if self.tail:
            raise DomainError("integral of a piecewise polynomial with nonzero tail diverges")
        return sum((u_definite(p, lo, hi) for p, lo, hi in
                    zip(self.pieces, self.breaks, self.breaks[1:])), Fraction(0))

    def moment(self, power):
        """Integral of x^power * f(x)."""
        if self.tail:
            raise DomainError("moment of a piecewise polynomial with nonzero tail diverges")
        mono = (0,) * power + (1,)
        return sum((u_definite(u_mul(p, mono), lo, hi) for p, lo, hi in
                    zip(self.pieces, self.breaks, self.breaks[1:])), Fraction(0))

    def cumulative(self):
        """a -> integral of f over (-inf, a]; constant (= total integral) right of
        the support."""
        if self.tail:
            raise DomainError("cumulative of a piecewise polynomial with nonzero tail diverges")
        pieces = []
        acc = Fraction(0)
        for p, lo, hi in zip(self.pieces, self.breaks, self.breaks[1:]):
            prim = u_antideriv(p)
            shift = acc - u_eval(prim, lo)
            pieces.append(u_add(prim, (shift,)))
            acc += u_eval(prim, hi) - u_eval(prim, lo)
        return PiecewisePoly(self.breaks, pieces, acc)

    def format(self, var="x"):
        if not self.breaks:
            return "0"
        parts = []
        for p, lo, hi in zip(self.pieces, self.breaks, self.breaks[1:]):
            poly = Poly(1, {(i,): c for i, c in enumerate(p)})
            parts.append(f"[{q_str(lo)},{q_str(hi)}): {poly.format([var])}")
        if self.tail:
            parts.append(f"[{q_str(self.breaks[-1])},inf): {q_str(self.tail)}")
        return "{" + "; ".join(parts) + "}"

    def __repr__(self):
        return f"PiecewisePoly({self.format()})"

    def to_json(self):
        return {"type": "piecewise", "breaks": [q_json(b) for b in self.breaks],
                "pieces": [[q_json(c) for c in p] for p in self.pieces],
                "tail": q_json(self.tail)}

    @classmethod
    def from_json(cls, data):
        return cls([q_from_json(b) for b in data["breaks"]],
                   [[q_from_json(c) for c in p] for p in data["pieces"]],
                   q_from_json(data["tail"]))


def pp_cumulative(f):
    return f.cumulative()


def pp_integral(f):
    """Exact integral over R^n of a TensorDensity (or a single PiecewisePoly)."""
    return f.integral()


def bump(lo, hi, normalize=False):
    """C^1 piecewise-cubic bump supported on [lo, hi], peaking at the midpoint."""
    lo, hi = as_q(lo), as_q(hi)
    if hi <= lo:
        raise DomainError(f"degenerate bump support [{lo}, {hi}]")
    mid = (lo + hi) / 2
    half = mid - lo
    # s(t) = 3t^2 - 2t^3 with t = (x - lo)/half rising, mirrored t = (hi - x)/half falling
    rise = _u_compose_linear((0, 0, 3, -2), -lo / half, 1 / half)
    fall = _u_compose_linear((0, 0, 3, -2), hi / half, -1 / half)
    f = PiecewisePoly((lo, mid, hi), (rise, fall))
    if normalize:
        f = f.scale(1 / f.integral())
    return f


def hat(lo, hi, peak=1):
    """Continuous piecewise-linear tent on [lo, hi]."""
    lo, hi = as_q(lo), as_q(hi)
    if hi <= lo:
        raise DomainError(f"degenerate hat support [{lo}, {hi}]")
    mid = (lo + hi) / 2
    slope = as_q(peak) / (mid - lo)
    return PiecewisePoly((lo, mid, hi), ((-lo * slope, slope), (hi * slope, -slope)))


def _u_compose_linear(coeffs, b, a):
    """p(a*x + b) for p given by low-to-high coefficients."""
    out = ()
    lin = (as_q(b), as_q(a))
    power = (Fraction(1),)
    for c in coeffs:
        out = u_add(out, u_scale(power, as_q(c)))
        power = u_mul(power, lin)
    return out


# ------------------------------------------------------------ tensor densities

class TensorDensity:
    """Finite sum of weighted tensor products of compactly supported piecewise
    polynomials, one factor per axis. With zero axes it is a plain scalar."""

    __slots__ = ("naxes", "terms")

    def __init__(self, naxes, terms=()):
        self.naxes = naxes
        acc = {}
        for weight, factors in terms:
            factors = tuple(factors)
            if len(factors) != naxes:
                raise ValueError(f"expected {naxes} factors, got {len(factors)}")
            weight = as_q(weight)
            if not weight or any(f.is_zero() for f in factors):
                continue
            if any(not f.is_compact() for f in factors):
                raise DomainError("density factors must be compactly supported")
            acc[factors] = acc.get(factors, 0) + weight
        self.terms = tuple((w, f) for f, w in acc.items() if w)

    @classmethod
    def zero(cls, naxes):
        return cls(naxes)

    @classmethod
    def scalar(cls, c):
        return cls(0, [(c, ())])

    @classmethod
    def product(cls, factors, weight=1):
        return cls(len(factors), [(weight, factors)])

    def is_zero(self):
        return not self.cells()

    def __eq__(self, other):
        if not isinstance(other, TensorDensity):
            return NotImplemented
        return self.naxes == other.naxes and (self - other).is_zero()

    __hash__ = None

    def _check(self, other):
        if not isinstance(other, TensorDensity) or other.naxes != self.naxes:
            raise ValueError("tensor densities over different axis counts")

    def __add__(self, other):
        self._check(other)
        return TensorDensity(self.naxes, self.terms + other.terms)

    def scale(self, c):
        c = as_q(c)
        return TensorDensity(self.naxes, [(w * c, f) for w, f in self.terms])

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        if isinstance(c, (int, Fraction)):
            return self.scale(c)
        return NotImplemented

    __rmul__ = __mul__

    def tensor(self, other):
        """Outer product on the concatenated axes."""
        return TensorDensity(self.naxes + other.naxes,
                             [(w1 * w2, f1 + f2) for w1, f1 in self.terms
                              for w2, f2 in other.terms])

    def split(self, axes):
        """Decompose each term as (weight, first ``axes`` factors, remaining factors)."""
        return [(w, f[:axes], f[axes:]) for w, f in self.terms]

    def derivative(self, axis):
        return TensorDensity(self.naxes, [
            (w, f[:axis] + (f[axis].derivative(),) + f[axis + 1:]) for w, f in self.terms])

    def integral(self):
        total = Fraction(0)
        for w, factors in self.terms:
            v = w
            for f in factors:
                v *= f.integral()
            total += v
        return total

    def moment(self, exps):
        """Integral of x^exps against the density."""
        total = Fraction(0)
        for w, factors in self.terms:
            v = w
            for f, p in zip(factors, exps):
                v *= f.moment(p)
                if not v:
                    break
            total += v
        return total

    def integrate_poly(self, poly):
        """Integral of poly(x) * density over R^n (poly over naxes variables)."""
        if poly.nvars != self.naxes:
            raise ValueError("polynomial and density dimensions differ")
        return sum((c * self.moment(e) for e, c in poly.terms.items()), Fraction(0))

    def cells(self):
        """Canonical expansion: common grid per axis, then one multivariate Poly per
        grid cell. Two densities are equal iff their cell maps are equal."""
        grids = []
        for axis in range(self.naxes):
            pts = set()
            for _, factors in self.terms:
                pts.update(factors[axis].breaks)
            grids.append(sorted(pts))
        out = {}
        for w, factors in self.terms:
            per_axis = []
            for axis, f in enumerate(factors):
                per_axis.append([(i, p) for i, p in enumerate(f.on_grid(grids[axis])) if p])
            for combo in product(*per_axis):
                cell = tuple(i for i, _ in combo)
                poly = {(): w}
                for _, p in combo:
                    poly = {e + (j,): c * pc for e, c in poly.items()
                            for j, pc in enumerate(p) if pc}
                acc = out.setdefault(cell, {})
                for e, c in poly.items():
                    v = acc.get(e, 0) + c
                    if v:
                        acc[e] = v
                    else:
                        acc.pop(e, None)
        cell_map = {}
        for cell, poly in out.items():
            if poly:
                key = tuple((grids[a][i], grids[a][i + 1]) for a, i in enumerate(cell))
                cell_map[key] = poly
        return cell_map

    def evaluate(self, point):
        total = Fraction(0)
        for w, factors in self.terms:
            v = w
            for f, x in zip(factors, point):
                v *= f(x)
            total += v
        return total

    def format(self, axis_names=None):
        if not self.terms:
            return "0"
        axis_names = axis_names or [f"x{i + 1}" for i in range(self.naxes)]
        parts = []
        for w, factors in self.terms:
            body = " (x) ".join(f.format(axis_names[i]) for i, f in enumerate(factors))
            if not body:
                parts.append(q_str(w))
            elif w == 1:
                parts.append(body)
            elif w == -1:
                parts.append(f"-{body}")
            else:
                parts.append(f"{q_str(w)}*{body}")
        return " + ".join(parts)

    def __repr__(self):
        return f"TensorDensity({self.format()})"

    def to_json(self):
        return {"type": "tensor_density", "naxes": self.naxes,
                "terms": [{"weight": q_json(w), "factors": [f.to_json() for f in fs]}
                          for w, fs in self.terms]}

    @classmethod
    def from_json(cls, data):
        return cls(data["naxes"], [(q_from_json(t["weight"]),
                                    [PiecewisePoly.from_json(f) for f in t["factors"]])
                                   for t in data["terms"]])
