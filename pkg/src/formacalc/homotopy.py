"""Poincaré homotopy operators and exactness certificates.

Each complex is wrapped in a HomotopyData record holding its differential d,
a homotopy h of the opposite degree, the augmentation g (a scalar read off
the augmentation degree) and the coaugmentation eps (scalar -> element), with

    d h + h d = id - eps g.

On forms d raises the degree and the augmentation sits in degree 0; on dual
forms d lowers the dual degree and the augmentation also sits in degree 0.
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import Poly, PiecewisePoly, TensorDensity, bump
from .derham import Form, as_form, d as form_d, kunneth, split_form
from .dual import Density, DualForm, boxtimes, dual_d, split_dualform, zeta
from .errors import DomainError, HomotopyError, SpaceMismatch
from .formal import Space


# ----------------------------------------------------------------- forms side

def radial_homotopy(w):
    """Cone homotopy about the origin, treating x's and y's alike:
    K(z^e dz_B) = Σ_j (-1)^j z_{B_j} z^e dz_{B minus B_j} / (|e| + r)."""
    w = as_form(w)
    space = w.space
    r = w.degree
    if r == 0:
        return None
    terms = {}
    for b, p in w.terms.items():
        for j, z in enumerate(b):
            rest = b[:j] + b[j + 1:]
            sign = -1 if j % 2 else 1
            acc = {}
            for e, c in p.terms.items():
                e2 = e[:z] + (e[z] + 1,) + e[z + 1:]
                acc[e2] = c * sign / (sum(e) + r)
            q = Poly(space.nvars, acc)
            terms[rest] = terms[rest] + q if rest in terms else q
    return Form(space, r - 1, terms, w.known_order)


def origin_value(w):
    """g: the value at the origin of a degree-0 form, 0 in other degrees."""
    w = as_form(w)
    if w.degree != 0:
        return Fraction(0)
    p = w.terms.get(())
    return p.constant_term() if p is not None else Fraction(0)


def formal_homotopy(w):
    """h(Σ c_i y^i dy) = Σ c_i/(i+1) y^{i+1} on (R^0)^(1); zero on functions."""
    w = as_form(w)
    space = w.space
    if space.n != 0 or space.k != 1:
        raise SpaceMismatch(f"formal homotopy lives on (0,1), not {space}")
    if w.degree == 0:
        return None
    p = w.terms.get((0,))
    out = {}
    if p is not None:
        out[()] = Poly(1, {(i + 1,): c / (i + 1) for (i,), c in p.terms.items()})
    return Form(space, 0, out, w.known_order)


def formal_augmentation(w):
    """g: Σ c_i y^i ↦ c_0."""
    return origin_value(w)


# ------------------------------------------------------------------ dual side

def star_convolve(f1, f2):
    """(f1 ⊛ f2)(a) = ∫f1 · ∫_{-inf}^a f2 - ∫f2 · ∫_{-inf}^a f1 (compact, antisymmetric)."""
    out = f2.cumulative().scale(f1.integral()) - f1.cumulative().scale(f2.integral())
    if not out.is_compact():
        raise DomainError("star convolution left a nonzero tail")
    return out


def _check_normalized(g):
    if not isinstance(g, PiecewisePoly) or not g.is_compact() or g.integral() != 1:
        raise DomainError("the cutoff density must be compactly supported with integral 1")


def cs_homotopy_1d(eta, g=None):
    """Homotopy on the dual complex of (R^1)^(0): τ dx* ↦ g ⊛ τ, zero in dual degree 1.

    g ⊛ τ = ∫_{-inf} τ - (∫τ) ∫_{-inf} g, so that dual_d h + h dual_d = id - α ζ
    with α(λ) = λ g dx*.
    """
    g = g if g is not None else standard_bump()
    _check_normalized(g)
    space = eta.space
    if space.n != 1 or space.k != 0:
        raise SpaceMismatch(f"cs_homotopy_1d lives on (1,0), not {space}")
    if eta.degree == 1:
        return None
    tau = eta.density((0,)).terms.get((), TensorDensity.zero(1))
    acc = TensorDensity.zero(1)
    for w, (f,) in tau.terms:
        acc = acc + TensorDensity(1, [(w, [star_convolve(g, f)])])
    return DualForm(space, 1, {(): Density(space, {(): acc})})


def standard_bump():
    return bump(0, 1, normalize=True)


def _formal_dual_h(eta):
    """Transpose of the formal homotopy on (0,1): c y*^l dy* ↦ -c y*^{l-1}."""
    space = eta.space
    if eta.degree == 1:
        return None
    dens = eta.density((0,))
    out = {}
    for (l,), tau in dens.terms.items():
        if l:
            out[(l - 1,)] = -tau
    return DualForm(space, 1, {(): Density(space, out)})


# -------------------------------------------------------- homotopy data records

@dataclass
class HomotopyData:
    """A (co)augmented complex with a contracting homotopy.

    ``direction`` is +1 when d raises degree (forms) and -1 when it lowers it
    (dual forms). ``h`` returns None where the target degree does not exist.
    """

    name: str
    space: Space
    d: object
    h: object
    g: object
    eps: object
    direction: int
    degrees: tuple
    sampler: object = None

    def top_d_degree(self):
        return self.degrees[-1] if self.direction > 0 else self.degrees[0]

    def apply_d(self, u):
        if u.degree == self.top_d_degree():
            return None
        return self.d(u)

    def apply_h(self, u):
        return self.h(u)

    def residual(self, u):
        """d h u + h d u - u + eps g u (zero iff the identity holds on u)."""
        out = -u
        hu = self.apply_h(u)
        if hu is not None:
            dhu = self.apply_d(hu)
            if dhu is not None:
                out = out + dhu
        du = self.apply_d(u)
        if du is not None:
            hdu = self.apply_h(du)
            if hdu is not None:
                out = out + hdu
        if u.degree == 0:
            out = out + self.eps(self.g(u))
        return out


def omega_data(space):
    from .generators import random_form

    def sample(rng, degree):
        return random_form(space, degree, rng, max_degree=3)

    def eps(c):
        return Form(space, 0, {(): Poly.const(space.nvars, c)})

    return HomotopyData("omega", space, form_d, radial_homotopy, origin_value, eps, +1,
                        tuple(range(space.nvars + 1)), sample)


def formal_omega_data(order):
    space = Space(0, 1, order)
    data = omega_data(space)
    data.name = "formal"
    data.h = formal_homotopy
    data.g = formal_augmentation
    return data


def _dual_sampler(space):
    from .generators import random_dualform

    def sample(rng, degree):
        return random_dualform(space, degree, rng)
    return sample


def _dual_eps(space, profiles):
    def eps(c):
        tau = TensorDensity(space.n, [(c, list(profiles))]) if space.n else TensorDensity.scalar(c)
        return DualForm.top(Density(space, {(0,) * space.k: tau}))
    return eps


def dual_1d_data(g=None):
    g = g if g is not None else standard_bump()
    _check_normalized(g)
    space = Space(1, 0, 0)
    return HomotopyData("dual", space, dual_d, lambda u: cs_homotopy_1d(u, g), zeta,
                        _dual_eps(space, [g]), -1, (0, 1), _dual_sampler(space))


def dual_formal_data(order=0):
    space = Space(0, 1, order)
    return HomotopyData("dual", space, dual_d, _formal_dual_h, zeta, _dual_eps(space, []),
                        -1, (0, 1), _dual_sampler(space))


def trivial_dual_data(order=0):
    space = Space(0, 0, order)
    return HomotopyData("dual", space, dual_d, lambda u: None, zeta, _dual_eps(space, []),
                        -1, (0,), _dual_sampler(space))


def check_data(data, rng, samples=3):
    """Verify d h + h d = id - eps g on a few samples per degree."""
    for deg in data.degrees:
        for _ in range(samples):
            u = data.sampler(rng, deg)
            res = data.residual(u)
            if not res.is_zero():
                raise HomotopyError(f"{data.name} homotopy identity fails in degree {deg} "
                                    f"on {data.space}", witness=u)


def tensor_homotopy(first, second, check=True, rng=None):
    """Homotopy data on first ⊗ second, transported to the product space.

    H(u ⊗ v) = h1(u) ⊗ v + eps1 g1(u) ⊗ h2(v) with the Koszul differential
    d(u ⊗ v) = du ⊗ v + (-1)^{|u|} u ⊗ dv; then dH + Hd = id - eps1 g1 ⊗ eps2 g2.
    Forms are combined with Ψ, dual forms with ⊠.
    """
    from .generators import make_rng
    if first.direction != second.direction:
        raise HomotopyError("cannot tensor a form complex with a dual complex")
    if check:
        rng = make_rng(rng if rng is not None else 0)
        check_data(first, rng)
        check_data(second, rng)
    s1, s2 = first.space, second.space
    space = s1.product(s2)
    forms = first.direction > 0
    combine = kunneth if forms else boxtimes
    split = split_form if forms else split_dualform
    one2 = second.eps(1)

    def h(w):
        acc = None
        for c, u, v in split(w, s1, s2):
            parts = []
            hu = first.apply_h(u)
            if hu is not None:
                parts.append(combine(hu, v))
            if u.degree == 0:
                gu = first.g(u)
                hv = second.apply_h(v)
                if gu and hv is not None:
                    parts.append(combine(first.eps(gu), hv))
            for p in parts:
                p = p.scale(c) if c != 1 else p
                acc = p if acc is None else acc + p
        if acc is None:
            target = w.degree - 1 if forms else w.degree + 1
            if target not in degrees:
                return None
            return Form.zero(space, target, w.known_order) if forms else DualForm.zero(space, target)
        return acc

    def g(w):
        total = Fraction(0)
        for c, u, v in split(w, s1, s2):
            if u.degree == 0 and v.degree == 0:
                total += c * first.g(u) * second.g(v)
        return total

    def eps(c):
        return combine(first.eps(c), one2)

    degrees = tuple(range(space.nvars + 1))
    d_op = form_d if forms else dual_d
    if forms:
        from .generators import random_form

        def sample(rng_, degree):
            return random_form(space, degree, rng_, max_degree=3)
    else:
        sample = _dual_sampler(space)
    return HomotopyData(f"{first.name}*{second.name}", space, d_op, h, g, eps,
                        first.direction, degrees, sample)


def dual_data(space, bumps=None, check=False):
    """Homotopy data for the dual complex on (n, k), built factor by factor:
    (1,0) x rest while n > 0, then (0,1) x rest, ending at (0,0)."""
    n, k = space.n, space.k
    if bumps is None:
        bumps = [standard_bump()] * n
    bumps = list(bumps)
    if len(bumps) != n:
        raise HomotopyError(f"need one normalized cutoff per x-axis ({n}), got {len(bumps)}")
    for b in bumps:
        _check_normalized(b)
    if n == 0 and k == 0:
        return trivial_dual_data(space.order)
    if n:
        head = dual_1d_data(bumps[0])
        head.space = Space(1, 0, space.order)
        rest = dual_data(Space(n - 1, k, space.order), bumps[1:], check)
    else:
        head = dual_formal_data(space.order)
        rest = dual_data(Space(0, k - 1, space.order), (), check)
    if rest.space.nvars == 0:
        # (0,0) is the unit for the tensor product; keep the factor itself
        head.space = Space(head.space.n, head.space.k, space.order)
        head.sampler = _dual_sampler(head.space)
        head.eps = _dual_eps(head.space, bumps[:1])
        return head
    data = tensor_homotopy(head, rest, check=check)
    data.name = "dual"
    return data


def cs_homotopy(eta, bumps=None):
    """Contracting homotopy of the compactly supported dual complex on (n, k)."""
    data = dual_data(eta.space, bumps)
    return data.apply_h(eta)


def alpha(space, c, bumps=None):
    """α(λ): λ times the product cutoff, in top dual position."""
    return dual_data(space, bumps).eps(c)


def transpose_sign_check(eta, w, h_dual, h_form):
    """⟨h_dual(η), ω⟩ - (-1)^p ⟨η, h_form(ω)⟩ for ω of degree p (zero when the
    dual homotopy is the transpose of the form homotopy)."""
    from .dual import pair_dualform
    left = h_dual(eta)
    right = h_form(w)
    lv = pair_dualform(w, left) if left is not None else Fraction(0)
    rv = pair_dualform(right, eta) if right is not None else Fraction(0)
    return lv - (-1) ** w.degree * rv


# ------------------------------------------------------------- certification

@dataclass
class HomotopyCertificate:
    complex: str
    space: Space
    seed: int
    samples: int
    degrees: tuple
    residuals: dict = field(default_factory=dict)
    maps: dict = field(default_factory=dict)
    passed: bool = True

    def to_json(self):
        return {"type": "homotopy_certificate", "complex": self.complex,
                "space": self.space.to_json(), "seed": self.seed, "samples": self.samples,
                "degrees": list(self.degrees),
                "residuals": {str(k): v for k, v in sorted(self.residuals.items())},
                "maps": self.maps, "passed": self.passed}

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)


def homotopy_data(complex_id, space):
    if complex_id == "omega":
        return omega_data(space)
    if complex_id == "formal":
        if (space.n, space.k) != (0, 1):
            raise SpaceMismatch("the formal complex lives on (0,1)")
        return formal_omega_data(space.order)
    if complex_id == "dual":
        return dual_data(space)
    raise HomotopyError(f"no registered homotopy for complex {complex_id!r}")


def certify_strong_exactness(complex_id, space, samples=10, seed=0):
    """Check, on sampled elements of every degree: the homotopy identity,
    d∘h∘d = d, and eps∘g∘eps = eps. Raises HomotopyError with a witness on
    the first nonzero residual."""
    from .generators import make_rng
    rng = make_rng(seed)
    data = homotopy_data(complex_id, space)
    cert = HomotopyCertificate(complex_id, space, seed if isinstance(seed, int) else 0,
                               samples, data.degrees)
    cert.maps = {"g": "value at the origin" if complex_id != "dual" else "zeta",
                 "eps": "constant embedding" if complex_id != "dual" else
                 "alpha: lambda times the product cutoff"}
    one = data.eps(1)
    if not (data.eps(data.g(one)) - one).is_zero():
        raise HomotopyError("eps g eps != eps", witness=one)
    for deg in data.degrees:
        identity = dhd = 0
        for _ in range(samples):
            u = data.sampler(rng, deg)
            if not data.residual(u).is_zero():
                identity += 1
                raise HomotopyError(f"homotopy identity fails in degree {deg}", witness=u)
            du = data.apply_d(u)
            if du is not None:
                hdu = data.apply_h(du)
                back = data.apply_d(hdu) if hdu is not None else None
                diff = du if back is None else back - du
                if not diff.is_zero():
                    dhd += 1
                    raise HomotopyError(f"d h d != d in degree {deg}", witness=u)
        cert.residuals[deg] = {"identity": identity, "dhd": dhd}
    return cert
