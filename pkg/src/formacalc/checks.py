"""Named identity suites shared by the CLI `check` command and the test-suite.

Every suite samples random data from a seeded generator and verifies an exact
identity; a suite reports the first failing sample as its witness.
"""

import json
from dataclasses import dataclass, field
from math import comb

from .derham import Form, d, kunneth, pullback_form, wedge
from .dual import boxtimes, dual_d, pair_dualform
from .errors import DomainError, HomotopyError
from .formal import (FormalFunction, Space, diffop_order_certificate, expected_jet_pairing,
                     jet_dimension, jet_of, jet_pairing_matrix)
from .generators import (make_rng, random_diffop, random_dualform, random_form,
                         random_function, random_morphism, random_point)
from .homotopy import certify_strong_exactness, homotopy_data
from .morphisms import compose, pullback


@dataclass
class CheckResult:
    suite: str
    space: Space
    samples: int
    passed: bool = True
    checked: int = 0
    witness: str = None
    details: dict = field(default_factory=dict)

    def fail(self, witness):
        if self.passed:
            self.passed = False
            self.witness = witness

    def to_json(self):
        return {"type": "check", "suite": self.suite, "space": self.space.to_json(),
                "samples": self.samples, "checked": self.checked, "passed": self.passed,
                "witness": self.witness, "details": self.details}

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)


def _need_order(space, needed, suite):
    if space.k and space.order < needed:
        raise DomainError(f"suite {suite} needs truncation order >= {needed} on {space}")


def check_dd(space, samples, rng):
    _need_order(space, 2, "dd")
    res = CheckResult("dd", space, samples)
    for r in range(space.nvars + 1):
        for _ in range(samples):
            w = random_form(space, r, rng)
            res.checked += 1
            if not d(d(w)).is_zero():
                res.fail(w.format())
    return res


def check_leibniz(space, samples, rng):
    _need_order(space, 1, "leibniz")
    res = CheckResult("leibniz", space, samples)
    nv = space.nvars
    for _ in range(samples):
        r1 = rng.randint(0, nv)
        r2 = rng.randint(0, nv - r1)
        w1, w2 = random_form(space, r1, rng), random_form(space, r2, rng)
        res.checked += 1
        lhs = d(wedge(w1, w2))
        rhs = wedge(d(w1), w2) + wedge(w1, d(w2)).scale((-1) ** r1)
        if not lhs.agrees_with(rhs):
            res.fail(f"{w1.format()} ; {w2.format()}")
    return res


def check_poincare(complex_id):
    def run(space, samples, rng):
        if complex_id == "omega":
            _need_order(space, 1, "poincare-omega")
        res = CheckResult(f"poincare-{complex_id}", space, samples)
        data = homotopy_data(complex_id, space)
        for deg in data.degrees:
            for _ in range(samples):
                u = data.sampler(rng, deg)
                res.checked += 1
                if not data.residual(u).is_zero():
                    res.fail(u.format())
        return res
    return run


def check_strong(complex_id):
    def run(space, samples, rng):
        if complex_id == "omega":
            _need_order(space, 2, "strong-omega")
        res = CheckResult(f"strong-{complex_id}", space, samples)
        try:
            cert = certify_strong_exactness(complex_id, space, samples, rng)
        except HomotopyError as err:
            res.fail(err.witness.format() if err.witness is not None else str(err))
            return res
        res.checked = samples * len(cert.degrees)
        res.details = {"certificate": cert.to_json()}
        return res
    return run


def check_adjoint(space, samples, rng):
    _need_order(space, 1, "adjoint")
    res = CheckResult("adjoint", space, samples)
    nv = space.nvars
    max_y = min(2, space.order - 1) if space.k else 0
    for _ in range(samples):
        if nv == 0:
            break
        r = rng.randint(0, nv - 1)
        w = random_form(space, r, rng)
        eta = random_dualform(space, r + 1, rng, max_y=max_y)
        res.checked += 1
        if pair_dualform(w, dual_d(eta)) != (-1) ** (r + 1) * pair_dualform(d(w), eta):
            res.fail(f"{w.format()} ; {eta.format()}")
    return res


def splits(space):
    """All (s1, s2) with s1 x s2 = space and both factors nontrivial."""
    out = []
    for n1 in range(space.n + 1):
        for k1 in range(space.k + 1):
            s1 = Space(n1, k1, space.order)
            s2 = Space(space.n - n1, space.k - k1, space.order)
            if s1.nvars and s2.nvars:
                out.append((s1, s2))
    return out


def check_kunneth(space, samples, rng):
    _need_order(space, 1, "kunneth")
    res = CheckResult("kunneth", space, samples)
    max_y = min(2, space.order - 1) if space.k else 0
    pieces = splits(space)
    for s1, s2 in pieces:
        for r in range(space.nvars + 1):
            count = sum(comb(s1.nvars, r1) * comb(s2.nvars, r - r1) for r1 in range(r + 1))
            if count != comb(space.nvars, r):
                res.fail(f"dimension count in degree {r} for {s1} x {s2}")
    for _ in range(samples if pieces else 0):
        s1, s2 = rng.choice(pieces)
        r1, r2 = rng.randint(0, s1.nvars), rng.randint(0, s2.nvars)
        w1, w2 = random_form(s1, r1, rng), random_form(s2, r2, rng)
        res.checked += 1
        lhs = d(kunneth(w1, w2))
        rhs = kunneth(d(w1), w2) + kunneth(w1, d(w2)).scale((-1) ** r1)
        if not lhs.agrees_with(rhs):
            res.fail(f"d: {w1.format()} ; {w2.format()}")
        e1 = random_dualform(s1, r1, rng, max_y=max_y)
        e2 = random_dualform(s2, r2, rng, max_y=max_y)
        left = pair_dualform(kunneth(w1, w2), boxtimes(e1, e2))
        right = (-1) ** (r1 * r2) * pair_dualform(w1, e1) * pair_dualform(w2, e2)
        if left != right:
            res.fail(f"duality: {w1.format()} ; {w2.format()}")
    return res


def check_pullback(space, samples, rng):
    _need_order(space, 1, "pullback")
    res = CheckResult("pullback", space, samples)
    one = FormalFunction.const(space, 1)
    for _ in range(samples):
        phi = random_morphism(space, space, rng)
        psi = random_morphism(space, space, rng)
        g1, g2 = random_function(space, rng, 4), random_function(space, rng, 4)
        res.checked += 1
        ok = pullback(phi, g1 * g2).agrees_with(pullback(phi, g1) * pullback(phi, g2))
        ok = ok and pullback(phi, one).agrees_with(one)
        ok = ok and pullback(phi, g1 + g2).agrees_with(pullback(phi, g1) + pullback(phi, g2))
        ok = ok and pullback(compose(psi, phi), g1).agrees_with(pullback(phi, pullback(psi, g1)))
        if space.nvars:
            w = random_form(space, rng.randint(0, space.nvars - 1), rng)
            ok = ok and pullback_form(phi, d(w)).agrees_with(d(pullback_form(phi, w)))
        if not ok:
            res.fail(f"phi: {phi.format()} ; g: {g1.format()}")
    return res


def check_jets(space, samples, rng, max_order=5):
    res = CheckResult("jets", space, samples)
    for _ in range(max(1, samples // 10)):
        point = random_point(space.n, rng)
        for r in range(1, max_order + 1):
            basis, rows = jet_pairing_matrix(space.n, space.k, point, r)
            res.checked += 1
            if rows != expected_jet_pairing(basis):
                res.fail(f"pairing matrix at {point}, order {r}")
            if jet_dimension(space.n, space.k, r) != comb(space.nvars + r - 1, r - 1):
                res.fail(f"jet dimension at order {r}")
    return res


def _ideal_element(space, point, power, rng):
    """A random product of ``power`` functions vanishing at (point, y = 0)."""
    f = FormalFunction.const(space, 1)
    for _ in range(power):
        g = random_function(space, rng, 2, 3)
        g = g - FormalFunction.const(space, g.value(point))
        if g.is_zero():
            g = FormalFunction.x(space, 1) - point[0] if space.n else FormalFunction.y(space, 1)
        f = f * g
    return f


def check_filtration(space, samples, rng, max_total=5):
    res = CheckResult("filtration", space, samples)
    if not space.nvars:
        return res
    lifted = space.with_order(max(space.order, max_total + 1))
    for _ in range(samples):
        r = rng.randint(0, 3)
        op = random_diffop(lifted, r, rng)
        g = random_function(lifted, rng, 3)
        res.checked += 1
        comm = op.commutator_with_fn(g)
        if comm.order() > r - 1:
            res.fail(f"order of [D, g] for D = {op.format()}")
        if not diffop_order_certificate(op, r, trials=2, rng=rng):
            res.fail(f"order certificate for D = {op.format()}")
        i = rng.randint(1, max(1, max_total - r))
        point = random_point(space.n, rng)
        f = _ideal_element(lifted, point, i + r, rng)
        if not jet_of(op.apply(f), point, i).is_zero():
            res.fail(f"D(I^{i + r}) not in I^{i} for D = {op.format()}")
    return res


SUITES = {
    "dd": check_dd,
    "leibniz": check_leibniz,
    "poincare-omega": check_poincare("omega"),
    "poincare-dual": check_poincare("dual"),
    "poincare-formal": check_poincare("formal"),
    "strong-omega": check_strong("omega"),
    "strong-dual": check_strong("dual"),
    "adjoint": check_adjoint,
    "kunneth": check_kunneth,
    "pullback": check_pullback,
    "jets": check_jets,
    "filtration": check_filtration,
}


def run_suite(name, space, samples=10, seed=0):
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name](space, samples, make_rng(seed))
