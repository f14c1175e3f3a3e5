"""Acceptance suite: nine exact, property-based criteria.

Every check is an equality of rationals; nothing is compared with a tolerance.
Each criterion prints one PASS/FAIL line, and conftest.py repeats the lines in
the terminal summary. ``python tests/test_acceptance.py`` prints just the lines.
"""

import functools
import itertools
import json
import math
import pathlib
import random
import re
import sys
import time
from fractions import Fraction as Q

import sympy

sys.path.insert(0, str(pathlib.Path(__file__).parent))

from formacalc.algebra import Poly, lambda_nk  # noqa: E402
from formacalc.cli.interpreter import run_text  # noqa: E402
from formacalc.cli.syntax import parse, print_script  # noqa: E402
from formacalc.derham import Form, d, kunneth, pullback_form, wedge  # noqa: E402
from formacalc.dual import boxtimes, dual_d, pair_dualform, zeta  # noqa: E402
from formacalc.formal import (DiffOp, FormalFunction, Space, jet_dimension, jet_of,  # noqa: E402
                              jet_pairing_matrix)
from formacalc.generators import (random_diffop, random_dualform, random_form,  # noqa: E402
                                  random_function, random_morphism, random_point)
from formacalc.homotopy import dual_data, omega_data  # noqa: E402
from formacalc.morphisms import compose, pullback  # noqa: E402
from support import dual_basis, form_basis  # noqa: E402

RESULTS = {}
CORPUS = pathlib.Path(__file__).parent / "corpus"


def criterion(number, title, budget=None):
    """Record one PASS/FAIL line per criterion; a time budget is part of the check."""
    def wrap(fn):
        @functools.wraps(fn)
        def run():
            start = time.perf_counter()
            try:
                detail = fn()
                elapsed = time.perf_counter() - start
                if budget is not None:
                    assert elapsed < budget, f"took {elapsed:.1f}s, budget {budget}s"
            except BaseException as err:
                elapsed = time.perf_counter() - start
                line = f"criterion {number} FAIL  {title} ({elapsed:.1f}s): {err}"
                RESULTS[number] = line
                print(line)
                raise
            budget_note = f" < {budget}s" if budget is not None else ""
            line = f"criterion {number} PASS  {title} ({elapsed:.1f}s{budget_note}): {detail}"
            RESULTS[number] = line
            print(line)
        return run
    return wrap


def spaces(total, orders):
    """Every (n, k) with n + k <= total, at each truncation in ``orders`` when k > 0."""
    for n in range(total + 1):
        for k in range(total + 1 - n):
            for order in (orders if k else (0,)):
                yield Space(n, k, order)


# --------------------------------------------------------------------------- 1

@criterion(1, "d∘d = 0 and graded Leibniz", budget=30)
def test_criterion_1_dd_and_leibniz():
    checked = nspaces = 0
    # truncation 1 leaves d∘d without any known coefficients, so d∘d starts at 2
    for space in spaces(5, (1, 2, 3, 4)):
        nspaces += 1
        rng = random.Random(hash((space.n, space.k, space.order)) & 0xffff)
        nv = space.nvars
        for i in range(200):
            r = i % (nv + 1)
            a = random_form(space, r, rng)
            b = random_form(space, rng.randint(0, nv - r), rng)
            if not space.k or space.order >= 2:
                assert d(d(a)).is_zero(), a
            lhs = d(wedge(a, b))
            rhs = wedge(d(a), b) + wedge(a, d(b)).scale((-1) ** r)
            assert lhs.agrees_with(rhs), (a, b)
            checked += 1
    return f"{checked} forms over {nspaces} truncated spaces (n+k <= 5)"


# --------------------------------------------------------------------------- 2

@criterion(2, "Poincaré homotopy dK + Kd = id - eps∘g, and d∘K∘d = d", budget=60)
def test_criterion_2_poincare_homotopy():
    checked = 0
    for space in spaces(4, (2, 3, 4)):
        data = omega_data(space)
        rng = random.Random(space.n * 100 + space.k * 10 + space.order)
        for deg in data.degrees:
            for _ in range(100):
                u = data.sampler(rng, deg)
                assert data.residual(u).is_zero(), u
                du = data.apply_d(u)
                if du is not None:
                    assert (data.apply_d(data.apply_h(du)) - du).is_zero(), u
                checked += 1
    return f"{checked} forms, 100 per degree, every (n,k) with n+k <= 4"


# --------------------------------------------------------------------------- 3

@criterion(3, "compactly supported homotopy dH + Hd = id - alpha∘zeta", budget=120)
def test_criterion_3_compact_support_homotopy():
    checked = 0
    for n, k in [(1, 0), (0, 1), (1, 1), (2, 1)]:
        space = Space(n, k, 3)
        data = dual_data(space)
        rng = random.Random(31 * n + k)
        for c in (Q(1), Q(-5, 3)):
            assert zeta(data.eps(c)) == c
        for deg in data.degrees:
            for _ in range(50):
                eta = data.sampler(rng, deg)
                assert data.residual(eta).is_zero(), eta
                checked += 1
    return f"{checked} piecewise-polynomial dual forms, 50 per degree"


# --------------------------------------------------------------------------- 4

@criterion(4, "adjointness <dual_d eta, w> = (-1)^(r+1) <eta, dw>")
def test_criterion_4_adjointness():
    checked = 0
    for space in spaces(3, (3,)):
        if not space.nvars:
            continue
        rng = random.Random(space.n * 4 + space.k)
        for i in range(200):
            r = i % space.nvars
            w = random_form(space, r, rng)
            eta = random_dualform(space, r + 1, rng)
            assert pair_dualform(w, dual_d(eta)) == (-1) ** (r + 1) * pair_dualform(d(w), eta)
            checked += 1
    return f"{checked} pairs, 200 per space, n+k <= 3"


# --------------------------------------------------------------------------- 5

def exterior_count(n, k, r):
    """Basis size of degree-r forms on (n, k), by listing dz-subsets."""
    return sum(1 for a in range(r + 1)
               for _ in itertools.combinations(range(n), a)
               for _ in itertools.combinations(range(k), r - a))


@criterion(5, "Künneth: Ψ∘d, dimension counts, and ⊠ duality on full bases")
def test_criterion_5_kunneth():
    factors = [Space(n, k, 3) for n in range(4) for k in range(4 - n)]
    rng = random.Random(5)
    commuting = basis_pairs = 0
    for s1, s2 in itertools.product(factors, repeat=2):
        prod = s1.product(s2)
        for _ in range(3):
            r1 = rng.randint(0, s1.nvars)
            a, b = random_form(s1, r1, rng), random_form(s2, rng.randint(0, s2.nvars), rng)
            assert d(kunneth(a, b)).agrees_with(kunneth(d(a), b)
                                                + kunneth(a, d(b)).scale((-1) ** r1))
            commuting += 1
        # Ψ sends basis pairs to distinct ± basis elements covering Λ^r of the product
        for r in range(prod.nvars + 1):
            images = set()
            for r1 in range(r + 1):
                for i1, j1 in lambda_nk(s1.n, s1.k, r1):
                    for i2, j2 in lambda_nk(s2.n, s2.k, r - r1):
                        img = kunneth(Form.basis(s1, i1, j1), Form.basis(s2, i2, j2))
                        [(key, coeff)] = img.terms.items()
                        assert coeff.constant_term() in (1, -1) and coeff.degree() == 0
                        images.add(key)
                        basis_pairs += 1
            expected = sum(exterior_count(s1.n, s1.k, r1) * exterior_count(s2.n, s2.k, r - r1)
                           for r1 in range(r + 1))
            assert len(images) == expected == exterior_count(prod.n, prod.k, r)
            assert expected == math.comb(prod.nvars, r) == len(lambda_nk(prod.n, prod.k, r))

    duality = 0
    small = [Space(1, 0, 2), Space(0, 1, 2), Space(1, 1, 2)]
    for s1, s2 in itertools.product(small, repeat=2):
        for r1 in range(s1.nvars + 1):
            for r2 in range(s2.nvars + 1):
                w1s, e1s = form_basis(s1, r1), dual_basis(s1, r1)
                w2s, e2s = form_basis(s2, r2), dual_basis(s2, r2)
                p1 = [[pair_dualform(w, e) for e in e1s] for w in w1s]
                p2 = [[pair_dualform(w, e) for e in e2s] for w in w2s]
                for (a, w1), (b, e1) in itertools.product(enumerate(w1s), enumerate(e1s)):
                    for (c, w2), (q, e2) in itertools.product(enumerate(w2s), enumerate(e2s)):
                        lhs = pair_dualform(kunneth(w1, w2), boxtimes(e1, e2))
                        assert lhs == (-1) ** (r1 * r2) * p1[a][b] * p2[c][q]
                        duality += 1
    return (f"{commuting} d-commutations, {basis_pairs} basis images, "
            f"{duality} duality pairings")


# --------------------------------------------------------------------------- 6

@criterion(6, "pullback: unital homomorphism, φ♮d = dφ♮, functoriality")
def test_criterion_6_pullback():
    pairs = [((1, 1), (1, 1)), ((2, 1), (1, 1)), ((1, 0), (2, 0)), ((1, 2), (2, 1)),
             ((0, 2), (0, 1))]
    triples = 0
    for src, tgt in pairs:
        source, target = Space(*src, 4), Space(*tgt, 4)
        rng = random.Random(sum(src) * 10 + sum(tgt))
        one = FormalFunction.const(target, 1)
        for _ in range(25):
            phi = random_morphism(source, target, rng, max_degree=4, nterms=2)
            psi = random_morphism(target, source, rng, max_degree=4, nterms=2)
            g1, g2 = random_function(target, rng, 4), random_function(target, rng, 4)
            assert pullback(phi, one).agrees_with(FormalFunction.const(source, 1))
            assert pullback(phi, g1 * g2).agrees_with(pullback(phi, g1) * pullback(phi, g2))
            assert pullback(phi, g1 + g2.scale(3)).agrees_with(
                pullback(phi, g1) + pullback(phi, g2).scale(3))
            h = random_function(source, rng, 4)
            assert pullback(compose(psi, phi), h).agrees_with(pullback(phi, pullback(psi, h)))
            w = random_form(target, rng.randint(0, target.nvars - 1), rng, max_degree=4)
            assert pullback_form(phi, d(w)).agrees_with(d(pullback_form(phi, w)))
            v = random_form(source, rng.randint(0, source.nvars), rng, max_degree=4)
            assert pullback_form(compose(psi, phi), v).agrees_with(
                pullback_form(phi, pullback_form(psi, v)))
            triples += 1
    return f"{triples} (φ, ψ, g) triples with degree <= 4 data"


# --------------------------------------------------------------------------- 7

def sympy_pairing(n, k, point, exps):
    """Independent pairing matrix: differentiate (z - a)^e2 with sympy and evaluate at a."""
    zs = sympy.symbols(f"z0:{n + k}")
    base = dict(zip(zs, [sympy.Rational(a.numerator, a.denominator) for a in point]
                    + [0] * k))
    rows = []
    for e in exps:
        row = []
        for e2 in exps:
            f = sympy.Mul(*[(z - base[z]) ** p for z, p in zip(zs, e2)])
            for z, p in zip(zs, e):
                f = sympy.diff(f, z, p) if p else f
            row.append(Q(str(f.subs(base))))
        rows.append(row)
    return rows


@criterion(7, "jet/point-distribution pairing is diagonal with entries I!J!")
def test_criterion_7_jet_duality():
    rng = random.Random(7)
    entries = 0
    for n, k in [(n, k) for n in range(4) for k in range(4 - n)]:
        listed = [e for e in itertools.product(range(5), repeat=n + k) if sum(e) < 5]
        for _ in range(2):
            point = random_point(n, rng)
            basis, rows = jet_pairing_matrix(n, k, point, 5)
            assert sorted(basis) == sorted(listed)
            for e, row in zip(basis, rows):
                for e2, v in zip(basis, row):
                    want = math.prod(math.factorial(p) for p in e) if e == e2 else 0
                    assert v == want
                    entries += 1
            if n + k <= 2:
                assert rows == sympy_pairing(n, k, point, basis)
        for r in range(1, 6):
            count = sum(1 for e in itertools.product(range(r), repeat=n + k) if sum(e) < r)
            assert jet_dimension(n, k, r) == count
    return f"{entries} matrix entries, |I|+|J| < 5, n+k <= 3"


# --------------------------------------------------------------------------- 8

def ideal_generator(space, point, exps):
    """(x - a)^I y^J as a formal function."""
    shift = [-a for a in point] + [0] * space.k
    return FormalFunction(space, Poly.monomial(exps).shift(shift))


@criterion(8, "operator filtration: ord[D,f] <= ord D - 1 and D(I^(i+r)) in I^i")
def test_criterion_8_filtration():
    rng = random.Random(8)
    commutators = drops = 0
    for n, k in [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (2, 1)]:
        space = Space(n, k, 12)
        nv = space.nvars
        for r in range(6):
            for _ in range(4):
                op = random_diffop(space, r, rng)
                f = random_function(space, rng, 3)
                assert op.commutator_with_fn(f).order() <= r - 1
                commutators += 1
            ops = [e for e in itertools.product(range(r + 1), repeat=nv) if sum(e) <= r]
            for i in range(1, 6 - r):
                point = random_point(n, rng)
                gens = [e for e in itertools.product(range(i + r + 1), repeat=nv)
                        if sum(e) == i + r]
                for alpha in ops:
                    coeff = random_function(space, rng, 2) + 1
                    op = DiffOp.partial(space, alpha[:n], alpha[n:], coeff)
                    for beta in gens:
                        f = ideal_generator(space, point, beta) * random_function(space, rng, 2)
                        assert jet_of(op.apply(f), point, i).is_zero(), (alpha, beta, i)
                        drops += 1
    return f"{commutators} commutators, {drops} ideal images, i+r <= 5"


# --------------------------------------------------------------------------- 9

@criterion(9, "CLI: round trip, deterministic reports, distinct error codes")
def test_criterion_9_cli():
    valid = sorted((CORPUS / "valid").glob("*.fc"))
    invalid = sorted((CORPUS / "invalid").glob("*.fc"))
    assert len(valid) >= 50
    for path in valid:
        script = parse(path.read_text())
        printed = print_script(script)
        assert parse(printed) == script and print_script(parse(printed)) == printed, path.name
        first, second = run_text(path.read_text(), seed=42), run_text(path.read_text(), seed=42)
        assert first.exit_code == 0, path.name
        assert first.dumps(with_timing=False) == second.dumps(with_timing=False), path.name
        json.loads(first.dumps())
    seen = set()
    for path in invalid:
        text = path.read_text()
        code = re.search(r"// expect: (E_[A-Z_]+)", text).group(1)
        limit = re.search(r"// max-degree: (\d+)", text)
        report = run_text(text, max_degree=int(limit.group(1)) if limit else None)
        got = [x["code"] for x in report.diagnostics]
        got += [x["code"] for x in report.results if x["kind"] == "error"]
        assert got[:1] == [code], path.name
        assert report.exit_code != 0
        seen.add(code)
    assert len(seen) >= 10
    return (f"{len(valid)} scripts round-trip and replay identically; "
            f"{len(invalid)} negative scripts hit {len(seen)} distinct codes")


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except BaseException:
                failed += 1
    sys.exit(1 if failed else 0)
