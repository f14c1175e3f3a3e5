"""Execution of type-checked scripts, producing a deterministic Report."""

import json
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

from ..algebra import (PiecewisePoly, Poly, TensorDensity, as_q, bump, hat, merge_sign,
                       q_json, q_str)
from ..checks import run_suite
from ..derham import Form, as_form, d as form_d, kunneth, pullback_form, wedge
from ..dual import Density, DualForm, boxtimes, dual_d, pair_density, pair_dualform, zeta
from ..errors import DomainError, FormacalcError, LimitExceeded
from ..formal import FormalFunction, Jet, Space, ff_external_product, ff_invert, jet_of
from ..generators import random_dualform, random_form, random_function
from ..homotopy import cs_homotopy, formal_homotopy, radial_homotopy
from ..morphisms import Morphism, compose, pullback
from .checker import DEFAULT_ORDER, RESERVED, Checker
from .syntax import (Check, Let, Num, Print, ScriptError, SpaceStmt, parse, print_expr,
                     print_stmt)


# ------------------------------------------------------------- runtime values

class PartialDensity:
    """Σ w (y*)^L Π_{axis} f_axis over a fixed set of covered x-axes (1-based)."""

    def __init__(self, space, axes, terms):
        self.space = space
        self.axes = frozenset(axes)
        self.terms = [(as_q(w), tuple(L), dict(fs)) for w, L, fs in terms if w]

    def __add__(self, other):
        return PartialDensity(self.space, self.axes, self.terms + other.terms)

    def scale(self, c):
        return PartialDensity(self.space, self.axes, [(w * c, L, fs) for w, L, fs in self.terms])

    def __mul__(self, other):
        out = []
        for w1, L1, f1 in self.terms:
            for w2, L2, f2 in other.terms:
                fs = dict(f1)
                for axis, f in f2.items():
                    fs[axis] = fs[axis] * f if axis in fs else f
                out.append((w1 * w2, tuple(a + b for a, b in zip(L1, L2)), fs))
        return PartialDensity(self.space, self.axes | other.axes, out)

    def power(self, p):
        out = PartialDensity(self.space, (), [(1, (0,) * self.space.k, {})])
        for _ in range(p):
            out = out * self
        return out

    def to_density(self):
        terms = {}
        for w, L, fs in self.terms:
            tau = TensorDensity(self.space.n, [(w, [fs[a + 1] for a in range(self.space.n)])])
            terms[L] = terms[L] + tau if L in terms else tau
        return Density(self.space, terms)

    def format(self):
        if len(self.axes) == self.space.n:
            return self.to_density().format()
        return f"<partial density on axes {sorted(self.axes)}>"

    def to_json(self):
        return {"type": "partial_density", "axes": sorted(self.axes),
                "terms": [{"weight": q_json(w), "L": list(L),
                           "factors": {str(a): f.to_json() for a, f in sorted(fs.items())}}
                          for w, L, fs in self.terms]}


class Star:
    """±e*_T, a wedge of dual basis covectors."""

    def __init__(self, space, sign, star):
        self.space, self.sign, self.star = space, as_q(sign), tuple(star)

    def wedge(self, other):
        s, merged = merge_sign(self.star, other.star)
        return Star(self.space, self.sign * other.sign * s, merged or self.star + other.star)

    def scale(self, c):
        return Star(self.space, self.sign * c, self.star)

    def format(self):
        names = self.space.names()
        body = "^".join(f"d{names[i]}*" for i in self.star)
        return f"{q_str(self.sign)}*{body}" if self.sign != 1 else body

    def to_json(self):
        return {"type": "star", "sign": q_json(self.sign), "star": list(self.star)}


def format_value(value):
    if isinstance(value, Fraction):
        return q_str(value)
    if isinstance(value, list):
        return "[" + ", ".join(q_str(v) for v in value) + "]"
    if isinstance(value, str):
        return value
    return value.format()


def value_json(value):
    if isinstance(value, Fraction):
        return {"type": "scalar", "value": q_json(value)}
    if isinstance(value, list):
        return {"type": "point", "value": [q_json(v) for v in value]}
    if isinstance(value, str):
        return {"type": "flag", "value": value}
    return value.to_json()


# --------------------------------------------------------------------- report

@dataclass
class Report:
    results: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    seed: int = 0
    wall_seconds: float = 0.0

    @property
    def exit_code(self):
        if self.diagnostics:
            return 2
        if any(r["kind"] == "error" or (r["kind"] == "check" and not r["passed"])
               for r in self.results):
            return 1
        return 0

    def content(self):
        """Deterministic part of the report (everything except timing)."""
        return {"seed": self.seed, "exit_code": self.exit_code,
                "diagnostics": self.diagnostics, "results": self.results}

    def to_json(self):
        data = self.content()
        data["timing"] = {"wall_seconds": self.wall_seconds}
        return data

    def dumps(self, with_timing=True):
        return json.dumps(self.to_json() if with_timing else self.content(), sort_keys=True,
                          indent=2)

    def text(self):
        lines = []
        for diag in self.diagnostics:
            lines.append(f"{diag['line']}:{diag['col']}: error[{diag['code']}]: "
                         f"{diag['message']}")
        for r in self.results:
            where = f"{r['line']}:{r['col']}"
            if r["kind"] == "value":
                lines.append(r["text"])
            elif r["kind"] == "check":
                status = "PASS" if r["passed"] else "FAIL"
                line = f"check {r['suite']} on {r['space']}: {status} ({r['checked']} samples)"
                if r.get("witness"):
                    line += f" witness: {r['witness']}"
                lines.append(line)
            else:
                lines.append(f"{where}: error[{r['code']}]: {r['message']}")
        return "\n".join(lines)


# ---------------------------------------------------------------- interpreter

class Interpreter:
    def __init__(self, seed=0, default_order=DEFAULT_ORDER, max_degree=None):
        self.seed = seed
        self.default_order = default_order
        self.max_degree = max_degree
        self.space = None
        self.env = {}
        self.checker = Checker(default_order)
        self.counter = 0
        self.rng = random.Random(seed)

    def run_script(self, script, report=None):
        report = report or Report(seed=self.seed)
        errors = []
        saved = (dict(self.checker.env), self.checker.space)
        for stmt in script.statements:
            before = len(self.checker.errors)
            self.checker.check_statement(stmt)
            errors.extend(self.checker.errors[before:])
        if errors:
            # nothing runs, so forget the bindings the checker just recorded
            self.checker.env, self.checker.space = saved
            report.diagnostics.extend(e.to_json() for e in errors)
            return report
        for stmt in script.statements:
            self.execute(stmt, report)
        return report

    def statement_rng(self):
        self.counter += 1
        return random.Random(self.seed * 1_000_003 + self.counter)

    def execute(self, stmt, report):
        line, col = stmt.pos
        try:
            if isinstance(stmt, SpaceStmt):
                order = stmt.order if stmt.order is not None else self.default_order
                self.space = Space(stmt.n, stmt.k, order)
                self.statement_rng()
            elif isinstance(stmt, Let):
                self.rng = self.statement_rng()
                self.env[stmt.name] = self.eval(stmt.expr)
            elif isinstance(stmt, Print):
                self.rng = self.statement_rng()
                value = self.eval(stmt.expr)
                report.results.append({"kind": "value", "line": line, "col": col,
                                       "source": print_expr(stmt.expr),
                                       "text": format_value(value),
                                       "value": value_json(value)})
            elif isinstance(stmt, Check):
                rng = self.statement_rng()
                opts = dict(stmt.options)
                n, k = opts.get("space", (self.space.n, self.space.k) if self.space else (0, 0))
                order = opts.get("order", self.space.order if self.space else self.default_order)
                space = Space(n, k, order)
                samples = opts.get("samples", 10)
                seed = opts.get("seed", rng.randrange(2 ** 31))
                result = run_suite("-".join(stmt.suite), space, samples, seed)
                entry = {"kind": "check", "line": line, "col": col, "seed": seed}
                entry.update(result.to_json())
                entry["space"] = str(space)
                report.results.append(entry)
        except FormacalcError as err:
            report.results.append({"kind": "error", "line": line, "col": col,
                                   "code": err.code, "message": str(err),
                                   "statement": print_stmt(stmt)})
        except ZeroDivisionError:
            report.results.append({"kind": "error", "line": line, "col": col,
                                   "code": DomainError.code, "message": "division by zero",
                                   "statement": print_stmt(stmt)})
        except Exception as err:  # a bug, but keep the rest of the script running
            report.results.append({"kind": "error", "line": line, "col": col,
                                   "code": FormacalcError.code,
                                   "message": f"internal error: {type(err).__name__}: {err}",
                                   "statement": print_stmt(stmt)})

    # ----------------------------------------------------------- evaluation
    def limit(self, value):
        if self.max_degree is None:
            return value
        polys = []
        if isinstance(value, FormalFunction):
            polys = [value.poly]
        elif isinstance(value, Form):
            polys = list(value.terms.values())
        for p in polys:
            if p.degree() > self.max_degree:
                raise LimitExceeded(f"polynomial degree {p.degree()} exceeds the limit "
                                    f"{self.max_degree}")
        return value

    def eval(self, node):
        return self.limit(getattr(self, "e_" + type(node).__name__)(node))

    def e_Num(self, node):
        return Fraction(node.value)

    def e_ListLit(self, node):
        return [self.eval(item) for item in node.items]

    def e_Name(self, node):
        name = node.ident
        if name in self.env:
            return self.env[name]
        if name == "norm":
            return "norm"
        m = RESERVED.match(name)
        prefix = m.group(1)
        index = int(name[len(prefix):])
        space = self.space
        if prefix == "x":
            return FormalFunction.x(space, index)
        if prefix == "y":
            return FormalFunction.y(space, index)
        if prefix == "dx":
            return Form.dx(space, index)
        if prefix == "dy":
            return Form.dy(space, index)
        if prefix == "ystar":
            L = tuple(1 if j == index - 1 else 0 for j in range(space.k))
            return PartialDensity(space, (), [(1, L, {})])
        joint = index - 1 if prefix == "dxstar" else space.n + index - 1
        return Star(space, 1, (joint,))

    def e_Neg(self, node):
        return self.scale(self.eval(node.operand), -1)

    @staticmethod
    def scale(value, c):
        if isinstance(value, Fraction):
            return value * c
        if isinstance(value, Jet):
            return value * as_q(c)
        return value.scale(c)

    def e_BinOp(self, node):
        left = self.eval(node.left)
        op = node.op
        if op == "^" and isinstance(node.right, Num):
            p = node.right.value
            if isinstance(left, PartialDensity):
                return left.power(p)
            if isinstance(left, Jet):
                out = Jet(left.n, left.k, left.basepoint, left.order, Poly.one(left.n + left.k))
                for _ in range(p):
                    out = out * left
                return out
            return left ** p
        right = self.eval(node.right)
        if op == "+":
            return self.add(left, right)
        if op == "-":
            return self.add(left, self.scale(right, -1))
        if op == "*":
            return self.mul(left, right)
        if op == "/":
            if right == 0:
                raise DomainError("division by zero")
            return self.scale(left, 1 / right)
        return self.wedge(left, right)

    @staticmethod
    def add(a, b):
        if isinstance(a, Fraction) and isinstance(b, Fraction):
            return a + b
        if isinstance(a, Fraction):
            a, b = b, a
        if isinstance(b, Fraction):
            return a + FormalFunction.const(a.space, b)
        if isinstance(a, FormalFunction) and isinstance(b, Form):
            return Form.function(a) + b
        return a + b

    def mul(self, a, b):
        if isinstance(a, Fraction) and isinstance(b, Fraction):
            return a * b
        if isinstance(a, Fraction):
            return self.scale(b, a)
        if isinstance(b, Fraction):
            return self.scale(a, b)
        if isinstance(a, FormalFunction) and isinstance(b, FormalFunction):
            return a * b
        if isinstance(a, (FormalFunction, Form)) and isinstance(b, (FormalFunction, Form)):
            return wedge(a, b)
        if isinstance(a, PartialDensity) and isinstance(b, PartialDensity):
            return a * b
        if isinstance(a, Star) or isinstance(b, Star):
            dens, star = (a, b) if isinstance(b, Star) else (b, a)
            if isinstance(dens, PartialDensity):
                dens = dens.to_density()
            if not star.sign:
                return DualForm.zero(dens.space, dens.space.nvars - len(star.star))
            return DualForm.basis(dens.space, star.star, dens.scale(star.sign))
        return a * b

    @staticmethod
    def wedge(a, b):
        if isinstance(a, Star):
            return a.wedge(b)
        return wedge(a, b)

    def e_Pull(self, node):
        phi = self.eval(node.morphism)
        arg = self.eval(node.arg)
        if isinstance(arg, FormalFunction):
            return pullback(phi, arg)
        return pullback_form(phi, arg)

    def e_MorphismLit(self, node):
        src = node.source
        order = src[2] if len(src) == 3 else (
            self.space.order if self.space is not None else self.default_order)
        source = Space(src[0], src[1], order)
        target = Space(node.target[0], node.target[1], order)
        saved = self.space
        self.space = source
        try:
            images = {}
            for name, e in node.assigns:
                v = self.eval(e)
                images[name] = FormalFunction.const(source, v) if isinstance(v, Fraction) else v
        finally:
            self.space = saved
        return Morphism(source, target,
                        [images[f"x'{i + 1}"] for i in range(target.n)],
                        [images[f"y'{j + 1}"] for j in range(target.k)])

    def e_Call(self, node):
        args = [self.eval(a) for a in node.args]
        return getattr(self, "c_" + node.func)(node, *args)

    # builtins
    def c_d(self, node, x):
        if isinstance(x, DualForm):
            return dual_d(x)
        return form_d(x)

    def c_wedge(self, node, a, b):
        return self.wedge(a, b)

    def c_pair(self, node, a, b):
        if isinstance(b, PartialDensity):
            b = b.to_density()
        if isinstance(b, Density):
            return pair_density(a, b)
        return pair_dualform(a, b)

    def c_kunneth(self, node, a, b):
        return kunneth(a, b)

    def c_boxtimes(self, node, a, b):
        return boxtimes(a, b)

    def c_extprod(self, node, a, b):
        return ff_external_product(a, b)

    def c_jet(self, node, f, point, r):
        if r.denominator != 1 or r < 1:
            raise DomainError("jet order must be a positive integer")
        return jet_of(f, point, int(r))

    def c_value(self, node, f, point):
        return f.value(point)

    def c_invert(self, node, f, point, r=None):
        if r is not None and (r.denominator != 1 or r < 1):
            raise DomainError("inversion order must be a positive integer")
        return ff_invert(f, point, None if r is None else int(r))

    def c_radial(self, node, w):
        out = radial_homotopy(w)
        return FormalFunction(out.space, out.terms.get((), Poly.zero(out.space.nvars)),
                              out.known_order) if out.degree == 0 else out

    def c_formal_h(self, node, w):
        out = formal_homotopy(w)
        return FormalFunction(out.space, out.terms.get((), Poly.zero(1)), out.known_order)

    def c_cs(self, node, eta):
        return cs_homotopy(eta)

    def c_zeta(self, node, eta):
        return zeta(eta)

    def c_density(self, node, x):
        if isinstance(x, Fraction):
            x = PartialDensity(self.space, (), [(x, (0,) * self.space.k, {})])
        return x.to_density()

    def c_top(self, node, dens):
        return DualForm.top(dens)

    def c_dual(self, node, dens):
        return DualForm(dens.space, dens.space.nvars, {(): dens})

    def _profile(self, node, f):
        axis = dict(node.kwargs).get("axis")
        axis = axis.value if axis is not None else 1
        return PartialDensity(self.space, (axis,), [(1, (0,) * self.space.k, {axis: f})])

    def c_bump(self, node, a, b, flag=None):
        return self._profile(node, bump(a, b, normalize=flag == "norm"))

    def c_hat(self, node, a, b, peak=1):
        return self._profile(node, hat(a, b, peak))

    def c_compose(self, node, psi, phi):
        return compose(psi, phi)

    def c_rand_function(self, node, deg):
        return random_function(self.space, self.rng, int(deg))

    def c_rand_form(self, node, deg):
        return random_form(self.space, int(deg), self.rng)

    def c_rand_dualform(self, node, deg):
        max_y = min(2, self.space.order) if self.space.k else 0
        return random_dualform(self.space, int(deg), self.rng, max_y=max_y)


def run_text(text, seed=0, default_order=DEFAULT_ORDER, max_degree=None):
    """Parse, type-check and run a script; always returns a Report."""
    start = time.perf_counter()
    report = Report(seed=seed)
    try:
        script = parse(text)
    except ScriptError as err:
        report.diagnostics.append(err.to_json())
        report.wall_seconds = time.perf_counter() - start
        return report
    Interpreter(seed, default_order, max_degree).run_script(script, report)
    report.wall_seconds = time.perf_counter() - start
    return report
