"""Static type checking of scripts.

Every expression gets a type (kind, space, degree) before anything runs, so
unbound names, kind errors, space mismatches and degree mismatches are all
reported up front with their source positions.
"""

import re
from dataclasses import dataclass

from ..checks import SUITES
from ..formal import Space
from .syntax import (BinOp, Call, Check, Let, ListLit, MorphismLit, Name, Neg, Num, Print,
                     Pull, ScriptError, SpaceStmt)

DEFAULT_ORDER = 3
RESERVED = re.compile(r"^(x|y|dx|dy|ystar|dxstar|dystar)[0-9]+$")
CHECK_OPTIONS = {"space", "order", "samples", "seed"}
NUMERIC = {"scalar", "function", "form", "pdens", "density", "dualform", "jet", "star"}


@dataclass(frozen=True)
class Ty:
    kind: str
    space: Space = None
    degree: int = None
    extra: object = None
    target: Space = None

    def describe(self):
        text = self.kind
        if self.degree is not None:
            text += f"[{self.degree}]"
        if self.space is not None:
            text += f" on {self.space}"
        if self.target is not None:
            text += f" -> {self.target}"
        return text


ANY = Ty("any")
SCALAR = Ty("scalar")


def _err(code, message, node):
    line, col = getattr(node, "pos", (0, 0))
    return ScriptError(code, message, line, col)


class Checker:
    def __init__(self, default_order=DEFAULT_ORDER):
        self.default_order = default_order
        self.space = None
        self.env = {}
        self.errors = []

    # ------------------------------------------------------------ statements
    def check_script(self, script):
        for stmt in script.statements:
            self.check_statement(stmt)
        return self.errors

    def check_statement(self, stmt):
        try:
            if isinstance(stmt, SpaceStmt):
                order = stmt.order if stmt.order is not None else self.default_order
                self.space = Space(stmt.n, stmt.k, order)
            elif isinstance(stmt, Let):
                if RESERVED.match(stmt.name) or stmt.name == "norm":
                    self.env[stmt.name] = ANY
                    raise _err("E_TYPE", f"{stmt.name!r} is a reserved name", stmt)
                try:
                    self.env[stmt.name] = self.expr(stmt.expr)
                except ScriptError:
                    self.env[stmt.name] = ANY
                    raise
            elif isinstance(stmt, Print):
                self.expr(stmt.expr)
            elif isinstance(stmt, Check):
                self.check_command(stmt)
        except ScriptError as err:
            self.errors.append(err)

    def check_command(self, stmt):
        suite = "-".join(stmt.suite)
        if suite not in SUITES:
            raise _err("E_SUITE", f"unknown check suite {suite!r}", stmt)
        for key, value in stmt.options:
            if key not in CHECK_OPTIONS:
                raise _err("E_SYNTAX", f"unknown check option {key!r}", stmt)
            if (key == "space") != isinstance(value, tuple):
                raise _err("E_TYPE", f"bad value for check option {key!r}", stmt)
        opts = dict(stmt.options)
        if "space" not in opts and self.space is None:
            raise _err("E_SPACE", "check needs space=(n,k) or a preceding space declaration",
                       stmt)

    # ----------------------------------------------------------- expressions
    def need_space(self, node):
        if self.space is None:
            raise _err("E_SPACE", "no space declared yet", node)
        return self.space

    def expr(self, node):
        method = getattr(self, "t_" + type(node).__name__)
        return method(node)

    def t_Num(self, node):
        return SCALAR

    def t_ListLit(self, node):
        for item in node.items:
            self.expect(item, "scalar")
        return Ty("point", extra=len(node.items))

    def t_Name(self, node):
        name = node.ident
        if name in self.env:
            return self.env[name]
        if name == "norm":
            return Ty("flag")
        m = RESERVED.match(name)
        if m:
            space = self.need_space(node)
            prefix = m.group(1)
            index = int(name[len(prefix):])
            bound = space.n if prefix in ("x", "dx", "dxstar") else space.k
            if not 1 <= index <= bound:
                raise _err("E_UNBOUND", f"{name} does not exist on {space}", node)
            if prefix in ("x", "y"):
                return Ty("function", space)
            if prefix in ("dx", "dy"):
                return Ty("form", space, 1)
            if prefix == "ystar":
                return Ty("pdens", space, extra=frozenset())
            return Ty("star", space, extra=1)
        raise _err("E_UNBOUND", f"unbound name {name!r}", node)

    def t_Neg(self, node):
        t = self.expr(node.operand)
        if t.kind not in NUMERIC | {"any"}:
            raise _err("E_TYPE", f"cannot negate a {t.describe()}", node)
        return t

    def same_space(self, a, b, node):
        if a.space is not None and b.space is not None and a.space != b.space:
            raise _err("E_SPACE", f"space mismatch: {a.space} vs {b.space}", node)

    def t_BinOp(self, node):
        left = self.expr(node.left)
        if node.op == "^" and isinstance(node.right, Num):
            if left.kind in ("scalar", "function", "pdens", "jet", "any"):
                return left
            raise _err("E_TYPE", f"cannot raise a {left.describe()} to a power", node)
        right = self.expr(node.right)
        if "any" in (left.kind, right.kind):
            return ANY
        op = node.op
        if op in ("+", "-"):
            return self.t_sum(left, right, node)
        if op == "*":
            return self.t_product(left, right, node)
        if op == "/":
            if right.kind != "scalar" or left.kind not in NUMERIC:
                raise _err("E_TYPE", f"cannot divide {left.describe()} by {right.describe()}",
                           node)
            return left
        return self.t_wedge(left, right, node)

    def t_sum(self, left, right, node):
        kinds = {left.kind, right.kind}
        if kinds == {"scalar"}:
            return SCALAR
        if kinds <= {"scalar", "function"}:
            self.same_space(left, right, node)
            return left if left.kind == "function" else right
        if kinds <= {"function", "form", "scalar"} and "form" in kinds:
            self.same_space(left, right, node)
            degrees = {t.degree if t.kind == "form" else 0 for t in (left, right)}
            if len(degrees) > 1:
                raise _err("E_DEGREE", f"cannot add {left.describe()} and {right.describe()}",
                           node)
            return left if left.kind == "form" else right
        if left.kind == right.kind and left.kind in ("pdens", "density", "dualform", "jet"):
            self.same_space(left, right, node)
            if left.kind == "pdens" and left.extra != right.extra:
                raise _err("E_TYPE", "densities over different axis sets cannot be added",
                           node)
            if left.kind == "dualform" and left.degree != right.degree:
                raise _err("E_DEGREE", f"cannot add {left.describe()} and {right.describe()}",
                           node)
            if left.kind == "jet" and left.extra != right.extra:
                raise _err("E_SPACE", "jets of different shapes", node)
            return left
        raise _err("E_TYPE", f"cannot add {left.describe()} and {right.describe()}", node)

    def t_product(self, left, right, node):
        if left.kind == "scalar" and right.kind in NUMERIC:
            return right
        if right.kind == "scalar" and left.kind in NUMERIC:
            return left
        kinds = (left.kind, right.kind)
        if set(kinds) <= {"function", "form"}:
            self.same_space(left, right, node)
            if kinds == ("function", "function"):
                return left
            return self.t_wedge(left, right, node)
        if kinds == ("pdens", "pdens"):
            self.same_space(left, right, node)
            return Ty("pdens", left.space, extra=left.extra | right.extra)
        if set(kinds) in ({"pdens", "star"}, {"density", "star"}):
            dens, star = (left, right) if left.kind != "star" else (right, left)
            self.same_space(dens, star, node)
            self.complete(dens, node)
            return Ty("dualform", star.space, star.space.nvars - star.extra)
        if kinds == ("jet", "jet"):
            return left
        raise _err("E_TYPE", f"cannot multiply {left.describe()} by {right.describe()}", node)

    def t_wedge(self, left, right, node):
        if left.kind == right.kind == "star":
            self.same_space(left, right, node)
            return Ty("star", left.space, extra=left.extra + right.extra)
        if {left.kind, right.kind} <= {"function", "form"}:
            self.same_space(left, right, node)
            deg = sum(t.degree if t.kind == "form" else 0 for t in (left, right))
            return Ty("form", left.space, deg)
        raise _err("E_TYPE", f"cannot wedge {left.describe()} with {right.describe()}", node)

    def complete(self, dens, node):
        if dens.kind == "pdens" and dens.extra != frozenset(range(1, dens.space.n + 1)):
            raise _err("E_TYPE", "a density needs one compactly supported factor per x-axis",
                       node)

    def t_Pull(self, node):
        m = self.expr(node.morphism)
        arg = self.expr(node.arg)
        if m.kind == "any" or arg.kind == "any":
            return ANY
        if m.kind != "morphism":
            raise _err("E_TYPE", f"# needs a morphism, got {m.describe()}", node)
        if arg.kind not in ("function", "form"):
            raise _err("E_TYPE", f"cannot pull back a {arg.describe()}", node)
        if not m.target.compatible(arg.space):
            raise _err("E_SPACE", f"{arg.describe()} does not live on the target {m.target}",
                       node)
        return Ty(arg.kind, m.space, arg.degree)

    def t_MorphismLit(self, node):
        src = node.source
        order = src[2] if len(src) == 3 else (
            self.space.order if self.space is not None else self.default_order)
        source = Space(src[0], src[1], order)
        target = Space(node.target[0], node.target[1], order)
        wanted = [f"x'{i + 1}" for i in range(target.n)] + [f"y'{j + 1}" for j in range(target.k)]
        names = [name for name, _ in node.assigns]
        if sorted(names) != sorted(wanted) or len(set(names)) != len(names):
            raise _err("E_TYPE", f"morphism must assign exactly {', '.join(wanted) or 'nothing'}",
                       node)
        saved = self.space
        self.space = source
        try:
            for _, e in node.assigns:
                t = self.expr(e)
                if t.kind not in ("function", "scalar", "any"):
                    raise _err("E_TYPE", f"coordinate images must be functions, got "
                               f"{t.describe()}", e)
                if t.kind == "function":
                    self.same_space(t, Ty("function", source), e)
        finally:
            self.space = saved
        return Ty("morphism", source, target=target)

    # ---------------------------------------------------------------- calls
    def expect(self, node, *kinds):
        t = self.expr(node)
        if t.kind != "any" and t.kind not in kinds:
            raise _err("E_TYPE", f"expected {' or '.join(kinds)}, got {t.describe()}", node)
        return t

    def arity(self, node, lo, hi=None):
        hi = lo if hi is None else hi
        if not lo <= len(node.args) <= hi:
            want = str(lo) if lo == hi else f"{lo}..{hi}"
            raise _err("E_TYPE", f"{node.func} takes {want} arguments, got {len(node.args)}",
                       node)
        allowed = {"bump": {"axis"}, "hat": {"axis"}}.get(node.func, set())
        for key, _ in node.kwargs:
            if key not in allowed:
                raise _err("E_TYPE", f"{node.func} has no keyword {key!r}", node)

    def t_Call(self, node):
        method = getattr(self, "c_" + node.func, None)
        if method is None:
            raise _err("E_UNBOUND", f"unknown function {node.func!r}", node)
        return method(node)

    def c_d(self, node):
        self.arity(node, 1)
        t = self.expect(node.args[0], "function", "form", "dualform")
        if t.kind == "any":
            return ANY
        if t.kind == "function":
            return Ty("form", t.space, 1)
        if t.kind == "form":
            return Ty("form", t.space, t.degree + 1)
        if t.degree == 0:
            raise _err("E_DEGREE", "d of a dual form of degree 0 is undefined", node)
        return Ty("dualform", t.space, t.degree - 1)

    def c_wedge(self, node):
        self.arity(node, 2)
        a = self.expect(node.args[0], "function", "form", "star")
        b = self.expect(node.args[1], "function", "form", "star")
        if "any" in (a.kind, b.kind):
            return ANY
        return self.t_wedge(a, b, node)

    def c_pair(self, node):
        self.arity(node, 2)
        a = self.expect(node.args[0], "function", "form")
        b = self.expect(node.args[1], "density", "pdens", "dualform")
        if "any" in (a.kind, b.kind):
            return SCALAR
        if a.space is not None and not a.space.compatible(b.space):
            raise _err("E_SPACE", f"cannot pair {a.describe()} with {b.describe()}", node)
        if b.kind == "dualform":
            deg = a.degree if a.kind == "form" else 0
            if deg != b.degree:
                raise _err("E_DEGREE", f"cannot pair {a.describe()} with {b.describe()}", node)
        else:
            if a.kind != "function":
                raise _err("E_TYPE", "densities pair with functions", node)
            self.complete(b, node)
        return SCALAR

    def c_kunneth(self, node):
        self.arity(node, 2)
        a = self.expect(node.args[0], "function", "form")
        b = self.expect(node.args[1], "function", "form")
        if "any" in (a.kind, b.kind):
            return ANY
        deg = sum(t.degree if t.kind == "form" else 0 for t in (a, b))
        return Ty("form", a.space.product(b.space), deg)

    def c_boxtimes(self, node):
        self.arity(node, 2)
        a = self.expect(node.args[0], "dualform")
        b = self.expect(node.args[1], "dualform")
        if "any" in (a.kind, b.kind):
            return ANY
        return Ty("dualform", a.space.product(b.space), a.degree + b.degree)

    def c_extprod(self, node):
        self.arity(node, 2)
        a = self.expect(node.args[0], "function")
        b = self.expect(node.args[1], "function")
        if "any" in (a.kind, b.kind):
            return ANY
        return Ty("function", a.space.product(b.space))

    def _point(self, node, space, arg):
        p = self.expect(arg, "point")
        if p.kind == "point" and space is not None and p.extra != space.n:
            raise _err("E_SPACE", f"point has {p.extra} coordinates, space needs {space.n}",
                       arg)

    def c_jet(self, node):
        self.arity(node, 3)
        f = self.expect(node.args[0], "function")
        self._point(node, f.space, node.args[1])
        self.expect(node.args[2], "scalar")
        return Ty("jet", f.space, extra=(f.space.n, f.space.k) if f.space else None)

    def c_value(self, node):
        self.arity(node, 2)
        f = self.expect(node.args[0], "function")
        self._point(node, f.space, node.args[1])
        return SCALAR

    def c_invert(self, node):
        self.arity(node, 2, 3)
        f = self.expect(node.args[0], "function")
        self._point(node, f.space, node.args[1])
        if len(node.args) == 3:
            self.expect(node.args[2], "scalar")
        return f

    def c_radial(self, node):
        self.arity(node, 1)
        t = self.expect(node.args[0], "form")
        if t.kind == "any":
            return ANY
        if t.degree == 0:
            raise _err("E_DEGREE", "radial homotopy needs degree >= 1", node)
        return Ty("form", t.space, t.degree - 1) if t.degree > 1 else Ty("function", t.space)

    def c_formal_h(self, node):
        self.arity(node, 1)
        t = self.expect(node.args[0], "form")
        if t.kind == "any":
            return ANY
        if (t.space.n, t.space.k) != (0, 1):
            raise _err("E_SPACE", "formal_h lives on (0,1)", node)
        if t.degree != 1:
            raise _err("E_DEGREE", "formal_h needs a 1-form", node)
        return Ty("function", t.space)

    def c_cs(self, node):
        self.arity(node, 1)
        t = self.expect(node.args[0], "dualform")
        if t.kind == "any":
            return ANY
        if t.degree >= t.space.nvars:
            raise _err("E_DEGREE", "cs homotopy needs dual degree below n + k", node)
        return Ty("dualform", t.space, t.degree + 1)

    def c_zeta(self, node):
        self.arity(node, 1)
        t = self.expect(node.args[0], "dualform")
        if t.kind == "dualform" and t.degree != 0:
            raise _err("E_DEGREE", "zeta needs a dual form of degree 0", node)
        return SCALAR

    def c_density(self, node):
        self.arity(node, 1)
        t = self.expect(node.args[0], "pdens", "scalar")
        if t.kind == "any":
            return ANY
        space = t.space or self.need_space(node)
        t = Ty("pdens", space, extra=t.extra or frozenset())
        self.complete(t, node)
        return Ty("density", space)

    def c_top(self, node):
        self.arity(node, 1)
        t = self.expect(node.args[0], "density")
        return ANY if t.kind == "any" else Ty("dualform", t.space, 0)

    def c_dual(self, node):
        self.arity(node, 1)
        t = self.expect(node.args[0], "density")
        return ANY if t.kind == "any" else Ty("dualform", t.space, t.space.nvars)

    def _profile(self, node, nargs):
        space = self.need_space(node)
        for a in node.args[:2]:
            self.expect(a, "scalar")
        for a in node.args[2:nargs]:
            self.expect(a, "flag", "scalar")
        axis = 1
        for key, value in node.kwargs:
            if not isinstance(value, Num):
                raise _err("E_TYPE", "axis must be an integer literal", value)
            axis = value.value
        if not 1 <= axis <= space.n:
            raise _err("E_UNBOUND", f"axis {axis} does not exist on {space}", node)
        return Ty("pdens", space, extra=frozenset({axis}))

    def c_bump(self, node):
        self.arity(node, 2, 3)
        if len(node.args) == 3:
            self.expect(node.args[2], "flag")
        return self._profile(node, 3)

    def c_hat(self, node):
        self.arity(node, 2, 3)
        if len(node.args) == 3:
            self.expect(node.args[2], "scalar")
        return self._profile(node, 3)

    def c_compose(self, node):
        self.arity(node, 2)
        psi = self.expect(node.args[0], "morphism")
        phi = self.expect(node.args[1], "morphism")
        if "any" in (psi.kind, phi.kind):
            return ANY
        if not phi.target.compatible(psi.space):
            raise _err("E_SPACE", f"cannot compose: {phi.target} vs {psi.space}", node)
        return Ty("morphism", phi.space, target=psi.target)

    def _rand(self, node, kind):
        space = self.need_space(node)
        self.arity(node, 1)
        arg = node.args[0]
        if not isinstance(arg, Num):
            raise _err("E_TYPE", f"{node.func} takes an integer literal", arg)
        if kind == "function":
            return Ty("function", space)
        if arg.value > space.nvars:
            raise _err("E_DEGREE", f"degree {arg.value} exceeds n + k = {space.nvars}", node)
        return Ty(kind, space, arg.value)

    def c_rand_function(self, node):
        return self._rand(node, "function")

    def c_rand_form(self, node):
        return self._rand(node, "form")

    def c_rand_dualform(self, node):
        return self._rand(node, "dualform")


def typecheck(script, default_order=DEFAULT_ORDER):
    return Checker(default_order).check_script(script)
