"""Lexer, AST, parser and canonical printer for the formacalc script language.

    space (2,1) order 3;
    let f = x1^2 * y1;
    print d(f);
    let phi = morphism (1,1) -> (1,1) { x'1 = x1 + y1; y'1 = y1; };
    check poincare omega space=(2,1) order=3 samples=50;
"""

import re
from dataclasses import dataclass, field

from ..errors import FormacalcError


class ScriptError(FormacalcError):
    """Static error with a source position."""

    def __init__(self, code, message, line=0, col=0):
        super().__init__(message)
        self.code = code
        self.line = line
        self.col = col

    def to_json(self):
        return {"code": self.code, "message": str(self), "line": self.line, "col": self.col}

    def __str__(self):
        return self.args[0]


KEYWORDS = {"space", "order", "let", "print", "check", "morphism"}

TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<primed>[xy]'[0-9]+)
  | (?P<int>[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\^\^|->|[-+*/^#(),;=\[\]{}])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text):
    tokens = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = TOKEN_RE.match(text, pos)
        if not m:
            raise ScriptError("E_SYNTAX", f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind not in ("ws", "comment"):
                if kind == "ident" and chunk in KEYWORDS:
                    kind = "kw"
                tokens.append(Token(kind, chunk, line, col))
            col += len(chunk)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


# ------------------------------------------------------------------------ AST

def _pos():
    return field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Num:
    value: int
    pos: tuple = _pos()


@dataclass(frozen=True)
class Name:
    ident: str
    pos: tuple = _pos()


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple
    kwargs: tuple = ()
    pos: tuple = _pos()


@dataclass(frozen=True)
class Neg:
    operand: object
    pos: tuple = _pos()


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object
    pos: tuple = _pos()


@dataclass(frozen=True)
class Pull:
    morphism: object
    arg: object
    pos: tuple = _pos()


@dataclass(frozen=True)
class ListLit:
    items: tuple
    pos: tuple = _pos()


@dataclass(frozen=True)
class MorphismLit:
    source: tuple
    target: tuple
    assigns: tuple
    pos: tuple = _pos()


@dataclass(frozen=True)
class SpaceStmt:
    n: int
    k: int
    order: object = None
    pos: tuple = _pos()


@dataclass(frozen=True)
class Let:
    name: str
    expr: object
    pos: tuple = _pos()


@dataclass(frozen=True)
class Print:
    expr: object
    explicit: bool = True
    pos: tuple = _pos()


@dataclass(frozen=True)
class Check:
    suite: tuple
    options: tuple
    pos: tuple = _pos()


@dataclass(frozen=True)
class Script:
    statements: tuple


# --------------------------------------------------------------------- parser

class Parser:
    def __init__(self, text):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def error(self, message, tok=None):
        tok = tok or self.tok
        found = tok.text or "end of input"
        raise ScriptError("E_SYNTAX", f"{message} (found {found!r})", tok.line, tok.col)

    def at(self, text, kind=None):
        t = self.tok
        return t.text == text and (kind is None or t.kind == kind)

    def accept(self, text):
        if self.tok.text == text and self.tok.kind in ("op", "kw"):
            tok = self.tok
            self.i += 1
            return tok
        return None

    def expect(self, text):
        tok = self.accept(text)
        if tok is None:
            self.error(f"expected {text!r}")
        return tok

    def expect_kind(self, kind, what):
        tok = self.tok
        if tok.kind != kind:
            self.error(f"expected {what}")
        self.i += 1
        return tok

    def integer(self):
        return int(self.expect_kind("int", "an integer").text)

    # statements
    def script(self):
        stmts = []
        while self.tok.kind != "eof":
            stmts.append(self.statement())
        return Script(tuple(stmts))

    def statement(self):
        tok = self.tok
        pos = (tok.line, tok.col)
        if self.accept("space"):
            self.expect("(")
            n = self.integer()
            self.expect(",")
            k = self.integer()
            self.expect(")")
            order = None
            if self.accept("order"):
                order = self.integer()
            self.expect(";")
            return SpaceStmt(n, k, order, pos)
        if self.accept("let"):
            name = self.expect_kind("ident", "a name").text
            self.expect("=")
            expr = self.expr()
            self.expect(";")
            return Let(name, expr, pos)
        if self.accept("print"):
            expr = self.expr()
            self.expect(";")
            return Print(expr, True, pos)
        if self.accept("check"):
            words = []
            while self.tok.kind == "ident" and self.tokens[self.i + 1].text != "=":
                words.append(self.tok.text)
                self.i += 1
            if not words:
                self.error("expected a suite name")
            options = []
            while not self.at(";", "op"):
                key_tok = self.tok
                if key_tok.kind not in ("ident", "kw"):
                    self.error("expected option=value")
                self.i += 1
                self.expect("=")
                if self.accept("("):
                    a = self.integer()
                    self.expect(",")
                    b = self.integer()
                    self.expect(")")
                    value = (a, b)
                else:
                    value = self.integer()
                options.append((key_tok.text, value))
            self.expect(";")
            return Check(tuple(words), tuple(options), pos)
        expr = self.expr()
        self.expect(";")
        return Print(expr, False, pos)

    # expressions
    def expr(self):
        left = self.product()
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            tok = self.tok
            self.i += 1
            left = BinOp(tok.text, left, self.product(), (tok.line, tok.col))
        return left

    def product(self):
        left = self.unary()
        while self.tok.kind == "op" and self.tok.text in ("*", "/"):
            tok = self.tok
            self.i += 1
            left = BinOp(tok.text, left, self.unary(), (tok.line, tok.col))
        return left

    def unary(self):
        tok = self.accept("-")
        if tok:
            return Neg(self.unary(), (tok.line, tok.col))
        return self.power()

    def power(self):
        base = self.postfix()
        if self.tok.kind == "op" and self.tok.text in ("^", "^^"):
            tok = self.tok
            self.i += 1
            return BinOp(tok.text, base, self.power(), (tok.line, tok.col))
        return base

    def postfix(self):
        node = self.primary()
        while self.at("#", "op"):
            tok = self.tok
            self.i += 1
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            node = Pull(node, arg, (tok.line, tok.col))
        return node

    def primary(self):
        tok = self.tok
        pos = (tok.line, tok.col)
        if tok.kind == "int":
            self.i += 1
            return Num(int(tok.text), pos)
        if tok.kind == "ident":
            self.i += 1
            if self.accept("("):
                args, kwargs = [], []
                if not self.at(")", "op"):
                    while True:
                        if self.tok.kind == "ident" and self.tokens[self.i + 1].text == "=":
                            key = self.tok.text
                            self.i += 2
                            kwargs.append((key, self.expr()))
                        elif kwargs:
                            self.error("positional argument after keyword argument")
                        else:
                            args.append(self.expr())
                        if not self.accept(","):
                            break
                self.expect(")")
                return Call(tok.text, tuple(args), tuple(kwargs), pos)
            return Name(tok.text, pos)
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        if self.accept("["):
            items = []
            if not self.at("]", "op"):
                items.append(self.expr())
                while self.accept(","):
                    items.append(self.expr())
            self.expect("]")
            return ListLit(tuple(items), pos)
        if self.accept("morphism"):
            source = self.space_tuple(allow_order=True)
            self.expect("->")
            target = self.space_tuple(allow_order=False)
            self.expect("{")
            assigns = []
            while not self.at("}", "op"):
                name = self.expect_kind("primed", "a target coordinate like x'1").text
                self.expect("=")
                assigns.append((name, self.expr()))
                self.expect(";")
            self.expect("}")
            return MorphismLit(source, target, tuple(assigns), pos)
        self.error("expected an expression")

    def space_tuple(self, allow_order):
        self.expect("(")
        vals = [self.integer()]
        while self.accept(","):
            vals.append(self.integer())
        self.expect(")")
        if len(vals) not in ((2, 3) if allow_order else (2,)):
            self.error("bad space tuple", self.tokens[self.i - 1])
        return tuple(vals)


def parse(text):
    return Parser(text).script()


def parse_expr(text):
    p = Parser(text)
    node = p.expr()
    if p.tok.kind != "eof":
        p.error("unexpected trailing input")
    return node


# -------------------------------------------------------------------- printer

PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4, "^^": 4}


def _prec(node):
    if isinstance(node, BinOp):
        return PREC[node.op]
    if isinstance(node, Neg):
        return PREC["neg"]
    return 5


def print_expr(node):
    if isinstance(node, Num):
        return str(node.value)
    if isinstance(node, Name):
        return node.ident
    if isinstance(node, Call):
        parts = [print_expr(a) for a in node.args]
        parts += [f"{k}={print_expr(v)}" for k, v in node.kwargs]
        return f"{node.func}({', '.join(parts)})"
    if isinstance(node, ListLit):
        return "[" + ", ".join(print_expr(a) for a in node.items) + "]"
    if isinstance(node, Pull):
        inner = print_expr(node.morphism)
        if _prec(node.morphism) < 5:
            inner = f"({inner})"
        return f"{inner}#({print_expr(node.arg)})"
    if isinstance(node, Neg):
        inner = print_expr(node.operand)
        if _prec(node.operand) < PREC["neg"]:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, BinOp):
        p = PREC[node.op]
        left, right = print_expr(node.left), print_expr(node.right)
        if node.op in ("^", "^^"):
            # right associative; the base must be a primary
            if _prec(node.left) <= p:
                left = f"({left})"
            if _prec(node.right) < p:
                right = f"({right})"
            return f"{left}{node.op}{right}" if node.op == "^" else f"{left} ^^ {right}"
        if _prec(node.left) < p:
            left = f"({left})"
        if _prec(node.right) <= p and not isinstance(node.right, Neg):
            right = f"({right})"
        return f"{left} {node.op} {right}"
    if isinstance(node, MorphismLit):
        src = ",".join(str(v) for v in node.source)
        dst = ",".join(str(v) for v in node.target)
        body = " ".join(f"{name} = {print_expr(e)};" for name, e in node.assigns)
        return f"morphism ({src}) -> ({dst}) {{ {body} }}" if body else \
            f"morphism ({src}) -> ({dst}) {{ }}"
    raise TypeError(f"cannot print {node!r}")


def print_stmt(stmt):
    if isinstance(stmt, SpaceStmt):
        text = f"space ({stmt.n},{stmt.k})"
        return text + (f" order {stmt.order};" if stmt.order is not None else ";")
    if isinstance(stmt, Let):
        return f"let {stmt.name} = {print_expr(stmt.expr)};"
    if isinstance(stmt, Print):
        body = print_expr(stmt.expr)
        return f"print {body};" if stmt.explicit else f"{body};"
    if isinstance(stmt, Check):
        opts = []
        for key, value in stmt.options:
            opts.append(f"{key}=({value[0]},{value[1]})" if isinstance(value, tuple)
                        else f"{key}={value}")
        return " ".join(["check", *stmt.suite, *opts]) + ";"
    raise TypeError(f"cannot print {stmt!r}")


def print_script(script):
    return "".join(print_stmt(s) + "\n" for s in script.statements)
