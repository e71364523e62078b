"""Expression parser for model files.

Grammar::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/' | '^') unary)*
    unary   := '-' unary | power
    power   := factor ('^' INT)*
    factor  := INT | ref | 'd(' ref (',' coord)+ ')' | 'dx(' coord ')'
             | 'theta(' ref (',' coord)* ')' | '(' expr ')'
    ref     := IDENT | 'bar(' IDENT ')' | 'aux(' ref ')'

``^`` directly followed by an integer literal is a power and binds tighter
than ``*``; any other ``^`` is the wedge product.  ``/`` only divides by a
nonzero constant, so ``1/2`` is a rational literal.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Protocol, Sequence, Union

from .errors import ModelError
from .forms import GradedForm, wedge
from .ring import GradedScalar, JetSymbol, auxiliary

Value = Union[GradedScalar, GradedForm]

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^(),]))")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(segments: Sequence[tuple[int, int, str]]) -> list[Token]:
    """Tokenize ``(line, column, text)`` segments; columns are 1-based."""
    out = []
    last = (1, 1)
    for line, col, text in segments:
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                bad = len(text[pos:]) - len(text[pos:].lstrip())
                raise ModelError(f"unexpected character {text[pos + bad]!r}", line, col + pos + bad)
            kind = m.lastgroup
            start = m.start(kind)
            out.append(Token(kind, m.group(kind), line, col + start))
            pos = m.end()
        last = (line, col + len(text))
    out.append(Token("end", "", *last))
    return out


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Node:
    line: int
    column: int


@dataclass(frozen=True)
class Num(Node):
    value: int


@dataclass(frozen=True)
class Ref(Node):
    """``name``, ``bar(name)`` or ``aux(ref)``."""

    name: str
    wrapper: str = ""  # "", "bar" or "aux"
    inner: Optional["Ref"] = None


@dataclass(frozen=True)
class Jet(Node):
    ref: Ref
    coords: tuple


@dataclass(frozen=True)
class Dx(Node):
    coord: str


@dataclass(frozen=True)
class Theta(Node):
    ref: Ref
    coords: tuple


@dataclass(frozen=True)
class Neg(Node):
    operand: Node


@dataclass(frozen=True)
class Sum(Node):
    terms: tuple  # ((sign, node), ...)


@dataclass(frozen=True)
class Binary(Node):
    op: str  # '*', '/', '^'
    left: Node
    right: Node


@dataclass(frozen=True)
class Power(Node):
    base: Node
    exponent: int


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return ModelError(msg, tok.line, tok.column)

    def take(self, text=None, kind=None) -> Token:
        tok = self.tok
        if (text is not None and tok.text != text) or (kind is not None and tok.kind != kind):
            want = repr(text) if text else kind
            got = repr(tok.text) if tok.kind != "end" else "end of expression"
            raise self.error(f"expected {want}, got {got}")
        self.i += 1
        return tok

    def at(self, text) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def parse(self) -> Node:
        if self.tok.kind == "end":
            raise self.error("empty expression")
        node = self.expr()
        if self.tok.kind != "end":
            if self.at(")"):
                raise self.error("unbalanced ')'")
            raise self.error(f"unexpected {self.tok.text!r}")
        return node

    def expr(self) -> Node:
        first = self.tok
        terms = [(1, self.term())]
        while self.at("+") or self.at("-"):
            sign = 1 if self.take().text == "+" else -1
            terms.append((sign, self.term()))
        if len(terms) == 1:
            return terms[0][1]
        return Sum(first.line, first.column, tuple(terms))

    def term(self) -> Node:
        node = self.unary()
        while self.at("*") or self.at("/") or (self.at("^") and self.toks[self.i + 1].kind != "int"):
            op = self.take()
            node = Binary(op.line, op.column, op.text, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.at("-"):
            tok = self.take()
            return Neg(tok.line, tok.column, self.unary())
        return self.power()

    def power(self) -> Node:
        node = self.factor()
        while self.at("^") and self.toks[self.i + 1].kind == "int":
            op = self.take()
            exp = self.take(kind="int")
            node = Power(op.line, op.column, node, int(exp.text))
        return node

    def factor(self) -> Node:
        tok = self.tok
        if tok.kind == "int":
            self.i += 1
            return Num(tok.line, tok.column, int(tok.text))
        if self.at("("):
            opening = self.take("(")
            node = self.expr()
            if not self.at(")"):
                raise self.error("unbalanced '(': no matching ')'", opening)
            self.take(")")
            return node
        if tok.kind == "ident":
            nxt = self.toks[self.i + 1]
            if tok.text in ("d", "theta", "dx") and nxt.text == "(":
                return self.call()
            return self.ref()
        if tok.kind == "end":
            raise self.error("unexpected end of expression")
        raise self.error(f"unexpected {tok.text!r}")

    def ref(self) -> Ref:
        tok = self.take(kind="ident")
        if tok.text in ("bar", "aux") and self.at("("):
            self.take("(")
            if tok.text == "bar":
                inner_tok = self.take(kind="ident")
                self.take(")")
                return Ref(tok.line, tok.column, inner_tok.text, "bar")
            inner = self.ref()
            self.take(")")
            return Ref(tok.line, tok.column, inner.name, "aux", inner)
        return Ref(tok.line, tok.column, tok.text)

    def coords(self) -> tuple:
        out = []
        while self.at(","):
            self.take(",")
            c = self.take(kind="ident")
            out.append((c.text, c.line, c.column))
        return tuple(out)

    def call(self) -> Node:
        head = self.take(kind="ident")
        opening = self.take("(")
        if head.text == "dx":
            c = self.take(kind="ident")
            self.take(")")
            return Dx(head.line, head.column, c.text)
        ref = self.ref()
        cs = self.coords()
        if not self.at(")"):
            raise self.error("unbalanced '(': no matching ')'", opening)
        self.take(")")
        if head.text == "d":
            if not cs:
                raise ModelError("d(...) needs at least one coordinate", head.line, head.column)
            return Jet(head.line, head.column, ref, cs)
        return Theta(head.line, head.column, ref, cs)


def parse(text: Union[str, Sequence[tuple[int, int, str]]]) -> Node:
    """Parse an expression into an AST; raises ``ModelError`` with positions."""
    segments = [(1, 1, text)] if isinstance(text, str) else list(text)
    return _Parser(tokenize(segments)).parse()


# ---------------------------------------------------------------------------
# evaluation


class Scope(Protocol):
    n: int

    def coordinate_slot(self, name: str) -> Optional[int]: ...

    def resolve(self, name: str, wrapper: str) -> tuple[int, JetSymbol]: ...


def _err(node: Node, msg: str) -> ModelError:
    return ModelError(msg, node.line, node.column)


def _resolve_ref(ref: Ref, scope: Scope) -> tuple[int, JetSymbol]:
    if ref.wrapper == "aux":
        sign, sym = _resolve_ref(ref.inner, scope)
        try:
            return sign, auxiliary(sym)
        except Exception:
            raise _err(ref, f"cannot bar {ref.inner.name!r}")
    try:
        return scope.resolve(ref.name, ref.wrapper)
    except ModelError as exc:
        raise ModelError(exc.message, ref.line, ref.column) from None


def _slots(coords, scope: Scope) -> list[int]:
    out = []
    for name, line, col in coords:
        slot = scope.coordinate_slot(name)
        if slot is None:
            raise ModelError(f"unknown coordinate {name!r}", line, col)
        out.append(slot)
    return out


def _is_form(v) -> bool:
    return isinstance(v, GradedForm)


def _as_form(v) -> GradedForm:
    return v if isinstance(v, GradedForm) else GradedForm.scalar(v)


def evaluate(node: Node, scope: Scope) -> Value:
    """Evaluate an AST to a ``GradedScalar`` or ``GradedForm``.

    Products whose nonzero factors multiply to zero (an odd square, say) and
    powers of odd quantities are rejected rather than silently zeroed.
    """
    n = scope.n
    if isinstance(node, Num):
        return GradedScalar.const(n, node.value)
    if isinstance(node, Ref):
        if node.wrapper == "" and scope.coordinate_slot(node.name) is not None:
            from .ring import coordinate

            return GradedScalar.symbol(coordinate(scope.coordinate_slot(node.name), n))
        sign, sym = _resolve_ref(node, scope)
        return GradedScalar.symbol(sym, sign)
    if isinstance(node, Jet):
        sign, sym = _resolve_ref(node.ref, scope)
        return GradedScalar.symbol(sym.jet(*_slots(node.coords, scope)), sign)
    if isinstance(node, Dx):
        slot = scope.coordinate_slot(node.coord)
        if slot is None:
            raise _err(node, f"unknown coordinate {node.coord!r}")
        return GradedForm.dx(n, slot)
    if isinstance(node, Theta):
        sign, sym = _resolve_ref(node.ref, scope)
        th = GradedForm.theta(sym.jet(*_slots(node.coords, scope)))
        return th if sign > 0 else -th
    if isinstance(node, Neg):
        return -evaluate(node.operand, scope)
    if isinstance(node, Sum):
        vals = [(s, evaluate(t, scope)) for s, t in node.terms]
        if any(_is_form(v) for _, v in vals):
            total = GradedForm.zero(n)
            for s, v in vals:
                total = total + _as_form(v) if s > 0 else total - _as_form(v)
            return total
        total = GradedScalar.zero(n)
        for s, v in vals:
            total = total + v if s > 0 else total - v
        return total
    if isinstance(node, Power):
        base = evaluate(node.base, scope)
        if _is_form(base):
            raise _err(node, "powers of forms are not defined; use '^' between forms for wedge")
        out = base ** node.exponent
        if base and not out:
            raise _err(node, "power of an odd quantity vanishes identically")
        return out
    if isinstance(node, Binary):
        left = evaluate(node.left, scope)
        right = evaluate(node.right, scope)
        if node.op == "/":
            if _is_form(right) or right.symbols() or not right:
                raise _err(node, "division is only allowed by a nonzero constant")
            c = right.constant_term()
            return left.scale(Fraction(1) / c)
        if _is_form(left) or _is_form(right):
            out = wedge(_as_form(left), _as_form(right))
        else:
            out = left * right
        if left and right and not out:
            raise _err(node, "product of nonzero factors vanishes (odd square or repeated even one-form)")
        return out
    raise TypeError(f"unknown node {type(node).__name__}")
