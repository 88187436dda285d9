"""Text front end for expressions.

Grammar (whitespace is ignored)::

    expr    := term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := '-' factor | base ('^' integer)?
    base    := number | complex | 'z' | 'exp' '(' expr ')' | '(' expr ')'
    complex := '(' number ',' number ')'
    number  := float literal with optional trailing 'i'
    integer := optional sign followed by digits

The argument of ``exp`` must reduce to a Laurent polynomial in ``z``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ExprSyntaxError, NotRationalError
from .expr import (
    Const,
    MeroExpr,
    Z,
    add,
    as_rational,
    div,
    exp_of,
    mul,
    neg,
    power,
    sub,
)
from .polynomials import laurent_from_rational

_FLOAT = r"(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?"
_TOKEN = re.compile(
    rf"(?P<ws>\s+)|(?P<num>{_FLOAT}i?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^(),])"
)


@dataclass(frozen=True)
class Token:
    kind: str  # num, name, op, end
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append(Token(kind, m.group(), pos))
        pos = m.end()
    out.append(Token("end", "", len(text)))
    return out


# raw syntax tree: tuples tagged by their first element
# ("num", complex) ("z",) ("exp", node) ("neg", node) ("pow", node, int) (op, a, b)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def fail(self, expected, msg=None):
        t = self.tok
        found = "end of input" if t.kind == "end" else repr(t.text)
        raise ExprSyntaxError(msg or f"unexpected {found}", self.text, t.pos, expected)

    def accept(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            self.fail([repr(text)])

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            self.fail(["'+'", "'-'", "'*'", "'/'", "'^'", "end of input"])
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            node = (op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.i += 1
            node = (op, node, self.factor())
        return node

    def factor(self):
        if self.accept("-"):
            return ("neg", self.factor())
        node = self.base()
        if self.accept("^"):
            sign = 1
            if self.accept("-"):
                sign = -1
            elif self.accept("+"):
                pass
            t = self.tok
            if t.kind != "num" or not t.text.isdigit():
                self.fail(["integer exponent"])
            self.i += 1
            node = ("pow", node, sign * int(t.text))
        return node

    def number(self) -> complex:
        t = self.tok
        sign = 1
        if t.kind == "op" and t.text in "+-":
            sign = -1 if t.text == "-" else 1
            self.i += 1
            t = self.tok
        if t.kind != "num":
            self.fail(["number"])
        self.i += 1
        return sign * _literal(t.text)

    def base(self):
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return ("num", _literal(t.text))
        if t.kind == "name":
            if t.text == "z":
                self.i += 1
                return ("z",)
            if t.text == "exp":
                self.i += 1
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return ("exp", arg, t.pos)
            self.fail(["'z'", "'exp'", "number", "'('"], f"unknown name {t.text!r}")
        if self.accept("("):
            if self._looks_like_pair():
                re_part = self.number()
                self.expect(",")
                im_part = self.number()
                self.expect(")")
                if re_part.imag or im_part.imag:
                    self.fail(["real number"], "complex pair entries must be real")
                return ("num", complex(re_part.real, im_part.real))
            node = self.expr()
            self.expect(")")
            return node
        self.fail(["number", "'z'", "'exp'", "'('", "'-'"])

    def _looks_like_pair(self) -> bool:
        j = self.i
        if self.toks[j].kind == "op" and self.toks[j].text in "+-":
            j += 1
        return self.toks[j].kind == "num" and self.toks[j + 1].kind == "op" and self.toks[j + 1].text == ","


def _literal(text: str) -> complex:
    if text.endswith("i"):
        return complex(0.0, float(text[:-1]))
    return complex(float(text), 0.0)


def parse_raw(text: str):
    return _Parser(text).parse()


def lower(node, text: str = "") -> MeroExpr:
    """Turn a raw syntax tree into a folded expression."""
    tag = node[0]
    if tag == "num":
        return Const(node[1])
    if tag == "z":
        return Z
    if tag == "neg":
        return neg(lower(node[1], text))
    if tag == "pow":
        return power(lower(node[1], text), node[2])
    if tag == "exp":
        arg = lower(node[1], text)
        r = as_rational(arg)
        lp = laurent_from_rational(r) if r is not None else None
        if lp is None:
            raise ExprSyntaxError("exp argument must be a Laurent polynomial in z", text, node[2])
        return exp_of(lp)
    a, b = lower(node[1], text), lower(node[2], text)
    if tag == "+":
        return add(a, b)
    if tag == "-":
        return sub(a, b)
    if tag == "*":
        return mul(a, b)
    if tag == "/":
        return div(a, b)
    raise ValueError(f"bad node {tag}")


def parse(text: str) -> MeroExpr:
    """Parse expression text.

    Raises ExprSyntaxError with 1-based line and column on malformed input.
    """
    if not isinstance(text, str):
        raise TypeError("expression text must be a string")
    try:
        return lower(parse_raw(text), text)
    except ZeroDivisionError as exc:
        raise ExprSyntaxError(f"division by zero ({exc})", text, 0) from None
    except NotRationalError as exc:  # pragma: no cover - defensive
        raise ExprSyntaxError(str(exc), text, 0) from None


def parse_target(text: str):
    """Parse a target value: ``inf`` or ``∞`` for infinity, else an expression."""
    s = text.strip()
    if s.lower() in ("inf", "infinity", "∞"):
        return None
    e = parse(s)
    return e.value if isinstance(e, Const) else e


parse_expression = parse
