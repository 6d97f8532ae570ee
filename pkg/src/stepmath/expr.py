"""Lexer, parser, and printer for the arithmetic surface language.

The printer is lossless: every literal keeps its source text, so
``print_expr(parse(s, mode)) == s`` exactly. Two parse modes exist:

* ``standard`` -- ``/`` is division everywhere
* ``fraction`` -- ``(a/b)`` with integer parts is a rational literal

Grammar (precedence low to high): ``+ -`` < ``* /`` < unary sign < ``^``,
with ``^`` binding tighter than a unary sign on its left and taking a signed
exponent on its right. Equal precedence associates left. Square brackets are
interchangeable with parentheses; the kind is preserved for printing only.
"""

from __future__ import annotations

from typing import Iterator, Optional, Union

from .errors import DepthExceeded, ExprSyntaxError
from .numeric import Frac, Number, render

MAX_DEPTH = 16

STANDARD = "standard"
FRACTION = "fraction"

_OPERATOR_KINDS = {
    "+": "plus",
    "-": "minus",
    "*": "star",
    "/": "slash",
    "^": "caret",
    "(": "lparen",
    ")": "rparen",
    "[": "lbracket",
    "]": "rbracket",
    "=": "equals",
    ".": "dot",
    "%": "percent",
}


class Token:
    __slots__ = ("kind", "text", "offset")

    def __init__(self, kind: str, text: str, offset: int):
        self.kind = kind
        self.text = text
        self.offset = offset

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.offset})"


def lex(src: str) -> list[Token]:
    """Tokenize; concatenating token texts reproduces the input exactly."""
    tokens = []
    i = 0
    n = len(src)
    while i < n:
        c = src[i]
        if "0" <= c <= "9":  # ASCII digits only; the language has no others
            j = i + 1
            while j < n and "0" <= src[j] <= "9":
                j += 1
            tokens.append(Token("digits", src[i:j], i))
            i = j
            continue
        kind = _OPERATOR_KINDS.get(c)
        if kind is None:
            raise ExprSyntaxError(f"unexpected character {c!r}", i)
        tokens.append(Token(kind, c, i))
        i += 1
    return tokens


class Node:
    __slots__ = ("_text",)

    def __init__(self):
        self._text = None


class Lit(Node):
    """A number literal. ``value`` is the written payload; for percent literals
    the payload is the number before the ``%`` (5483 for ``5483%``)."""

    __slots__ = ("value", "text", "origin")

    def __init__(self, value: Union[int, float], text: str, origin: str):
        super().__init__()
        self.value = value
        self.text = text
        self.origin = origin  # integer | decimal | percent | negative

    def __eq__(self, other):
        return (
            isinstance(other, Lit)
            and self.value == other.value
            and self.text == other.text
            and self.origin == other.origin
        )

    def __repr__(self):
        return f"Lit({self.text!r})"


class FractionLit(Node):
    """A rational literal. ``reducible`` marks computed fractions awaiting an
    explicit reduction step; source literals are never flagged."""

    __slots__ = ("num", "den", "text", "parens", "reducible")

    def __init__(self, num: int, den: int, text: Optional[str] = None,
                 parens: bool = True, reducible: bool = False):
        super().__init__()
        self.num = num
        self.den = den
        self.text = text
        self.parens = parens
        self.reducible = reducible

    def __eq__(self, other):
        return (
            isinstance(other, FractionLit)
            and self.num == other.num
            and self.den == other.den
            and self.parens == other.parens
        )

    def __repr__(self):
        return f"FractionLit({self.num}/{self.den})"


class Unary(Node):
    __slots__ = ("op", "operand", "transient")

    def __init__(self, op: str, operand: Node, transient: bool = False):
        super().__init__()
        self.op = op
        self.operand = operand
        self.transient = transient

    def __eq__(self, other):
        return isinstance(other, Unary) and self.op == other.op and self.operand == other.operand

    def __repr__(self):
        return f"Unary({self.op!r}, {self.operand!r})"


class Binary(Node):
    __slots__ = ("op", "lhs", "rhs")

    def __init__(self, op: str, lhs: Node, rhs: Node):
        super().__init__()
        self.op = op
        self.lhs = lhs
        self.rhs = rhs

    def __eq__(self, other):
        return (
            isinstance(other, Binary)
            and self.op == other.op
            and self.lhs == other.lhs
            and self.rhs == other.rhs
        )

    def __repr__(self):
        return f"Binary({self.op!r}, {self.lhs!r}, {self.rhs!r})"


class Group(Node):
    __slots__ = ("kind", "inner")

    def __init__(self, kind: str, inner: Node):
        super().__init__()
        self.kind = kind  # '(' or '['
        self.inner = inner

    def __eq__(self, other):
        return isinstance(other, Group) and self.kind == other.kind and self.inner == other.inner

    def __repr__(self):
        return f"Group({self.kind!r}, {self.inner!r})"


_CLOSERS = {"(": ")", "[": "]"}


def print_expr(e: Node) -> str:
    """Render a tree back to text. Structure is preserved, nothing is re-parenthesized."""
    cached = e._text
    if cached is not None:
        return cached
    if isinstance(e, Lit):
        s = e.text
    elif isinstance(e, FractionLit):
        if e.text is not None:
            s = e.text
        else:
            body = f"{e.num}/{e.den}"
            s = f"({body})" if e.parens else body
    elif isinstance(e, Unary):
        s = e.op + print_expr(e.operand)
    elif isinstance(e, Binary):
        s = print_expr(e.lhs) + e.op + print_expr(e.rhs)
    elif isinstance(e, Group):
        s = e.kind + print_expr(e.inner) + _CLOSERS[e.kind]
    else:  # pragma: no cover
        raise TypeError(f"unknown node {e!r}")
    e._text = s
    return s


def count_atomic_ops(e: Node) -> int:
    """Number of binary operations; unary signs and literals do not count."""
    total = 0
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Binary):
            total += 1
            stack.append(node.lhs)
            stack.append(node.rhs)
        elif isinstance(node, Unary):
            stack.append(node.operand)
        elif isinstance(node, Group):
            stack.append(node.inner)
    return total


def fold_signed_literal(u: Unary, source_text: Optional[str] = None) -> Node:
    """Collapse a sign applied directly to a literal into the literal itself.

    ``source_text`` keeps the written form when folding during parsing; rewrites
    pass None and get a canonical rendering instead.
    """
    inner = u.operand
    if isinstance(inner, Lit):
        value = inner.value if u.op == "+" else -inner.value
        if source_text is not None:
            text = source_text
        elif inner.origin == "percent":
            text = render(value) + "%"
        else:
            text = render(value)
        origin = inner.origin
        if origin != "percent":
            origin = "negative" if text.startswith("-") else ("decimal" if "." in text else "integer")
        return Lit(value, text, origin)
    if isinstance(inner, FractionLit):
        num = inner.num if u.op == "+" else -inner.num
        return FractionLit(num, inner.den, text=source_text, parens=inner.parens,
                           reducible=inner.reducible)
    return u


class _Parser:
    def __init__(self, src: str, tokens: list[Token], mode: str):
        self.src = src
        self.tokens = tokens
        self.mode = mode
        self.pos = 0
        self.depth = 0

    def peek(self) -> Optional[Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise ExprSyntaxError("unexpected end of input", len(self.src))
        self.pos += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != kind:
            offset = tok.offset if tok else len(self.src)
            raise ExprSyntaxError(f"expected {kind}", offset)
        return self.take()

    def parse(self) -> Node:
        e = self.parse_sum()
        tok = self.peek()
        if tok is not None:
            raise ExprSyntaxError(f"trailing input {tok.text!r}", tok.offset)
        return e

    def parse_sum(self) -> Node:
        e = self.parse_term()
        while True:
            tok = self.peek()
            if tok is None or tok.kind not in ("plus", "minus"):
                return e
            self.take()
            rhs = self.parse_term()
            e = Binary(tok.text, e, rhs)

    def parse_term(self) -> Node:
        e = self.parse_unary()
        while True:
            tok = self.peek()
            if tok is None or tok.kind not in ("star", "slash"):
                return e
            self.take()
            rhs = self.parse_unary()
            e = Binary(tok.text, e, rhs)

    def parse_unary(self) -> Node:
        tok = self.peek()
        if tok is not None and tok.kind in ("plus", "minus"):
            start = tok.offset
            self.take()
            operand = self.parse_unary()
            u = Unary(tok.text, operand)
            end = start + 1 + len(print_expr(operand))
            return fold_signed_literal(u, source_text=self.src[start:end])
        return self.parse_power()

    def parse_power(self) -> Node:
        base = self.parse_atom()
        tok = self.peek()
        if tok is not None and tok.kind == "caret":
            self.take()
            exponent = self.parse_unary()  # signed exponents parse; evaluation rejects them
            return Binary("^", base, exponent)
        return base

    def parse_atom(self) -> Node:
        tok = self.peek()
        if tok is None:
            raise ExprSyntaxError("unexpected end of input", len(self.src))
        if tok.kind == "digits":
            return self.parse_number()
        if tok.kind in ("lparen", "lbracket"):
            if self.mode == FRACTION and tok.kind == "lparen":
                frac = self.try_fraction_literal()
                if frac is not None:
                    return frac
            return self.parse_group()
        raise ExprSyntaxError(f"unexpected {tok.text!r}", tok.offset)

    def parse_number(self) -> Lit:
        first = self.expect("digits")
        text = first.text
        origin = "integer"
        value: Union[int, float]
        if self.peek() is not None and self.peek().kind == "dot":
            dot = self.take()
            frac = self.expect("digits")
            text = first.text + dot.text + frac.text
            origin = "decimal"
            value = float(text)
        else:
            value = int(text)
        if self.peek() is not None and self.peek().kind == "percent":
            pct = self.take()
            return Lit(value, text + pct.text, "percent")
        return Lit(value, text, origin)

    def try_fraction_literal(self) -> Optional[FractionLit]:
        # Matches '(' ['-'] digits '/' digits ')' without consuming on failure.
        toks = self.tokens
        i = self.pos
        j = i + 1
        sign = 1
        if j < len(toks) and toks[j].kind == "minus":
            sign = -1
            j += 1
        if not (j + 3 < len(toks)
                and toks[j].kind == "digits"
                and toks[j + 1].kind == "slash"
                and toks[j + 2].kind == "digits"
                and toks[j + 3].kind == "rparen"):
            return None
        num = sign * int(toks[j].text)
        den = int(toks[j + 2].text)
        start = toks[i].offset
        end = toks[j + 3].offset + 1
        self.pos = j + 4
        return FractionLit(num, den, text=self.src[start:end], parens=True)

    def parse_group(self) -> Group:
        opener = self.take()
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise DepthExceeded(opener.offset, MAX_DEPTH)
        inner = self.parse_sum()
        closer = "rparen" if opener.kind == "lparen" else "rbracket"
        tok = self.peek()
        if tok is None or tok.kind != closer:
            raise ExprSyntaxError(f"unbalanced {opener.text!r}", opener.offset)
        self.take()
        self.depth -= 1
        return Group(opener.text, inner)


def parse(src: str, mode: str = STANDARD) -> Node:
    if mode not in (STANDARD, FRACTION):
        raise ValueError(f"unknown parse mode {mode!r}")
    return _Parser(src, lex(src), mode).parse()


def literal_value(node: Node) -> Number:
    """Numeric value of a literal node (percent payloads are NOT divided here)."""
    if isinstance(node, Lit):
        return node.value
    if isinstance(node, FractionLit):
        return Frac(node.num, node.den)
    raise TypeError(f"not a literal: {node!r}")


def iter_nodes(e: Node) -> Iterator[Node]:
    """Pre-order traversal in print order."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Binary):
            stack.append(node.rhs)
            stack.append(node.lhs)
        elif isinstance(node, Unary):
            stack.append(node.operand)
        elif isinstance(node, Group):
            stack.append(node.inner)
