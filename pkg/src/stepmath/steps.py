"""Single-step rewrite engine producing `=`-joined solution traces.

Exactly one rule fires per step, chosen deterministically:

* sign       -- cancel a pair of negative signs in a multiplication/division chain
* percent    -- rewrite the leftmost percent literal as its decimal value
* reciprocal -- turn division by a fraction literal into multiplication by its
                reciprocal
* binop      -- evaluate the leftmost, highest-precedence binary operation whose
                operands are both literals
* simplify   -- reduce a computed fraction to lowest terms as its own step
* ungroup    -- drop brackets that now enclose a single literal

Contents of the deepest bracket group are fully reduced before anything
outside it fires. Within the active region the rules are tried in the order
reciprocal, binop, simplify, ungroup. All trees are immutable; each step
rebuilds only the spine above the rewritten nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import numeric
from .errors import DivByZero, NonTerminating
from .expr import (
    Binary,
    FRACTION,
    FractionLit,
    Group,
    Lit,
    Node,
    Unary,
    count_atomic_ops,
    fold_signed_literal,
    literal_value,
    print_expr,
)
from .numeric import Frac, Number

R_SIGN = "sign"
R_PERCENT = "percent"
R_BINOP = "binop"
R_RECIPROCAL = "reciprocal"
R_SIMPLIFY = "simplify"
R_UNGROUP = "ungroup"

_TIER = {"^": 3, "*": 2, "/": 2, "+": 1, "-": 1}


@dataclass
class StepTrace:
    original: Node
    snapshots: list[Node]
    rules: list[str]
    final: Number
    mode: str


# ---------------------------------------------------------------------------
# tree plumbing


def _rebuild(node: Node, edits: dict, prefix: tuple = ()) -> Node:
    """Replace subtrees at the given paths, folding any sign that a rewrite
    leaves sitting directly on a literal."""
    if prefix in edits:
        return edits[prefix]
    if not any(p[: len(prefix)] == prefix for p in edits):
        return node
    if isinstance(node, Binary):
        return Binary(
            node.op,
            _rebuild(node.lhs, edits, prefix + ("lhs",)),
            _rebuild(node.rhs, edits, prefix + ("rhs",)),
        )
    if isinstance(node, Unary):
        operand = _rebuild(node.operand, edits, prefix + ("operand",))
        u = Unary(node.op, operand, transient=node.transient)
        if not u.transient and isinstance(operand, (Lit, FractionLit)):
            return fold_signed_literal(u)
        return u
    if isinstance(node, Group):
        return Group(node.kind, _rebuild(node.inner, edits, prefix + ("inner",)))
    return node


def _strip_transient(node: Node) -> Node:
    if isinstance(node, Binary):
        lhs, rhs = _strip_transient(node.lhs), _strip_transient(node.rhs)
        if lhs is node.lhs and rhs is node.rhs:
            return node
        return Binary(node.op, lhs, rhs)
    if isinstance(node, Group):
        inner = _strip_transient(node.inner)
        return node if inner is node.inner else Group(node.kind, inner)
    if isinstance(node, Unary):
        operand = _strip_transient(node.operand)
        if node.transient:
            return operand
        return node if operand is node.operand else Unary(node.op, operand)
    return node


def _lit_from_value(v: Number) -> Lit:
    text = numeric.render(v)
    if text.startswith("-"):
        origin = "negative"
    elif "." in text:
        origin = "decimal"
    else:
        origin = "integer"
    return Lit(v, text, origin)


def _is_plain_literal(node: Node) -> bool:
    if isinstance(node, Lit):
        return node.origin != "percent"
    return isinstance(node, FractionLit)


def _is_negative_literal(node: Node) -> bool:
    if isinstance(node, Lit):
        return node.text.startswith("-")
    if isinstance(node, FractionLit):
        return node.num < 0
    return False


# ---------------------------------------------------------------------------
# single-pass scan of everything the rules need


class _Scan:
    __slots__ = ("percent", "groups", "binops", "red_fracs")

    def __init__(self):
        self.percent: Optional[tuple] = None  # (path, node), leftmost
        self.groups: list[tuple] = []  # (path, node, offset)
        self.binops: list[tuple] = []  # (path, node, op_offset)
        self.red_fracs: list[tuple] = []  # (path, node) print order


def _scan(tree: Node) -> _Scan:
    sc = _Scan()

    def rec(node, path, offset):
        cls = node.__class__
        if cls is Binary:
            lhs_len = len(print_expr(node.lhs))
            sc.binops.append((path, node, offset + lhs_len))
            rec(node.lhs, path + ("lhs",), offset)
            rec(node.rhs, path + ("rhs",), offset + lhs_len + 1)
        elif cls is Lit:
            if node.origin == "percent" and sc.percent is None:
                sc.percent = (path, node)
        elif cls is FractionLit:
            if node.reducible:
                sc.red_fracs.append((path, node))
        elif cls is Group:
            sc.groups.append((path, node, offset))
            rec(node.inner, path + ("inner",), offset + 1)
        else:  # Unary
            rec(node.operand, path + ("operand",), offset + 1)

    rec(tree, (), 0)
    return sc


def _candidate_regions(groups: list[tuple]) -> list[tuple]:
    """Bracket groups with no groups inside them, deepest first, leftmost
    breaking ties. Rules run inside the first region that can make progress."""
    paths = [g[0] for g in groups]
    innermost = []
    for path, node, offset in groups:
        if any(p != path and p[: len(path)] == path for p in paths):
            continue  # has an inner group
        depth = sum(1 for p in paths if p != path and path[: len(p)] == p)
        innermost.append(((-depth, offset), path, node, offset))
    innermost.sort(key=lambda item: item[0])
    return [(path, node, offset) for _, path, node, offset in innermost]


def _node_at(tree: Node, path: tuple) -> Node:
    node = tree
    for step in path:
        node = getattr(node, step)
    return node


def _pinned_by_power_base(tree: Node, group_path: tuple, content: Node) -> bool:
    """Brackets around a negative literal must stay when the bracket is the
    base of a power: printing `(-1)^0` without them re-reads as `-(1^0)`."""
    if not group_path or not _is_negative_literal(content):
        return False
    parent = _node_at(tree, group_path[:-1])
    return isinstance(parent, Binary) and parent.op == "^" and group_path[-1] == "lhs"


# ---------------------------------------------------------------------------
# sign cancellation


def _find_sign_cancellation(tree: Node, mode: str) -> Optional[dict]:
    """Leftmost mul/div chain carrying at least two negative factors.

    In fraction mode the chain sees through brackets whose content is itself a
    mul/div chain, so a sign inside a bracketed product cancels one outside.
    """
    fraction = mode == FRACTION
    chains: list[list[tuple[tuple, Node]]] = []

    def transparent(node):
        return (
            fraction
            and isinstance(node, Group)
            and isinstance(node.inner, Binary)
            and node.inner.op in "*/"
        )

    def collect(node, path, out):
        if isinstance(node, Binary) and node.op in "*/":
            collect(node.lhs, path + ("lhs",), out)
            collect(node.rhs, path + ("rhs",), out)
        elif transparent(node):
            collect(node.inner, path + ("inner",), out)
        else:
            out.append((path, node))

    def visit(node, path, in_chain):
        if isinstance(node, Binary):
            if node.op in "*/":
                if not in_chain:
                    factors: list = []
                    collect(node, path, factors)
                    chains.append(factors)
                visit(node.lhs, path + ("lhs",), True)
                visit(node.rhs, path + ("rhs",), True)
            else:
                visit(node.lhs, path + ("lhs",), False)
                visit(node.rhs, path + ("rhs",), False)
        elif isinstance(node, Group):
            visit(node.inner, path + ("inner",), in_chain and transparent(node))
        elif isinstance(node, Unary):
            visit(node.operand, path + ("operand",), False)

    visit(tree, (), False)

    for factors in chains:
        marked = [i for i, (_, f) in enumerate(factors) if _is_marked(f)]
        if len(marked) < 2:
            continue
        first, second = marked[0], marked[1]
        edits = {
            factors[first][0]: _strip_sign(factors[first][1]),
            factors[second][0]: _strip_sign(factors[second][1]),
        }
        if fraction and first != 0:
            head_path, head = factors[0]
            edits[head_path] = Unary("+", head, transient=True)
        return edits
    return None


def _is_marked(node: Node) -> bool:
    if isinstance(node, Unary):
        return node.op == "-" and not node.transient
    return _is_negative_literal(node)


def _strip_sign(node: Node) -> Node:
    if isinstance(node, Unary):
        return node.operand
    if isinstance(node, Lit):
        text = node.text[1:] if node.text.startswith("-") else numeric.render(-node.value)
        origin = node.origin
        if origin != "percent":
            origin = "decimal" if "." in text else "integer"
        return Lit(-node.value, text, origin)
    if isinstance(node, FractionLit):
        text = node.text[1:] if node.text and node.text.startswith("-") else None
        return FractionLit(-node.num, node.den, text=text, parens=node.parens,
                           reducible=node.reducible)
    raise TypeError(f"cannot strip sign from {node!r}")


# ---------------------------------------------------------------------------
# region rules


def _in_region(path: tuple, region_path: tuple) -> bool:
    return path[: len(region_path)] == region_path


def _binop_value(op: str, lhs: Node, rhs: Node, node: Binary) -> Number:
    a, b = literal_value(lhs), literal_value(rhs)
    try:
        if op == "+":
            return numeric.add(a, b)
        if op == "-":
            return numeric.sub(a, b)
        if op == "*":
            return numeric.mul(a, b)
        if op == "/":
            return numeric.div(a, b)
        return numeric.pow_(a, b)
    except DivByZero:
        raise DivByZero(f"division by zero in {print_expr(node)}") from None


def _binop_result_node(op: str, value: Number, at_root: bool) -> Node:
    if not isinstance(value, Frac):
        return _lit_from_value(value)
    flag = not value.is_canonical
    if op in "+-":
        parens = not at_root
    else:
        parens = flag if at_root else True
    return FractionLit(value.num, value.den, parens=parens, reducible=flag)


def next_step(e: Node, mode: str) -> Optional[tuple[Node, str]]:
    """Apply the single highest-priority rewrite, or None when e is a literal."""
    return _next_step(_strip_transient(e), mode)


def _next_step(tree: Node, mode: str) -> Optional[tuple[Node, str]]:
    if isinstance(tree, Lit) and tree.origin != "percent":
        return None
    if isinstance(tree, FractionLit) and not tree.reducible:
        return None

    edits = _find_sign_cancellation(tree, mode)
    if edits is not None:
        return _rebuild(tree, edits), R_SIGN

    sc = _scan(tree)

    if sc.percent is not None:
        path, node = sc.percent
        value = numeric.percent_value(node.value)
        return _rebuild(tree, {path: _lit_from_value(value)}), R_PERCENT

    # Work inside the deepest bracket group first. A region can only fail to
    # make progress when its brackets are pinned as a power base, in which
    # case the search cascades outward and the power rule consumes the
    # bracketed literal directly.
    regions = [(gp, g, off) for gp, g, off in _candidate_regions(sc.groups)]
    regions.append(((), None, -1))
    for group_path, group, group_offset in regions:
        region_path = group_path + ("inner",) if group is not None else ()
        step = _region_step(tree, sc, group_path, group, group_offset, region_path)
        if step is not None:
            return step

    raise NonTerminating(f"no rule applies to {print_expr(tree)!r}")


def _power_base_literal(node: Node) -> Optional[Node]:
    """The literal a power may read through its base bracket, if any."""
    if isinstance(node, Group) and _is_plain_literal(node.inner):
        inner = node.inner
        if not (isinstance(inner, FractionLit) and inner.reducible):
            return inner
    return None


def _region_step(tree: Node, sc: _Scan, group_path: tuple, group: Optional[Group],
                 group_offset: int, region_path: tuple) -> Optional[tuple[Node, str]]:
    # reciprocal: division by a fraction literal, both sides already in lowest
    # terms (a computed fraction gets its simplify step first)
    best = None
    for path, node, op_off in sc.binops:
        if node.op != "/" or not _in_region(path, region_path):
            continue
        lhs, rhs = node.lhs, node.rhs
        if not (isinstance(lhs, FractionLit) and isinstance(rhs, FractionLit)):
            continue
        if lhs.reducible or rhs.reducible:
            continue
        if best is None or op_off < best[0]:
            best = (op_off, path, node)
    if best is not None:
        _, path, node = best
        rhs = node.rhs
        recip = FractionLit(rhs.den if rhs.num > 0 else -rhs.den, abs(rhs.num), parens=True)
        return _rebuild(tree, {path: Binary("*", node.lhs, recip)}), R_RECIPROCAL

    # binop: leftmost of the highest precedence tier with two literal operands
    best = None
    for path, node, op_off in sc.binops:
        if not _in_region(path, region_path):
            continue
        lhs, rhs = node.lhs, node.rhs
        if node.op == "^" and _power_base_literal(lhs) is not None:
            lhs = _power_base_literal(lhs)
        if not (_is_plain_literal(lhs) and _is_plain_literal(rhs)):
            continue
        lhs_frac = isinstance(lhs, FractionLit)
        rhs_frac = isinstance(rhs, FractionLit)
        if (lhs_frac and lhs.reducible) or (rhs_frac and rhs.reducible):
            continue
        if node.op == "/" and lhs_frac and rhs_frac:
            continue  # fraction division goes through the reciprocal rule
        key = (-_TIER[node.op], op_off)
        if best is None or key < best[0]:
            best = (key, path, node, lhs)
    if best is not None:
        _, path, node, lhs = best
        value = _binop_value(node.op, lhs, node.rhs, node)
        result = _binop_result_node(node.op, value, at_root=(path == ()))
        # A bracket whose content just became a single literal is absorbed in
        # the same step, unless the literal is negative and the bracket either
        # is not at the very start of the expression or is pinned as a power
        # base; those keep their brackets.
        if group is not None and path == region_path:
            if isinstance(result, FractionLit):
                result = FractionLit(result.num, result.den, parens=True,
                                     reducible=result.reducible)
                return _rebuild(tree, {group_path: result}), R_BINOP
            if _is_negative_literal(result) and (
                group_offset != 0 or _pinned_by_power_base(tree, group_path, result)
            ):
                return _rebuild(tree, {region_path: result}), R_BINOP
            return _rebuild(tree, {group_path: result}), R_BINOP
        return _rebuild(tree, {path: result}), R_BINOP

    # simplify: leftmost computed fraction not in lowest terms
    for path, node in sc.red_fracs:
        if not _in_region(path, region_path):
            continue
        reduced = numeric.reduce_fraction(Frac(node.num, node.den))
        parens = False if path == () else node.parens
        return (
            _rebuild(tree, {path: FractionLit(reduced.num, reduced.den, parens=parens)}),
            R_SIMPLIFY,
        )

    if group is not None and _is_plain_literal(group.inner) \
            and not _pinned_by_power_base(tree, group_path, group.inner):
        return _rebuild(tree, {group_path: group.inner}), R_UNGROUP

    return None


def direct_eval(e: Node, mode: str = "standard") -> Number:
    """Plain recursive evaluation; the oracle every trace must agree with."""
    if isinstance(e, Lit):
        if e.origin == "percent":
            return numeric.percent_value(e.value)
        return e.value
    if isinstance(e, FractionLit):
        return Frac(e.num, e.den)
    if isinstance(e, Unary):
        v = direct_eval(e.operand, mode)
        if e.op == "+":
            return v
        if isinstance(v, Frac):
            return Frac(-v.num, v.den)
        return -v
    if isinstance(e, Group):
        return direct_eval(e.inner, mode)
    if isinstance(e, Binary):
        a = direct_eval(e.lhs, mode)
        b = direct_eval(e.rhs, mode)
        try:
            if e.op == "+":
                return numeric.add(a, b)
            if e.op == "-":
                return numeric.sub(a, b)
            if e.op == "*":
                return numeric.mul(a, b)
            if e.op == "/":
                return numeric.div(a, b)
            return numeric.pow_(a, b)
        except DivByZero:
            raise DivByZero(f"division by zero in {print_expr(e)}") from None
    raise TypeError(f"cannot evaluate {e!r}")


def trace(e: Node, mode: str = "standard") -> StepTrace:
    """Iterate next_step to a literal; raises NonTerminating past the step bound."""
    bound = 4 * count_atomic_ops(e) + 4
    snapshots = [e]
    rules: list[str] = []
    cur = _strip_transient(e)
    while True:
        try:
            step = _next_step(cur, mode)
        except DivByZero as err:
            raise DivByZero(f"{err.detail} (step {len(rules)})") from None
        if step is None:
            break
        if len(rules) >= bound:
            raise NonTerminating(f"trace of {print_expr(e)!r} exceeded {bound} steps")
        nxt, rule = step
        snapshots.append(nxt)
        rules.append(rule)
        cur = _strip_transient(nxt) if rule == R_SIGN else nxt
    final = literal_value(cur)
    return StepTrace(original=e, snapshots=snapshots, rules=rules, final=final, mode=mode)


def render_trace(t: StepTrace) -> str:
    return "=".join(print_expr(s) for s in t.snapshots)
