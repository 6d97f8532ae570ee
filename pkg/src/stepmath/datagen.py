"""Seeded, deterministic generation of step-by-step arithmetic datasets.

Five expression categories are produced:

* ``int-mixed``     -- flat integer chains over + - * /
* ``exponentiation``-- one ``base^exponent`` with base <= 10000, exponent <= 100
* ``bracketed-int`` -- integer chains with one or two bracket groups
* ``lengthy-mixed`` -- brackets plus a blend of integers, decimals, percents,
                       and negative numbers
* ``fraction``      -- chains of rational literals, parsed in fraction mode

Every record is a deterministic function of (seed, record index) alone, so
generation parallelizes to any worker count with byte-identical output. Each
record's trace is checked against direct evaluation before it is emitted; a
draw that fails (division by zero via a bracketed subtraction, binary64
overflow past the printable range) is resampled from the same stream, with an
add/subtract-only fallback after too many rejects.
"""

from __future__ import annotations

import hashlib
import json
import multiprocessing
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import IO, Iterator, Optional

from . import numeric
from .errors import Dec64RangeError, DivByZero, MathError, RenderOverflow
from .expr import Binary, FRACTION, FractionLit, Group, Lit, Node, STANDARD, iter_nodes
from .numeric import values_equal
from .steps import direct_eval, render_trace, trace

CATEGORIES = ("int-mixed", "exponentiation", "bracketed-int", "lengthy-mixed", "fraction")

MANIFEST_FORMAT_VERSION = 1

MAX_DIGITS = 12
MAX_STEPS = 10
EXP_BASE_CAP = 10000
EXP_CAP = 100

# Keep any binary64 intermediate far below the 1e21 positional-print limit.
_FLOAT_BUDGET = 15

# Above this, an integral binary64 prints without a decimal point and would be
# re-read as an exact integer. Records containing such values are resampled so
# every emitted number is type-unambiguous.
_DEC64_TEXT_SAFE = 1e16

_SEED_MIX = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class GenSpec:
    category: str
    digit_range: tuple[int, int] = (1, 5)
    step_range: tuple[int, int] = (2, 10)
    count: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown category {self.category!r}")
        lo, hi = self.digit_range
        if not (1 <= lo <= hi <= MAX_DIGITS):
            raise ValueError(f"digit range {self.digit_range} outside [1, {MAX_DIGITS}]")
        slo, shi = self.step_range
        if self.category == "exponentiation":
            if (slo, shi) != (1, 1):
                object.__setattr__(self, "step_range", (1, 1))
        elif not (2 <= slo <= shi <= MAX_STEPS):
            raise ValueError(f"step range {self.step_range} outside [2, {MAX_STEPS}]")

    @property
    def mode(self) -> str:
        return FRACTION if self.category == "fraction" else STANDARD


@dataclass(frozen=True)
class Phase:
    specs: tuple[GenSpec, ...]
    count: int


@dataclass(frozen=True)
class CurriculumSchedule:
    phases: tuple[Phase, ...]
    seed: int

    @property
    def total(self) -> int:
        return sum(p.count for p in self.phases)


def default_curriculum(total: int, seed: int, tail_count: int = 50_000) -> CurriculumSchedule:
    """Phase 1: all categories capped at 5 digits. Phase 2: a smaller tail of
    records with operands of 5 to 12 digits."""
    tail = min(tail_count, total)
    head = total - tail
    phases = []
    if head:
        phases.append(Phase(_phase_specs(seed, 0, (1, 5)), head))
    if tail:
        phases.append(Phase(_phase_specs(seed, 1, (5, MAX_DIGITS)), tail))
    return CurriculumSchedule(tuple(phases), seed)


def _phase_specs(seed: int, phase_idx: int, digits: tuple[int, int]) -> tuple[GenSpec, ...]:
    return tuple(
        GenSpec(
            category=cat,
            digit_range=digits,
            step_range=(1, 1) if cat == "exponentiation" else (2, 10),
            seed=(seed * 1_000_003 + phase_idx * 101 + slot * 7919) & _MASK,
        )
        for slot, cat in enumerate(CATEGORIES)
    )


def evaluation_schedule(train: CurriculumSchedule, count: int = 9_592) -> CurriculumSchedule:
    """Held-out set mirroring the training mixture, from a disjoint seed stream."""
    new_seed = (train.seed ^ _SEED_MIX) & _MASK
    total = train.total
    phases = []
    allotted = 0
    for i, phase in enumerate(train.phases):
        n = count - allotted if i == len(train.phases) - 1 else round(count * phase.count / total)
        allotted += n
        specs = tuple(
            GenSpec(s.category, s.digit_range, s.step_range,
                    seed=(s.seed ^ _SEED_MIX) & _MASK)
            for s in phase.specs
        )
        phases.append(Phase(specs, n))
    return CurriculumSchedule(tuple(phases), new_seed)


# ---------------------------------------------------------------------------
# literal and chain construction


def _digits_of(rng: random.Random, spec: GenSpec) -> int:
    return rng.randint(*spec.digit_range)


def _int_of_digits(rng: random.Random, d: int) -> int:
    lo = 10 ** (d - 1) if d > 1 else 1
    return rng.randint(lo, 10 ** d - 1)


def _int_lit(rng, spec, negative=False) -> Lit:
    v = _int_of_digits(rng, _digits_of(rng, spec))
    if negative:
        return Lit(-v, f"-{v}", "negative")
    return Lit(v, str(v), "integer")


def _decimal_lit(rng, spec, negative=False) -> Lit:
    whole = _int_of_digits(rng, _digits_of(rng, spec))
    fd = rng.randint(1, 5)
    frac = rng.randrange(10 ** fd)
    text = f"{whole}.{frac:0{fd}d}"
    if negative:
        text = "-" + text
    return Lit(float(text), text, "negative" if negative else "decimal")


def _percent_lit(rng, spec) -> Lit:
    v = _int_of_digits(rng, _digits_of(rng, spec))
    return Lit(v, f"{v}%", "percent")


def _fraction_lit(rng, spec) -> FractionLit:
    num = _int_of_digits(rng, _digits_of(rng, spec))
    den = _int_of_digits(rng, _digits_of(rng, spec))
    return FractionLit(num, den, text=f"({num}/{den})", parens=True)


def _negate_fraction(f: FractionLit) -> FractionLit:
    return FractionLit(-f.num, f.den, text=f"-{f.text}", parens=True)


def _lit_digit_size(node: Node) -> int:
    if isinstance(node, Lit):
        if node.origin == "percent":
            return len(str(abs(node.value)))
        whole = node.text.lstrip("-").split(".", 1)[0]
        return len(whole)
    if isinstance(node, FractionLit):
        return max(len(str(abs(node.num))), len(str(node.den)))
    return 0


def max_operand_digits(e: Node) -> int:
    return max((_lit_digit_size(n) for n in iter_nodes(e)), default=0)


def _chain(nodes: list[Node], ops: list[str]) -> Node:
    """Left-associative tree with * and / binding tighter than + and -."""
    terms = [nodes[0]]
    adds: list[str] = []
    for op, nd in zip(ops, nodes[1:]):
        if op in "*/":
            terms[-1] = Binary(op, terms[-1], nd)
        else:
            adds.append(op)
            terms.append(nd)
    e = terms[0]
    for op, t in zip(adds, terms[1:]):
        e = Binary(op, e, t)
    return e


def _cap_float_magnitudes(rng, nodes: list[Node], ops: list[str]) -> None:
    """Clamp multiplicative runs so binary64 intermediates stay printable.

    Only matters once a division or decimal makes the value non-exact; pure
    integer chains are exact at any size and left alone.
    """
    has_float = any(op == "/" for op in ops) or any(
        isinstance(n, Lit) and n.origin in ("decimal", "percent") for n in nodes
    ) or any(isinstance(n, Lit) and "." in n.text for n in nodes)
    if not has_float:
        return
    est = _lit_digit_size(nodes[0])
    for i, op in enumerate(ops):
        d = _lit_digit_size(nodes[i + 1])
        if op == "*" and est + d > _FLOAT_BUDGET:
            op = ops[i] = rng.choice("+-")
        elif op == "/" and est - d < -_FLOAT_BUDGET:
            op = ops[i] = rng.choice("+-")
        est = est + d if op == "*" else (est - d if op == "/" else d)


def _group_kind(sub: Node) -> str:
    return "[" if any(isinstance(n, Group) for n in iter_nodes(sub)) else "("


def _wrap_span(nodes: list[Node], ops: list[str], i: int, j: int) -> None:
    """Bracket operands i..j (inclusive) into a single group operand."""
    sub = _chain(nodes[i : j + 1], ops[i:j])
    nodes[i : j + 1] = [Group(_group_kind(sub), sub)]
    del ops[i:j]


# ---------------------------------------------------------------------------
# category samplers


def _int_chain_parts(rng, spec: GenSpec, pool: str) -> tuple[list[int], list[str], list[str]]:
    """Operand values/texts and operators for a flat integer chain.

    Consumes the rng in exactly the same order as the node-building sampler so
    the fast string tracer and the tree engine describe the same record.
    """
    n = rng.randint(*spec.step_range)
    values: list[int] = []
    texts: list[str] = []
    digs: list[int] = []
    for _ in range(n + 1):
        d = _digits_of(rng, spec)
        v = _int_of_digits(rng, d)
        values.append(v)
        texts.append(str(v))
        digs.append(d)
    ops = [rng.choice(pool) for _ in range(n)]
    if "/" in ops:
        est = digs[0]
        for i, op in enumerate(ops):
            d = digs[i + 1]
            if op == "*" and est + d > _FLOAT_BUDGET:
                op = ops[i] = rng.choice("+-")
            elif op == "/" and est - d < -_FLOAT_BUDGET:
                op = ops[i] = rng.choice("+-")
            est = est + d if op == "*" else (est - d if op == "/" else d)
    return values, texts, ops


def _sample_int_mixed(rng, spec: GenSpec, pool: str = "+-*/") -> Node:
    values, texts, ops = _int_chain_parts(rng, spec, pool)
    nodes: list[Node] = [Lit(v, t, "integer") for v, t in zip(values, texts)]
    return _chain(nodes, ops)


def _sample_exponentiation(rng, spec: GenSpec, pool: str = "") -> Node:
    hi_digits = min(spec.digit_range[1], 4)
    lo_digits = min(spec.digit_range[0], hi_digits)
    base = _int_of_digits(rng, rng.randint(lo_digits, hi_digits))
    base = min(base, EXP_BASE_CAP)
    exponent = rng.randint(0, EXP_CAP)
    return Binary("^", Lit(base, str(base), "integer"),
                  Lit(exponent, str(exponent), "integer"))


def _sample_bracketed(rng, spec: GenSpec, pool: str = "+-*/") -> Node:
    n = rng.randint(*spec.step_range)
    nodes: list[Node] = [
        _int_lit(rng, spec, negative=rng.random() < 0.15) for _ in range(n + 1)
    ]
    ops = [rng.choice(pool) for _ in range(n)]
    _cap_float_magnitudes(rng, nodes, ops)
    k = rng.randint(1, n - 1)  # ops inside the group; at least one stays outside
    s = rng.randint(0, n - k)
    _wrap_span(nodes, ops, s, s + k)
    return _chain(nodes, ops)


def _lengthy_literal(rng, spec: GenSpec) -> Lit:
    roll = rng.random()
    if roll < 0.35:
        return _int_lit(rng, spec)
    if roll < 0.60:
        return _decimal_lit(rng, spec)
    if roll < 0.75:
        return _percent_lit(rng, spec)
    if roll < 0.90:
        return _int_lit(rng, spec, negative=True)
    return _decimal_lit(rng, spec, negative=True)


def _sample_lengthy(rng, spec: GenSpec, pool: str = "+-*/") -> Node:
    n = rng.randint(*spec.step_range)
    nodes: list[Node] = [_lengthy_literal(rng, spec) for _ in range(n + 1)]
    ops = [rng.choice(pool) for _ in range(n)]
    _cap_float_magnitudes(rng, nodes, ops)
    wraps = 0 if rng.random() < 0.25 else rng.choice((1, 1, 2))
    for _ in range(wraps):
        remaining = len(ops)
        if remaining < 2:
            break
        k = rng.randint(1, remaining - 1)
        s = rng.randint(0, remaining - k)
        _wrap_span(nodes, ops, s, s + k)
    return _chain(nodes, ops)


def _sample_fraction(rng, spec: GenSpec, pool: str = "+-*/") -> Node:
    n = rng.randint(*spec.step_range)
    nodes: list[Node] = [_fraction_lit(rng, spec) for _ in range(n + 1)]
    ops = [rng.choice(pool) for _ in range(n)]

    mul_positions = [i for i, op in enumerate(ops) if op in "*/"]
    if mul_positions and rng.random() < 0.35:
        # Cancel-style sign pair on the two factors around one * or /, with the
        # left part of that multiplicative run bracketed.
        i = rng.choice(mul_positions)
        nodes[i] = _negate_fraction(nodes[i])
        nodes[i + 1] = _negate_fraction(nodes[i + 1])
        l = i
        while l > 0 and ops[l - 1] in "*/":
            l -= 1
        if i > l:
            _wrap_span(nodes, ops, l, i)
    elif len(ops) >= 2 and rng.random() < 0.25:
        run = rng.randint(1, len(ops) - 1)
        s = rng.randint(0, len(ops) - run)
        _wrap_span(nodes, ops, s, s + run)
    return _chain(nodes, ops)


_SAMPLERS = {
    "int-mixed": _sample_int_mixed,
    "exponentiation": _sample_exponentiation,
    "bracketed-int": _sample_bracketed,
    "lengthy-mixed": _sample_lengthy,
    "fraction": _sample_fraction,
}

_MAX_ATTEMPTS = 32


def _record_rng(spec: GenSpec, index: int) -> random.Random:
    return random.Random((spec.seed * _SEED_MIX + index) & _MASK)


def sample_expression(spec: GenSpec, index: int) -> Node:
    """Deterministic expression for (spec.seed, index); validity is guaranteed."""
    return _build(spec, index)[0]


def _has_ambiguous_float(t) -> bool:
    for snap in t.snapshots[1:]:
        for n in iter_nodes(snap):
            if isinstance(n, Lit) and isinstance(n.value, float) and abs(n.value) >= _DEC64_TEXT_SAFE:
                return True
    return False


def _build(spec: GenSpec, index: int):
    rng = _record_rng(spec, index)
    sampler = _SAMPLERS[spec.category]
    for _ in range(_MAX_ATTEMPTS):
        expr = sampler(rng, spec)
        try:
            t = trace(expr, spec.mode)
        except (DivByZero, Dec64RangeError, RenderOverflow):
            continue
        if _has_ambiguous_float(t):
            continue
        if not values_equal(t.final, direct_eval(expr, spec.mode)):
            raise MathError(f"trace/eval mismatch for {render_trace(t)!r}")
        return expr, t
    # Add/subtract-only chains always evaluate cleanly.
    expr = sampler(rng, spec, pool="+-")
    t = trace(expr, spec.mode)
    if not values_equal(t.final, direct_eval(expr, spec.mode)):
        raise MathError("trace/eval mismatch in fallback record")
    return expr, t


def _fast_chain_record(values: list, texts: list[str], ops: list[str]) -> tuple[str, object]:
    """String tracer for flat chains of positive literals: byte-identical to the
    tree engine (equivalence is pinned by tests) at a fraction of the cost."""
    vals = list(values)
    txts = list(texts)
    opl = list(ops)
    segs = [txts[0]]
    for op, t in zip(opl, txts[1:]):
        segs.append(op)
        segs.append(t)
    snapshots = ["".join(segs)]
    while opl:
        idx = None
        for i, op in enumerate(opl):
            if op == "*" or op == "/":
                idx = i
                break
        if idx is None:
            idx = 0
        op = opl.pop(idx)
        b = vals.pop(idx + 1)
        a = vals[idx]
        if op == "*":
            v = numeric.mul(a, b)
        elif op == "/":
            v = numeric.div(a, b)
        elif op == "+":
            v = numeric.add(a, b)
        else:
            v = numeric.sub(a, b)
        if isinstance(v, float) and abs(v) >= _DEC64_TEXT_SAFE:
            raise Dec64RangeError("intermediate too large to re-read unambiguously")
        vals[idx] = v
        txts.pop(idx + 1)
        txts[idx] = numeric.render(v)
        segs = [txts[0]]
        for o, t in zip(opl, txts[1:]):
            segs.append(o)
            segs.append(t)
        snapshots.append("".join(segs))
    return "=".join(snapshots), vals[0]


def _chain_eval(values: list, ops: list[str]):
    """Precedence-aware evaluation of a flat chain, independent of the tracer."""
    terms = [values[0]]
    addops: list[str] = []
    for op, v in zip(ops, values[1:]):
        if op == "*":
            terms[-1] = numeric.mul(terms[-1], v)
        elif op == "/":
            terms[-1] = numeric.div(terms[-1], v)
        else:
            addops.append(op)
            terms.append(v)
    acc = terms[0]
    for op, t in zip(addops, terms[1:]):
        acc = numeric.add(acc, t) if op == "+" else numeric.sub(acc, t)
    return acc


def build_record(spec: GenSpec, index: int) -> tuple[str, int, int]:
    """Returns (trace line, atomic op count, max operand digit count)."""
    if spec.category == "int-mixed":
        rng = _record_rng(spec, index)
        pools = ["+-*/"] * _MAX_ATTEMPTS + ["+-"]
        for pool in pools:
            values, texts, ops = _int_chain_parts(rng, spec, pool)
            try:
                line, final = _fast_chain_record(values, texts, ops)
            except (DivByZero, Dec64RangeError, RenderOverflow):
                continue
            if not values_equal(final, _chain_eval(values, ops)):
                raise MathError(f"trace/eval mismatch for {line!r}")
            return line, len(ops), max(len(t) for t in texts)
        raise MathError("fallback chain failed")  # pragma: no cover
    expr, t = _build(spec, index)
    from .expr import count_atomic_ops

    return render_trace(t), count_atomic_ops(expr), max_operand_digits(expr)


# ---------------------------------------------------------------------------
# dataset assembly


@dataclass
class DatasetManifest:
    path: str
    record_count: int
    seed: int
    content_digest: str
    category_histogram: dict = field(default_factory=dict)
    step_histogram: dict = field(default_factory=dict)
    digit_histogram: dict = field(default_factory=dict)
    format_version: int = MANIFEST_FORMAT_VERSION

    def to_json(self) -> str:
        return json.dumps(
            {
                "format_version": self.format_version,
                "path": self.path,
                "record_count": self.record_count,
                "seed": self.seed,
                "content_digest": self.content_digest,
                "category_histogram": dict(sorted(self.category_histogram.items())),
                "step_histogram": {str(k): v for k, v in sorted(self.step_histogram.items())},
                "digit_histogram": {str(k): v for k, v in sorted(self.digit_histogram.items())},
            },
            indent=2,
        )


def spec_for_index(schedule: CurriculumSchedule, index: int) -> GenSpec:
    start = 0
    for phase in schedule.phases:
        if index < start + phase.count:
            return phase.specs[(index - start) % len(phase.specs)]
        start += phase.count
    raise IndexError(index)


def iter_records(schedule: CurriculumSchedule, start: int = 0,
                 end: Optional[int] = None) -> Iterator[tuple[str, str, int, int]]:
    """Yields (line, category, op count, digit count) for indices [start, end)."""
    end = schedule.total if end is None else end
    for i in range(start, end):
        spec = spec_for_index(schedule, i)
        line, ops, digits = build_record(spec, i)
        yield line, spec.category, ops, digits


def _chunk_worker(args: tuple[int, int]) -> tuple[bytes, Counter, Counter, Counter]:
    start, end = args
    cats: Counter = Counter()
    steps_hist: Counter = Counter()
    digits_hist: Counter = Counter()
    parts = []
    for line, category, ops, digits in iter_records(_WORKER_SCHEDULE, start, end):
        parts.append(line)
        cats[category] += 1
        steps_hist[ops] += 1
        digits_hist[digits] += 1
    blob = ("\n".join(parts) + "\n").encode() if parts else b""
    return blob, cats, steps_hist, digits_hist


_WORKER_SCHEDULE: CurriculumSchedule = None  # set per worker via initializer


def _init_worker(schedule: CurriculumSchedule) -> None:
    global _WORKER_SCHEDULE
    _WORKER_SCHEDULE = schedule


def generate_dataset(
    schedule: CurriculumSchedule,
    out: IO[bytes],
    path_label: str = "<stream>",
    workers: int = 1,
    chunk_size: int = 1024,
) -> DatasetManifest:
    """Write one trace per line; byte-identical output for any worker count."""
    total = schedule.total
    digest = hashlib.sha256()
    cats: Counter = Counter()
    steps_hist: Counter = Counter()
    digits_hist: Counter = Counter()

    chunks = [(s, min(s + chunk_size, total)) for s in range(0, total, chunk_size)]

    def consume(blob: bytes, c: Counter, s: Counter, d: Counter) -> None:
        out.write(blob)
        digest.update(blob)
        cats.update(c)
        steps_hist.update(s)
        digits_hist.update(d)

    if workers <= 1 or len(chunks) <= 1:
        _init_worker(schedule)
        for chunk in chunks:
            consume(*_chunk_worker(chunk))
    else:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(workers, initializer=_init_worker, initargs=(schedule,)) as pool:
            for result in pool.imap(_chunk_worker, chunks):
                consume(*result)

    return DatasetManifest(
        path=path_label,
        record_count=total,
        seed=schedule.seed,
        content_digest="sha256:" + digest.hexdigest(),
        category_histogram=dict(cats),
        step_histogram=dict(steps_hist),
        digit_histogram=dict(digits_hist),
    )


def schedule_from_json(text: str) -> CurriculumSchedule:
    """Schedule file format: {"seed": int, "phases": [{"count": int, "specs":
    [{"category", "digits": [lo, hi], "steps": [lo, hi], "seed"?}, ...]}, ...]}"""
    data = json.loads(text)
    seed = int(data["seed"])
    phases = []
    for p_idx, p in enumerate(data["phases"]):
        specs = []
        for s_idx, s in enumerate(p["specs"]):
            category = s["category"]
            spec_seed = s.get("seed")
            if spec_seed is None:
                spec_seed = (seed * 1_000_003 + p_idx * 101 + s_idx * 7919) & _MASK
            steps = s.get("steps")
            if steps is None:
                steps = [1, 1] if category == "exponentiation" else [2, 10]
            specs.append(
                GenSpec(
                    category=category,
                    digit_range=tuple(s.get("digits", [1, 5])),
                    step_range=tuple(steps),
                    seed=spec_seed,
                )
            )
        phases.append(Phase(tuple(specs), int(p["count"])))
    return CurriculumSchedule(tuple(phases), seed)
