"""Scoring of model predictions: two-decimal accuracy, relative error under a
threshold, accuracy grids grouped by operation and number format, and n-digit
two-operand problem suites.

A prediction is read as the text after its last ``=``; an unparseable tail is
an extraction failure and scores as incorrect under both metrics, never as an
exception. Scoring is pure and order-independent.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Union

from . import numeric
from .expr import Binary, FRACTION, FractionLit, Lit, STANDARD, Unary, iter_nodes, parse
from .errors import StepmathError
from .numeric import Frac, Number
from .steps import direct_eval

DEFAULT_RE_THRESHOLD = 0.01

_INT_RE = re.compile(r"[+-]?\d+\Z")
_DEC_RE = re.compile(r"[+-]?\d+\.\d+\Z")
_FRAC_RE = re.compile(r"([+-]?\d+)/(\d+)\Z")
_PCT_RE = re.compile(r"([+-]?\d+(?:\.\d+)?)%\Z")


def parse_number_text(text: str) -> Optional[Number]:
    """Integer, decimal, fraction, or percent text to a value; None otherwise."""
    t = text.strip()
    if _INT_RE.fullmatch(t):
        return int(t)
    if _DEC_RE.fullmatch(t):
        return float(t)
    m = _FRAC_RE.fullmatch(t)
    if m:
        den = int(m.group(2))
        if den == 0:
            return None
        return Frac(int(m.group(1)), den)
    m = _PCT_RE.fullmatch(t)
    if m:
        payload = m.group(1)
        return numeric.percent_value(int(payload) if "." not in payload else float(payload))
    return None


def extract_answer(prediction_text: str) -> Optional[Number]:
    """Value of the segment after the final '='; None on extraction failure."""
    tail = prediction_text.rsplit("=", 1)[-1]
    return parse_number_text(tail)


def is_correct(y_hat: Number, y: Number) -> bool:
    """Two-decimal agreement, rounding half away from zero; fractions compare
    as exact rationals first so distinct fractions are never conflated."""
    if isinstance(y_hat, Frac) and isinstance(y, Frac):
        return y_hat.num * y.den == y.num * y_hat.den
    try:
        return numeric.two_decimal_cents(y_hat) == numeric.two_decimal_cents(y)
    except (StepmathError, ArithmeticError):
        return False


def relative_error(y_hat: Number, y: Number) -> Optional[float]:
    """|y_hat - y| / |y| as binary64. None when y == 0 and y_hat != 0, which has
    no defined relative error; exactly 0.0 when both are zero."""
    if numeric.is_zero(y):
        return 0.0 if numeric.is_zero(y_hat) else None
    if isinstance(y_hat, float) or isinstance(y, float):
        fy = numeric.to_float(y)
        return abs((numeric.to_float(y_hat) - fy) / fy)
    fh = Fraction(*_as_pair(y_hat))
    fy = Fraction(*_as_pair(y))
    try:
        return float(abs((fh - fy) / fy))
    except OverflowError:
        return float("inf")


def _as_pair(v: Number) -> tuple[int, int]:
    if isinstance(v, Frac):
        return v.num, v.den
    return int(v), 1


# ---------------------------------------------------------------------------
# grouped classification

OPS = ("ADD", "SUB", "MUL", "DIV", "POW", "MIX")
FORMATS = ("Int", "Dec", "Frac", "Perc", "Neg")

_OP_LABEL = {"+": "ADD", "-": "SUB", "*": "MUL", "/": "DIV", "^": "POW"}
_FRACTION_LIT_RE = re.compile(r"\(-?\d+/\d+\)")


def classify_problem(problem: str) -> Optional[tuple[str, str]]:
    """(operation, format) bucket for a problem string, None if unclassifiable.

    Format priority when a problem mixes several: Frac > Perc > Dec > Neg > Int.
    """
    mode = FRACTION if _FRACTION_LIT_RE.search(problem) else STANDARD
    try:
        tree = parse(problem, mode)
    except StepmathError:
        return None
    ops = [n.op for n in iter_nodes(tree) if isinstance(n, Binary)]
    if not ops:
        return None
    op_label = _OP_LABEL[ops[0]] if len(ops) == 1 else "MIX"

    has_frac = any(isinstance(n, FractionLit) for n in iter_nodes(tree))
    if has_frac:
        fmt = "Frac"
    elif "%" in problem:
        fmt = "Perc"
    elif "." in problem:
        fmt = "Dec"
    elif any(
        (isinstance(n, Lit) and n.text.startswith("-"))
        or (isinstance(n, Unary) and n.op == "-")
        for n in iter_nodes(tree)
    ):
        fmt = "Neg"
    else:
        fmt = "Int"
    return op_label, fmt


# ---------------------------------------------------------------------------
# record scoring


@dataclass
class PredictionRecord:
    problem: str
    ground_truth: Optional[Number]  # None marks a malformed record
    prediction_text: str
    extracted: Optional[Number] = None

    @classmethod
    def from_raw(cls, problem: str, ground_truth: Union[str, int, float],
                 prediction: str) -> "PredictionRecord":
        gt = parse_number_text(str(ground_truth))
        return cls(problem, gt, prediction, extract_answer(prediction))

    @classmethod
    def malformed(cls, detail: str) -> "PredictionRecord":
        return cls(problem="", ground_truth=None, prediction_text=detail)


@dataclass
class EvalReport:
    total: int
    correct: int
    threshold: float
    re_correct: int
    re_defined: int
    errors: int = 0
    grouped: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0

    @property
    def re_accuracy(self) -> float:
        # True answer 0 with a nonzero prediction has no defined relative error
        # and is excluded from this denominator; extraction failures stay in it
        # as plain misses.
        return self.re_correct / self.re_defined if self.re_defined else 0.0

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "accuracy": self.accuracy,
            "re_accuracy": self.re_accuracy,
            "threshold": self.threshold,
            "correct": self.correct,
            "re_correct": self.re_correct,
            "re_defined": self.re_defined,
            "errors": self.errors,
            "grouped": {
                f"{op}/{fmt}": stats for (op, fmt), stats in sorted(self.grouped.items())
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def evaluate(records: Iterable[PredictionRecord],
             threshold: float = DEFAULT_RE_THRESHOLD,
             keep_verdicts: bool = False) -> EvalReport:
    total = correct = re_correct = re_defined = errors = 0
    grouped: dict = {}
    verdicts = []
    for rec in records:
        total += 1
        if rec.ground_truth is None:
            # malformed record: an error verdict, incorrect, no defined RE
            errors += 1
            re_val, re_ok, ok = None, False, False
        elif rec.extracted is None:
            re_val = None
            re_ok = ok = False
            # an extraction failure is incorrect, not undefined, so it counts
            re_defined += 1
        else:
            ok = is_correct(rec.extracted, rec.ground_truth)
            re_val = relative_error(rec.extracted, rec.ground_truth)
            re_ok = re_val is not None and re_val <= threshold
            if re_val is not None:
                re_defined += 1
        correct += ok
        re_correct += re_ok

        bucket = classify_problem(rec.problem) if rec.ground_truth is not None else None
        if bucket is not None:
            stats = grouped.setdefault(bucket, {"n": 0, "correct": 0})
            stats["n"] += 1
            stats["correct"] += ok
        if keep_verdicts:
            verdicts.append(
                {
                    "problem": rec.problem,
                    "error": rec.ground_truth is None,
                    "correct": bool(ok),
                    "re": re_val,
                    "re_correct": bool(re_ok),
                    "extracted": None if rec.extracted is None else numeric.render(rec.extracted),
                }
            )
    for stats in grouped.values():
        stats["accuracy"] = stats["correct"] / stats["n"] if stats["n"] else 0.0
    return EvalReport(
        total=total,
        correct=correct,
        threshold=threshold,
        re_correct=re_correct,
        re_defined=re_defined,
        errors=errors,
        grouped=grouped,
        verdicts=verdicts,
    )


def grouped_csv(report: EvalReport) -> str:
    """Grid of accuracies, operations down the side and formats across."""
    lines = ["task," + ",".join(FORMATS)]
    for op in OPS:
        cells = []
        for fmt in FORMATS:
            stats = report.grouped.get((op, fmt))
            cells.append("" if stats is None else f"{stats['accuracy']:.4f}")
        lines.append(op + "," + ",".join(cells))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# n-digit two-operand suites


BIGBENCH_OPS = {"ADD": "+", "SUB": "-", "MUL": "*", "DIV": "/"}
BIGBENCH_DIGITS = (1, 2, 3, 4, 5)


def suite_grid_csv(accuracies: dict) -> str:
    """Operation-by-digit-count grid for scored n-digit suites.

    `accuracies` maps (op, digits) to a float; missing cells stay blank.
    """
    lines = ["task," + ",".join(f"{d}D" for d in BIGBENCH_DIGITS)]
    for op in sorted(BIGBENCH_OPS):
        cells = []
        for d in BIGBENCH_DIGITS:
            acc = accuracies.get((op, d))
            cells.append("" if acc is None else f"{acc:.4f}")
        lines.append(op + "," + ",".join(cells))
    return "\n".join(lines) + "\n"


def bigbench_suite(op: str, digits: int, n: int, seed: int) -> list[dict]:
    """n two-operand problems with both operands of exactly `digits` digits."""
    if op not in BIGBENCH_OPS:
        raise ValueError(f"op must be one of {sorted(BIGBENCH_OPS)}")
    if not 1 <= digits <= 5:
        raise ValueError("digits must be in 1..5")
    sym = BIGBENCH_OPS[op]
    lo = 10 ** (digits - 1) if digits > 1 else 1
    hi = 10 ** digits - 1
    rng = random.Random((seed * 0x9E3779B97F4A7C15 + digits) & ((1 << 64) - 1))
    problems = []
    for _ in range(n):
        a = rng.randint(lo, hi)
        b = rng.randint(lo, hi)
        problem = f"{a}{sym}{b}"
        truth = direct_eval(parse(problem, STANDARD))
        problems.append({"problem": problem, "ground_truth": numeric.render(truth)})
    return problems


# ---------------------------------------------------------------------------
# JSONL plumbing


def load_prediction_records(
    combined_path: Optional[str] = None,
    gold_path: Optional[str] = None,
    pred_path: Optional[str] = None,
) -> list[PredictionRecord]:
    """Either one combined JSONL ({problem, ground_truth, prediction}) or a gold
    file ({problem, ground_truth}) plus a line-aligned prediction file (JSONL
    with {prediction} or raw text lines)."""
    if combined_path is not None:
        records = []
        for obj in _read_jsonl(combined_path):
            if not isinstance(obj, dict) or not {"problem", "ground_truth", "prediction"} <= obj.keys():
                records.append(PredictionRecord.malformed(repr(obj)))
                continue
            records.append(
                PredictionRecord.from_raw(obj["problem"], obj["ground_truth"], obj["prediction"])
            )
        return records
    if gold_path is None or pred_path is None:
        raise ValueError("need either a combined file or gold and prediction files")
    golds = list(_read_jsonl(gold_path))
    preds = _read_predictions(pred_path)
    if len(golds) != len(preds):
        raise ValueError(f"{len(golds)} gold records vs {len(preds)} predictions")
    records = []
    for g, p in zip(golds, preds):
        if not isinstance(g, dict) or not {"problem", "ground_truth"} <= g.keys():
            records.append(PredictionRecord.malformed(repr(g)))
        else:
            records.append(PredictionRecord.from_raw(g["problem"], g["ground_truth"], p))
    return records


def _read_jsonl(path: str):
    """Yields parsed objects; a line that is not valid JSON yields None so the
    caller can emit an error verdict instead of aborting the whole stream."""
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError:
                yield None


def _read_predictions(path: str) -> list[str]:
    preds = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                preds.append(obj["prediction"] if isinstance(obj, dict) else str(obj))
            except (json.JSONDecodeError, KeyError):
                preds.append(line)
    return preds
