"""Math-word-problem ingestion: rewrite directly-calculated answers into
step-by-step traces, and score predictions for arithmetic vs answer accuracy.

Records arrive as JSONL with Ape210K-style field names ({id, original_text,
equation, ans}); a field map handles variants. Question text is carried
verbatim (it is usually Chinese); only the equation is parsed. Records that
fail (equation does not parse, stored answer disagrees with evaluation) go to
a rejects file with a reason, never silently dropped.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Optional, Union

from . import numeric
from .errors import AnswerMismatch, EquationParseError, MathError, StepmathError
from .expr import STANDARD, parse
from .metrics import extract_answer, is_correct, parse_number_text
from .numeric import Number
from .steps import direct_eval, render_trace, trace

DEFAULT_FIELD_MAP = {
    "id": "id",
    "question": "original_text",
    "equation": "equation",
    "answer": "ans",
}

# Leading "x=" style prefixes and trailing unit text are stripped before
# parsing; both normalizations are inferred conventions, so they are reported
# in each record's notes.
_EQ_PREFIX_RE = re.compile(r"^[xX]=")
_ANSWER_CORE_RE = re.compile(r"[+-]?\d[\d./%]*")


@dataclass
class MWPRecord:
    id: str
    question: str
    equation: str
    answer: Number
    answer_text: str
    notes: tuple[str, ...] = ()


@dataclass
class ReconstructedRecord:
    record: MWPRecord
    solution_trace: str

    def to_json_obj(self, field_map: dict = DEFAULT_FIELD_MAP) -> dict:
        return {
            field_map["id"]: self.record.id,
            field_map["question"]: self.record.question,
            field_map["equation"]: self.record.equation,
            field_map["answer"]: self.record.answer_text,
            "solution_trace": self.solution_trace,
        }


def normalize_equation(text: str) -> tuple[str, list[str]]:
    notes = []
    eq = text.strip()
    if _EQ_PREFIX_RE.match(eq):
        eq = eq[2:]
        notes.append("stripped x= prefix")
    if any(c.isspace() for c in eq):
        eq = "".join(eq.split())
        notes.append("stripped whitespace")
    return eq, notes


def normalize_answer(text: str) -> tuple[Optional[Number], str, list[str]]:
    notes = []
    raw = text.strip()
    value = parse_number_text(raw)
    if value is not None:
        return value, raw, notes
    m = _ANSWER_CORE_RE.search(raw)
    if m and m.group(0) != raw:
        core = m.group(0)
        value = parse_number_text(core)
        if value is not None:
            notes.append(f"stripped answer text around {core!r}")
            return value, core, notes
    return None, raw, notes


def record_from_obj(obj: dict, field_map: dict = DEFAULT_FIELD_MAP) -> MWPRecord:
    equation, eq_notes = normalize_equation(str(obj[field_map["equation"]]))
    answer, answer_text, ans_notes = normalize_answer(str(obj[field_map["answer"]]))
    if answer is None:
        raise EquationParseError(f"unparseable answer {obj[field_map['answer']]!r}")
    return MWPRecord(
        id=str(obj[field_map["id"]]),
        question=str(obj.get(field_map["question"], "")),
        equation=equation,
        answer=answer,
        answer_text=answer_text,
        notes=tuple(eq_notes + ans_notes),
    )


def reconstruct(record: MWPRecord) -> ReconstructedRecord:
    """Attach the step-by-step trace of the record's equation.

    Raises EquationParseError or AnswerMismatch; idempotent on success (the
    trace is a pure function of the equation).
    """
    try:
        tree = parse(record.equation, STANDARD)
    except StepmathError as err:
        raise EquationParseError(f"{record.equation!r}: {err}") from None
    try:
        value = direct_eval(tree)
    except MathError as err:
        raise EquationParseError(f"{record.equation!r}: {err}") from None
    if not is_correct(value, record.answer):
        raise AnswerMismatch(
            f"equation {record.equation!r} evaluates to {numeric.render(value)}, "
            f"stored answer is {record.answer_text!r}"
        )
    solution = render_trace(trace(tree, STANDARD))
    return ReconstructedRecord(record=record, solution_trace=solution)


def reconstruct_stream(
    objs: Iterable[dict],
    rejects: IO[str],
    field_map: dict = DEFAULT_FIELD_MAP,
) -> Iterator[ReconstructedRecord]:
    """Reconstruct each record; failures land in the rejects sink as JSONL."""
    for obj in objs:
        try:
            rec = record_from_obj(obj, field_map)
            yield reconstruct(rec)
        except StepmathError as err:
            rejects.write(
                json.dumps(
                    {"id": str(obj.get(field_map["id"], "?")), "reason": str(err)},
                    ensure_ascii=False,
                )
                + "\n"
            )


def reconstruct_file(
    in_path: str,
    out_path: str,
    rejects_path: str,
    field_map: dict = DEFAULT_FIELD_MAP,
) -> tuple[int, int]:
    """Returns (reconstructed count, reject count). The rejects file is always
    created, even when empty."""
    written = 0
    rejected = 0
    with open(in_path, encoding="utf-8") as fin, \
            open(out_path, "w", encoding="utf-8") as fout, \
            open(rejects_path, "w", encoding="utf-8") as frej:
        def objs():
            for line in fin:
                line = line.strip()
                if line:
                    yield json.loads(line)

        for rec in reconstruct_stream(objs(), frej, field_map):
            fout.write(json.dumps(rec.to_json_obj(field_map), ensure_ascii=False) + "\n")
            written += 1
        frej.flush()
    with open(rejects_path, encoding="utf-8") as frej:
        rejected = sum(1 for line in frej if line.strip())
    return written, rejected


# ---------------------------------------------------------------------------
# scoring


@dataclass
class MWPReport:
    total: int
    arithmetic_correct: int
    answer_correct: int
    verdicts: list

    @property
    def arithmetic_accuracy(self) -> float:
        return self.arithmetic_correct / self.total if self.total else 0.0

    @property
    def answer_accuracy(self) -> float:
        return self.answer_correct / self.total if self.total else 0.0

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "arithmetic_accuracy": self.arithmetic_accuracy,
            "answer_accuracy": self.answer_accuracy,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _equation_value(text: str) -> Optional[Number]:
    try:
        return direct_eval(parse(text, STANDARD))
    except StepmathError:
        return None


def score_mwp(
    gold: Iterable[ReconstructedRecord],
    predictions: Union[dict, Iterable[tuple[str, str]]],
    keep_verdicts: bool = False,
) -> MWPReport:
    """Arithmetic accuracy: the predicted expression (text before the first '=')
    is value-equivalent to the gold equation. Answer accuracy: the extracted
    final answer matches the stored answer. Missing ids count as incorrect on
    both metrics."""
    pred_map = dict(predictions) if not isinstance(predictions, dict) else predictions
    total = arith = ans = 0
    verdicts = []
    for g in gold:
        total += 1
        pred = pred_map.get(g.record.id)
        arith_ok = ans_ok = False
        if pred is None:
            verdict = "missing"
        else:
            verdict = "scored"
            first = pred.split("=", 1)[0]
            pv = _equation_value(first)
            gv = _equation_value(g.record.equation)
            arith_ok = pv is not None and gv is not None and is_correct(pv, gv)
            extracted = extract_answer(pred)
            ans_ok = extracted is not None and is_correct(extracted, g.record.answer)
        arith += arith_ok
        ans += ans_ok
        if keep_verdicts:
            verdicts.append(
                {
                    "id": g.record.id,
                    "status": verdict,
                    "arithmetic_correct": bool(arith_ok),
                    "answer_correct": bool(ans_ok),
                }
            )
    return MWPReport(total=total, arithmetic_correct=arith, answer_correct=ans,
                     verdicts=verdicts)


def load_reconstructed(path: str, field_map: dict = DEFAULT_FIELD_MAP) -> list[ReconstructedRecord]:
    out = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            rec = record_from_obj(obj, field_map)
            out.append(ReconstructedRecord(record=rec, solution_trace=obj["solution_trace"]))
    return out
