"""Command-line entry point for every pipeline stage.

Exit codes: 0 success, 2 expression parse error, 3 math error, 4 I/O error,
64 usage error. Every run prints its effective configuration as one JSON line
on stderr so it can be reproduced exactly; `--workers` changes throughput
only, never output bytes.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from typing import Optional

from . import datagen, metrics, mwp, packing, tokenizer
from .errors import (
    ExprSyntaxError,
    MathError,
    NonTerminating,
    RecordTooLong,
    StepmathError,
    UnknownId,
    UnknownSymbol,
)
from .expr import parse, print_expr
from .numeric import render
from .steps import render_trace, trace

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_MATH = 3
EXIT_IO = 4
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _echo_config(command: str, args: argparse.Namespace) -> None:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    print(json.dumps({"command": command, "config": cfg}, ensure_ascii=False),
          file=sys.stderr)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_trace(args) -> int:
    tree = parse(args.expr, args.mode)
    t = trace(tree, args.mode)
    if args.json:
        print(json.dumps({
            "expression": print_expr(tree),
            "trace": render_trace(t),
            "final": render(t.final),
            "rules": t.rules,
        }))
    else:
        print(render_trace(t))
    return EXIT_OK


def _cmd_generate(args) -> int:
    if args.schedule:
        with open(args.schedule, encoding="utf-8") as f:
            schedule = datagen.schedule_from_json(f.read())
    else:
        if args.total is None:
            raise SystemExit(EXIT_USAGE)
        schedule = datagen.default_curriculum(args.total, args.seed)
    with open(args.out, "wb") as out:
        manifest = datagen.generate_dataset(
            schedule, out, path_label=args.out, workers=args.workers
        )
    manifest_path = args.manifest or args.out + ".manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as f:
        f.write(manifest.to_json() + "\n")
    if args.json:
        print(manifest.to_json())
    else:
        print(f"wrote {manifest.record_count} records to {args.out}")
        print(f"digest {manifest.content_digest}")
        print(f"manifest {manifest_path}")
    return EXIT_OK


def _cmd_tokenize(args) -> int:
    if args.text is not None:
        lines = [args.text]
    else:
        with open(args.infile, encoding="utf-8") as f:
            lines = [line.rstrip("\n") for line in f if line.strip()]
    encoded = [tokenizer.encode(line) for line in lines]
    if args.json:
        print(json.dumps([{"text": t, "ids": ids} for t, ids in zip(lines, encoded)]))
    else:
        for ids in encoded:
            print(" ".join(str(i) for i in ids))
    return EXIT_OK


def _cmd_pack(args) -> int:
    with open(args.infile, encoding="utf-8") as f:
        lines = [line.rstrip("\n") for line in f if line.strip()]
    with open(args.out, "wb") as out:
        blocks = packing.pack_sequences(lines, args.block_length, out)
    payload = {"records": len(lines), "blocks": blocks, "block_length": args.block_length}
    print(json.dumps(payload) if args.json else
          f"packed {len(lines)} records into {blocks} blocks of {args.block_length}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    records = metrics.load_prediction_records(
        combined_path=args.infile, gold_path=args.gold, pred_path=args.pred
    )
    report = metrics.evaluate(records, threshold=args.threshold)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as f:
            f.write(metrics.grouped_csv(report))
    if args.json:
        print(report.to_json())
    else:
        print(f"records {report.total}")
        print(f"ACC {report.accuracy:.4f}")
        print(f"RE  {report.re_accuracy:.4f} (threshold {report.threshold})")
    return EXIT_OK


def _cmd_bigbench(args) -> int:
    problems = metrics.bigbench_suite(args.op, args.digits, args.n, args.seed)
    lines = [json.dumps(p) for p in problems]
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write("\n".join(lines) + ("\n" if lines else ""))
        print(f"wrote {len(problems)} problems to {args.out}")
    else:
        for line in lines:
            print(line)
    return EXIT_OK


def _cmd_reconstruct(args) -> int:
    rejects = args.rejects or args.out + ".rejects.jsonl"
    written, rejected = mwp.reconstruct_file(args.infile, args.out, rejects)
    payload = {"reconstructed": written, "rejected": rejected, "rejects_file": rejects}
    print(json.dumps(payload) if args.json else
          f"reconstructed {written} records, rejected {rejected} (see {rejects})")
    return EXIT_OK


def _cmd_score_mwp(args) -> int:
    gold = mwp.load_reconstructed(args.gold)
    preds = {}
    with open(args.pred, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                obj = json.loads(line)
                preds[str(obj["id"])] = obj["prediction"]
    report = mwp.score_mwp(gold, preds)
    if args.json:
        print(report.to_json())
    else:
        print(f"records {report.total}")
        print(f"arithmetic accuracy {report.arithmetic_accuracy:.4f}")
        print(f"answer accuracy     {report.answer_accuracy:.4f}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="stepmath", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trace", help="print the step-by-step trace of an expression")
    # let expressions with a leading negative number ("-7805+...") or signed
    # bracket pass as positionals instead of being read as flags
    p._negative_number_matcher = re.compile(r"^-\d|^-[([]")
    p.add_argument("expr")
    p.add_argument("--mode", choices=["standard", "fraction"], default="standard")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_trace)

    p = sub.add_parser("generate", help="write a curriculum dataset and its manifest")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--total", type=int, help="record count for the default curriculum")
    p.add_argument("--schedule", help="JSON schedule file (overrides --total)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--manifest", help="manifest path (default: OUT.manifest.json)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("tokenize", help="encode text records to token ids")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--text")
    g.add_argument("--in", dest="infile")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_tokenize)

    p = sub.add_parser("pack", help="pack tokenized records into fixed-length blocks")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--block-length", type=int, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_pack)

    p = sub.add_parser("eval", help="score predictions against ground truth")
    p.add_argument("--in", dest="infile", help="combined JSONL {problem, ground_truth, prediction}")
    p.add_argument("--gold", help="JSONL {problem, ground_truth}")
    p.add_argument("--pred", help="line-aligned predictions (JSONL or raw text)")
    p.add_argument("--threshold", type=float, default=metrics.DEFAULT_RE_THRESHOLD)
    p.add_argument("--csv", help="write the operation-by-format accuracy grid here")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("bigbench", help="emit an n-digit two-operand problem suite")
    p.add_argument("--op", required=True, choices=sorted(metrics.BIGBENCH_OPS))
    p.add_argument("--digits", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_bigbench)

    p = sub.add_parser("reconstruct", help="rewrite word-problem answers as step traces")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--rejects", help="rejects path (default: OUT.rejects.jsonl)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("score-mwp", help="arithmetic vs answer accuracy for word problems")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_score_mwp)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _echo_config(args.command, args)
    try:
        return args.func(args)
    except ExprSyntaxError as err:
        print(f"stepmath: parse error: {err}", file=sys.stderr)
        return EXIT_PARSE
    except (MathError, NonTerminating) as err:
        print(f"stepmath: math error: {err}", file=sys.stderr)
        return EXIT_MATH
    except (RecordTooLong, UnknownSymbol, UnknownId) as err:
        print(f"stepmath: {err}", file=sys.stderr)
        return EXIT_MATH
    except OSError as err:
        print(f"stepmath: io error: {err}", file=sys.stderr)
        return EXIT_IO
    except StepmathError as err:
        print(f"stepmath: {err}", file=sys.stderr)
        return EXIT_MATH


if __name__ == "__main__":
    sys.exit(main())
