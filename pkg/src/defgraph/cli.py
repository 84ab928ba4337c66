"""Command-line front end.

Exit codes: 0 success, 1 scenario/validation/inference failure, 2 usage
error. All numeric output is deterministic for fixed inputs and seeds.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .graph import ValidationError
from .inference import (
    ContradictionError,
    GraphTooLargeError,
    forward_sample,
    variable_elimination,
)
from .risk import assess_vehicle, build_risk_table, sensitivity_sweep
from .scenario import (
    ScenarioSyntaxError,
    emit_risk_table,
    format_probability,
    parse_scenario,
)

__all__ = ["main", "run"]

DEFAULT_ERROR_LEVELS = (0.01, 0.05, 0.10)


def _evidence_pair(text: str) -> tuple[str, bool]:
    nid, sep, value = text.partition("=")
    if not sep or value not in ("true", "false"):
        raise argparse.ArgumentTypeError(
            f"evidence must look like id=true or id=false, got '{text}'")
    return nid, value == "true"


def _error_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad error list '{text}'") from None


def _load(path: str):
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


def _cmd_validate(args) -> int:
    text = Path(args.file).read_text(encoding="utf-8")
    try:
        parse_scenario(text)
    except ValidationError as err:
        for violation in err.violations:
            print(violation, file=sys.stderr)
        return 1
    print("valid")
    return 0


def _cmd_infer(args) -> int:
    graph = _load(args.file)
    evidence = dict(args.evidence)
    dist = variable_elimination(graph, args.query, evidence)
    clause = ", ".join(f"{k}={str(v).lower()}" for k, v in sorted(evidence.items()))
    suffix = f" | {clause}" if clause else ""
    print(f"P({args.query}=true{suffix}) = {format_probability(dist.p_true)}")
    print(f"P({args.query}=false{suffix}) = {format_probability(dist.p_false)}")
    return 0


def _cmd_risk_table(args) -> int:
    graph = _load(args.file)
    rendered = emit_risk_table(build_risk_table(graph), args.format)
    if args.out:
        Path(args.out).write_text(rendered, encoding="utf-8")
    else:
        sys.stdout.write(rendered)
    return 0


def _cmd_sensitivity(args) -> int:
    graph = _load(args.file)
    errors = args.errors if args.errors is not None else list(DEFAULT_ERROR_LEVELS)
    sweep = sensitivity_sweep(graph, errors)
    for i, (eps, table) in enumerate(sweep.items()):
        if i:
            print()
        print(f"error={eps:.6f}")
        sys.stdout.write(emit_risk_table(table, "text"))
    return 0


def _cmd_sample(args) -> int:
    graph = _load(args.file)
    frequencies = forward_sample(graph, args.n, args.seed)
    for nid in sorted(frequencies):
        print(f"{nid} {format_probability(frequencies[nid].p_true)}")
    return 0


def _cmd_assess(args) -> int:
    vector = assess_vehicle([_load(f) for f in args.files])
    for entry in vector.entries:
        print(f"{entry.component} likelihood={format_probability(entry.likelihood)} "
              f"risk={format_probability(entry.risk)}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="defgraph",
        description="Quantify component security with Bayesian defense graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scenario file")
    p.add_argument("file")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("infer", help="posterior of one node given evidence")
    p.add_argument("file")
    p.add_argument("--query", required=True, metavar="ID")
    p.add_argument("--evidence", action="append", default=[], type=_evidence_pair,
                   metavar="ID=true|false")
    p.set_defaults(func=_cmd_infer)

    p = sub.add_parser("risk-table", help="likelihood and risk per technique subset")
    p.add_argument("file")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--out", metavar="PATH", help="write to a file instead of stdout")
    p.set_defaults(func=_cmd_risk_table)

    p = sub.add_parser("sensitivity", help="risk tables under parameter degradation")
    p.add_argument("file")
    p.add_argument("--errors", type=_error_list, metavar="E1,E2,...",
                   help=f"default {','.join(str(e) for e in DEFAULT_ERROR_LEVELS)}")
    p.set_defaults(func=_cmd_sensitivity)

    p = sub.add_parser("sample", help="seeded forward-sampling frequencies")
    p.add_argument("file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("assess", help="security-state vector over several scenarios")
    p.add_argument("files", nargs="+")
    p.set_defaults(func=_cmd_assess)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        # downstream consumer (e.g. head) closed the pipe; not our error
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 1
    except (ScenarioSyntaxError, ValidationError, ContradictionError,
            GraphTooLargeError, ValueError, KeyError, OSError) as exc:
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {message}", file=sys.stderr)
        return 1


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
