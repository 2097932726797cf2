import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from kgpoly.services.checks import SUITES, run_check
from kgpoly.services.config import settings
from kgpoly.services.diagram import Diagram, DiagramError, mirror, parse, serialize
from kgpoly.services.evaluator import EvalContext, evaluate
from kgpoly.services.moves import MoveId, move_id

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILED = 2

logger = logging.getLogger("kgpoly")


class CliParser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _n_value(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"n must be an integer, got {text!r}") from None
    if n < 2:
        raise argparse.ArgumentTypeError(f"n must be at least 2, got {n}")
    return n


def _count_value(text: str) -> int:
    try:
        count = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"count must be an integer, got {text!r}") from None
    if count < 0:
        raise argparse.ArgumentTypeError(f"count must not be negative, got {count}")
    return count


def _move_list(text: str) -> List[MoveId]:
    try:
        return [move_id(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def build_parser() -> CliParser:
    parser = CliParser(prog="kgpoly", description="Polynomial invariant of knotted 4-valent graphs")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="Evaluate P for a diagram file")
    p_eval.add_argument("--n", type=_n_value, required=True)
    p_eval.add_argument("--json", action="store_true", help="Print [exp, coeff] pairs")
    p_eval.add_argument("file", type=Path)

    p_mirror = sub.add_parser("mirror", help="Print the mirror image of a diagram")
    p_mirror.add_argument("file", type=Path)

    p_check = sub.add_parser("check", help="Run a verification suite")
    p_check.add_argument("kind", choices=sorted(SUITES))
    p_check.add_argument("--n", type=_n_value, default=2)
    p_check.add_argument("--seed", type=int, default=0)
    p_check.add_argument("--count", type=_count_value, default=100)
    p_check.add_argument("--moves", type=_move_list, default=None, help="Comma-separated move ids, e.g. O1a,O4j")
    return parser


def _read_diagram(path: Path) -> Diagram:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise DiagramError(f"{path}: {e.strerror or e}") from e
    try:
        return parse(text)
    except DiagramError as e:
        raise DiagramError(f"{path}: {e}") from e


def cmd_eval(args: argparse.Namespace) -> int:
    d = _read_diagram(args.file)
    value = evaluate(d, EvalContext(args.n))
    if args.json:
        print(json.dumps(value.to_pairs()))
    else:
        print(value)
    return EXIT_OK


def cmd_mirror(args: argparse.Namespace) -> int:
    d = _read_diagram(args.file)
    sys.stdout.write(serialize(mirror(d)))
    return EXIT_OK


def cmd_check(args: argparse.Namespace, argv: List[str]) -> int:
    report = run_check(args.kind, args.n, args.seed, args.count, moves=args.moves, command=argv)
    print(report.to_json())
    return EXIT_OK if report.ok else EXIT_FAILED


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else getattr(logging, settings.log_level, logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    logger.debug("argv: %s", argv)
    try:
        if args.command == "eval":
            return cmd_eval(args)
        if args.command == "mirror":
            return cmd_mirror(args)
        return cmd_check(args, argv)
    except (DiagramError, RuntimeError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
