"""
Batch command line: check, query, tx, precompile, dump-fixpoint and repl.
"""
import argparse
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, TextIO

from udatalog.core.config import Settings, settings
from udatalog.core.exceptions import (
    NotStratifiableError,
    ParseError,
    ProgramError,
    SafetyViolationError,
    UDatalogError,
)
from udatalog.core.logging import configure_logging, get_logger
from udatalog.models.database import Database
from udatalog.models.terms import Constant, UpdateAtom
from udatalog.schemas.evaluation import Solution
from udatalog.schemas.transaction import TransactionOutcome
from udatalog.services.analysis_service import check_program, stratify
from udatalog.services.compositional_service import CompositionalService, compiled_universe, render_compiled
from udatalog.services.marking_service import MarkingService
from udatalog.services.parser_service import parse_goal, parse_program
from udatalog.services.printer import facts_text, to_text
from udatalog.services.transaction_service import TransactionService, load_edb, save_edb

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_ABORT = 1
EXIT_ANALYSIS = 2
EXIT_USAGE = 3

_COLORS = {"green": "\033[32m", "red": "\033[31m"}


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--domain", help="extra universe constants, comma separated")
    common.add_argument("--unfold-cap", type=int, help="maximum unfolding rounds per recursive component")
    common.add_argument("--edb", help="fact store merged into the program")
    common.add_argument("--verbose", action="store_true", help="print update sets per solution")
    common.add_argument("--no-color", action="store_true")

    parser = _ArgumentParser(prog="udatalog", description=settings.DESCRIPTION)
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    check = commands.add_parser("check", parents=[common], help="stratification and safety report")
    check.add_argument("file")

    query = commands.add_parser("query", parents=[common], help="marking phase only")
    query.add_argument("file")
    query.add_argument("goal")

    tx = commands.add_parser("tx", parents=[common], help="run a goal as a transaction")
    tx.add_argument("file")
    tx.add_argument("goal")
    tx.add_argument("--save", metavar="OUT", help="write the resulting fact store")

    precompile = commands.add_parser("precompile", parents=[common], help="write the composed program")
    precompile.add_argument("file")
    precompile.add_argument("-o", "--output", required=True)

    dump = commands.add_parser("dump-fixpoint", parents=[common], help="print every stratum's fixpoint")
    dump.add_argument("file")

    repl = commands.add_parser("repl", parents=[common], help="interactive shell")
    repl.add_argument("file")
    return parser


def settings_for(args: argparse.Namespace) -> Settings:
    """Settings with this run's flag overrides."""
    update: Dict[str, object] = {}
    if args.domain:
        update["EXTRA_DOMAIN"] = [c.strip() for c in args.domain.split(",") if c.strip()]
    if args.unfold_cap is not None:
        update["UNFOLD_CAP"] = args.unfold_cap
    if args.verbose:
        update["VERBOSE"] = True
    if args.no_color:
        update["NO_COLOR"] = True
    return settings.model_copy(update=update)


def load_database(path: str, config: Settings, edb_path: Optional[str] = None) -> Database:
    """Parse a program (plain or precompiled), optionally adding a fact store."""
    text = Path(path).read_text(encoding="utf-8")
    db = parse_program(text)
    if edb_path:
        facts = load_edb(edb_path)
        db = db.with_edb(db.edb | facts.edb).with_domain(facts.declared_domain)
    recorded = compiled_universe(text)
    if recorded is not None:
        current = {c.name for c in db.universe} | set(config.EXTRA_DOMAIN)
        added = sorted(current - set(recorded))
        if added:
            logger.warning("universe changed since precompilation", added=added)
            print(f"warning: constants {', '.join(added)} were not in the precompiled universe", file=sys.stderr)
    return db


def paint(text: str, color: str, config: Settings, out: TextIO) -> str:
    if config.NO_COLOR or not getattr(out, "isatty", lambda: False)():
        return text
    return f"{_COLORS[color]}{text}\033[0m"


def format_solution(solution: Solution, verbose: bool = False) -> str:
    text = to_text(solution.bindings)
    if verbose and solution.updates:
        text += "  updates: {" + ", ".join(to_text(u) for u in solution.updates) + "}"
    return text


def format_outcome(outcome: TransactionOutcome, config: Settings, out: TextIO) -> List[str]:
    """Solution lines followed by the status line."""
    lines = [format_solution(s, config.VERBOSE) for s in outcome.solutions]
    if outcome.committed:
        status = "0 answers, committed" if not outcome.solutions else outcome.summary()
        lines.append(paint(status, "green", config, out))
    else:
        lines.append(paint(outcome.summary(), "red", config, out))
    if config.VERBOSE and outcome.updates:
        lines.append("updates: " + ", ".join(to_text(u) for u in sorted(outcome.updates, key=UpdateAtom.sort_key)))
    return lines


def _check(db: Database, args, config: Settings, out: TextIO) -> int:
    strat = stratify(db)
    for index in range(1, strat.depth + 1):
        print(f"stratum {index}: {', '.join(strat.predicates_at(index))}", file=out)
    for note in strat.notes:
        print(f"note: {note}", file=out)
    report = check_program(db, [Constant(name) for name in config.EXTRA_DOMAIN])
    for line in report.lines():
        print(line, file=out)
    return EXIT_OK if report.ok else EXIT_ANALYSIS


def _query(db: Database, args, config: Settings, out: TextIO) -> int:
    goal = parse_goal(args.goal, db)
    solutions = TransactionService(db, config).marking_phase(goal)
    for solution in solutions:
        print(format_solution(solution, config.VERBOSE), file=out)
    if not solutions:
        print("0 answers", file=out)
    return EXIT_OK


def _tx(db: Database, args, config: Settings, out: TextIO) -> int:
    goal = parse_goal(args.goal, db)
    outcome, result = TransactionService(db, config).commit(goal)
    for line in format_outcome(outcome, config, out):
        print(line, file=out)
    out.write(facts_text(result))
    if args.save:
        save_edb(result, args.save)
    return EXIT_OK if outcome.committed else EXIT_ABORT


def _precompile(db: Database, args, config: Settings, out: TextIO) -> int:
    compiled = CompositionalService(db, config).precompile()
    Path(args.output).write_text(render_compiled(compiled, config), encoding="utf-8")
    print(f"{len(compiled.idb)} rules written to {args.output}", file=out)
    return EXIT_OK


def _dump_fixpoint(db: Database, args, config: Settings, out: TextIO) -> int:
    fix = MarkingService(db, config).stratified_fixpoint()
    for index, snapshot in enumerate(fix.strata, start=1):
        print(f"% stratum {index}", file=out)
        for literal in snapshot:
            print(to_text(literal), file=out)
    if config.VERBOSE:
        for name, value in sorted(fix.metrics.items()):
            print(f"% {name}: {value:g}", file=out)
    return EXIT_OK


def _repl(db: Database, args, config: Settings, out: TextIO) -> int:
    from udatalog.cli.repl import run_repl
    from udatalog.cli.session import SessionState

    run_repl(SessionState(db, config), out=out)
    return EXIT_OK


_HANDLERS = {
    "check": _check,
    "query": _query,
    "tx": _tx,
    "precompile": _precompile,
    "dump-fixpoint": _dump_fixpoint,
    "repl": _repl,
}


def run_batch(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None) -> int:
    """Run one subcommand and return its exit code."""
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    config = settings_for(args)
    configure_logging("DEBUG" if config.VERBOSE else config.LOG_LEVEL)

    try:
        db = load_database(args.file, config, args.edb)
        return _HANDLERS[args.command](db, args, config, out)
    except (NotStratifiableError, SafetyViolationError) as exc:
        print(f"error: {exc.message}", file=out)
        return EXIT_ANALYSIS
    except (ParseError, ProgramError) as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return EXIT_USAGE
    except UDatalogError as exc:
        logger.error("command failed", command=args.command, error_code=exc.error_code)
        print(f"error: {exc.message}", file=sys.stderr)
        return EXIT_ANALYSIS
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
