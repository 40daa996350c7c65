"""
Interactive shell over a session.
"""
import sys
from typing import Callable, Optional, TextIO

from udatalog.cli.session import SessionState
from udatalog.core.exceptions import UDatalogError
from udatalog.core.logging import get_logger
from udatalog.services.printer import facts_text, to_text

logger = get_logger(__name__)

PROMPT = "udatalog> "

HELP = """\
?- goal.        run the goal as a transaction
:fixpoint       print the fixpoint of every stratum
:strata         print the stratification
:edb            print the current fact store
:save FILE      write the fact store
:undo           restore the fact store before the last commit
:history        list past transaction outcomes
:help           this text
:quit           leave"""


def _meta(session: SessionState, command: str, argument: str, out: TextIO) -> bool:
    """Run a meta-command; False means leave the loop."""
    if command in (":quit", ":q", ":exit"):
        return False
    if command == ":help":
        print(HELP, file=out)
    elif command == ":fixpoint":
        for index, snapshot in enumerate(session.fixpoint().strata, start=1):
            print(f"% stratum {index}", file=out)
            for literal in snapshot:
                print(to_text(literal), file=out)
    elif command == ":strata":
        strat = session.strata()
        for index in range(1, strat.depth + 1):
            print(f"stratum {index}: {', '.join(strat.predicates_at(index))}", file=out)
    elif command == ":edb":
        out.write(facts_text(session.db))
    elif command == ":save":
        if not argument:
            print("usage: :save FILE", file=out)
        else:
            session.save(argument)
            print(f"saved {len(session.db.edb)} facts to {argument}", file=out)
    elif command == ":undo":
        print("restored" if session.undo() else "nothing to undo", file=out)
    elif command == ":history":
        for index, outcome in enumerate(session.history, start=1):
            print(f"{index}: {outcome.summary()} ({len(outcome.solutions)} answers)", file=out)
    else:
        print(f"unknown command {command}; try :help", file=out)
    return True


def handle_line(session: SessionState, line: str, out: TextIO) -> bool:
    """Process one input line; False means leave the loop."""
    from udatalog.cli.commands import format_outcome

    line = line.strip()
    if not line or line.startswith("%"):
        return True
    try:
        if line.startswith(":"):
            command, _, argument = line.partition(" ")
            return _meta(session, command, argument.strip(), out)
        outcome = session.run(line)
        for text in format_outcome(outcome, session.config, out):
            print(text, file=out)
    except UDatalogError as exc:
        print(f"error: {exc.message}", file=out)
    except OSError as exc:
        print(f"error: {exc}", file=out)
    return True


def run_repl(
    session: SessionState,
    out: Optional[TextIO] = None,
    read: Callable[[str], str] = input,
) -> None:
    """Read goals and meta-commands until :quit or end of input."""
    out = out or sys.stdout
    print(f"{session.config.PROJECT_NAME} {session.config.VERSION}; :help for commands", file=out)
    while True:
        try:
            line = read(PROMPT)
        except EOFError:
            break
        except KeyboardInterrupt:
            print(file=out)
            continue
        if not handle_line(session, line, out):
            break
    logger.info("session closed", transactions=len(session.history))
