"""
Service for the update phase: collecting updates, checking them and
applying them atomically to the extensional database.
"""
from pathlib import Path
from typing import Callable, FrozenSet, Iterable, List, Optional, Tuple, Union

from udatalog.core.config import Settings
from udatalog.core.exceptions import ProgramError, SafetyViolationError
from udatalog.core.logging import get_logger
from udatalog.models.database import Database
from udatalog.models.rules import Goal
from udatalog.models.terms import Atom, UpdateAtom, UpdateSign
from udatalog.schemas.evaluation import Solution
from udatalog.schemas.transaction import AbortReason, TransactionOutcome, TransactionStatus
from udatalog.services import constraint_engine as engine
from udatalog.services.analysis_service import check_admissible, stratify
from udatalog.services.marking_service import MarkingService
from udatalog.services.parser_service import parse_program
from udatalog.services.printer import facts_text

logger = get_logger(__name__)

# Called with each update as it is applied to the working copy; may raise.
ApplyHook = Callable[[UpdateAtom], None]


def collect_updates(solutions: Iterable[Solution]) -> FrozenSet[UpdateAtom]:
    """Union of the updates of every solution."""
    collected = set()
    for solution in solutions:
        collected.update(solution.updates)
    return frozenset(collected)


def apply_updates(
    edb: FrozenSet[Atom],
    updates: Iterable[UpdateAtom],
    hook: Optional[ApplyHook] = None,
) -> FrozenSet[Atom]:
    """(EDB minus deletions) union insertions, built on a private copy."""
    updates = list(updates)
    working = set(edb)
    for update in updates:
        if update.sign is UpdateSign.DELETE:
            if hook is not None:
                hook(update)
            working.discard(update.atom)
    for update in updates:
        if update.sign is UpdateSign.INSERT:
            if hook is not None:
                hook(update)
            working.add(update.atom)
    return frozenset(working)


class TransactionService:
    """Service for running goals as transactions."""

    def __init__(self, db: Database, config: Optional[Settings] = None, apply_hook: Optional[ApplyHook] = None):
        self.db = db
        self.config = config
        self.apply_hook = apply_hook

    def marking_phase(self, goal: Goal) -> List[Solution]:
        """Answers of the goal without touching the EDB."""
        strat = stratify(self.db)
        report = check_admissible(self.db, goal)
        if not report.ok:
            raise SafetyViolationError("goal is not admissible: " + "; ".join(report.lines()), report)
        service = MarkingService(self.db, self.config)
        return service.answers(goal, service.stratified_fixpoint(strat))

    def apply_transaction(self, goal: Goal) -> TransactionOutcome:
        """Marking phase followed by the atomic update phase."""
        solutions = self.marking_phase(goal)
        updates = collect_updates(solutions)

        reason = None
        if not all(u.is_ground() for u in updates):
            reason = AbortReason.NON_GROUND
        elif not engine.updates_consistent(updates):
            reason = AbortReason.INCONSISTENT
        if reason is not None:
            logger.info("transaction aborted", reason=reason.value, solutions=len(solutions))
            return TransactionOutcome(
                status=TransactionStatus.ABORT,
                reason=reason,
                solutions=solutions,
                updates=updates,
                new_edb=self.db.edb,
            )

        new_edb = apply_updates(self.db.edb, updates, self.apply_hook)
        logger.info("transaction committed", solutions=len(solutions), updates=len(updates))
        return TransactionOutcome(
            status=TransactionStatus.COMMIT,
            bindings=[s.bindings for s in solutions],
            solutions=solutions,
            updates=updates,
            new_edb=new_edb,
        )

    def commit(self, goal: Goal) -> Tuple[TransactionOutcome, Database]:
        """Run the goal and return the outcome with the resulting database."""
        outcome = self.apply_transaction(goal)
        if outcome.committed:
            return outcome, self.db.with_edb(outcome.new_edb)
        return outcome, self.db


def apply_transaction(goal: Goal, db: Database, config: Optional[Settings] = None) -> TransactionOutcome:
    return TransactionService(db, config).apply_transaction(goal)


def save_edb(db: Database, path: Union[str, Path]) -> None:
    """Write the fact store: `#domain` line, then sorted facts."""
    Path(path).write_text(facts_text(db), encoding="utf-8")
    logger.info("fact store saved", path=str(path), facts=len(db.edb))


def load_edb(path: Union[str, Path]) -> Database:
    """Read a fact store; rules are rejected."""
    db = parse_program(Path(path).read_text(encoding="utf-8"))
    if db.idb:
        raise ProgramError(f"{path}: fact store contains rules", db.idb[0].predicate)
    return db
