"""
Interactive session state: current database, transaction history and a
single undo snapshot.
"""
from pathlib import Path
from typing import List, Optional, Union

from udatalog.core.config import Settings, settings as default_settings
from udatalog.core.logging import get_logger
from udatalog.models.database import Database
from udatalog.schemas.analysis import Stratification
from udatalog.schemas.evaluation import FixpointResult
from udatalog.schemas.transaction import TransactionOutcome
from udatalog.services.analysis_service import stratify
from udatalog.services.marking_service import MarkingService
from udatalog.services.parser_service import parse_goal
from udatalog.services.transaction_service import TransactionService, save_edb

logger = get_logger(__name__)


class SessionState:
    """One user's view of a database across transactions."""

    def __init__(self, db: Database, config: Optional[Settings] = None):
        self.db = db
        self.config = config or default_settings
        self.history: List[TransactionOutcome] = []
        self._snapshot: Optional[Database] = None

    def run(self, text: str) -> TransactionOutcome:
        """Run a goal as a full transaction."""
        goal = parse_goal(text, self.db)
        outcome, db = TransactionService(self.db, self.config).commit(goal)
        self.history.append(outcome)
        if outcome.committed:
            self._snapshot = self.db
            self.db = db
        return outcome

    def undo(self) -> bool:
        """Restore the EDB from before the last committed transaction."""
        if self._snapshot is None:
            return False
        self.db = self._snapshot
        self._snapshot = None
        logger.info("transaction undone", facts=len(self.db.edb))
        return True

    def fixpoint(self) -> FixpointResult:
        return MarkingService(self.db, self.config).stratified_fixpoint()

    def strata(self) -> Stratification:
        return stratify(self.db)

    def save(self, path: Union[str, Path]) -> None:
        save_edb(self.db, path)
