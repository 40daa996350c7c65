"""
Transaction outcome schemas.
"""
from enum import Enum
from typing import FrozenSet, List, Optional

from pydantic import Field

from udatalog.models.constraint import Constraint
from udatalog.models.terms import Atom, UpdateAtom
from udatalog.schemas.common import KernelModel
from udatalog.schemas.evaluation import Solution


class TransactionStatus(str, Enum):
    COMMIT = "commit"
    ABORT = "abort"


class AbortReason(str, Enum):
    INCONSISTENT = "inconsistent"
    NON_GROUND = "non-ground"


class TransactionOutcome(KernelModel):
    """Result of the update phase."""

    status: TransactionStatus
    reason: Optional[AbortReason] = None
    bindings: List[Constraint] = Field(default_factory=list, description="One constraint per solution; empty on abort")
    solutions: List[Solution] = Field(default_factory=list, description="Marking-phase answers")
    updates: FrozenSet[UpdateAtom] = Field(default_factory=frozenset, description="Union of all solutions' updates")
    new_edb: FrozenSet[Atom] = Field(..., description="EDB after the transaction")

    @property
    def committed(self) -> bool:
        return self.status is TransactionStatus.COMMIT

    def summary(self) -> str:
        if self.committed:
            return "COMMIT"
        return f"ABORT ({self.reason.value} updates)" if self.reason else "ABORT"
