"""
Schemas for fixpoints and goal answers.
"""
from typing import Dict, List, Optional, Tuple

from pydantic import Field

from udatalog.models.constraint import Constraint
from udatalog.models.rules import ConstrainedLiteral
from udatalog.models.terms import UpdateAtom
from udatalog.schemas.common import KernelModel
from udatalog.services.interpretation import Interpretation


class Solution(KernelModel):
    """Answer constraint: bindings on goal variables plus the updates to perform."""

    bindings: Constraint = Field(..., description="Constraint restricted to goal variables")
    updates: Tuple[UpdateAtom, ...] = Field(default=(), description="Updates with bindings applied")

    def is_ground(self) -> bool:
        return all(u.is_ground() for u in self.updates)


class FixpointResult(KernelModel):
    """Stratum snapshots M1..Mn and the final fixpoint."""

    strata: List[Tuple[ConstrainedLiteral, ...]] = Field(..., description="Snapshot after each stratum")
    final: Tuple[ConstrainedLiteral, ...] = Field(..., description="Final fixpoint, canonically sorted")
    iterations: List[int] = Field(..., description="Rounds needed per stratum")
    metrics: Dict[str, float] = Field(default_factory=dict)
    interpretation: Optional[Interpretation] = Field(default=None, exclude=True, repr=False)

    def literals_for(self, predicate: str, positive: bool = True) -> List[ConstrainedLiteral]:
        return [l for l in self.final if l.predicate == predicate and l.positive == positive]
