"""
Schemas for stratification and admissibility reports.
"""
from typing import Dict, List, Tuple

from pydantic import Field

from udatalog.models.rules import AnyRule
from udatalog.schemas.common import KernelModel


class Stratification(KernelModel):
    """Ordered strata P1..Pn and the level of every predicate."""

    strata: List[Tuple[AnyRule, ...]] = Field(..., description="Rules per stratum, lowest first")
    level: Dict[str, int] = Field(..., description="Stratum index (1-based) of each predicate")
    notes: List[str] = Field(default_factory=list, description="Remarks such as unused predicates")

    def predicates_at(self, index: int) -> List[str]:
        """Predicates completed at stratum `index` (1-based)."""
        return sorted(p for p, lvl in self.level.items() if lvl == index)

    @property
    def depth(self) -> int:
        return len(self.strata)


class SafetyViolation(KernelModel):
    """One unsafe variable in one rule (or the goal, rule_index 0)."""

    rule_index: int = Field(..., description="1-based rule number, 0 for the goal")
    variable: str = Field(..., description="Offending variable name")
    reason: str = Field(..., description="Where the variable occurs unbound")

    def __str__(self) -> str:
        where = "goal" if self.rule_index == 0 else f"rule#{self.rule_index}"
        return f"SAFETY {where} variable {self.variable}: {self.reason}"


class AdmissibilityReport(KernelModel):
    """Outcome of the safety-through-query-invocation check."""

    violations: List[SafetyViolation] = Field(default_factory=list)
    warnings: List[SafetyViolation] = Field(
        default_factory=list, description="Unsafe rules not reachable from the goal"
    )
    checked_rules: List[int] = Field(
        default_factory=list, description="1-based indices of rules reachable from the goal"
    )
    notes: List[str] = Field(default_factory=list, description="Remarks that do not make the program unsafe")

    @property
    def ok(self) -> bool:
        return not self.violations

    def lines(self) -> List[str]:
        lines = [str(v) for v in self.violations] + [f"warning: {w}" for w in self.warnings]
        return lines + [f"warning: {note}" for note in self.notes]
