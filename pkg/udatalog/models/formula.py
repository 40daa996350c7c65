"""
First-order formulas over constraints and literals.

Formula trees are the input of the prenex-DNF transformation; a
QuantifiedFormula is its output and the tail of an extended rule.
"""
from dataclasses import dataclass
from enum import Enum
from typing import FrozenSet, Tuple, Union

from udatalog.models.constraint import TRUE, Constraint
from udatalog.models.terms import Literal, Variable


class Quantifier(str, Enum):
    FORALL = "forall"
    EXISTS = "exists"

    @property
    def dual(self) -> "Quantifier":
        return Quantifier.EXISTS if self is Quantifier.FORALL else Quantifier.FORALL


@dataclass(frozen=True)
class ConstraintFormula:
    constraint: Constraint


@dataclass(frozen=True)
class LiteralFormula:
    literal: Literal


@dataclass(frozen=True)
class And:
    parts: Tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    parts: Tuple["Formula", ...]


@dataclass(frozen=True)
class Not:
    part: "Formula"


@dataclass(frozen=True)
class Quantified:
    quantifier: Quantifier
    variables: Tuple[Variable, ...]
    body: "Formula"


Formula = Union[ConstraintFormula, LiteralFormula, And, Or, Not, Quantified]


def exists(variables, body: Formula) -> Formula:
    variables = tuple(variables)
    return Quantified(Quantifier.EXISTS, variables, body) if variables else body


def forall(variables, body: Formula) -> Formula:
    variables = tuple(variables)
    return Quantified(Quantifier.FORALL, variables, body) if variables else body


@dataclass(frozen=True)
class Disjunct:
    """Conjunction of a constraint and literals inside a prenex matrix."""

    constraint: Constraint = TRUE
    literals: Tuple[Literal, ...] = ()

    def variables(self) -> FrozenSet[Variable]:
        found = set(self.constraint.variables())
        for lit in self.literals:
            found |= lit.variables()
        return frozenset(found)

    @property
    def is_true(self) -> bool:
        return self.constraint.is_true and not self.literals

    def sort_key(self) -> Tuple:
        return (len(self.literals), tuple(l.sort_key() for l in self.literals), self.constraint.sort_key())


@dataclass(frozen=True)
class QuantifiedFormula:
    """Prenex formula: a quantifier prefix over a DNF matrix (empty matrix is false)."""

    quantifiers: Tuple[Tuple[Quantifier, Variable], ...] = ()
    matrix: Tuple[Disjunct, ...] = ()

    @property
    def is_false(self) -> bool:
        return not self.matrix

    @property
    def is_true(self) -> bool:
        return any(d.is_true for d in self.matrix)

    def bound_variables(self) -> FrozenSet[Variable]:
        return frozenset(v for _, v in self.quantifiers)

    def free_variables(self) -> FrozenSet[Variable]:
        found = set()
        for disjunct in self.matrix:
            found |= disjunct.variables()
        return frozenset(found) - self.bound_variables()

    def predicates(self) -> FrozenSet[str]:
        return frozenset(l.predicate for d in self.matrix for l in d.literals)


TRUE_FORMULA = QuantifiedFormula(matrix=(Disjunct(),))
FALSE_FORMULA = QuantifiedFormula()
