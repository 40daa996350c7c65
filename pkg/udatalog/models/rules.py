"""
Rules, extended rules, goals and constrained literals.
"""
from dataclasses import dataclass, field
from typing import FrozenSet, Optional, Tuple, Union

from udatalog.models.constraint import TRUE, Constraint
from udatalog.models.formula import QuantifiedFormula
from udatalog.models.terms import Atom, Literal, UpdateAtom, Variable


def _collect(*groups) -> FrozenSet[Variable]:
    found = set()
    for group in groups:
        for item in group:
            found |= item.variables()
    return frozenset(found)


@dataclass(frozen=True)
class Rule:
    """
    Intensional rule `head :- constraint, updates, body`.

    After parsing every atom has distinct variable arguments; constants and
    repeated variables live in the constraint.
    """

    head: Atom
    constraint: Constraint = TRUE
    updates: Tuple[UpdateAtom, ...] = ()
    body: Tuple[Literal, ...] = ()

    @property
    def predicate(self) -> str:
        return self.head.predicate

    @property
    def positive_body(self) -> Tuple[Literal, ...]:
        return tuple(l for l in self.body if l.positive)

    @property
    def negative_body(self) -> Tuple[Literal, ...]:
        return tuple(l for l in self.body if not l.positive)

    @property
    def tail(self) -> Optional[QuantifiedFormula]:
        return None

    def variables(self) -> FrozenSet[Variable]:
        return _collect([self.head], self.updates, self.body) | self.constraint.variables()


@dataclass(frozen=True)
class ExtendedRule:
    """Rule with positive body literals and a quantified prenex-DNF tail."""

    head: Atom
    constraint: Constraint = TRUE
    updates: Tuple[UpdateAtom, ...] = ()
    body: Tuple[Literal, ...] = ()
    tail: Optional[QuantifiedFormula] = None

    @property
    def predicate(self) -> str:
        return self.head.predicate

    @property
    def positive_body(self) -> Tuple[Literal, ...]:
        return tuple(l for l in self.body if l.positive)

    @property
    def negative_body(self) -> Tuple[Literal, ...]:
        return tuple(l for l in self.body if not l.positive)

    def variables(self) -> FrozenSet[Variable]:
        found = _collect([self.head], self.updates, self.body) | self.constraint.variables()
        if self.tail is not None:
            found |= self.tail.free_variables()
        return found


AnyRule = Union[Rule, ExtendedRule]


@dataclass(frozen=True)
class Goal:
    """A transaction: `?- constraint, updates, body.`"""

    constraint: Constraint = TRUE
    updates: Tuple[UpdateAtom, ...] = ()
    body: Tuple[Literal, ...] = ()
    answer_vars: Tuple[Variable, ...] = field(default=(), compare=False)

    def variables(self) -> FrozenSet[Variable]:
        return _collect(self.updates, self.body) | self.constraint.variables()


@dataclass(frozen=True)
class ConstrainedLiteral:
    """Element of the constrained Herbrand base: `L <- constraint, updates`."""

    head: Literal
    constraint: Constraint = TRUE
    updates: FrozenSet[UpdateAtom] = frozenset()

    @property
    def predicate(self) -> str:
        return self.head.predicate

    @property
    def positive(self) -> bool:
        return self.head.positive

    def variables(self) -> FrozenSet[Variable]:
        return _collect([self.head], self.updates) | self.constraint.variables()

    def sort_key(self):
        return (
            self.head.sort_key(),
            self.constraint.sort_key(),
            tuple(sorted(u.sort_key() for u in self.updates)),
        )
