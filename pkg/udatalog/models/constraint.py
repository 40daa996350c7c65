"""
Equality/inequality constraints over the Herbrand universe.
"""
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, Iterator, List, Optional, Tuple

from udatalog.models.terms import Constant, Term, Variable, term_key

Pair = Tuple[Term, Term]


def _ordered(left: Term, right: Term) -> Pair:
    return (left, right) if term_key(left) <= term_key(right) else (right, left)


@dataclass(frozen=True)
class Constraint:
    """
    Conjunction of equalities and inequalities.

    Equalities are stored as (Variable, Term); inequalities as an unordered
    pair kept in term order. `is_false` marks the distinguished false
    constraint; the empty conjunction is true.
    """

    eqs: FrozenSet[Tuple[Variable, Term]] = frozenset()
    neqs: FrozenSet[Pair] = frozenset()
    is_false: bool = False
    normalized: bool = field(default=False, compare=False)

    @classmethod
    def build(
        cls,
        eqs: Iterable[Pair] = (),
        neqs: Iterable[Pair] = (),
    ) -> "Constraint":
        """Build a constraint, folding constant-only atoms on the way."""
        eq_set = set()
        neq_set = set()
        for left, right in eqs:
            if left == right:
                continue
            if isinstance(left, Constant) and isinstance(right, Constant):
                return FALSE
            if isinstance(left, Constant):
                left, right = right, left
            elif isinstance(right, Variable) and right.name < left.name:
                left, right = right, left
            eq_set.add((left, right))
        for left, right in neqs:
            if left == right:
                return FALSE
            if isinstance(left, Constant) and isinstance(right, Constant):
                continue
            neq_set.add(_ordered(left, right))
        return cls(frozenset(eq_set), frozenset(neq_set))

    @classmethod
    def eq(cls, left: Term, right: Term) -> "Constraint":
        return cls.build(eqs=[(left, right)])

    @classmethod
    def neq(cls, left: Term, right: Term) -> "Constraint":
        return cls.build(neqs=[(left, right)])

    @property
    def is_true(self) -> bool:
        return not self.is_false and not self.eqs and not self.neqs

    def conjoin(self, *others: "Constraint") -> "Constraint":
        if self.is_false or any(o.is_false for o in others):
            return FALSE
        eqs = set(self.eqs)
        neqs = set(self.neqs)
        for other in others:
            eqs |= other.eqs
            neqs |= other.neqs
        return Constraint(frozenset(eqs), frozenset(neqs))

    def variables(self) -> FrozenSet[Variable]:
        found = set()
        for left, right in list(self.eqs) + list(self.neqs):
            for term in (left, right):
                if isinstance(term, Variable):
                    found.add(term)
        return frozenset(found)

    def constants(self) -> FrozenSet[Constant]:
        found = set()
        for left, right in list(self.eqs) + list(self.neqs):
            for term in (left, right):
                if isinstance(term, Constant):
                    found.add(term)
        return frozenset(found)

    def atoms(self) -> List[Tuple[str, Term, Term]]:
        """Atomic conjuncts in canonical order, as ("=" | "!=", left, right)."""
        eqs = sorted(self.eqs, key=lambda p: (term_key(p[0]), term_key(p[1])))
        neqs = sorted(self.neqs, key=lambda p: (term_key(p[0]), term_key(p[1])))
        return [("=", l, r) for l, r in eqs] + [("!=", l, r) for l, r in neqs]

    def sort_key(self) -> Tuple:
        if self.is_false:
            return (1,)
        return (0, tuple((op, term_key(l), term_key(r)) for op, l, r in self.atoms()))

    def __str__(self) -> str:
        if self.is_false:
            return "false"
        if self.is_true:
            return "true"
        return ", ".join(f"{l}{op}{r}" for op, l, r in self.atoms())


TRUE = Constraint()
FALSE = Constraint(is_false=True)


@dataclass(frozen=True)
class DisjunctiveConstraint:
    """Disjunction of constraints; no disjuncts means false."""

    disjuncts: Tuple[Constraint, ...] = ()

    @property
    def is_false(self) -> bool:
        return not self.disjuncts

    @property
    def is_true(self) -> bool:
        return any(d.is_true for d in self.disjuncts)

    def __iter__(self) -> Iterator[Constraint]:
        return iter(self.disjuncts)

    def __len__(self) -> int:
        return len(self.disjuncts)

    def single(self) -> Optional[Constraint]:
        return self.disjuncts[0] if len(self.disjuncts) == 1 else None

    def __str__(self) -> str:
        if self.is_false:
            return "false"
        return " ; ".join(str(d) for d in self.disjuncts)
