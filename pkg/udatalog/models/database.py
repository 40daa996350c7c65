"""
Database: extensional facts, intensional rules and the finite universe.
"""
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, Mapping, Tuple

from udatalog.models.formula import QuantifiedFormula
from udatalog.models.rules import AnyRule
from udatalog.models.terms import Atom, Constant


def rule_constants(rule: AnyRule) -> FrozenSet[Constant]:
    found = set(rule.constraint.constants())
    atoms = [rule.head] + [u.atom for u in rule.updates] + [l.atom for l in rule.body]
    tail = getattr(rule, "tail", None)
    if isinstance(tail, QuantifiedFormula):
        for disjunct in tail.matrix:
            found |= disjunct.constraint.constants()
            atoms.extend(l.atom for l in disjunct.literals)
    for atom in atoms:
        found |= {a for a in atom.args if isinstance(a, Constant)}
    return frozenset(found)


@dataclass(frozen=True)
class Database:
    """
    Loaded program.

    `idb` keeps source order (rule#k numbering is 1-based over it).
    `declared_domain` holds the `#domain` constants so they survive saving.
    """

    edb: FrozenSet[Atom] = frozenset()
    idb: Tuple[AnyRule, ...] = ()
    declared_domain: FrozenSet[Constant] = frozenset()
    extensional: FrozenSet[str] = frozenset()
    arities: Mapping[str, int] = field(default_factory=dict)

    @property
    def intensional(self) -> FrozenSet[str]:
        return frozenset(r.predicate for r in self.idb)

    @property
    def universe(self) -> FrozenSet[Constant]:
        found = set(self.declared_domain)
        for fact in self.edb:
            found |= {a for a in fact.args if isinstance(a, Constant)}
        for rule in self.idb:
            found |= rule_constants(rule)
        return frozenset(found)

    @property
    def predicates(self) -> FrozenSet[str]:
        return frozenset(self.arities)

    def rules_for(self, predicate: str) -> Tuple[AnyRule, ...]:
        return tuple(r for r in self.idb if r.predicate == predicate)

    def facts_for(self, predicate: str) -> Tuple[Atom, ...]:
        return tuple(sorted((f for f in self.edb if f.predicate == predicate), key=Atom.sort_key))

    def with_edb(self, edb: Iterable[Atom]) -> "Database":
        """Same program over a different fact set."""
        edb = frozenset(edb)
        arities: Dict[str, int] = dict(self.arities)
        for fact in edb:
            arities.setdefault(fact.predicate, fact.arity)
        return replace(
            self,
            edb=edb,
            extensional=self.extensional | {f.predicate for f in edb},
            arities=arities,
        )

    def with_idb(self, idb: Iterable[AnyRule]) -> "Database":
        idb = tuple(idb)
        arities: Dict[str, int] = dict(self.arities)
        for rule in idb:
            arities.setdefault(rule.head.predicate, rule.head.arity)
        return replace(self, idb=idb, arities=arities)

    def with_domain(self, constants: Iterable[Constant]) -> "Database":
        return replace(self, declared_domain=self.declared_domain | frozenset(constants))
