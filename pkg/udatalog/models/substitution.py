"""
Variable substitution, renaming apart and fresh-name generation.
"""
import itertools
from functools import singledispatch
from typing import FrozenSet, Iterable, Mapping, Optional, Tuple

from udatalog.core.config import settings
from udatalog.models.constraint import Constraint
from udatalog.models.formula import Disjunct, QuantifiedFormula
from udatalog.models.rules import ConstrainedLiteral, ExtendedRule, Goal, Rule
from udatalog.models.terms import Atom, Literal, Term, UpdateAtom, Variable

Mapping_ = Mapping[Variable, Term]


class FreshNames:
    """
    Monotone source of fresh variables for one evaluation session.

    Names already used in loaded text are reserved and never issued.
    """

    def __init__(self, prefix: str = "_V", start: Optional[int] = None, reserved: Iterable[str] = ()):
        self.prefix = prefix
        self._counter = itertools.count(settings.SEED if start is None else start)
        self._reserved = set(reserved)

    def reserve(self, names: Iterable[str]) -> None:
        self._reserved.update(names)

    def variable(self) -> Variable:
        while True:
            name = f"{self.prefix}{next(self._counter)}"
            if name not in self._reserved:
                self._reserved.add(name)
                return Variable(name)

    def variables(self, count: int) -> Tuple[Variable, ...]:
        return tuple(self.variable() for _ in range(count))


def substitute_term(term: Term, mapping: Mapping_) -> Term:
    if isinstance(term, Variable):
        return mapping.get(term, term)
    return term


@singledispatch
def substitute(obj, mapping: Mapping_):
    """Apply a variable mapping to any syntactic object."""
    raise TypeError(f"cannot substitute into {type(obj).__name__}")


@substitute.register
def _(obj: Atom, mapping: Mapping_) -> Atom:
    return Atom(obj.predicate, tuple(substitute_term(a, mapping) for a in obj.args))


@substitute.register
def _(obj: Literal, mapping: Mapping_) -> Literal:
    return Literal(substitute(obj.atom, mapping), obj.positive)


@substitute.register
def _(obj: UpdateAtom, mapping: Mapping_) -> UpdateAtom:
    return UpdateAtom(obj.sign, substitute(obj.atom, mapping))


@substitute.register
def _(obj: Constraint, mapping: Mapping_) -> Constraint:
    if obj.is_false:
        return obj
    return Constraint.build(
        eqs=[(substitute_term(l, mapping), substitute_term(r, mapping)) for l, r in obj.eqs],
        neqs=[(substitute_term(l, mapping), substitute_term(r, mapping)) for l, r in obj.neqs],
    )


@substitute.register
def _(obj: Disjunct, mapping: Mapping_) -> Disjunct:
    return Disjunct(
        substitute(obj.constraint, mapping),
        tuple(substitute(l, mapping) for l in obj.literals),
    )


@substitute.register
def _(obj: QuantifiedFormula, mapping: Mapping_) -> QuantifiedFormula:
    # bound variables are renamed only when the mapping sends them to variables
    quantifiers = []
    for quantifier, var in obj.quantifiers:
        target = mapping.get(var, var)
        quantifiers.append((quantifier, target if isinstance(target, Variable) else var))
    inner = {k: v for k, v in mapping.items() if k not in obj.bound_variables() or isinstance(v, Variable)}
    return QuantifiedFormula(tuple(quantifiers), tuple(substitute(d, inner) for d in obj.matrix))


@substitute.register
def _(obj: Rule, mapping: Mapping_) -> Rule:
    return Rule(
        substitute(obj.head, mapping),
        substitute(obj.constraint, mapping),
        tuple(substitute(u, mapping) for u in obj.updates),
        tuple(substitute(l, mapping) for l in obj.body),
    )


@substitute.register
def _(obj: ExtendedRule, mapping: Mapping_) -> ExtendedRule:
    return ExtendedRule(
        substitute(obj.head, mapping),
        substitute(obj.constraint, mapping),
        tuple(substitute(u, mapping) for u in obj.updates),
        tuple(substitute(l, mapping) for l in obj.body),
        None if obj.tail is None else substitute(obj.tail, mapping),
    )


@substitute.register
def _(obj: Goal, mapping: Mapping_) -> Goal:
    return Goal(
        substitute(obj.constraint, mapping),
        tuple(substitute(u, mapping) for u in obj.updates),
        tuple(substitute(l, mapping) for l in obj.body),
        tuple(v for v in (substitute_term(a, mapping) for a in obj.answer_vars) if isinstance(v, Variable)),
    )


@substitute.register
def _(obj: ConstrainedLiteral, mapping: Mapping_) -> ConstrainedLiteral:
    return ConstrainedLiteral(
        substitute(obj.head, mapping),
        substitute(obj.constraint, mapping),
        frozenset(substitute(u, mapping) for u in obj.updates),
    )


def all_variables(obj) -> FrozenSet[Variable]:
    """Every variable of obj, quantified tail variables included."""
    found = set(obj.variables())
    tail = getattr(obj, "tail", None)
    if isinstance(tail, QuantifiedFormula):
        found |= tail.bound_variables()
        for disjunct in tail.matrix:
            found |= disjunct.variables()
    return frozenset(found)


def rename_apart(obj, reservoir: FreshNames):
    """Rename every variable of obj to a name never issued before."""
    mapping = {var: reservoir.variable() for var in sorted(all_variables(obj), key=lambda v: v.name)}
    return substitute(obj, mapping)


def apply_bindings(updates: Iterable[UpdateAtom], bindings: Constraint) -> Tuple[UpdateAtom, ...]:
    """Replace variables bound by the equalities of a normalized constraint."""
    mapping = {left: right for left, right in bindings.eqs}
    return tuple(substitute(u, mapping) for u in updates)


def free_vars(obj) -> FrozenSet[Variable]:
    if isinstance(obj, QuantifiedFormula):
        return obj.free_variables()
    return frozenset(obj.variables())


def local_vars(rule) -> FrozenSet[Variable]:
    """Body variables not appearing in the rule head."""
    return free_vars(rule) - rule.head.variables()
