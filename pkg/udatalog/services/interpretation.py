"""
Interpretations: non-redundant sets of constrained literals.
"""
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

from udatalog.models.constraint import Constraint
from udatalog.models.rules import ConstrainedLiteral
from udatalog.models.substitution import substitute
from udatalog.models.terms import Atom, Constant, Literal, UpdateAtom, Variable
from udatalog.services import constraint_engine as engine

# Ground meaning of a literal: head tuples paired with the ground update sets they need.
Extension = FrozenSet[Tuple[Tuple[Constant, ...], FrozenSet[UpdateAtom]]]


def head_variables(arity: int) -> Tuple[Variable, ...]:
    return tuple(Variable(f"X{i}") for i in range(1, arity + 1))


def canonical_literal(literal: ConstrainedLiteral) -> ConstrainedLiteral:
    """Rename head variables to X1..Xn and the remaining ones to Y1..Ym."""
    mapping: Dict[Variable, Variable] = {}
    for i, arg in enumerate(literal.head.args, start=1):
        if isinstance(arg, Variable):
            mapping[arg] = Variable(f"X{i}")
    others = sorted(literal.variables() - set(mapping), key=lambda v: v.name)
    for j, var in enumerate(others, start=1):
        mapping[var] = Variable(f"Y{j}")
    return substitute(literal, mapping)


class Interpretation:
    """
    Set of constrained literals indexed by (predicate, polarity).

    A literal whose ground extension is covered by a stored literal of the
    same predicate and polarity is redundant and never stored; stored
    literals covered by a newcomer are dropped.
    """

    def __init__(self, universe: Iterable[Constant], literals: Iterable[ConstrainedLiteral] = ()):
        self.universe: Tuple[Constant, ...] = tuple(sorted(set(universe), key=lambda c: c.name))
        self._index: Dict[Tuple[str, bool], List[ConstrainedLiteral]] = {}
        self._extensions: Dict[ConstrainedLiteral, Extension] = {}
        self._heads: Dict[Tuple[str, bool], FrozenSet[Tuple[Constant, ...]]] = {}
        self.discarded = 0
        for literal in literals:
            self.add(literal)

    def extension(self, literal: ConstrainedLiteral) -> Extension:
        cached = self._extensions.get(literal)
        if cached is not None:
            return cached
        head_vars = [a for a in literal.head.args if isinstance(a, Variable)]
        update_vars = set()
        for update in literal.updates:
            update_vars |= update.variables()
        names = sorted(set(head_vars) | update_vars, key=lambda v: v.name)
        rows = set()
        for values in engine.assignments(literal.constraint, names, self.universe, literal.updates):
            binding = dict(zip(names, values))
            head = tuple(binding.get(a, a) if isinstance(a, Variable) else a for a in literal.head.args)
            updates = frozenset(substitute(u, binding) for u in literal.updates)
            rows.add((head, updates))
        result = frozenset(rows)
        self._extensions[literal] = result
        return result

    def add(self, literal: ConstrainedLiteral) -> bool:
        """Store literal unless redundant; report whether it was stored."""
        extension = self.extension(literal)
        if not extension:
            return False
        key = (literal.predicate, literal.positive)
        bucket = self._index.setdefault(key, [])
        for other in bucket:
            if other == literal or extension <= self._extensions[other]:
                self.discarded += 1
                return False
        survivors = [other for other in bucket if not self._extensions[other] <= extension]
        self.discarded += len(bucket) - len(survivors)
        survivors.append(literal)
        self._index[key] = survivors
        self._heads.pop(key, None)
        return True

    def literals(self, predicate: Optional[str] = None, positive: Optional[bool] = None) -> List[ConstrainedLiteral]:
        if predicate is not None and positive is not None:
            return list(self._index.get((predicate, positive), ()))
        found = []
        for (name, polarity), bucket in self._index.items():
            if predicate is not None and name != predicate:
                continue
            if positive is not None and polarity != positive:
                continue
            found.extend(bucket)
        return found

    def ground_heads(self, predicate: str, positive: bool) -> FrozenSet[Tuple[Constant, ...]]:
        """Ground argument tuples covered by stored literals of one predicate and polarity."""
        key = (predicate, positive)
        cached = self._heads.get(key)
        if cached is None:
            heads = set()
            for literal in self._index.get(key, ()):
                heads |= {head for head, _ in self.extension(literal)}
            cached = self._heads[key] = frozenset(heads)
        return cached

    def holds(self, literal: Literal) -> bool:
        """Truth of a literal with constant arguments."""
        args = tuple(literal.args)
        return args in self.ground_heads(literal.predicate, literal.positive)

    def copy(self) -> "Interpretation":
        clone = Interpretation(self.universe)
        clone._index = {k: list(v) for k, v in self._index.items()}
        clone._extensions = dict(self._extensions)
        return clone

    def sorted(self) -> Tuple[ConstrainedLiteral, ...]:
        return tuple(sorted(self, key=ConstrainedLiteral.sort_key))

    def __iter__(self) -> Iterator[ConstrainedLiteral]:
        for bucket in self._index.values():
            yield from bucket

    def __len__(self) -> int:
        return sum(len(b) for b in self._index.values())

    def __contains__(self, literal: object) -> bool:
        if not isinstance(literal, ConstrainedLiteral):
            return False
        return literal in self._index.get((literal.predicate, literal.positive), ())


def fact_literal(fact: Atom) -> ConstrainedLiteral:
    """EDB fact p(c1..cn) as p(X1..Xn) <- X1=c1, ..., Xn=cn."""
    variables = head_variables(fact.arity)
    constraint = Constraint.build(eqs=list(zip(variables, fact.args)))
    return ConstrainedLiteral(Literal(Atom(fact.predicate, variables)), constraint, frozenset())


def ground_extension(
    literals: Sequence[ConstrainedLiteral], universe: Iterable[Constant]
) -> Dict[Tuple[str, bool], Extension]:
    """Union of extensions per (predicate, polarity); used to compare fixpoints."""
    interp = Interpretation(universe)
    grouped: Dict[Tuple[str, bool], set] = {}
    for literal in literals:
        grouped.setdefault((literal.predicate, literal.positive), set()).update(interp.extension(literal))
    return {k: frozenset(v) for k, v in grouped.items()}
