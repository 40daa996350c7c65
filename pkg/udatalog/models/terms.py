"""
Terms, atoms, literals and update atoms.
"""
from dataclasses import dataclass
from enum import Enum
from typing import FrozenSet, Iterator, Tuple, Union


@dataclass(frozen=True)
class Variable:
    """Logical variable; names start with an uppercase letter or underscore."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Constant:
    """Element of the Herbrand universe."""

    name: str

    def __str__(self) -> str:
        return self.name


Term = Union[Variable, Constant]


def term_key(term: Term) -> Tuple[int, str]:
    """Total order on terms: constants before variables, then by name."""
    return (1 if isinstance(term, Variable) else 0, term.name)


def is_variable(term: Term) -> bool:
    return isinstance(term, Variable)


@dataclass(frozen=True)
class Atom:
    """Predicate applied to an ordered tuple of terms."""

    predicate: str
    args: Tuple[Term, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def signature(self) -> Tuple[str, int]:
        return (self.predicate, len(self.args))

    def is_ground(self) -> bool:
        return not any(isinstance(a, Variable) for a in self.args)

    def variables(self) -> FrozenSet[Variable]:
        return frozenset(a for a in self.args if isinstance(a, Variable))

    def sort_key(self) -> Tuple:
        return (self.predicate, tuple(term_key(a) for a in self.args))

    def __str__(self) -> str:
        if not self.args:
            return self.predicate
        return f"{self.predicate}({','.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class Literal:
    """Atom with a polarity; negative literals live in bodies and tails only."""

    atom: Atom
    positive: bool = True

    @property
    def predicate(self) -> str:
        return self.atom.predicate

    @property
    def args(self) -> Tuple[Term, ...]:
        return self.atom.args

    def variables(self) -> FrozenSet[Variable]:
        return self.atom.variables()

    def negate(self) -> "Literal":
        return Literal(self.atom, not self.positive)

    def sort_key(self) -> Tuple:
        return (self.atom.sort_key(), not self.positive)

    def __str__(self) -> str:
        return str(self.atom) if self.positive else f"not {self.atom}"


class UpdateSign(str, Enum):
    INSERT = "+"
    DELETE = "-"

    @property
    def opposite(self) -> "UpdateSign":
        return UpdateSign.DELETE if self is UpdateSign.INSERT else UpdateSign.INSERT


@dataclass(frozen=True)
class UpdateAtom:
    """Deferred insertion (+p) or deletion (-p) of an extensional fact."""

    sign: UpdateSign
    atom: Atom

    @property
    def predicate(self) -> str:
        return self.atom.predicate

    def is_ground(self) -> bool:
        return self.atom.is_ground()

    def variables(self) -> FrozenSet[Variable]:
        return self.atom.variables()

    def sort_key(self) -> Tuple:
        return (self.atom.sort_key(), self.sign.value)

    def __str__(self) -> str:
        return f"{self.sign.value}{self.atom}"


def iter_update_conflicts(updates) -> Iterator[Tuple[UpdateAtom, UpdateAtom]]:
    """Yield (+p(s), -p(t)) pairs over the same predicate."""
    inserts = [u for u in updates if u.sign is UpdateSign.INSERT]
    deletes = [u for u in updates if u.sign is UpdateSign.DELETE]
    for ins in sorted(inserts, key=lambda u: u.sort_key()):
        for dele in sorted(deletes, key=lambda u: u.sort_key()):
            if ins.atom.signature == dele.atom.signature:
                yield ins, dele
