"""
Service for parsing `.udl` programs, goals and quantified tails.
"""
import re
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

import lark
from lark import Lark, Token, Transformer
from lark.exceptions import UnexpectedInput

from udatalog.core.exceptions import ParseError, ProgramError
from udatalog.core.logging import get_logger
from udatalog.models.constraint import FALSE, TRUE, Constraint
from udatalog.models.database import Database
from udatalog.models.formula import Disjunct, QuantifiedFormula, Quantifier
from udatalog.models.rules import AnyRule, ExtendedRule, Goal, Rule
from udatalog.models.substitution import FreshNames
from udatalog.models.terms import (
    Atom,
    Constant,
    Literal,
    Term,
    UpdateAtom,
    UpdateSign,
    Variable,
)

logger = get_logger(__name__)

GRAMMAR = r"""
program: statement*

?statement: domain_directive
          | extensional_directive
          | fact
          | rule

domain_directive: "#domain" constant ("," constant)* "."
extensional_directive: "#extensional" signature ("," signature)* "."
signature: NAME "/" INT

fact: atom "."
rule: atom ":-" body "."
goal: "?-" items "."

body: items tail?
    | tail
tail: "|>" formula

formula: quantifier* _matrix
quantifier: "forall" variables -> forall_quantifier
          | "exists" variables -> exists_quantifier
variables: VAR ("," VAR)*
_matrix: "(" disjunction ")"
       | disjunction
disjunction: conjunction (";" conjunction)*
conjunction: item ("," item)*
items: item ("," item)*

?item: "not" atom -> negative
     | "+" atom -> insertion
     | "-" atom -> deletion
     | term "=" term -> equality
     | term "!=" term -> inequality
     | "true" -> truth
     | "false" -> falsity
     | atom -> positive

atom: NAME
    | NAME "(" ")"
    | NAME "(" term ("," term)* ")"
?term: VAR -> variable
     | constant
constant: NAME
        | INT

NAME: /[a-z][a-zA-Z0-9_]*/
VAR: /[A-Z_][a-zA-Z0-9_]*/
INT: /[0-9]+/
COMMENT: /%[^\n]*/

%import common.WS
%ignore WS
%ignore COMMENT
"""

_PARSER = Lark(GRAMMAR, start=["program", "goal", "formula"], parser="lalr", maybe_placeholders=False)

_VAR_PATTERN = re.compile(r"(?<![A-Za-z0-9_])[A-Z_][A-Za-z0-9_]*")


@dataclass(frozen=True)
class SourceAtom:
    """Atom with the position of its predicate name."""

    atom: Atom
    line: int
    column: int


@dataclass(frozen=True)
class SourceItem:
    kind: str
    value: object
    line: int = 0
    column: int = 0


def _item_builder(kind: str):
    def build(self, children):
        source = children[0]
        return SourceItem(kind, source.atom, source.line, source.column)

    return build


class _TreeToSyntax(Transformer):
    """Turns the lark parse tree into raw (unnormalized) syntax objects."""

    def __init__(self, reservoir: FreshNames):
        super().__init__()
        self.reservoir = reservoir
        self.anonymous = set()

    def variable(self, children):
        name = str(children[0])
        if name != "_":
            return Variable(name)
        # every `_` is a distinct variable
        fresh = self.reservoir.variable()
        self.anonymous.add(fresh)
        return fresh

    def constant(self, children):
        return Constant(str(children[0]))

    def atom(self, children):
        name: Token = children[0]
        args = tuple(a for a in children[1:] if a is not None)
        return SourceAtom(Atom(str(name), args), name.line, name.column)

    positive = _item_builder("positive")
    negative = _item_builder("negative")
    insertion = _item_builder("insert")
    deletion = _item_builder("delete")

    def equality(self, children):
        return SourceItem("constraint", Constraint.eq(children[0], children[1]))

    def inequality(self, children):
        return SourceItem("constraint", Constraint.neq(children[0], children[1]))

    def truth(self, children):
        return SourceItem("constraint", TRUE)

    def falsity(self, children):
        return SourceItem("constraint", FALSE)

    def items(self, children):
        return list(children)

    conjunction = items

    def disjunction(self, children):
        return list(children)

    def variables(self, children):
        return [Variable(str(tok)) for tok in children]

    def forall_quantifier(self, children):
        return [(Quantifier.FORALL, v) for v in children[0]]

    def exists_quantifier(self, children):
        return [(Quantifier.EXISTS, v) for v in children[0]]

    def formula(self, children):
        quantifiers = [pair for group in children[:-1] for pair in group]
        matrix = []
        for conjunction in children[-1]:
            constraint = TRUE
            literals = []
            for item in conjunction:
                if item.kind == "constraint":
                    constraint = constraint.conjoin(item.value)
                elif item.kind in ("insert", "delete"):
                    raise ProgramError(
                        "quantified tails carry no update atoms", item.value.predicate, item.line, item.column
                    )
                else:
                    literals.append(Literal(item.value, item.kind == "positive"))
            if not constraint.is_false:
                matrix.append(Disjunct(constraint, tuple(literals)))
        return QuantifiedFormula(tuple(quantifiers), tuple(matrix))

    def tail(self, children):
        return children[0]

    def body(self, children):
        items: List[SourceItem] = []
        tail = None
        for child in children:
            if isinstance(child, QuantifiedFormula):
                tail = child
            elif child is not None:
                items = child
        return items, tail

    def fact(self, children):
        return ("fact", children[0])

    def rule(self, children):
        items, tail = children[1]
        return ("rule", children[0], items, tail)

    def goal(self, children):
        return ("goal", children[0])

    def signature(self, children):
        return (str(children[0]), int(children[1]), children[0].line, children[0].column)

    def domain_directive(self, children):
        return ("domain", list(children))

    def extensional_directive(self, children):
        return ("extensional", list(children))

    def program(self, children):
        return list(children)


def _parse_tree(text: str, start: str):
    try:
        return _PARSER.parse(text, start=start)
    except UnexpectedInput as exc:
        expected = getattr(exc, "expected", None) or getattr(exc, "allowed", None) or ()
        token = getattr(exc, "token", None)
        if token is not None:
            found = f"unexpected token {str(token)!r}"
        elif getattr(exc, "char", None) is not None:
            found = f"unexpected character {exc.char!r}"
        else:
            found = "unexpected end of input"
        line = exc.line if getattr(exc, "line", -1) != -1 else None
        column = exc.column if line is not None else None
        raise ParseError(found, line, column, expected) from exc


def reserved_names(text: str) -> List[str]:
    """Variable-looking names in the text, so fresh names never collide."""
    return _VAR_PATTERN.findall(text)


class ParserService:
    """Service for turning source text into kernel objects."""

    def __init__(self, reservoir: Optional[FreshNames] = None):
        self.reservoir = reservoir or FreshNames()
        self.anonymous: set = set()

    def _transform(self, text: str, start: str):
        self.reservoir.reserve(reserved_names(text))
        tree = _parse_tree(text, start)
        transformer = _TreeToSyntax(self.reservoir)
        try:
            result = transformer.transform(tree)
            self.anonymous = transformer.anonymous
            return result
        except lark.exceptions.VisitError as exc:
            if isinstance(exc.orig_exc, ProgramError):
                raise exc.orig_exc from None
            raise

    def _normalize_atom(self, atom: Atom) -> Tuple[Atom, List[Tuple[Term, Term]]]:
        """Give an atom distinct variable arguments; constants and repeats move to equalities."""
        seen = set()
        args = []
        eqs: List[Tuple[Term, Term]] = []
        for arg in atom.args:
            if isinstance(arg, Variable) and arg not in seen:
                seen.add(arg)
                args.append(arg)
                continue
            fresh = self.reservoir.variable()
            eqs.append((fresh, arg))
            args.append(fresh)
        return Atom(atom.predicate, tuple(args)), eqs

    def _normalize_items(self, items: Iterable[SourceItem]):
        constraint = TRUE
        updates: List[UpdateAtom] = []
        body: List[Literal] = []
        for item in items:
            if item.kind == "constraint":
                constraint = constraint.conjoin(item.value)
                continue
            atom, eqs = self._normalize_atom(item.value)
            constraint = constraint.conjoin(Constraint.build(eqs=eqs))
            if item.kind == "insert":
                updates.append(UpdateAtom(UpdateSign.INSERT, atom))
            elif item.kind == "delete":
                updates.append(UpdateAtom(UpdateSign.DELETE, atom))
            else:
                body.append(Literal(atom, item.kind == "positive"))
        return constraint, tuple(updates), tuple(body)

    def _build_rule(self, head: SourceAtom, items: List[SourceItem], tail: Optional[QuantifiedFormula]) -> AnyRule:
        head_atom, head_eqs = self._normalize_atom(head.atom)
        constraint, updates, body = self._normalize_items(items)
        constraint = constraint.conjoin(Constraint.build(eqs=head_eqs))
        if tail is not None:
            return ExtendedRule(head_atom, constraint, updates, body, tail)
        return Rule(head_atom, constraint, updates, body)

    def parse_program(self, text: str) -> Database:
        """Parse and validate a whole program; any error loads nothing."""
        statements = self._transform(text, "program")
        checker = _ProgramChecker()
        facts = set()
        rules: List[AnyRule] = []
        domain = set()

        for statement in statements:
            kind = statement[0]
            if kind == "domain":
                domain.update(statement[1])
            elif kind == "extensional":
                for name, arity, line, column in statement[1]:
                    checker.use(name, arity, line, column)
                    checker.declare_extensional(name, "directive", line, column)
            elif kind == "fact":
                source: SourceAtom = statement[1]
                checker.use_atom(source)
                if not source.atom.is_ground():
                    raise ProgramError(
                        f"fact {source.atom} is not ground", source.atom.predicate, source.line, source.column
                    )
                checker.declare_extensional(source.atom.predicate, "fact", source.line, source.column)
                facts.add(source.atom)
            else:
                _, head, items, tail = statement
                checker.use_atom(head)
                checker.declare_intensional(head)
                for item in items:
                    if isinstance(item.value, Atom):
                        checker.use_atom(SourceAtom(item.value, item.line, item.column))
                        if item.kind in ("insert", "delete"):
                            checker.declare_extensional(item.value.predicate, "update", item.line, item.column)
                if tail is not None:
                    for disjunct in tail.matrix:
                        for literal in disjunct.literals:
                            checker.use(literal.predicate, len(literal.args), head.line, head.column)
                rules.append(self._build_rule(head, items, tail))

        checker.verify()
        db = Database(
            edb=frozenset(facts),
            idb=tuple(rules),
            declared_domain=frozenset(domain),
            extensional=frozenset(checker.arities) - frozenset(checker.intensional),
            arities=dict(checker.arities),
        )
        logger.debug("program loaded", facts=len(facts), rules=len(rules), universe=len(db.universe))
        return db

    def parse_goal(self, text: str, db: Optional[Database] = None) -> Goal:
        """Parse `?- ... .`; with a database, also check arities and update targets."""
        text = text.strip()
        if not text.startswith("?-"):
            text = f"?- {text}"
        if not text.endswith("."):
            text = f"{text}."
        _, items = self._transform(text, "goal")
        answer_vars: List[Variable] = []
        for item in items:
            value = item.value
            terms: Iterable[Term] = ()
            if isinstance(value, Atom):
                terms = value.args
            elif isinstance(value, Constraint):
                terms = [t for pair in list(value.eqs) + list(value.neqs) for t in pair]
            for term in terms:
                if isinstance(term, Variable) and term not in answer_vars and term not in self.anonymous:
                    answer_vars.append(term)
        if db is not None:
            checker = _ProgramChecker.from_database(db)
            for item in items:
                if isinstance(item.value, Atom):
                    checker.use_atom(SourceAtom(item.value, item.line, item.column))
                    if item.kind in ("insert", "delete") and item.value.predicate in db.intensional:
                        raise ProgramError(
                            f"update atom on intensional predicate {item.value.predicate}",
                            item.value.predicate,
                            item.line,
                            item.column,
                        )
        constraint, updates, body = self._normalize_items(items)
        return Goal(constraint, updates, body, tuple(answer_vars))

    def parse_formula(self, text: str) -> QuantifiedFormula:
        """Parse a quantified tail such as `forall Z (X=Z ; not e(X,Z))`."""
        return self._transform(text, "formula")


class _ProgramChecker:
    """Collects arity and predicate-kind facts and reports the first clash."""

    def __init__(self) -> None:
        self.arities: Dict[str, int] = {}
        self.first_use: Dict[str, Tuple[int, int]] = {}
        # predicate -> (how it became extensional, position)
        self.extensional: Dict[str, Tuple[str, int, int]] = {}
        self.intensional: Dict[str, Tuple[int, int]] = {}

    @classmethod
    def from_database(cls, db: Database) -> "_ProgramChecker":
        checker = cls()
        checker.arities = dict(db.arities)
        return checker

    def use(self, name: str, arity: int, line: int, column: int) -> None:
        known = self.arities.get(name)
        if known is None:
            self.arities[name] = arity
            self.first_use[name] = (line, column)
        elif known != arity:
            where = self.first_use.get(name)
            previous = f" at {where[0]}:{where[1]}" if where else ""
            raise ProgramError(
                f"arity clash for predicate {name}: used with arity {known}{previous} and arity {arity}",
                name,
                line,
                column,
            )

    def use_atom(self, source: SourceAtom) -> None:
        self.use(source.atom.predicate, source.atom.arity, source.line, source.column)

    def declare_extensional(self, name: str, via: str, line: int, column: int) -> None:
        # an update atom is the most specific reason to report
        if name not in self.extensional or via == "update":
            self.extensional[name] = (via, line, column)

    def declare_intensional(self, source: SourceAtom) -> None:
        self.intensional.setdefault(source.atom.predicate, (source.line, source.column))

    def verify(self) -> None:
        for name, (line, column) in sorted(self.intensional.items()):
            if name not in self.extensional:
                continue
            via, ext_line, ext_column = self.extensional[name]
            if via == "update":
                raise ProgramError(f"update atom on intensional predicate {name}", name, ext_line, ext_column)
            if via == "fact":
                raise ProgramError(
                    f"predicate {name} has both facts and rules (extensional and intensional overlap)",
                    name,
                    line,
                    column,
                )
            raise ProgramError(f"predicate {name} is declared extensional but defined by rules", name, line, column)


def parse_program(text: str, reservoir: Optional[FreshNames] = None) -> Database:
    return ParserService(reservoir).parse_program(text)


def parse_goal(text: str, db: Optional[Database] = None, reservoir: Optional[FreshNames] = None) -> Goal:
    return ParserService(reservoir).parse_goal(text, db)


def parse_formula(text: str) -> QuantifiedFormula:
    return ParserService().parse_formula(text)
