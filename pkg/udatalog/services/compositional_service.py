"""
Service for the compositional semantics: unfolding positive literals,
negative unfolding into quantified tails and stratum-by-stratum composition.
"""
import itertools
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

from udatalog.core.config import Settings, settings as default_settings
from udatalog.core.exceptions import BoundExceededError, MissingDefinitionError, ProgramError
from udatalog.core.logging import get_logger
from udatalog.models.constraint import Constraint
from udatalog.models.database import Database
from udatalog.models.formula import (
    TRUE_FORMULA,
    And,
    ConstraintFormula,
    Formula,
    LiteralFormula,
    Not,
    Or,
    QuantifiedFormula,
    exists,
)
from udatalog.models.rules import AnyRule, ExtendedRule, Rule
from udatalog.models.substitution import FreshNames, all_variables, rename_apart, substitute
from udatalog.models.terms import Atom, Constant, Literal, Term, UpdateAtom, Variable
from udatalog.services import constraint_engine as engine
from udatalog.services.analysis_service import dependency_graph, stratify
from udatalog.services.interpretation import head_variables
from udatalog.services.prenex import as_formula, evaluate_ground, to_prenex_dnf
from udatalog.services.printer import to_text

logger = get_logger(__name__)

Definitions = Dict[str, List[AnyRule]]

# constraint, updates, body literals, tail
_Partial = Tuple[Constraint, Tuple[UpdateAtom, ...], Tuple[Literal, ...], Optional[QuantifiedFormula]]

# head, updates, lower-predicate literals, extensional literals, negative literals
Signature = Tuple[
    Tuple[Term, ...],
    FrozenSet[UpdateAtom],
    FrozenSet[Literal],
    FrozenSet[Literal],
    FrozenSet[Literal],
]


def copy_rule(predicate: str, arity: int) -> Rule:
    """`p(X1..Xn) :- p(X1..Xn)`."""
    atom = Atom(predicate, head_variables(arity))
    return Rule(atom, body=(Literal(atom),))


def identity_program(db: Database) -> Tuple[Rule, ...]:
    """A copy rule for every extensional predicate."""
    return tuple(copy_rule(p, db.arities[p]) for p in sorted(db.predicates - db.intensional))


def _make_rule(head: Atom, constraint: Constraint, updates, body, tail: Optional[QuantifiedFormula]) -> AnyRule:
    if tail is None or tail.is_true:
        return Rule(head, constraint, tuple(updates), tuple(body))
    return ExtendedRule(head, constraint, tuple(updates), tuple(body), tail)


def canonical_rule(rule: AnyRule) -> AnyRule:
    """
    Rename variables by first occurrence: head X1.., body Y1.., tail-bound Z1...

    Unfolding is deterministic, so two derivations of the same rule end up
    syntactically equal after this renaming.
    """
    order: List[Variable] = []

    def visit(terms: Iterable[Term]) -> None:
        for term in terms:
            if isinstance(term, Variable) and term not in order:
                order.append(term)

    visit(rule.head.args)
    head_count = len(order)
    for literal in rule.body:
        visit(literal.args)
    for update in sorted(rule.updates, key=lambda u: (u.sign.value, u.atom.predicate)):
        visit(update.atom.args)
    for _, left, right in rule.constraint.atoms():
        visit((left, right))
    tail = rule.tail
    bound: List[Variable] = []
    if tail is not None:
        for disjunct in tail.matrix:
            visit(v for v in sorted(disjunct.variables(), key=lambda v: v.name) if v not in tail.bound_variables())
        bound = [var for _, var in tail.quantifiers]

    mapping: Dict[Variable, Term] = {}
    for index, var in enumerate(order):
        if index < head_count:
            mapping[var] = Variable(f"X{index + 1}")
        else:
            mapping[var] = Variable(f"Y{index - head_count + 1}")
    for index, var in enumerate(bound, start=1):
        mapping[var] = Variable(f"Z{index}")
    renamed = substitute(rule, mapping)
    updates = tuple(sorted(set(renamed.updates), key=UpdateAtom.sort_key))
    return _make_rule(renamed.head, renamed.constraint, updates, renamed.body, renamed.tail)


class CompositionalService:
    """Service for unfolding a database's rules into an open program."""

    def __init__(
        self,
        db: Database,
        config: Optional[Settings] = None,
        universe: Optional[Iterable[Constant]] = None,
    ):
        self.db = db
        self.settings = config or default_settings
        if universe is None:
            extra = {Constant(name) for name in self.settings.EXTRA_DOMAIN}
            universe = db.universe | extra
        self.universe: Tuple[Constant, ...] = tuple(sorted(set(universe), key=lambda c: c.name))
        self.reservoir = FreshNames(prefix="_U")
        names = set()
        for rule in db.idb:
            names |= {v.name for v in all_variables(rule)}
        self.reservoir.reserve(names)
        self.identity: Definitions = {r.predicate: [r] for r in identity_program(db)}

    def _tail(self, tails: Sequence[QuantifiedFormula]) -> Optional[QuantifiedFormula]:
        tails = [t for t in tails if t is not None and not t.is_true]
        if not tails:
            return None
        if len(tails) == 1:
            return tails[0]
        joined = to_prenex_dnf(And(tuple(as_formula(t) for t in tails)), self.universe, self.reservoir)
        return None if joined.is_true else joined

    def _instance(self, definition: AnyRule, args: Sequence[Term]) -> AnyRule:
        """Definition renamed apart with its head arguments replaced by `args`."""
        renamed = rename_apart(definition, self.reservoir)
        mapping = dict(zip(renamed.head.args, args))
        return substitute(renamed, mapping)

    def _finish(self, rule: AnyRule, partial: _Partial) -> Optional[AnyRule]:
        constraint, updates, body, tail = partial
        head_vars = [a for a in rule.head.args if isinstance(a, Variable)]
        normal = engine.normalize(constraint, self.universe, prefer=head_vars)
        if normal.is_false or not engine.solvable(normal, updates, self.universe):
            return None
        if tail is not None and tail.is_false:
            return None
        return canonical_rule(_make_rule(rule.head, normal, updates, body, tail))

    def _expand(
        self, rules: Iterable[AnyRule], defs: Definitions
    ) -> Iterator[Tuple[AnyRule, Tuple[AnyRule, ...], AnyRule]]:
        """Each unfolding of `rules`, with the definition used for every positive literal."""
        for rule in rules:
            partials: List[Tuple[_Partial, Tuple[AnyRule, ...]]] = [
                ((rule.constraint, tuple(rule.updates), (), rule.tail), ())
            ]
            for literal in rule.body:
                if not literal.positive:
                    partials = [((c, u, b + (literal,), t), chosen) for (c, u, b, t), chosen in partials]
                    continue
                grown: List[Tuple[_Partial, Tuple[AnyRule, ...]]] = []
                for (constraint, updates, body, tail), chosen in partials:
                    for definition in defs.get(literal.predicate, ()):
                        inst = self._instance(definition, literal.args)
                        combined = engine.normalize(constraint.conjoin(inst.constraint), self.universe)
                        if combined.is_false:
                            continue
                        merged = updates + tuple(u for u in inst.updates if u not in updates)
                        if not engine.solvable(combined, merged, self.universe):
                            continue
                        partial = (combined, merged, body + tuple(inst.body), self._tail([tail, inst.tail]))
                        grown.append((partial, chosen + (definition,)))
                partials = grown
                if not partials:
                    break
            for partial, chosen in partials:
                finished = self._finish(rule, partial)
                if finished is not None:
                    yield rule, chosen, finished

    def unfold(self, rules: Iterable[AnyRule], defs: Definitions) -> List[AnyRule]:
        """
        Replace every positive body literal by a renamed definition body.

        Negative literals pass through. A literal whose predicate has no
        entry in `defs` cannot be unfolded and the rule yields nothing.
        """
        return _dedupe((finished for _, _, finished in self._expand(rules, defs)), self.universe)

    def tc_fixpoint(self) -> Tuple[AnyRule, ...]:
        """Least fixpoint of I -> Unf_IDB(I + identity), bounded by TC_MAX_STEPS."""
        if any(rule.negative_body for rule in self.db.idb):
            raise ProgramError("tc_fixpoint needs a negation-free program")
        current: List[AnyRule] = []
        for step in range(1, self.settings.TC_MAX_STEPS + 1):
            defs = _definitions(current, self.identity)
            produced = self.unfold(self.db.idb, defs)
            if set(produced) == set(current):
                logger.debug("unfolding fixpoint reached", steps=step, rules=len(current))
                return tuple(current)
            current = produced
        raise BoundExceededError(
            f"unfolding did not converge within {self.settings.TC_MAX_STEPS} steps",
            self.settings.TC_MAX_STEPS,
        )

    def _round_bound(self) -> int:
        return self.settings.UNFOLD_CAP or self.settings.TC_MAX_STEPS

    def _signatures(
        self,
        source: AnyRule,
        chosen: Sequence[AnyRule],
        component: FrozenSet[str],
        cover: "_GroundCover",
    ) -> Iterator[Signature]:
        """Ground instances of one unfolding of `source`, joined through the stored instances of `chosen`."""
        variables = sorted(source.variables(), key=lambda v: v.name)
        positives = source.positive_body
        for values in engine.assignments(source.constraint, variables, self.universe, source.updates):
            mapping = dict(zip(variables, values))
            own = frozenset(substitute(u, mapping) for u in source.updates)
            fixed: Set[Literal] = set()
            loose: Set[Literal] = set()
            parts = []
            for literal, definition in zip(positives, chosen):
                ground = substitute(literal, mapping)
                if literal.predicate in component:
                    parts.append(cover.instances(definition, ground.args))
                elif literal.predicate in cover.opaque:
                    fixed.add(ground)
                else:
                    loose.add(ground)
            head = substitute(source.head, mapping).args
            negative = frozenset(substitute(l, mapping) for l in source.negative_body)
            for picks in itertools.product(*parts):
                updates = own.union(*(p[1] for p in picks))
                if not engine.updates_consistent(updates):
                    continue
                yield (
                    head,
                    updates,
                    frozenset(fixed).union(*(p[2] for p in picks)),
                    frozenset(loose).union(*(p[3] for p in picks)),
                    negative.union(*(p[4] for p in picks)),
                )

    def _unfold_recursive(
        self, members: Sequence[AnyRule], defs: Definitions, component: FrozenSet[str]
    ) -> List[AnyRule]:
        """
        Unfold a recursive component until a round yields no new ground instance.

        Lower predicates stay as literals here and are unfolded afterwards.
        An instance is new unless a known one has the same head, updates and
        lower-predicate literals and a subset of its extensional and
        negative literals.
        """
        passthrough: Definitions = {}
        for predicate in defs:
            if predicate not in component:
                copy = copy_rule(predicate, self.db.arities[predicate])
                passthrough[predicate] = self.identity.get(predicate) or [copy]
        cover = _GroundCover(frozenset(passthrough) - frozenset(self.identity))
        found: List[AnyRule] = []
        seen: Dict[Tuple[AnyRule, Tuple[AnyRule, ...]], Tuple[int, ...]] = {}
        bound = self._round_bound()
        for round_number in range(1, bound + 1):
            candidates = list(self._expand(members, _definitions(found, passthrough)))
            candidates.sort(key=lambda item: (len(item[2].body), len(item[2].variables())))
            changed = False
            for source, chosen, rule in candidates:
                versions = tuple(cover.version(d) for d in chosen)
                if seen.get((source, chosen)) == versions:
                    continue
                seen[(source, chosen)] = versions
                if cover.add(rule, list(self._signatures(source, chosen, component, cover))):
                    changed = True
                    if rule not in found:
                        found.append(rule)
            if not changed:
                logger.debug(
                    "component unfolded",
                    component=sorted(component),
                    rounds=round_number,
                    rules=len(found),
                    instances=cover.size,
                )
                return self.unfold(found, defs)
        raise BoundExceededError(
            f"recursive component {', '.join(sorted(component))} still grows after {bound} unfolding rounds",
            bound,
        )

    def _unfold_components(self, rules: Sequence[AnyRule], defs: Definitions) -> List[AnyRule]:
        """Unfold positive literals component by component, lower components first."""
        defs = dict(defs)
        heads = {r.predicate for r in rules}
        graph = dependency_graph(self.db.with_idb(rules))
        results: List[AnyRule] = []
        for component in graph.components():
            members = [r for r in rules if r.predicate in component and r.predicate in heads]
            if not members:
                continue
            if graph.is_recursive(component):
                found = self._unfold_recursive(members, defs, frozenset(component))
            else:
                found = self.unfold(members, defs)
            for predicate in component & heads:
                defs[predicate] = [r for r in found if r.predicate == predicate]
            results.extend(found)
        return results

    def t_stable_pos(self) -> Tuple[AnyRule, ...]:
        """Rules with every positive intensional literal unfolded away."""
        unfolded = self._unfold_components(self.db.idb, self.identity)
        position = {}
        for index, rule in enumerate(self.db.idb):
            position.setdefault(rule.predicate, index)
        return tuple(sorted(unfolded, key=lambda r: position[r.predicate]))

    def _one_point(self, definition: AnyRule, target: Sequence[Variable]):
        """Eliminate local variables bound by equalities."""
        normal = engine.normalize(definition.constraint, self.universe, prefer=target)
        if normal.is_false:
            return None
        mapping = {left: right for left, right in normal.eqs if left not in target}
        return substitute(definition, mapping), normal

    def neg_c(self, defs: Sequence[AnyRule], target: Sequence[Term]) -> QuantifiedFormula:
        """
        Negation of the disjunction of the definitions' bodies, in prenex DNF.

        Local variables become quantified and every body carries the
        constraints that keep its updates consistent.
        """
        if not defs:
            return TRUE_FORMULA
        target_vars = [t for t in target if isinstance(t, Variable)]
        bodies: List[Formula] = []
        for definition in defs:
            inst = self._instance(definition, target)
            reduced = self._one_point(inst, target_vars)
            if reduced is None:
                continue
            inst, normal = reduced
            consistent = engine.sol(inst.updates, self.universe)
            if consistent.is_false:
                continue
            constraint = substitute(normal, {l: r for l, r in normal.eqs if l not in target_vars})
            parts: List[Formula] = [ConstraintFormula(constraint)]
            if not consistent.is_true:
                parts.append(Or(tuple(ConstraintFormula(c) for c in consistent)))
            parts.extend(LiteralFormula(l) for l in inst.body)
            if inst.tail is not None:
                parts.append(as_formula(inst.tail))
            found = set(constraint.variables())
            for option in consistent:
                found |= option.variables()
            for part in inst.body:
                found |= part.variables()
            if inst.tail is not None:
                found |= inst.tail.free_variables()
            local = sorted(found - set(target_vars), key=lambda v: v.name)
            bodies.append(exists(local, And(tuple(parts))))
        return to_prenex_dnf(Not(Or(tuple(bodies))), self.universe, self.reservoir)

    def _tail_satisfiable(self, rule: AnyRule, tail: QuantifiedFormula) -> bool:
        """Whether some assignment makes the rule constraint and the tail's constraint parts hold."""
        free = sorted(tail.free_variables(), key=lambda v: v.name)
        for values in engine.assignments(rule.constraint, free, self.universe, rule.updates):
            if evaluate_ground(tail, dict(zip(free, values)), lambda _: True, self.universe):
                return True
        return False

    def u_neg(self, rules: Iterable[AnyRule], defs: Definitions) -> List[AnyRule]:
        """Replace each rule's negative literals by one quantified tail."""
        results: List[AnyRule] = []
        for rule in rules:
            negatives = rule.negative_body
            if not negatives:
                results.append(rule)
                continue
            formulas = []
            for literal in negatives:
                if literal.predicate not in defs:
                    raise MissingDefinitionError(literal.predicate)
                formulas.append(self.neg_c(defs[literal.predicate], literal.args))
            if rule.tail is not None:
                formulas.append(rule.tail)
            if any(f.is_false for f in formulas):
                continue
            tail = self._tail(formulas)
            if tail is not None and (tail.is_false or not self._tail_satisfiable(rule, tail)):
                continue
            if not engine.solvable(rule.constraint, rule.updates, self.universe):
                continue
            extended = _make_rule(rule.head, rule.constraint, rule.updates, rule.positive_body, tail)
            results.append(canonical_rule(extended))
        return _dedupe(results, self.universe)

    def compose(self) -> Tuple[AnyRule, ...]:
        """Recursion-free open program answer-equivalent to the database's rules."""
        strat = stratify(self.db)
        defs: Definitions = dict(self.identity)
        composed: List[AnyRule] = []
        for index, rules in enumerate(strat.strata, start=1):
            positive = self._unfold_components(rules, defs)
            stratum = self.u_neg(positive, defs)
            for predicate in strat.predicates_at(index):
                defs[predicate] = [r for r in stratum if r.predicate == predicate]
            composed.extend(stratum)
            logger.info("stratum composed", stratum=index, rules=len(stratum))
        return tuple(composed)

    def precompile(self) -> Database:
        """The database with its rules replaced by the composed program."""
        compiled = Database(
            edb=self.db.edb,
            declared_domain=self.db.declared_domain | frozenset(self.universe),
            extensional=self.db.extensional | (self.db.predicates - self.db.intensional),
            arities=dict(self.db.arities),
        )
        return compiled.with_idb(self.compose())


class _GroundCover:
    """Ground instances produced so far for one recursive component."""

    def __init__(self, opaque: FrozenSet[str]):
        self.opaque = opaque
        self.size = 0
        self._known: Dict[Tuple, List[Tuple[FrozenSet[Literal], FrozenSet[Literal]]]] = {}
        self._by_rule: Dict[AnyRule, Dict[Tuple[Term, ...], List[Signature]]] = {}
        self._versions: Dict[AnyRule, int] = {}

    def covered(self, predicate: str, signature: Signature) -> bool:
        head, updates, fixed, loose, negative = signature
        return any(
            known_loose <= loose and known_negative <= negative
            for known_loose, known_negative in self._known.get((predicate, head, updates, fixed), ())
        )

    def add(self, rule: AnyRule, signatures: Iterable[Signature]) -> bool:
        """Record the instances not covered yet; True when there was one."""
        added = False
        for signature in signatures:
            if self.covered(rule.predicate, signature):
                continue
            head, updates, fixed, loose, negative = signature
            self._known.setdefault((rule.predicate, head, updates, fixed), []).append((loose, negative))
            self._by_rule.setdefault(rule, {}).setdefault(head, []).append(signature)
            self._versions[rule] = self._versions.get(rule, 0) + 1
            self.size += 1
            added = True
        return added

    def instances(self, rule: AnyRule, head: Tuple[Term, ...]) -> List[Signature]:
        return self._by_rule.get(rule, {}).get(tuple(head), [])

    def version(self, rule: AnyRule) -> int:
        return self._versions.get(rule, 0)


def _definitions(rules: Iterable[AnyRule], base: Definitions) -> Definitions:
    defs: Definitions = {k: list(v) for k, v in base.items()}
    for rule in rules:
        defs.setdefault(rule.predicate, [])
        if rule not in defs[rule.predicate]:
            defs[rule.predicate].append(rule)
    return defs


def _dedupe(rules: Iterable[AnyRule], universe: Sequence[Constant]) -> List[AnyRule]:
    """Drop duplicates and rules whose constraint entails a sibling's with equal remainder."""
    kept: List[AnyRule] = []
    for rule in rules:
        if rule in kept:
            continue
        if any(_subsumes(other, rule, universe) for other in kept):
            continue
        kept = [other for other in kept if not _subsumes(rule, other, universe)] + [rule]
    return kept


def _subsumes(general: AnyRule, specific: AnyRule, universe: Sequence[Constant]) -> bool:
    if (general.head, general.body, frozenset(general.updates), general.tail) != (
        specific.head,
        specific.body,
        frozenset(specific.updates),
        specific.tail,
    ):
        return False
    return engine.entails(specific.constraint, general.constraint, universe)


def render_compiled(db: Database, config: Optional[Settings] = None) -> str:
    """Text of a `.udlc` file: header comment, directives, then rules."""
    config = config or default_settings
    universe = sorted(db.universe, key=lambda c: c.name)
    lines = [
        f"% {config.PROJECT_NAME} precompiled program",
        f"% version: {config.VERSION}",
        f"% universe: {', '.join(c.name for c in universe)}",
    ]
    if universe:
        lines.append(f"#domain {', '.join(c.name for c in universe)}.")
    open_predicates = sorted(db.predicates - db.intensional)
    if open_predicates:
        lines.append(f"#extensional {', '.join(f'{p}/{db.arities[p]}' for p in open_predicates)}.")
    lines.extend(to_text(rule) for rule in db.idb)
    return "\n".join(lines) + "\n"


def compiled_universe(text: str) -> Optional[List[str]]:
    """Universe recorded in a `.udlc` header, if present."""
    for line in text.splitlines():
        if line.startswith("% universe:"):
            return [name.strip() for name in line.split(":", 1)[1].split(",") if name.strip()]
    return None


def compose(db: Database, config: Optional[Settings] = None) -> Tuple[AnyRule, ...]:
    return CompositionalService(db, config).compose()


def t_stable_pos(db: Database, universe: Optional[Iterable[Constant]] = None) -> Tuple[AnyRule, ...]:
    return CompositionalService(db, universe=universe).t_stable_pos()


def tc_fixpoint(db: Database, config: Optional[Settings] = None) -> Tuple[AnyRule, ...]:
    return CompositionalService(db, config).tc_fixpoint()
