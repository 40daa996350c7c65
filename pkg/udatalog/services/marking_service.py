"""
Service for the marking phase: stratified bottom-up fixpoint over
constrained literals, complements, extended-body evaluation and goal answers.
"""
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Set, Tuple

from udatalog.core.config import Settings, settings as default_settings
from udatalog.core.exceptions import FixpointLimitError
from udatalog.core.logging import get_logger
from udatalog.models.constraint import TRUE, Constraint
from udatalog.models.database import Database
from udatalog.models.rules import AnyRule, ConstrainedLiteral, ExtendedRule, Goal
from udatalog.models.substitution import (
    FreshNames,
    all_variables,
    apply_bindings,
    rename_apart,
    substitute,
)
from udatalog.models.terms import Atom, Constant, Literal, UpdateAtom, Variable
from udatalog.schemas.analysis import Stratification
from udatalog.schemas.evaluation import FixpointResult, Solution
from udatalog.services import constraint_engine as engine
from udatalog.services.analysis_service import stratify
from udatalog.services.interpretation import (
    Interpretation,
    canonical_literal,
    fact_literal,
    head_variables,
)
from udatalog.services.prenex import evaluate_ground
from udatalog.utils.metrics import EvaluationMetrics

logger = get_logger(__name__)

# (constraint, updates, used a delta literal)
Partial = Tuple[Constraint, FrozenSet[UpdateAtom], bool]


class MarkingService:
    """Service for evaluating a database bottom-up."""

    def __init__(
        self,
        db: Database,
        config: Optional[Settings] = None,
        reservoir: Optional[FreshNames] = None,
    ):
        self.db = db
        self.settings = config or default_settings
        extra = {Constant(name) for name in self.settings.EXTRA_DOMAIN}
        self.universe: Tuple[Constant, ...] = tuple(sorted(db.universe | extra, key=lambda c: c.name))
        self.reservoir = reservoir or FreshNames(prefix="_E")
        names = set()
        for rule in db.idb:
            names |= {v.name for v in all_variables(rule)}
        self.reservoir.reserve(names)
        self.metrics = EvaluationMetrics()

    def _join(
        self,
        body: Iterable[Literal],
        start: Partial,
        interp: Interpretation,
        delta: Optional[Set[ConstrainedLiteral]],
        universe: Iterable[Constant],
    ) -> List[Partial]:
        """Match body literals against stored literals, conjoining as we go."""
        partials = [start]
        for literal in body:
            if not literal.positive and literal.predicate not in self.db.predicates:
                # nothing can derive an unknown predicate
                continue
            candidates = interp.literals(literal.predicate, literal.positive)
            grown: List[Partial] = []
            for constraint, updates, used in partials:
                for stored in candidates:
                    renamed = self._instantiate(stored, literal)
                    combined = engine.normalize(constraint.conjoin(renamed.constraint), universe)
                    if combined.is_false:
                        continue
                    merged = updates | renamed.updates
                    if not engine.solvable(combined, merged, universe):
                        continue
                    grown.append((combined, merged, used or (delta is not None and stored in delta)))
            partials = grown
            if not partials:
                break
        return partials

    def _instantiate(self, stored: ConstrainedLiteral, literal: Literal) -> ConstrainedLiteral:
        """Rename a stored literal so its head arguments become the body literal's."""
        mapping: Dict[Variable, object] = {}
        for head_arg, body_arg in zip(stored.head.args, literal.args):
            mapping[head_arg] = body_arg
        for var in sorted(stored.variables() - set(mapping), key=lambda v: v.name):
            mapping[var] = self.reservoir.variable()
        return substitute(stored, mapping)

    def _package(
        self,
        head: Atom,
        constraint: Constraint,
        updates: FrozenSet[UpdateAtom],
        positive: bool = True,
    ) -> List[ConstrainedLiteral]:
        """Project an answer onto head and update variables and emit canonical literals."""
        head_vars = [a for a in head.args if isinstance(a, Variable)]
        normal = engine.normalize(constraint, self.universe, prefer=head_vars)
        if normal.is_false:
            return []
        bound = frozenset(apply_bindings(updates, normal))
        keep = set(head_vars)
        for update in bound:
            keep |= update.variables()
        results = []
        for disjunct in engine.project(normal, keep, self.universe):
            if engine.solvable(disjunct, bound, self.universe):
                literal = ConstrainedLiteral(Literal(head, positive), disjunct, bound if positive else frozenset())
                results.append(canonical_literal(literal))
        return results

    def eval_extended_body(
        self,
        rule: AnyRule,
        interp: Interpretation,
        delta: Optional[Set[ConstrainedLiteral]] = None,
    ) -> List[Tuple[Constraint, FrozenSet[UpdateAtom]]]:
        """Answer constraints of a (possibly extended) rule body in an interpretation."""
        start = (rule.constraint, frozenset(rule.updates), False)
        partials = self._join(rule.body, start, interp, delta, self.universe)
        if delta is not None:
            partials = [p for p in partials if p[2]]
        tail = rule.tail if isinstance(rule, ExtendedRule) else None
        if tail is None or tail.is_true:
            return [(c, u) for c, u, _ in partials]
        if tail.is_false:
            return []

        free = sorted(tail.free_variables(), key=lambda v: v.name)
        answers = []
        for constraint, updates, _ in partials:
            for values in engine.assignments(constraint, free, self.universe, updates):
                binding = dict(zip(free, values))
                if evaluate_ground(tail, binding, interp.holds, self.universe):
                    pinned = Constraint.build(eqs=list(binding.items()))
                    answers.append((engine.normalize(constraint.conjoin(pinned), self.universe), updates))
        return answers

    def _fire(
        self,
        rule: AnyRule,
        interp: Interpretation,
        delta: Optional[Set[ConstrainedLiteral]],
    ) -> List[ConstrainedLiteral]:
        if delta is not None and not rule.body:
            return []
        renamed = rename_apart(rule, self.reservoir)
        self.metrics.increment_counter("rule_firings")
        produced = []
        for constraint, updates in self.eval_extended_body(renamed, interp, delta):
            produced.extend(self._package(renamed.head, constraint, updates))
        return produced

    def _step(
        self,
        rules: Iterable[AnyRule],
        interp: Interpretation,
        delta: Optional[Set[ConstrainedLiteral]] = None,
    ) -> List[ConstrainedLiteral]:
        """Literals added by one application of the rules (Jacobi style)."""
        produced = []
        for rule in rules:
            produced.extend(self._fire(rule, interp, delta))
        added = [literal for literal in produced if interp.add(literal)]
        self.metrics.increment_counter("literals_added", len(added))
        return [literal for literal in added if literal in interp]

    def tp_step(self, interp: Interpretation, rules: Optional[Iterable[AnyRule]] = None) -> Interpretation:
        """One application of the immediate-consequence operator; the result includes I."""
        result = interp.copy()
        self._step(self.db.idb if rules is None else rules, result)
        return result

    def comp(self, interp: Interpretation, predicates: Iterable[str]) -> List[ConstrainedLiteral]:
        """Constrained negative literals complementing the given predicates."""
        negatives = []
        for predicate in sorted(predicates):
            arity = self.db.arities.get(predicate, 0)
            variables = head_variables(arity)
            head = Atom(predicate, variables)
            stored = interp.literals(predicate, True)
            if not stored:
                negatives.append(ConstrainedLiteral(Literal(head, False), TRUE))
                continue
            clauses = []
            for literal in stored:
                # stored literals are canonical, so their head is X1..Xn
                for consistent in engine.sol(literal.updates, self.universe):
                    guarded = literal.constraint.conjoin(consistent)
                    for disjunct in engine.project(guarded, variables, self.universe):
                        clauses.append(list(engine.neg(disjunct, self.universe)))
            for disjunct in engine.conjoin_all(clauses, self.universe):
                negatives.append(canonical_literal(ConstrainedLiteral(Literal(head, False), disjunct)))
        return negatives

    def _saturate(self, rules: Tuple[AnyRule, ...], interp: Interpretation, stratum: int) -> int:
        delta: Optional[Set[ConstrainedLiteral]] = None
        for rounds in range(1, self.settings.MAX_FIXPOINT_ROUNDS + 1):
            added = self._step(rules, interp, delta)
            if not added:
                return rounds
            delta = set(added)
        raise FixpointLimitError(stratum, self.settings.MAX_FIXPOINT_ROUNDS)

    def initial_interpretation(self) -> Interpretation:
        return Interpretation(self.universe, (fact_literal(f) for f in self.db.edb))

    def stratified_fixpoint(self, strat: Optional[Stratification] = None) -> FixpointResult:
        """Evaluate stratum by stratum, completing each stratum's predicates."""
        strat = strat or stratify(self.db)
        interp = self.initial_interpretation()
        snapshots = []
        iterations = []
        for index, rules in enumerate(strat.strata, start=1):
            with self.metrics.timer(f"stratum.{index}"):
                rounds = self._saturate(rules, interp, index)
                for literal in self.comp(interp, strat.predicates_at(index)):
                    interp.add(literal)
            iterations.append(rounds)
            snapshots.append(interp.sorted())
            logger.info("stratum evaluated", stratum=index, rounds=rounds, literals=len(interp))
        self.metrics.increment_counter("literals_discarded", interp.discarded)
        self.metrics.log_summary(extra={"strata": len(snapshots)})
        return FixpointResult(
            strata=snapshots,
            final=interp.sorted(),
            iterations=iterations,
            metrics=self.metrics.snapshot(),
            interpretation=interp,
        )

    def answers(self, goal: Goal, fix: Optional[FixpointResult] = None) -> List[Solution]:
        """Answer constraints of a goal over a fixpoint."""
        fix = fix or self.stratified_fixpoint()
        interp = fix.interpretation or Interpretation(self.universe, fix.final)
        universe = engine.domain_of(self.universe, goal.constraint, list(goal.updates))
        for literal in goal.body:
            mentioned = {a for a in literal.args if isinstance(a, Constant)}
            universe = tuple(sorted(set(universe) | mentioned, key=lambda c: c.name))

        answer_vars = list(goal.answer_vars)
        head = Atom("?", tuple(answer_vars))
        found = Interpretation(universe)
        partials = self._join(goal.body, (goal.constraint, frozenset(goal.updates), False), interp, None, universe)
        for constraint, updates, _ in partials:
            normal = engine.normalize(constraint, universe, prefer=answer_vars)
            if normal.is_false:
                continue
            bound = frozenset(apply_bindings(updates, normal))
            keep = set(answer_vars)
            for update in bound:
                keep |= update.variables()
            for disjunct in engine.project(normal, keep, universe):
                if engine.solvable(disjunct, bound, universe):
                    found.add(ConstrainedLiteral(Literal(head), disjunct, bound))
        solutions = [
            Solution(bindings=l.constraint, updates=tuple(sorted(l.updates, key=UpdateAtom.sort_key)))
            for l in found.sorted()
        ]
        logger.debug("goal answered", solutions=len(solutions))
        return solutions


def evaluate(db: Database, config: Optional[Settings] = None) -> FixpointResult:
    return MarkingService(db, config).stratified_fixpoint()


def answer(db: Database, goal: Goal, config: Optional[Settings] = None) -> List[Solution]:
    service = MarkingService(db, config)
    return service.answers(goal, service.stratified_fixpoint())
