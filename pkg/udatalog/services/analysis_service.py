"""
Service for static analysis: dependency graph, stratification and
safety through query invocation.
"""
from collections import deque
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from udatalog.core.exceptions import NotStratifiableError
from udatalog.core.logging import get_logger
from udatalog.models.database import Database
from udatalog.models.rules import AnyRule, Goal
from udatalog.models.terms import Constant, Variable
from udatalog.schemas.analysis import AdmissibilityReport, SafetyViolation, Stratification

logger = get_logger(__name__)


class DependencyGraph:
    """Predicate graph with head -> body edges labelled positive or negative."""

    def __init__(self) -> None:
        self.nodes: Set[str] = set()
        self.edges: Dict[str, Dict[str, bool]] = {}

    @classmethod
    def from_rules(cls, rules: Iterable[AnyRule], predicates: Iterable[str] = ()) -> "DependencyGraph":
        graph = cls()
        for name in predicates:
            graph.add_node(name)
        for rule in rules:
            head = rule.head.predicate
            graph.add_node(head)
            for literal in rule.body:
                graph.add_edge(head, literal.predicate, negative=not literal.positive)
            tail = getattr(rule, "tail", None)
            if tail is not None:
                # tail literals are evaluated against completed strata
                for name in tail.predicates():
                    graph.add_edge(head, name, negative=True)
        return graph

    def add_node(self, name: str) -> None:
        self.nodes.add(name)
        self.edges.setdefault(name, {})

    def add_edge(self, head: str, body: str, negative: bool) -> None:
        self.add_node(head)
        self.add_node(body)
        self.edges[head][body] = self.edges[head].get(body, False) or negative

    def successors(self, node: str) -> List[str]:
        return sorted(self.edges.get(node, {}))

    def is_negative(self, head: str, body: str) -> bool:
        return self.edges.get(head, {}).get(body, False)

    def components(self) -> List[FrozenSet[str]]:
        """Strongly connected components, dependencies before dependents (Tarjan)."""
        index: Dict[str, int] = {}
        low: Dict[str, int] = {}
        stack: List[str] = []
        on_stack: Set[str] = set()
        result: List[FrozenSet[str]] = []
        counter = [0]

        def visit(node: str) -> None:
            index[node] = low[node] = counter[0]
            counter[0] += 1
            stack.append(node)
            on_stack.add(node)
            for succ in self.successors(node):
                if succ not in index:
                    visit(succ)
                    low[node] = min(low[node], low[succ])
                elif succ in on_stack:
                    low[node] = min(low[node], index[succ])
            if low[node] == index[node]:
                component = set()
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.add(member)
                    if member == node:
                        break
                result.append(frozenset(component))

        for node in sorted(self.nodes):
            if node not in index:
                visit(node)
        return result

    def is_recursive(self, component: FrozenSet[str]) -> bool:
        if len(component) > 1:
            return True
        node = next(iter(component))
        return node in self.edges.get(node, {})

    def path(self, start: str, goal: str, within: FrozenSet[str]) -> List[str]:
        """Shortest path start -> goal using only nodes of `within`."""
        parents: Dict[str, Optional[str]] = {start: None}
        queue = deque([start])
        while queue:
            node = queue.popleft()
            if node == goal:
                break
            for succ in self.successors(node):
                if succ in within and succ not in parents:
                    parents[succ] = node
                    queue.append(succ)
        path = [goal]
        while parents.get(path[-1]) is not None:
            path.append(parents[path[-1]])
        return list(reversed(path))

    def reachable(self, roots: Iterable[str]) -> Set[str]:
        seen: Set[str] = set()
        queue = deque(roots)
        while queue:
            node = queue.popleft()
            if node in seen:
                continue
            seen.add(node)
            queue.extend(self.successors(node))
        return seen


def dependency_graph(db: Database) -> DependencyGraph:
    return DependencyGraph.from_rules(db.idb, db.predicates)


def stratify(db: Database, compact: bool = False) -> Stratification:
    """
    Layer the rules so negative dependencies point strictly downward.

    The canonical layering gives every recursive component its own level
    above all components it depends on; `compact=True` only separates
    levels across negative edges. Extensional predicates sit at level 1.
    """
    graph = dependency_graph(db)
    intensional = db.intensional
    components = graph.components()

    for component in components:
        for head in sorted(component):
            for body in graph.successors(head):
                if body in component and graph.is_negative(head, body):
                    cycle = [head] + graph.path(body, head, component)
                    raise NotStratifiableError(
                        f"not stratifiable: cycle {' -> '.join(cycle)} uses negative edge {head} -> not {body}",
                        cycle,
                        (head, body),
                    )

    level: Dict[str, int] = {}
    notes: List[str] = []
    for component in components:
        if not component & intensional:
            for name in component:
                level[name] = 1
            continue
        current = 1
        for head in component:
            for body in graph.successors(head):
                if body in component:
                    continue
                negative = graph.is_negative(head, body)
                below = level[body]
                if body in intensional and not compact:
                    current = max(current, below + 1)
                else:
                    current = max(current, below + (1 if negative else 0))
        for name in component:
            level[name] = current

    used = {body for head in graph.edges for body in graph.edges[head]}
    for name in sorted(db.predicates - used - intensional):
        if not db.facts_for(name):
            notes.append(f"predicate {name} is never used; placed at level 1")

    depth = max(level.values(), default=1)
    strata = [tuple(r for r in db.idb if level[r.predicate] == index) for index in range(1, depth + 1)]
    logger.debug("program stratified", strata=depth, compact=compact)
    return Stratification(strata=strata, level=level, notes=notes)


def reachable_rules(db: Database, goal: Goal) -> List[int]:
    """1-based indices of rules used when evaluating the goal."""
    graph = dependency_graph(db)
    roots = [l.predicate for l in goal.body]
    reached = graph.reachable(roots)
    return [k for k, rule in enumerate(db.idb, start=1) if rule.predicate in reached]


def _bound_variables(body, constraint, seeds: Iterable[Variable] = ()) -> Set[Variable]:
    """Variables bound by positive literals, constants or seeds, closed under equalities."""
    bound: Set[Variable] = set(seeds)
    for literal in body:
        if literal.positive:
            bound |= literal.variables()
    changed = True
    while changed:
        changed = False
        for left, right in constraint.eqs:
            left_bound = isinstance(left, Constant) or left in bound
            right_bound = isinstance(right, Constant) or right in bound
            if left_bound and not right_bound and isinstance(right, Variable):
                bound.add(right)
                changed = True
            elif right_bound and not left_bound and isinstance(left, Variable):
                bound.add(left)
                changed = True
    return bound


def _violations(rule_like, index: int, seeds: Iterable[Variable] = (), head=None) -> List[SafetyViolation]:
    bound = _bound_variables(rule_like.body, rule_like.constraint, seeds)
    in_updates: Set[Variable] = set()
    for update in rule_like.updates:
        in_updates |= update.variables()
    in_negation: Set[Variable] = set()
    for literal in rule_like.body:
        if not literal.positive:
            in_negation |= literal.variables()
    tail = getattr(rule_like, "tail", None)
    if tail is not None:
        in_negation |= tail.free_variables()
    in_head = head.variables() if head is not None else frozenset()

    found = []
    for var in sorted(in_updates | in_negation | in_head, key=lambda v: v.name):
        if var in bound:
            continue
        if var in in_updates:
            reason = "only occurs in update atom"
        elif var in in_negation:
            reason = "only occurs under negation"
        else:
            reason = "only occurs in rule head"
        found.append(SafetyViolation(rule_index=index, variable=var.name, reason=reason))
    return found


def _goal_bound_positions(goal: Goal) -> Dict[str, Set[int]]:
    """Argument positions each goal predicate receives as constants."""
    bound = _bound_variables((), goal.constraint)
    positions: Dict[str, Set[int]] = {}
    for literal in goal.body:
        for i, arg in enumerate(literal.args):
            if isinstance(arg, Constant) or arg in bound:
                positions.setdefault(literal.predicate, set()).add(i)
    return positions


def check_admissible(db: Database, goal: Goal) -> AdmissibilityReport:
    """Safety through query invocation for the rules the goal can reach."""
    reached = reachable_rules(db, goal)
    positions = _goal_bound_positions(goal)
    called = {l.predicate for l in goal.body}

    violations = _violations(goal, 0)
    warnings: List[SafetyViolation] = []
    for k, rule in enumerate(db.idb, start=1):
        seeds: Set[Variable] = set()
        if rule.predicate in called:
            for i in positions.get(rule.predicate, ()):
                arg = rule.head.args[i]
                if isinstance(arg, Variable):
                    seeds.add(arg)
        if k in reached:
            violations.extend(_violations(rule, k, seeds, rule.head))
        else:
            for finding in _violations(rule, k, (), rule.head):
                warnings.append(finding)
    if warnings:
        logger.warning("unsafe rules not reachable from goal", rules=sorted({w.rule_index for w in warnings}))
    return AdmissibilityReport(violations=violations, warnings=warnings, checked_rules=reached)


def check_program(db: Database, extra: Iterable[Constant] = ()) -> AdmissibilityReport:
    """Safety of every rule with no goal constants (used by `check`)."""
    violations: List[SafetyViolation] = []
    notes: List[str] = []
    for k, rule in enumerate(db.idb, start=1):
        found = _violations(rule, k, (), rule.head)
        violations.extend(found)
        if not found and not (db.universe or set(extra)) and any(not u.is_ground() for u in rule.updates):
            # nothing to ground the updates with
            notes.append(f"rule#{k} has non-ground updates but the universe is empty")
    if notes:
        logger.warning("empty universe", rules=len(notes))
    return AdmissibilityReport(
        violations=violations, checked_rules=list(range(1, len(db.idb) + 1)), notes=notes
    )


def stratification_problems(db: Database, level: Dict[str, int]) -> List[str]:
    """Rules breaking the layering conditions under a given predicate level map."""
    problems = []
    graph = dependency_graph(db)
    for head in sorted(graph.edges):
        for body in graph.successors(head):
            head_level = level.get(head, 1)
            body_level = level.get(body, 1)
            if graph.is_negative(head, body) and not body_level < head_level:
                problems.append(f"{head} (level {head_level}) negatively depends on {body} (level {body_level})")
            elif not graph.is_negative(head, body) and not body_level <= head_level:
                problems.append(f"{head} (level {head_level}) depends on higher {body} (level {body_level})")
    return problems
