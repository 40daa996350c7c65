"""
Constraint engine over a finite Herbrand universe.

Every decision (solvability, entailment, projection, negation) is taken
relative to a domain: the caller's universe plus the constants mentioned
in the question itself.
"""
import itertools
from typing import (
    Dict,
    Iterable,
    Iterator,
    List,
    Optional,
    Sequence,
    Set,
    Tuple,
)

from udatalog.core.logging import get_logger
from udatalog.models.constraint import (
    FALSE,
    TRUE,
    Constraint,
    DisjunctiveConstraint,
)
from udatalog.models.substitution import apply_bindings
from udatalog.models.terms import (
    Constant,
    Term,
    UpdateAtom,
    UpdateSign,
    Variable,
    iter_update_conflicts,
    term_key,
)

logger = get_logger(__name__)

Assignment = Dict[Variable, Constant]
# A clash clause holds when at least one of its pairs differs.
Clause = List[Tuple[Term, Term]]


def domain_of(universe: Iterable[Constant], *objects) -> Tuple[Constant, ...]:
    """Universe extended with the constants of constraints and updates."""
    found: Set[Constant] = set(universe)
    pending = list(objects)
    while pending:
        obj = pending.pop()
        if isinstance(obj, Constraint):
            found |= obj.constants()
        elif isinstance(obj, UpdateAtom):
            found |= {a for a in obj.atom.args if isinstance(a, Constant)}
        elif isinstance(obj, (list, tuple, set, frozenset)):
            pending.extend(obj)
    return tuple(sorted(found, key=lambda c: c.name))


def value_of(term: Term, assignment: Assignment) -> Optional[Constant]:
    if isinstance(term, Constant):
        return term
    return assignment.get(term)


def satisfies(c: Constraint, assignment: Assignment) -> bool:
    """Evaluate c under an assignment covering all of its variables."""
    if c.is_false:
        return False
    for left, right in c.eqs:
        if value_of(left, assignment) != value_of(right, assignment):
            return False
    for left, right in c.neqs:
        if value_of(left, assignment) == value_of(right, assignment):
            return False
    return True


def updates_consistent(updates: Iterable[UpdateAtom]) -> bool:
    """Ground update set demands no +p(t) together with -p(t)."""
    inserted = {u.atom for u in updates if u.sign is UpdateSign.INSERT}
    deleted = {u.atom for u in updates if u.sign is UpdateSign.DELETE}
    return not (inserted & deleted)


class _UnionFind:
    def __init__(self) -> None:
        self.parent: Dict[Term, Term] = {}

    def find(self, term: Term) -> Term:
        self.parent.setdefault(term, term)
        root = term
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[term] != root:
            self.parent[term], term = root, self.parent[term]
        return root

    def union(self, left: Term, right: Term) -> None:
        a, b = self.find(left), self.find(right)
        if a != b:
            self.parent[a] = b

    def classes(self) -> Dict[Term, List[Term]]:
        grouped: Dict[Term, List[Term]] = {}
        for term in list(self.parent):
            grouped.setdefault(self.find(term), []).append(term)
        return grouped


def normalize(
    c: Constraint,
    universe: Optional[Iterable[Constant]] = None,
    prefer: Iterable[Variable] = (),
) -> Constraint:
    """
    Normal form: equalities as an idempotent substitution onto one
    representative per class, inequalities rewritten on representatives.

    Representatives are the class constant, else the least preferred
    variable, else the least variable. With a universe, a variable that
    differs from every constant of the domain makes the result false.
    """
    if c.is_false:
        return FALSE
    prefer = set(prefer)
    uf = _UnionFind()
    for left, right in c.eqs:
        uf.union(left, right)

    rep: Dict[Term, Term] = {}
    eqs = set()
    for members in uf.classes().values():
        constants = {m for m in members if isinstance(m, Constant)}
        if len(constants) > 1:
            return FALSE
        variables = sorted((m for m in members if isinstance(m, Variable)), key=lambda v: v.name)
        if constants:
            chosen: Term = next(iter(constants))
        else:
            preferred = [v for v in variables if v in prefer]
            chosen = (preferred or variables)[0]
        for member in members:
            rep[member] = chosen
        eqs |= {(v, chosen) for v in variables if v != chosen}

    neqs = set()
    excluded: Dict[Variable, Set[Constant]] = {}
    for left, right in c.neqs:
        left, right = rep.get(left, left), rep.get(right, right)
        if left == right:
            return FALSE
        if isinstance(left, Constant) and isinstance(right, Constant):
            continue
        pair = (left, right) if term_key(left) <= term_key(right) else (right, left)
        neqs.add(pair)
        if isinstance(pair[0], Constant) and isinstance(pair[1], Variable):
            excluded.setdefault(pair[1], set()).add(pair[0])

    if universe is not None:
        dom = set(domain_of(universe, c))
        if dom and any(dom <= consts for consts in excluded.values()):
            return FALSE
    return Constraint(frozenset(eqs), frozenset(neqs), normalized=True)


def _resolve(term: Term, n: Constraint) -> Term:
    for left, right in n.eqs:
        if left == term:
            return right
    return term


def _clash_clauses(updates: Iterable[UpdateAtom]) -> Optional[List[Clause]]:
    """Clauses keeping each +p/-p pair apart; None when a pair is identical."""
    clauses: List[Clause] = []
    for ins, dele in iter_update_conflicts(updates):
        clause: Clause = []
        differs = False
        for s, t in zip(ins.atom.args, dele.atom.args):
            if s == t:
                continue
            if isinstance(s, Constant) and isinstance(t, Constant):
                differs = True
                break
            clause.append((s, t))
        if differs:
            continue
        if not clause:
            return None
        clauses.append(clause)
    return clauses


def _search(
    n: Constraint,
    clauses: List[Clause],
    dom: Sequence[Constant],
    extra: Iterable[Variable] = (),
) -> Iterator[Assignment]:
    """Backtracking enumeration of assignments to the free representatives."""
    bound = {left for left, _ in n.eqs}
    names: Set[Variable] = set()
    for left, right in n.neqs:
        names |= {t for t in (left, right) if isinstance(t, Variable)}
    for clause in clauses:
        for s, t in clause:
            names |= {x for x in (s, t) if isinstance(x, Variable)}
    for var in extra:
        resolved = _resolve(var, n)
        if isinstance(resolved, Variable):
            names.add(resolved)
    order = sorted(names - bound, key=lambda v: v.name)

    neqs = list(n.neqs)

    def consistent(assignment: Assignment) -> bool:
        for left, right in neqs:
            a, b = value_of(left, assignment), value_of(right, assignment)
            if a is not None and b is not None and a == b:
                return False
        for clause in clauses:
            open_pair = False
            for s, t in clause:
                a, b = value_of(s, assignment), value_of(t, assignment)
                if a is None or b is None or a != b:
                    open_pair = True
                    break
            if not open_pair:
                return False
        return True

    def walk(index: int, assignment: Assignment) -> Iterator[Assignment]:
        if index == len(order):
            yield dict(assignment)
            return
        var = order[index]
        for value in dom:
            assignment[var] = value
            if consistent(assignment):
                yield from walk(index + 1, assignment)
            del assignment[var]

    if not order:
        if consistent({}):
            yield {}
        return
    yield from walk(0, {})


def solvable(
    c: Constraint,
    updates: Iterable[UpdateAtom] = (),
    universe: Iterable[Constant] = (),
) -> bool:
    """Some assignment satisfies c and grounds updates consistently."""
    updates = tuple(updates)
    dom = domain_of(universe, c, updates)
    n = normalize(c, dom)
    if n.is_false:
        return False
    clauses = _clash_clauses(apply_bindings(updates, n))
    if clauses is None:
        return False
    if not dom and (n.variables() or any(u.variables() for u in updates)):
        return False
    return next(_search(n, clauses, dom), None) is not None


def assignments(
    c: Constraint,
    variables: Sequence[Variable],
    universe: Iterable[Constant] = (),
    updates: Iterable[UpdateAtom] = (),
) -> Iterator[Tuple[Constant, ...]]:
    """Distinct value tuples for `variables` over the solutions of c and updates."""
    updates = tuple(updates)
    dom = domain_of(universe, c, updates)
    n = normalize(c, dom)
    if n.is_false:
        return
    clauses = _clash_clauses(apply_bindings(updates, n))
    if clauses is None:
        return
    seen = set()
    for assignment in _search(n, clauses, dom, variables):
        row = []
        for var in variables:
            resolved = _resolve(var, n)
            row.append(resolved if isinstance(resolved, Constant) else assignment[resolved])
        row_t = tuple(row)
        if row_t not in seen:
            seen.add(row_t)
            yield row_t


def entails(c1: Constraint, c2: Constraint, universe: Iterable[Constant] = ()) -> bool:
    """Every assignment satisfying c1 satisfies c2."""
    dom = domain_of(universe, c1, c2)
    if not solvable(c1, (), dom):
        return True
    n2 = normalize(c2, dom)
    if n2.is_false:
        return False
    for op, left, right in n2.atoms():
        counter = Constraint.neq(left, right) if op == "=" else Constraint.eq(left, right)
        if solvable(c1.conjoin(counter), (), dom):
            return False
    return True


def entails_any(c: Constraint, disjuncts: Iterable[Constraint], universe: Iterable[Constant] = ()) -> bool:
    """c entails the disjunction of `disjuncts`."""
    disjuncts = [d for d in disjuncts if not d.is_false]
    dom = domain_of(universe, c, *disjuncts)
    if not disjuncts:
        return not solvable(c, (), dom)
    names = set(c.variables())
    for d in disjuncts:
        names |= d.variables()
    order = sorted(names, key=lambda v: v.name)
    for row in assignments(c, order, dom):
        assignment = dict(zip(order, row))
        if not any(satisfies(d, assignment) for d in disjuncts):
            return False
    return True


def equivalent(c1: Constraint, c2: Constraint, universe: Iterable[Constant] = ()) -> bool:
    return entails(c1, c2, universe) and entails(c2, c1, universe)


def equivalent_disjunctions(
    d1: Iterable[Constraint],
    d2: Iterable[Constraint],
    universe: Iterable[Constant] = (),
) -> bool:
    d1, d2 = list(d1), list(d2)
    return all(entails_any(c, d2, universe) for c in d1) and all(entails_any(c, d1, universe) for c in d2)


def keep_weakest(disjuncts: Iterable[Constraint], universe: Iterable[Constant] = ()) -> List[Constraint]:
    """Drop disjuncts that entail another one; equivalent copies keep one."""
    unique = sorted(set(d for d in disjuncts if not d.is_false), key=lambda d: (len(d.atoms()), d.sort_key()))
    kept: List[Constraint] = []
    for d in unique:
        if any(entails(d, e, universe) for e in kept):
            continue
        kept = [e for e in kept if not entails(e, d, universe)] + [d]
    return sorted(kept, key=Constraint.sort_key)


def _drop_covered(disjuncts: List[Constraint], universe: Iterable[Constant]) -> List[Constraint]:
    """Greedily remove disjuncts entailed by the disjunction of the rest."""
    remaining = list(disjuncts)
    index = 0
    while index < len(remaining):
        others = remaining[:index] + remaining[index + 1:]
        if others and entails_any(remaining[index], others, universe):
            remaining.pop(index)
        else:
            index += 1
    return remaining


def conjoin_all(
    clauses: Sequence[Sequence[Constraint]],
    universe: Iterable[Constant] = (),
    base: Constraint = TRUE,
    updates: Iterable[UpdateAtom] = (),
) -> DisjunctiveConstraint:
    """DNF of base AND each clause's disjunction, pruned as it grows."""
    updates = tuple(updates)
    dom = domain_of(universe, base, updates)
    current = [normalize(base, dom)] if solvable(base, updates, dom) else []
    for clause in clauses:
        grown = []
        for d in current:
            for option in clause:
                candidate = normalize(d.conjoin(option), dom)
                if not candidate.is_false and solvable(candidate, updates, dom):
                    grown.append(candidate)
        current = keep_weakest(grown, dom)
        if not current:
            return DisjunctiveConstraint(())
    return DisjunctiveConstraint(tuple(current))


def neg(c: Constraint, universe: Iterable[Constant] = ()) -> DisjunctiveConstraint:
    """Negation of a conjunction as a non-redundant disjunction of atoms."""
    dom = domain_of(universe, c)
    n = normalize(c, dom)
    if n.is_false or not solvable(n, (), dom):
        return DisjunctiveConstraint((TRUE,))
    if n.is_true:
        return DisjunctiveConstraint(())
    candidates = set()
    for op, left, right in n.atoms():
        flipped = Constraint.neq(left, right) if op == "=" else Constraint.eq(left, right)
        flipped = normalize(flipped, dom)
        if not flipped.is_false and solvable(flipped, (), dom):
            candidates.add(flipped)
    ordered = sorted(candidates, key=Constraint.sort_key)
    return DisjunctiveConstraint(tuple(_drop_covered(ordered, dom)))


def sol(updates: Iterable[UpdateAtom], universe: Iterable[Constant] = ()) -> DisjunctiveConstraint:
    """Weakest constraints under which the update set is consistent."""
    updates = tuple(updates)
    dom = domain_of(universe, *updates)
    clauses = _clash_clauses(updates)
    if clauses is None:
        return DisjunctiveConstraint(())
    if dom:
        clauses = [clause for clause in clauses if solvable(Constraint.build(eqs=clause), (), dom)]
    if not clauses:
        return DisjunctiveConstraint((TRUE,))
    options = [[Constraint.neq(s, t) for s, t in clause] for clause in clauses]
    found = conjoin_all(options, dom)
    return DisjunctiveConstraint(tuple(keep_weakest((_minimal(d, clauses, dom) for d in found), dom)))


def _keeps_apart(c: Constraint, clauses: Sequence[Clause], dom: Sequence[Constant]) -> bool:
    """c rules out every assignment that makes some clause's pairs all equal."""
    return not any(solvable(c.conjoin(Constraint.build(eqs=clause)), (), dom) for clause in clauses)


def _minimal(c: Constraint, clauses: Sequence[Clause], dom: Sequence[Constant]) -> Constraint:
    """Drop conjuncts of c that consistency does not need."""
    atoms = c.atoms()
    index = 0
    while index < len(atoms):
        rest = atoms[:index] + atoms[index + 1:]
        reduced = Constraint.build(
            eqs=[(l, r) for op, l, r in rest if op == "="],
            neqs=[(l, r) for op, l, r in rest if op == "!="],
        )
        if _keeps_apart(reduced, clauses, dom):
            atoms = rest
        else:
            index += 1
    if len(atoms) == len(c.atoms()):
        return c
    return normalize(
        Constraint.build(
            eqs=[(l, r) for op, l, r in atoms if op == "="],
            neqs=[(l, r) for op, l, r in atoms if op == "!="],
        ),
        dom,
    )


def project(
    c: Constraint,
    keep: Iterable[Variable],
    universe: Iterable[Constant] = (),
) -> DisjunctiveConstraint:
    """Existentially eliminate every variable outside `keep`."""
    keep = frozenset(keep)
    dom = domain_of(universe, c)
    n = normalize(c, dom, prefer=keep)
    if n.is_false or not solvable(n, (), dom):
        return DisjunctiveConstraint(())

    kept_eqs = frozenset((v, t) for v, t in n.eqs if v in keep)
    kept_neqs = set()
    eliminated_neqs = []
    for pair in n.neqs:
        if all(isinstance(t, Constant) or t in keep for t in pair):
            kept_neqs.add(pair)
        else:
            eliminated_neqs.append(pair)
    base = Constraint(kept_eqs, frozenset(kept_neqs))
    if not eliminated_neqs:
        return DisjunctiveConstraint((normalize(base, dom),))

    hidden = sorted(
        {t for pair in eliminated_neqs for t in pair if isinstance(t, Variable) and t not in keep},
        key=lambda v: v.name,
    )
    options = []
    for values in itertools.product(dom, repeat=len(hidden)):
        mapping = dict(zip(hidden, values))
        instance = Constraint.build(
            neqs=[(mapping.get(l, l), mapping.get(r, r)) for l, r in eliminated_neqs]
        )
        candidate = normalize(base.conjoin(instance), dom)
        if not candidate.is_false and solvable(candidate, (), dom):
            options.append(candidate)
    result = keep_weakest(options, dom)
    if len(result) > 1 and entails_any(TRUE, result, dom):
        result = [TRUE]
    return DisjunctiveConstraint(tuple(result))
