"""
Prenex disjunctive normal form for formulas over constraints and literals.
"""
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple

from udatalog.models.constraint import TRUE, Constraint
from udatalog.models.formula import (
    FALSE_FORMULA,
    TRUE_FORMULA,
    And,
    ConstraintFormula,
    Disjunct,
    Formula,
    LiteralFormula,
    Not,
    Or,
    Quantified,
    QuantifiedFormula,
    Quantifier,
)
from udatalog.models.substitution import FreshNames, substitute
from udatalog.models.terms import Constant, Literal, Variable
from udatalog.services import constraint_engine as engine


def _negate_constraint(c: Constraint) -> Formula:
    if c.is_false:
        return ConstraintFormula(TRUE)
    if c.is_true:
        return Or(())
    parts = []
    for op, left, right in c.atoms():
        flipped = Constraint.neq(left, right) if op == "=" else Constraint.eq(left, right)
        parts.append(ConstraintFormula(flipped))
    return Or(tuple(parts))


def to_nnf(formula: Formula, negated: bool = False) -> Formula:
    """Push negation down to literals and constraint atoms."""
    if isinstance(formula, ConstraintFormula):
        return _negate_constraint(formula.constraint) if negated else formula
    if isinstance(formula, LiteralFormula):
        return LiteralFormula(formula.literal.negate()) if negated else formula
    if isinstance(formula, Not):
        return to_nnf(formula.part, not negated)
    if isinstance(formula, And):
        parts = tuple(to_nnf(p, negated) for p in formula.parts)
        return Or(parts) if negated else And(parts)
    if isinstance(formula, Or):
        parts = tuple(to_nnf(p, negated) for p in formula.parts)
        return And(parts) if negated else Or(parts)
    if isinstance(formula, Quantified):
        quantifier = formula.quantifier.dual if negated else formula.quantifier
        return Quantified(quantifier, formula.variables, to_nnf(formula.body, negated))
    raise TypeError(f"not a formula: {formula!r}")


def _free(formula: Formula) -> Set[Variable]:
    if isinstance(formula, ConstraintFormula):
        return set(formula.constraint.variables())
    if isinstance(formula, LiteralFormula):
        return set(formula.literal.variables())
    if isinstance(formula, Not):
        return _free(formula.part)
    if isinstance(formula, (And, Or)):
        found: Set[Variable] = set()
        for part in formula.parts:
            found |= _free(part)
        return found
    return _free(formula.body) - set(formula.variables)


def _rename(formula: Formula, mapping: Dict[Variable, Variable]) -> Formula:
    if isinstance(formula, ConstraintFormula):
        return ConstraintFormula(substitute(formula.constraint, mapping))
    if isinstance(formula, LiteralFormula):
        return LiteralFormula(substitute(formula.literal, mapping))
    if isinstance(formula, Not):
        return Not(_rename(formula.part, mapping))
    if isinstance(formula, And):
        return And(tuple(_rename(p, mapping) for p in formula.parts))
    if isinstance(formula, Or):
        return Or(tuple(_rename(p, mapping) for p in formula.parts))
    inner = {k: v for k, v in mapping.items() if k not in formula.variables}
    return Quantified(formula.quantifier, formula.variables, _rename(formula.body, inner))


def _pull(
    formula: Formula,
    used: Set[str],
    reservoir: FreshNames,
) -> Tuple[List[Tuple[Quantifier, Variable]], Formula]:
    """Split an NNF formula into a quantifier prefix and a quantifier-free matrix."""
    if isinstance(formula, (ConstraintFormula, LiteralFormula)):
        return [], formula
    if isinstance(formula, (And, Or)):
        prefix: List[Tuple[Quantifier, Variable]] = []
        parts = []
        for part in formula.parts:
            sub_prefix, sub_matrix = _pull(part, used, reservoir)
            prefix.extend(sub_prefix)
            parts.append(sub_matrix)
        return prefix, type(formula)(tuple(parts))
    if isinstance(formula, Quantified):
        mapping = {}
        chosen = []
        for var in formula.variables:
            if var.name in used:
                fresh = reservoir.variable()
                mapping[var] = fresh
                var = fresh
            used.add(var.name)
            chosen.append(var)
        body = _rename(formula.body, mapping) if mapping else formula.body
        sub_prefix, matrix = _pull(body, used, reservoir)
        return [(formula.quantifier, v) for v in chosen] + sub_prefix, matrix
    raise TypeError(f"formula not in negation normal form: {formula!r}")


def _dnf(formula: Formula) -> List[Disjunct]:
    if isinstance(formula, ConstraintFormula):
        return [] if formula.constraint.is_false else [Disjunct(formula.constraint, ())]
    if isinstance(formula, LiteralFormula):
        return [Disjunct(TRUE, (formula.literal,))]
    if isinstance(formula, Or):
        return [d for part in formula.parts for d in _dnf(part)]
    if isinstance(formula, And):
        result = [Disjunct()]
        for part in formula.parts:
            options = _dnf(part)
            result = [
                Disjunct(a.constraint.conjoin(b.constraint), a.literals + b.literals)
                for a in result
                for b in options
            ]
            result = [d for d in result if not d.constraint.is_false]
        return result
    raise TypeError(f"unexpected formula in matrix: {formula!r}")


def _clean(disjunct: Disjunct, universe: Optional[Sequence[Constant]]) -> Optional[Disjunct]:
    literals = tuple(sorted(set(disjunct.literals), key=Literal.sort_key))
    # p and not p with identical arguments
    if any(l.negate() in literals for l in literals):
        return None
    constraint = disjunct.constraint
    if universe is not None:
        constraint = engine.normalize(constraint, universe)
        if constraint.is_false or not engine.solvable(constraint, (), universe):
            return None
    return Disjunct(constraint, literals)


def _subsumes(general: Disjunct, specific: Disjunct, universe: Optional[Sequence[Constant]]) -> bool:
    if not set(general.literals) <= set(specific.literals):
        return False
    if universe is None:
        return general.constraint.eqs <= specific.constraint.eqs and general.constraint.neqs <= specific.constraint.neqs
    return engine.entails(specific.constraint, general.constraint, universe)


def simplify(
    quantifiers: Iterable[Tuple[Quantifier, Variable]],
    matrix: Iterable[Disjunct],
    universe: Optional[Iterable[Constant]] = None,
) -> QuantifiedFormula:
    """Drop contradictory and subsumed disjuncts and vacuous quantifiers."""
    matrix = list(matrix)
    dom = None if universe is None else engine.domain_of(universe, *(d.constraint for d in matrix))
    cleaned = []
    for disjunct in matrix:
        result = _clean(disjunct, dom)
        if result is not None and result not in cleaned:
            cleaned.append(result)
    if any(d.is_true for d in cleaned):
        return TRUE_FORMULA
    cleaned.sort(key=Disjunct.sort_key)
    kept: List[Disjunct] = []
    for disjunct in cleaned:
        if any(_subsumes(other, disjunct, dom) for other in kept):
            continue
        kept = [other for other in kept if not _subsumes(disjunct, other, dom)] + [disjunct]
    if not kept:
        return FALSE_FORMULA
    used = set()
    for disjunct in kept:
        used |= disjunct.variables()
    prefix = tuple((q, v) for q, v in quantifiers if v in used)
    return QuantifiedFormula(prefix, tuple(sorted(kept, key=Disjunct.sort_key)))


def to_prenex_dnf(
    formula: Formula,
    universe: Optional[Iterable[Constant]] = None,
    reservoir: Optional[FreshNames] = None,
) -> QuantifiedFormula:
    """
    Equivalent prenex formula with a DNF matrix.

    Quantifiers keep their left-to-right order of occurrence. Bound
    variables are renamed when they clash with free or earlier bound names.
    Passing a universe enables constraint normalization while simplifying.
    """
    nnf = to_nnf(formula)
    reservoir = reservoir or FreshNames(prefix="_Q")
    used = {v.name for v in _free(nnf)}
    prefix, matrix = _pull(nnf, used, reservoir)
    return simplify(prefix, _dnf(matrix), universe)


def as_formula(quantified: QuantifiedFormula) -> Formula:
    """Formula tree of a prenex formula, for re-negation."""
    matrix = Or(
        tuple(
            And((ConstraintFormula(d.constraint),) + tuple(LiteralFormula(l) for l in d.literals))
            for d in quantified.matrix
        )
    )
    formula: Formula = matrix
    for quantifier, var in reversed(quantified.quantifiers):
        formula = Quantified(quantifier, (var,), formula)
    return formula


def evaluate_ground(
    quantified: QuantifiedFormula,
    binding: Dict[Variable, Constant],
    literal_holds: Callable[[Literal], bool],
    universe: Sequence[Constant],
) -> bool:
    """
    Truth of a prenex formula once its free variables are bound.

    Quantified variables range over `universe`; `literal_holds` decides a
    literal whose arguments are all constants.
    """
    quantifiers = list(quantified.quantifiers)

    def matrix_holds(assignment: Dict[Variable, Constant]) -> bool:
        for disjunct in quantified.matrix:
            if not engine.satisfies(disjunct.constraint, assignment):
                continue
            if all(literal_holds(substitute(l, assignment)) for l in disjunct.literals):
                return True
        return False

    def walk(index: int, assignment: Dict[Variable, Constant]) -> bool:
        if index == len(quantifiers):
            return matrix_holds(assignment)
        quantifier, var = quantifiers[index]
        results = (walk(index + 1, {**assignment, var: value}) for value in universe)
        return all(results) if quantifier is Quantifier.FORALL else any(results)

    return walk(0, dict(binding))

