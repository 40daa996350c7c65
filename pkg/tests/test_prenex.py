"""
Test prenex disjunctive normal form and ground evaluation of tails.
"""
import itertools

from hypothesis import given, settings
from hypothesis import strategies as st

from udatalog.models.constraint import Constraint
from udatalog.models.formula import (
    TRUE_FORMULA,
    And,
    ConstraintFormula,
    Disjunct,
    LiteralFormula,
    Not,
    Or,
    Quantifier,
    exists,
    forall,
)
from udatalog.models.terms import Atom, Constant, Literal, Variable
from udatalog.services.constraint_engine import satisfies
from udatalog.services.prenex import as_formula, evaluate_ground, simplify, to_prenex_dnf

X, Y, Z = Variable("X"), Variable("Y"), Variable("Z")
a, b = Constant("a"), Constant("b")
UNIVERSE = (a, b)


def e(left, right, positive=True):
    return LiteralFormula(Literal(Atom("e", (left, right)), positive))


def holds(formula, assignment, relation):
    """Direct recursive truth of a formula tree."""
    if isinstance(formula, ConstraintFormula):
        return satisfies(formula.constraint, assignment)
    if isinstance(formula, LiteralFormula):
        atom = Atom(formula.literal.predicate, tuple(assignment.get(t, t) for t in formula.literal.args))
        return (atom in relation) == formula.literal.positive
    if isinstance(formula, Not):
        return not holds(formula.part, assignment, relation)
    if isinstance(formula, And):
        return all(holds(p, assignment, relation) for p in formula.parts)
    if isinstance(formula, Or):
        return any(holds(p, assignment, relation) for p in formula.parts)
    values = itertools.product(UNIVERSE, repeat=len(formula.variables))
    results = (holds(formula.body, {**assignment, **dict(zip(formula.variables, v))}, relation) for v in values)
    return all(results) if formula.quantifier is Quantifier.FORALL else any(results)


FORMULAS = [
    Not(exists([Z], And((ConstraintFormula(Constraint.eq(X, Z)), e(X, Z))))),
    forall([Y], Or((e(X, Y), exists([Z], And((e(Y, Z), Not(e(Z, X)))))))),
    And((exists([Z], e(X, Z)), Not(exists([Z], And((e(Z, X), ConstraintFormula(Constraint.neq(Z, a)))))))),
    Not(And((e(X, X), Not(forall([Y], Or((e(X, Y), ConstraintFormula(Constraint.eq(Y, X))))))))),
]

relations = st.frozensets(
    st.sampled_from([Atom("e", pair) for pair in itertools.product(UNIVERSE, repeat=2)])
)


def test_negated_existential_becomes_universal():
    """Test not exists Z (X=Z, e(X,Z)) is forall Z (X!=Z ; not e(X,Z))."""
    result = to_prenex_dnf(FORMULAS[0], UNIVERSE)
    assert result.quantifiers == ((Quantifier.FORALL, Z),)
    assert len(result.matrix) == 2
    assert {len(d.literals) for d in result.matrix} == {0, 1}
    assert result.free_variables() == frozenset({X})


def test_bound_variable_clashing_with_free_is_renamed():
    """Test a quantified variable sharing a free variable's name is renamed."""
    result = to_prenex_dnf(And((exists([Z], e(X, Z)), e(Z, X))))
    bound = [var for _, var in result.quantifiers]
    assert len(bound) == 1
    assert bound[0] != Z
    assert Z in result.free_variables()


def test_simplify_drops_complementary_literals():
    """Test a disjunct holding p and not p disappears."""
    literal = Literal(Atom("e", (X, Y)))
    result = simplify((), [Disjunct(literals=(literal, literal.negate()))])
    assert result.is_false


def test_simplify_true_disjunct_wins():
    """Test a true disjunct makes the whole matrix true."""
    literal = Literal(Atom("e", (X, Y)))
    assert simplify(((Quantifier.FORALL, Y),), [Disjunct(literals=(literal,)), Disjunct()]) == TRUE_FORMULA


def test_simplify_removes_subsumed_disjunct():
    """Test a disjunct implied by a weaker one is dropped."""
    literal = Literal(Atom("e", (X, Y)))
    weak = Disjunct(literals=(literal,))
    strong = Disjunct(Constraint.neq(X, a), (literal,))
    result = simplify((), [strong, weak], UNIVERSE)
    assert result.matrix == (weak,)


@settings(max_examples=40, deadline=None)
@given(relations)
def test_prenex_form_is_equivalent(relation):
    """Test prenex DNF evaluates like the original formula."""
    for formula in FORMULAS:
        prenex = to_prenex_dnf(formula, UNIVERSE)
        for value in UNIVERSE:
            expected = holds(formula, {X: value}, relation)
            actual = evaluate_ground(prenex, {X: value}, lambda lit: (lit.atom in relation) == lit.positive, UNIVERSE)
            assert actual == expected


@settings(max_examples=40, deadline=None)
@given(relations)
def test_negating_prenex_formula_complements_it(relation):
    """Test the prenex form of a negated tail is its complement."""
    for formula in FORMULAS:
        prenex = to_prenex_dnf(formula, UNIVERSE)
        negated = to_prenex_dnf(Not(as_formula(prenex)), UNIVERSE)
        for value in UNIVERSE:
            literal_holds = lambda lit: (lit.atom in relation) == lit.positive  # noqa: E731
            assert evaluate_ground(negated, {X: value}, literal_holds, UNIVERSE) != evaluate_ground(
                prenex, {X: value}, literal_holds, UNIVERSE
            )
