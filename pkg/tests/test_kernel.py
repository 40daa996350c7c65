"""
Test terms, constraints, substitution and printing.
"""
from udatalog.models.constraint import FALSE, TRUE, Constraint, DisjunctiveConstraint
from udatalog.models.rules import Rule
from udatalog.models.substitution import FreshNames, all_variables, rename_apart, substitute
from udatalog.models.terms import Atom, Constant, Literal, UpdateAtom, UpdateSign, Variable, iter_update_conflicts
from udatalog.services.parser_service import parse_program
from udatalog.services.printer import to_text

X, Y, Z = Variable("X"), Variable("Y"), Variable("Z")
a, b = Constant("a"), Constant("b")


def test_constraint_build_orients_equalities():
    """Test constant-on-the-left equalities are flipped."""
    c = Constraint.build(eqs=[(a, X)])
    assert c.eqs == frozenset({(X, a)})
    assert str(c) == "X=a"


def test_constraint_build_folds_constants():
    """Test constant-only atoms fold to true or false."""
    assert Constraint.build(eqs=[(a, b)]) is FALSE
    assert Constraint.build(eqs=[(a, a)]).is_true
    assert Constraint.build(neqs=[(a, b)]).is_true
    assert Constraint.build(neqs=[(X, X)]) is FALSE


def test_constraint_conjoin_with_false():
    """Test conjunction with false is false."""
    assert Constraint.eq(X, a).conjoin(FALSE).is_false
    assert TRUE.conjoin(Constraint.neq(X, b)) == Constraint.neq(X, b)


def test_constraint_text():
    """Test canonical constraint text."""
    c = Constraint.build(eqs=[(Y, b)], neqs=[(X, a)])
    assert str(c) == "Y=b, a!=X"
    assert str(TRUE) == "true"
    assert str(FALSE) == "false"


def test_disjunctive_constraint_truth():
    """Test empty disjunction is false and a true disjunct makes it true."""
    assert DisjunctiveConstraint(()).is_false
    assert DisjunctiveConstraint((TRUE,)).is_true
    assert str(DisjunctiveConstraint(())) == "false"


def test_update_conflicts_pair_same_signature():
    """Test conflict pairs only match predicates with equal arity."""
    updates = [
        UpdateAtom(UpdateSign.INSERT, Atom("p", (a,))),
        UpdateAtom(UpdateSign.DELETE, Atom("p", (X,))),
        UpdateAtom(UpdateSign.DELETE, Atom("p", (X, Y))),
    ]
    pairs = list(iter_update_conflicts(updates))
    assert len(pairs) == 1
    assert pairs[0][1].atom.args == (X,)


def test_fresh_names_skip_reserved():
    """Test fresh variables never reuse reserved names."""
    names = FreshNames(prefix="_V", start=0, reserved={"_V0", "_V2"})
    assert [v.name for v in names.variables(3)] == ["_V1", "_V3", "_V4"]


def test_substitute_rule():
    """Test substitution reaches head, constraint, updates and body."""
    rule = Rule(
        Atom("p", (X,)),
        Constraint.neq(X, a),
        (UpdateAtom(UpdateSign.INSERT, Atom("q", (Y,))),),
        (Literal(Atom("r", (X, Y))),),
    )
    result = substitute(rule, {X: b, Y: Z})
    assert result.head == Atom("p", (b,))
    assert result.constraint.is_true
    assert result.updates[0].atom == Atom("q", (Z,))
    assert result.body[0].atom == Atom("r", (b, Z))


def test_rename_apart_uses_fresh_variables(reservoir):
    """Test renaming apart leaves no original variable behind."""
    rule = parse_program("p(X) :- q(X, Y).").idb[0]
    renamed = rename_apart(rule, reservoir)
    assert not all_variables(renamed) & all_variables(rule)
    assert all(v.name.startswith("_R") for v in all_variables(renamed))


def test_printed_rule_parses_back():
    """Test printed rules reparse to equal rules."""
    db = parse_program("rem_man(X, Y) :- -dep_A(Y), emp_man(X, Y).")
    text = to_text(db.idb[0])
    assert text == "rem_man(X,Y) :- -dep_A(Y), emp_man(X,Y)."
    assert parse_program(text).idb == db.idb


def test_database_universe_collects_constants():
    """Test universe is declared domain plus fact and rule constants."""
    db = parse_program("#domain d.\nemp(a, b).\np(X) :- emp(X, Y), X != c.")
    assert {c.name for c in db.universe} == {"a", "b", "c", "d"}
    assert db.intensional == frozenset({"p"})
    assert "emp" in db.extensional
