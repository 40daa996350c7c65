"""
Test the stratified fixpoint and goal answers.
"""
import itertools

import pytest

from udatalog.core.config import Settings
from udatalog.core.exceptions import FixpointLimitError
from udatalog.models.constraint import TRUE, Constraint
from udatalog.models.rules import ConstrainedLiteral
from udatalog.models.terms import Atom, Literal, UpdateAtom, UpdateSign, Variable
from udatalog.services.interpretation import Interpretation, ground_extension
from udatalog.services.marking_service import MarkingService
from udatalog.services.parser_service import parse_goal, parse_program
from udatalog.services.printer import to_text

from tests.conftest import atom, constants

WIDE = constants("a", "b", "c", "d")


def insert(pred, *names):
    return UpdateAtom(UpdateSign.INSERT, atom(pred, *names))


def delete(pred, *names):
    return UpdateAtom(UpdateSign.DELETE, atom(pred, *names))


def heads(*rows):
    return frozenset((constants(*row), frozenset()) for row in rows)


def all_but(arity, *rows):
    """Every ground tuple of the wide universe except `rows`."""
    excluded = {constants(*row) for row in rows}
    return frozenset(
        (values, frozenset()) for values in itertools.product(WIDE, repeat=arity) if values not in excluded
    )


@pytest.fixture
def wide_fixpoint(wide_dept_db, config):
    return MarkingService(wide_dept_db, config).stratified_fixpoint()


def test_department_fixpoint_extensions(wide_fixpoint):
    """Test the ground meaning of every completed predicate."""
    ext = ground_extension(wide_fixpoint.final, WIDE)
    assert ext[("emp_man", True)] == heads(("b", "b"), ("b", "c"))
    assert ext[("emp_man", False)] == all_but(2, ("b", "b"), ("b", "c"))
    assert ext[("dep_A", True)] == heads(("b",), ("c",))
    assert ext[("dep_A", False)] == heads(("a",), ("d",))
    assert ext[("dep_B", False)] == heads(("a",), ("c",), ("d",))
    assert ext[("rem_man", True)] == frozenset(
        {
            (constants("b", "b"), frozenset({delete("dep_A", "b")})),
            (constants("b", "c"), frozenset({delete("dep_A", "c")})),
        }
    )
    assert ext[("rem_man", False)] == all_but(2, ("b", "b"), ("b", "c"))
    assert ext[("ins_man", True)] == frozenset(
        {(constants("b"), frozenset({insert("dep_A", "b"), delete("dep_A", "c")}))}
    )
    assert ext[("ins_man", False)] == heads(("a",), ("c",), ("d",))
    assert ext[("change_man", True)] == frozenset(
        {
            (constants("b"), frozenset({delete("emp_man", "b", "b")})),
            (constants("b"), frozenset({delete("emp_man", "b", "c")})),
        }
    )
    assert ext[("change_man", False)] == heads(("a",), ("c",), ("d",))


def test_department_fixpoint_literal_counts(wide_fixpoint):
    """Test the fixpoint keeps one literal per non-redundant derivation."""
    counts = {
        "emp_man": (2, 2),
        "dep_A": (2, 1),
        "dep_B": (1, 1),
        "rem_man": (2, 2),
        "ins_man": (1, 1),
        "change_man": (2, 1),
    }
    for predicate, (positive, negative) in counts.items():
        assert len(wide_fixpoint.literals_for(predicate, True)) == positive, predicate
        assert len(wide_fixpoint.literals_for(predicate, False)) == negative, predicate


def test_negative_ins_man_literal(wide_fixpoint):
    """Test the complement of ins_man is X1!=b."""
    (literal,) = wide_fixpoint.literals_for("ins_man", False)
    assert to_text(literal) == "not ins_man(X1) <- b!=X1"


def test_stratum_snapshots_grow(wide_fixpoint):
    """Test each stratum snapshot extends the previous one."""
    assert len(wide_fixpoint.strata) == 3
    assert len(wide_fixpoint.iterations) == 3
    first = {l.predicate for l in wide_fixpoint.strata[0]}
    assert "rem_man" in first and "ins_man" not in first
    assert set(wide_fixpoint.strata[1]) >= set(wide_fixpoint.strata[0])
    assert wide_fixpoint.final == wide_fixpoint.strata[-1]


def test_ins_man_answer(manager_db, config):
    """Test ?- ins_man(X) binds X to b with its two updates."""
    service = MarkingService(manager_db, config)
    solutions = service.answers(parse_goal("?- ins_man(X).", manager_db))
    assert len(solutions) == 1
    assert to_text(solutions[0].bindings) == "X=b"
    assert solutions[0].updates == (insert("dep_A", "b"), delete("dep_A", "c"))


def test_answers_with_goal_constant(manager_db, config):
    """Test a goal constant restricts the answers."""
    service = MarkingService(manager_db, config)
    solutions = service.answers(parse_goal("?- rem_man(b, Y).", manager_db))
    assert sorted(to_text(s.bindings) for s in solutions) == ["Y=b", "Y=c"]
    assert all(s.is_ground() for s in solutions)


def test_ground_negative_goal(manager_db, config):
    """Test a ground negative goal succeeds once with no bindings."""
    service = MarkingService(manager_db, config)
    fix = service.stratified_fixpoint()
    (solution,) = service.answers(parse_goal("?- not ins_man(c).", manager_db), fix)
    assert solution.bindings.is_true
    assert service.answers(parse_goal("?- not ins_man(b).", manager_db), fix) == []


def test_conjunctive_goal_with_negation(manager_db, config):
    """Test a goal mixing a positive and a negative literal."""
    solutions = MarkingService(manager_db, config).answers(parse_goal("?- dep_A(X), not dep_B(X).", manager_db))
    assert [to_text(s.bindings) for s in solutions] == ["X=c"]


def test_extended_rule_tail_is_evaluated(config):
    """Test a universally quantified tail filters rule answers."""
    db = parse_program(
        """
        node(a).
        node(b).
        e(b, a).
        e(b, b).
        p(X) :- node(X) |> forall Z (X = Z ; not e(X, Z)).
        """
    )
    solutions = MarkingService(db, config).answers(parse_goal("?- p(X).", db))
    assert [to_text(s.bindings) for s in solutions] == ["X=a"]


def test_tp_step_leaves_input_untouched(manager_db, config):
    """Test one operator step adds the non-recursive rem_man literals."""
    service = MarkingService(manager_db, config)
    start = service.initial_interpretation()
    after = service.tp_step(start, manager_db.idb[:1])
    assert len(after.literals("rem_man", True)) == 2
    assert start.literals("rem_man", True) == []


def test_fixpoint_round_limit(manager_db):
    """Test a stratum that keeps growing hits the round limit."""
    config = Settings(MAX_FIXPOINT_ROUNDS=1, EXTRA_DOMAIN=[], _env_file=None)
    with pytest.raises(FixpointLimitError):
        MarkingService(manager_db, config).stratified_fixpoint()


def test_interpretation_drops_redundant_literals():
    """Test covered literals are not stored and covering ones replace them."""
    X1 = Variable("X1")
    universe = constants("a", "b")
    specific = ConstrainedLiteral(Literal(Atom("p", (X1,))), Constraint.eq(X1, universe[0]))
    general = ConstrainedLiteral(Literal(Atom("p", (X1,))), TRUE)
    interp = Interpretation(universe, [specific])
    assert interp.add(general)
    assert interp.literals("p", True) == [general]
    assert not interp.add(specific)
    assert interp.holds(Literal(atom("p", "b")))
    assert not interp.holds(Literal(atom("p", "b"), positive=False))


def test_inconsistent_derivations_are_not_stored():
    """Test a literal whose updates always clash has an empty extension."""
    X1 = Variable("X1")
    clash = ConstrainedLiteral(
        Literal(Atom("p", (X1,))),
        TRUE,
        frozenset({UpdateAtom(UpdateSign.INSERT, Atom("e", (X1,))), UpdateAtom(UpdateSign.DELETE, Atom("e", (X1,)))}),
    )
    interp = Interpretation(constants("a"))
    assert not interp.add(clash)
    assert len(interp) == 0
