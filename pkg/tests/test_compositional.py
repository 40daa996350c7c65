"""
Test unfolding, negative unfolding and composition.
"""
import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from udatalog.core.config import Settings
from udatalog.core.exceptions import BoundExceededError, MissingDefinitionError, ProgramError
from udatalog.models.formula import TRUE_FORMULA
from udatalog.models.rules import ExtendedRule
from udatalog.models.terms import Atom, Variable
from udatalog.services.compositional_service import (
    CompositionalService,
    compiled_universe,
    compose,
    identity_program,
    render_compiled,
    t_stable_pos,
    tc_fixpoint,
)
from udatalog.services.marking_service import MarkingService
from udatalog.services.parser_service import parse_formula, parse_goal, parse_program
from udatalog.services.prenex import evaluate_ground
from udatalog.services.printer import to_text

from tests.conftest import CHANGE_RULES, DEPT_FACTS, MANAGER_RULES, TRANSITIVE_CLOSURE, constants

X = Variable("X")
X1 = Variable("X1")
ABC = constants("a", "b", "c")

NON_RECURSIVE = """
#domain a, b, c.
rem_man(X, Y) :- -dep_A(Y), emp_man(X, Y).
ins_man(X) :- +dep_A(X), rem_man(X, Y).
"""


def answer_set(db, goal_text, config):
    """Bindings and updates of a goal, as comparable text."""
    solutions = MarkingService(db, config).answers(parse_goal(goal_text, db))
    return {(to_text(s.bindings), tuple(to_text(u) for u in s.updates)) for s in solutions}


def test_identity_program_covers_extensional_predicates(dept_db):
    """Test one copy rule per extensional predicate."""
    rules = identity_program(dept_db)
    assert [to_text(r) for r in rules] == [
        "dep_A(X1) :- dep_A(X1).",
        "dep_B(X1) :- dep_B(X1).",
        "emp_man(X1,X2) :- emp_man(X1,X2).",
    ]


def test_unfolding_recursive_rule_gives_chain(manager_db, config):
    """Test unfolding the recursive rem_man rule with the base rule."""
    service = CompositionalService(manager_db, config)
    base = service.unfold(manager_db.idb[:1], service.identity)
    assert [to_text(r) for r in base] == ["rem_man(X1,X2) :- -dep_A(X2), emp_man(X1,X2)."]
    defs = dict(service.identity, rem_man=base)
    (chain,) = service.unfold(manager_db.idb[1:2], defs)
    assert to_text(chain) == "rem_man(X1,X2) :- -dep_A(X2), emp_man(X1,Y1), emp_man(Y1,X2)."


def test_unfold_without_definition_yields_nothing(manager_db, config):
    """Test a positive literal with no definition drops the rule."""
    service = CompositionalService(manager_db, config)
    assert service.unfold(manager_db.idb[2:], service.identity) == []


def test_tc_fixpoint_of_non_recursive_program(config):
    """Test unfolding r1 and r3 converges to two rules."""
    rules = tc_fixpoint(parse_program(NON_RECURSIVE), config)
    assert [to_text(r) for r in rules] == [
        "rem_man(X1,X2) :- -dep_A(X2), emp_man(X1,X2).",
        "ins_man(X1) :- +dep_A(X1), -dep_A(Y1), emp_man(X1,Y1).",
    ]


def test_tc_fixpoint_bound_on_transitive_closure():
    """Test unbounded chains hit the step bound."""
    config = Settings(TC_MAX_STEPS=5, EXTRA_DOMAIN=[], _env_file=None)
    with pytest.raises(BoundExceededError) as excinfo:
        tc_fixpoint(parse_program(TRANSITIVE_CLOSURE), config)
    assert excinfo.value.steps == 5


def test_tc_fixpoint_of_mutual_recursion_without_base_is_empty(config):
    """Test p <- q, q <- p has the empty least fixpoint."""
    assert tc_fixpoint(parse_program("p(X) :- q(X).\nq(X) :- p(X)."), config) == ()


def test_tc_fixpoint_rejects_negation(dept_db, config):
    """Test the positive unfolding fixpoint refuses negative literals."""
    with pytest.raises(ProgramError):
        tc_fixpoint(dept_db, config)


def test_t_stable_over_two_constants(dept_db):
    """Test two unfolding rounds per recursive predicate for two constants."""
    rules = t_stable_pos(dept_db, constants("a", "b"))
    by_predicate = {p: [r for r in rules if r.predicate == p] for p in ("rem_man", "ins_man", "change_man")}
    assert len(by_predicate["rem_man"]) == 2
    assert len(by_predicate["ins_man"]) == 2
    assert len(by_predicate["change_man"]) == 2


def test_t_stable_over_three_constants(dept_db):
    """Test three chain rules for rem_man and ins_man and untouched negation."""
    rules = t_stable_pos(dept_db, ABC)
    assert len([r for r in rules if r.predicate == "rem_man"]) == 3
    assert len([r for r in rules if r.predicate == "ins_man"]) == 3
    change = [r for r in rules if r.predicate == "change_man"]
    assert len(change) == 2
    assert [l.predicate for l in change[1].negative_body] == ["ins_man"]
    assert [r.predicate for r in rules][:3] == ["rem_man"] * 3


def test_t_stable_rules_mention_no_intensional_positive_literal(dept_db):
    """Test every positive body literal is extensional after unfolding."""
    for rule in t_stable_pos(dept_db, ABC):
        assert {l.predicate for l in rule.positive_body} <= dept_db.extensional


relations = st.frozensets(st.sampled_from(list(itertools.product(ABC, repeat=2))))


@settings(max_examples=30, deadline=None)
@given(relations, relations)
def test_neg_c_of_single_definition(f_pairs, q_pairs):
    """Test negating p(X) <- X=a, f(X,Y), q(X,Y) gives forall Y (X!=a ; not f ; not q)."""
    db = parse_program("#domain a, b, c.\n#extensional f/2, q/2.\np(X) :- X = a, f(X, Y), q(X, Y).")
    service = CompositionalService(db)
    negated = service.neg_c(list(db.idb), [X])
    expected = parse_formula("forall Y (X != a ; not f(X, Y) ; not q(X, Y))")
    facts = {Atom("f", pair) for pair in f_pairs} | {Atom("q", pair) for pair in q_pairs}

    def literal_holds(literal):
        return (literal.atom in facts) == literal.positive

    for value in ABC:
        assert evaluate_ground(negated, {X: value}, literal_holds, ABC) == evaluate_ground(
            expected, {X: value}, literal_holds, ABC
        )


def test_neg_c_without_definitions_is_true(manager_db, config):
    """Test a predicate with no rules has a true complement."""
    assert CompositionalService(manager_db, config).neg_c([], [X]) == TRUE_FORMULA


def test_u_neg_needs_completed_definitions(dept_db, config):
    """Test a negative literal over an undefined predicate is an error."""
    service = CompositionalService(dept_db, config)
    with pytest.raises(MissingDefinitionError) as excinfo:
        service.u_neg(dept_db.idb[4:], {})
    assert excinfo.value.predicate == "ins_man"


def test_composed_change_man_tail(dept_db):
    """Test the negated ins_man becomes forall Z (X=Z ; not emp_man(X,Z))."""
    config = Settings(EXTRA_DOMAIN=["a"], _env_file=None)
    composed = compose(dept_db, config)
    extended = [r for r in composed if isinstance(r, ExtendedRule) and r.predicate == "change_man"]
    assert len(extended) == 1
    tail = extended[0].tail
    assert tail.free_variables() == frozenset({X1})
    assert tail.predicates() == frozenset({"emp_man"})
    expected = parse_formula("forall Z (X1 = Z ; not emp_man(X1, Z))")

    pairs = list(itertools.product(ABC, repeat=2))
    rng = random.Random(0)
    samples = [frozenset(), frozenset(pairs)] + [frozenset(p for p in pairs if rng.random() < 0.4) for _ in range(20)]
    for sample in samples:
        facts = {Atom("emp_man", pair) for pair in sample}

        def literal_holds(literal):
            return (literal.atom in facts) == literal.positive

        for value in ABC:
            assert evaluate_ground(tail, {X1: value}, literal_holds, ABC) == evaluate_ground(
                expected, {X1: value}, literal_holds, ABC
            )


def test_composed_program_has_no_negative_literals(dept_db, config):
    """Test negation survives only inside tails."""
    for rule in compose(dept_db, config):
        assert not rule.negative_body
        assert {l.predicate for l in rule.positive_body} <= dept_db.extensional


def test_compose_matches_tc_fixpoint_without_negation(config):
    """Test composition of a negation-free program is its unfolding fixpoint."""
    db = parse_program(NON_RECURSIVE)
    assert set(compose(db, config)) == set(tc_fixpoint(db, config))


@pytest.mark.parametrize("goal", ["?- change_man(X).", "?- ins_man(X).", "?- rem_man(b, Y).", "?- not ins_man(c)."])
def test_precompiled_program_gives_same_answers(dept_db, config, goal):
    """Test the composed program answers goals like the source program."""
    compiled = CompositionalService(dept_db, config).precompile()
    assert answer_set(compiled, goal, config) == answer_set(dept_db, goal, config)


def test_precompiled_program_gives_same_answers_on_other_facts(config):
    """Test answer equivalence over a fact set with a longer manager chain."""
    facts = "emp_man(a, b).\nemp_man(b, c).\ndep_A(b).\ndep_A(c).\ndep_B(a).\n"
    db = parse_program(facts + MANAGER_RULES + CHANGE_RULES)
    compiled = CompositionalService(db, config).precompile()
    for goal in ("?- change_man(X).", "?- ins_man(X).", "?- rem_man(X, Y)."):
        assert answer_set(compiled, goal, config) == answer_set(db, goal, config)


def test_rendered_program_records_universe(dept_db, config):
    """Test the precompiled text carries its universe and reparses."""
    compiled = CompositionalService(dept_db, config).precompile()
    text = render_compiled(compiled, config)
    assert compiled_universe(text) == ["b", "c"]
    assert "#domain b, c." in text.splitlines()
    assert "#extensional dep_A/1, dep_B/1, emp_man/2." in text.splitlines()
    reparsed = parse_program(text)
    assert len(reparsed.idb) == len(compiled.idb)
    assert not reparsed.edb
    assert compiled_universe(DEPT_FACTS) is None


WALK_UPDATES = """
#extensional m/1.
e(a, b).
e(b, a).
e(a, c).
e(c, a).
p(X, Y) :- +m(X), e(X, Y).
p(X, Y) :- +m(X), e(X, Z), p(Z, Y).
"""


def test_precompiled_walk_keeps_updates_of_long_walks(config):
    """Test recursion collecting an update per step keeps walks longer than the universe."""
    db = parse_program(WALK_UPDATES)
    compiled = CompositionalService(db, config).precompile()
    expected = answer_set(db, "?- p(a, Y).", config)
    assert ("Y=a", ("+m(a)", "+m(b)", "+m(c)")) in expected
    assert answer_set(compiled, "?- p(a, Y).", config) == expected


def test_unfold_cap_exceeded_is_an_error():
    """Test a recursive component still growing at UNFOLD_CAP raises instead of truncating."""
    config = Settings(UNFOLD_CAP=2, EXTRA_DOMAIN=[], _env_file=None)
    with pytest.raises(BoundExceededError) as excinfo:
        CompositionalService(parse_program(WALK_UPDATES), config).precompile()
    assert excinfo.value.steps == 2
