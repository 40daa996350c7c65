"""
Test transactions: marking phase, update phase and the fact store.
"""
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from udatalog.cli.commands import format_solution, load_database
from udatalog.cli.session import SessionState
from udatalog.core.exceptions import ProgramError, SafetyViolationError, TransactionApplyError
from udatalog.models.terms import UpdateAtom, UpdateSign
from udatalog.schemas.transaction import AbortReason, TransactionStatus
from udatalog.services.parser_service import parse_goal, parse_program
from udatalog.services.transaction_service import (
    TransactionService,
    apply_transaction,
    apply_updates,
    load_edb,
    save_edb,
)

from tests.conftest import CHANGE_RULES, DEPT_FACTS, MANAGER_RULES, atom, facts_of, ground_atoms

SWAP_PROGRAM = """
#extensional e/1.
t(a).
t(b).
"""


def test_ins_man_commits(manager_db, config):
    """Test moving b into department A in place of c."""
    outcome = apply_transaction(parse_goal("?- ins_man(X).", manager_db), manager_db, config)
    assert outcome.status is TransactionStatus.COMMIT
    assert outcome.summary() == "COMMIT"
    assert facts_of(outcome.new_edb) == {
        ("emp_man", ("b", "b")),
        ("emp_man", ("b", "c")),
        ("dep_A", ("b",)),
        ("dep_B", ("b",)),
    }


def test_commit_returns_updated_database(manager_db, config):
    """Test commit hands back the database over the new fact store."""
    outcome, result = TransactionService(manager_db, config).commit(parse_goal("?- ins_man(X).", manager_db))
    assert result.edb == outcome.new_edb
    assert result.idb == manager_db.idb
    assert ("dep_A", ("c",)) in ground_atoms(manager_db)


def test_inconsistent_updates_abort(config):
    """Test answers that insert and delete the same fact abort the transaction."""
    db = parse_program(SWAP_PROGRAM)
    goal = parse_goal("?- t(X), t(Y), X != Y, +e(X), -e(Y).", db)
    outcome, result = TransactionService(db, config).commit(goal)
    assert outcome.status is TransactionStatus.ABORT
    assert outcome.reason is AbortReason.INCONSISTENT
    assert outcome.summary() == "ABORT (inconsistent updates)"
    assert len(outcome.solutions) == 2
    assert outcome.new_edb == db.edb
    assert result is db


def test_single_consistent_answer_commits(config):
    """Test the same updates commit when only one answer survives."""
    db = parse_program(SWAP_PROGRAM)
    goal = parse_goal("?- t(X), t(Y), X != Y, X = a, +e(X), -e(Y).", db)
    outcome = apply_transaction(goal, db, config)
    assert outcome.committed
    assert facts_of(outcome.new_edb) == {("t", ("a",)), ("t", ("b",)), ("e", ("a",))}


def test_goal_without_answers_commits(manager_db, config):
    """Test zero answers commit with the fact store unchanged."""
    outcome = apply_transaction(parse_goal("?- dep_B(c).", manager_db), manager_db, config)
    assert outcome.committed
    assert outcome.solutions == []
    assert outcome.new_edb == manager_db.edb


def test_unsafe_goal_is_rejected(manager_db, config):
    """Test the marking phase refuses inadmissible goals."""
    with pytest.raises(SafetyViolationError) as excinfo:
        TransactionService(manager_db, config).marking_phase(parse_goal("?- not dep_A(X).", manager_db))
    assert excinfo.value.error_code == "SAFETY_VIOLATION"


def test_failing_apply_hook_leaves_store_untouched(manager_db, config):
    """Test an error while applying updates changes nothing."""
    seen = []

    def hook(update):
        seen.append(update)
        if len(seen) == 2:
            raise TransactionApplyError(f"cannot apply {update}")

    service = TransactionService(manager_db, config, apply_hook=hook)
    before = manager_db.edb
    with pytest.raises(TransactionApplyError):
        service.commit(parse_goal("?- ins_man(X).", manager_db))
    assert manager_db.edb == before
    assert len(seen) == 2


def test_update_order_does_not_matter(dept_db, config):
    """Test applying the update set in any order gives the same store."""
    outcome = apply_transaction(parse_goal("?- change_man(X).", dept_db), dept_db, config)
    assert outcome.committed
    updates = sorted(outcome.updates, key=lambda u: u.sort_key())
    forward = apply_updates(dept_db.edb, updates)
    backward = apply_updates(dept_db.edb, list(reversed(updates)))
    assert forward == backward == outcome.new_edb
    assert facts_of(forward) == {("dep_A", ("b",)), ("dep_A", ("c",)), ("dep_B", ("b",))}


def test_deletions_then_insertions():
    """Test deleting and inserting different facts of one predicate."""
    edb = frozenset({atom("e", "a")})
    result = apply_updates(
        edb,
        [UpdateAtom(UpdateSign.INSERT, atom("e", "b")), UpdateAtom(UpdateSign.DELETE, atom("e", "a"))],
    )
    assert result == frozenset({atom("e", "b")})


def test_fact_store_round_trip(wide_dept_db, tmp_path):
    """Test saving and loading keeps facts and the declared domain."""
    path = tmp_path / "dept.facts"
    save_edb(wide_dept_db, path)
    loaded = load_edb(path)
    assert loaded.edb == wide_dept_db.edb
    assert loaded.declared_domain == wide_dept_db.declared_domain
    assert path.read_text().splitlines()[0] == "#domain a, d."


def test_fact_store_with_rules_is_rejected(tmp_path):
    """Test a fact store may not contain rules."""
    path = tmp_path / "bad.facts"
    path.write_text("e(a).\np(X) :- e(X).\n")
    with pytest.raises(ProgramError, match="fact store contains rules"):
        load_edb(path)


def test_session_undo_restores_store(manager_db, config):
    """Test undo brings back the store from before the last commit."""
    session = SessionState(manager_db, config)
    outcome = session.run("?- ins_man(X).")
    assert outcome.committed
    assert ("dep_A", ("c",)) not in ground_atoms(session.db)
    assert session.undo()
    assert session.db.edb == manager_db.edb
    assert not session.undo()
    assert len(session.history) == 1


MIXED_UPDATES = [
    UpdateAtom(UpdateSign.DELETE, atom("e", "a")),
    UpdateAtom(UpdateSign.INSERT, atom("e", "c")),
    UpdateAtom(UpdateSign.DELETE, atom("f", "a")),
    UpdateAtom(UpdateSign.INSERT, atom("f", "b")),
    UpdateAtom(UpdateSign.INSERT, atom("e", "b")),
    UpdateAtom(UpdateSign.DELETE, atom("f", "c")),
]


@settings(max_examples=50, deadline=None)
@given(st.permutations(MIXED_UPDATES))
def test_any_update_order_gives_the_same_store(updates):
    """Test every ordering of a consistent update set yields one store."""
    edb = frozenset({atom("e", "a"), atom("e", "b"), atom("f", "a")})
    assert apply_updates(edb, updates) == frozenset({atom("e", "b"), atom("e", "c"), atom("f", "b")})


def test_aborted_transaction_is_repeatable(config, tmp_path):
    """Test rerunning an aborted goal aborts the same way and keeps the store byte for byte."""
    db = parse_program(SWAP_PROGRAM)
    goal = parse_goal("?- t(X), t(Y), X != Y, +e(X), -e(Y).", db)
    save_edb(db, tmp_path / "before.facts")
    first, after_first = TransactionService(db, config).commit(goal)
    save_edb(after_first, tmp_path / "first.facts")
    second, after_second = TransactionService(after_first, config).commit(goal)
    save_edb(after_second, tmp_path / "second.facts")
    assert first.status is second.status is TransactionStatus.ABORT
    assert first.reason is second.reason is AbortReason.INCONSISTENT
    assert first.solutions == second.solutions
    before = (tmp_path / "before.facts").read_bytes()
    assert (tmp_path / "first.facts").read_bytes() == before
    assert (tmp_path / "second.facts").read_bytes() == before


def test_saved_store_answers_like_the_committed_database(config, tmp_path):
    """Test reloading a saved fact store gives the same answers as the in-memory result."""
    rules = tmp_path / "rules.udl"
    rules.write_text("#extensional emp_man/2, dep_A/1, dep_B/1.\n" + MANAGER_RULES + CHANGE_RULES)
    store = tmp_path / "dept.facts"
    store.write_text(DEPT_FACTS)
    db = load_database(str(rules), config, str(store))
    outcome, result = TransactionService(db, config).commit(parse_goal("?- ins_man(X).", db))
    assert outcome.committed
    saved = tmp_path / "after.facts"
    save_edb(result, saved)
    reloaded = load_database(str(rules), config, str(saved))
    assert reloaded.edb == result.edb
    for text in ["?- rem_man(X, Y).", "?- ins_man(X).", "?- change_man(X).", "?- dep_A(X), not ins_man(X)."]:
        expected = TransactionService(result, config).marking_phase(parse_goal(text, result))
        actual = TransactionService(reloaded, config).marking_phase(parse_goal(text, reloaded))
        assert sorted(format_solution(s, True) for s in actual) == sorted(format_solution(s, True) for s in expected)
