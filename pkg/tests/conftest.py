"""
Test configuration and fixtures.
"""
from pathlib import Path
from typing import Iterable

import pytest

from udatalog.core.config import Settings
from udatalog.core.logging import configure_logging
from udatalog.models.database import Database
from udatalog.models.substitution import FreshNames
from udatalog.models.terms import Atom, Constant
from udatalog.services.parser_service import parse_program

configure_logging()

PROGRAMS_DIR = Path(__file__).resolve().parent.parent / "programs"

DEPT_FACTS = """
emp_man(b, b).
emp_man(b, c).
dep_A(b).
dep_A(c).
dep_B(b).
"""

MANAGER_RULES = """
rem_man(X, Y) :- -dep_A(Y), emp_man(X, Y).
rem_man(X, Y) :- -dep_A(Y), emp_man(X, Z), rem_man(Z, Y).
ins_man(X) :- +dep_A(X), rem_man(X, Y).
"""

CHANGE_RULES = """
change_man(X) :- -emp_man(X, Y), dep_B(X), dep_A(Y).
change_man(X) :- X = Y, +emp_man(X, Y), dep_B(X), not ins_man(X).
"""

TRANSITIVE_CLOSURE = """
path(X, Y) :- edge(X, Y).
path(X, Y) :- edge(X, Z), path(Z, Y).
"""


def constants(*names: str) -> tuple:
    return tuple(Constant(n) for n in names)


def ground_atoms(db: Database) -> set:
    """Facts as plain (predicate, names) tuples."""
    return {(f.predicate, tuple(a.name for a in f.args)) for f in db.edb}


def atom(predicate: str, *names: str) -> Atom:
    return Atom(predicate, constants(*names))


def facts_of(atoms: Iterable[Atom]) -> set:
    return {(f.predicate, tuple(a.name for a in f.args)) for f in atoms}


@pytest.fixture
def config():
    """Settings independent of the environment."""
    return Settings(EXTRA_DOMAIN=[], UNFOLD_CAP=None, SEED=0, _env_file=None)


@pytest.fixture
def reservoir():
    """Fresh-name source independent of UDATALOG_SEED."""
    return FreshNames(prefix="_R", start=0)


@pytest.fixture
def manager_db():
    """Manager rules over the department facts."""
    return parse_program(DEPT_FACTS + MANAGER_RULES)


@pytest.fixture
def dept_db():
    """All five department rules over the department facts."""
    return parse_program(DEPT_FACTS + MANAGER_RULES + CHANGE_RULES)


@pytest.fixture
def wide_dept_db():
    """Department program over a universe with two extra constants."""
    return parse_program("#domain a, d.\n" + DEPT_FACTS + MANAGER_RULES + CHANGE_RULES)


@pytest.fixture
def dept_file():
    return PROGRAMS_DIR / "dept.udl"
