"""
Syntactic data model shared by every service.
"""
from udatalog.models.constraint import FALSE, TRUE, Constraint, DisjunctiveConstraint
from udatalog.models.database import Database
from udatalog.models.formula import (
    FALSE_FORMULA,
    TRUE_FORMULA,
    Disjunct,
    QuantifiedFormula,
    Quantifier,
)
from udatalog.models.rules import AnyRule, ConstrainedLiteral, ExtendedRule, Goal, Rule
from udatalog.models.substitution import (
    FreshNames,
    apply_bindings,
    free_vars,
    local_vars,
    rename_apart,
    substitute,
)
from udatalog.models.terms import (
    Atom,
    Constant,
    Literal,
    Term,
    UpdateAtom,
    UpdateSign,
    Variable,
)

__all__ = [
    "FALSE",
    "TRUE",
    "Constraint",
    "DisjunctiveConstraint",
    "Database",
    "FALSE_FORMULA",
    "TRUE_FORMULA",
    "Disjunct",
    "QuantifiedFormula",
    "Quantifier",
    "AnyRule",
    "ConstrainedLiteral",
    "ExtendedRule",
    "Goal",
    "Rule",
    "FreshNames",
    "apply_bindings",
    "free_vars",
    "local_vars",
    "rename_apart",
    "substitute",
    "Atom",
    "Constant",
    "Literal",
    "Term",
    "UpdateAtom",
    "UpdateSign",
    "Variable",
]
