"""
Canonical text for kernel objects; the parser reads every form back
except constrained literals, which use `<-` and only appear in dumps.
"""
from functools import singledispatch
from typing import List

from udatalog.models.constraint import Constraint, DisjunctiveConstraint
from udatalog.models.database import Database
from udatalog.models.formula import Disjunct, QuantifiedFormula
from udatalog.models.rules import ConstrainedLiteral, ExtendedRule, Goal, Rule
from udatalog.models.terms import Atom, Constant, Literal, UpdateAtom, Variable


@singledispatch
def to_text(obj) -> str:
    """Canonical text of any syntactic object."""
    raise TypeError(f"cannot print {type(obj).__name__}")


@to_text.register(Variable)
@to_text.register(Constant)
@to_text.register(Atom)
@to_text.register(Literal)
@to_text.register(UpdateAtom)
@to_text.register(Constraint)
@to_text.register(DisjunctiveConstraint)
def _(obj) -> str:
    return str(obj)


def _constraint_items(c: Constraint) -> List[str]:
    if c.is_false:
        return ["false"]
    return [f"{left}{op}{right}" for op, left, right in c.atoms()]


def _body_items(rule) -> List[str]:
    items = _constraint_items(rule.constraint)
    items += [to_text(u) for u in sorted(rule.updates, key=UpdateAtom.sort_key)]
    items += [to_text(l) for l in rule.body]
    return items


@to_text.register
def _(obj: Disjunct) -> str:
    items = _constraint_items(obj.constraint) + [to_text(l) for l in obj.literals]
    return ", ".join(items) if items else "true"


@to_text.register
def _(obj: QuantifiedFormula) -> str:
    if obj.is_false:
        return "false"
    prefix = ""
    index = 0
    quantifiers = list(obj.quantifiers)
    # consecutive variables under one quantifier share a keyword
    while index < len(quantifiers):
        kind = quantifiers[index][0]
        names = []
        while index < len(quantifiers) and quantifiers[index][0] is kind:
            names.append(quantifiers[index][1].name)
            index += 1
        prefix += f"{kind.value} {','.join(names)} "
    matrix = " ; ".join(to_text(d) for d in obj.matrix)
    return f"{prefix}({matrix})"


@to_text.register
def _(obj: Rule) -> str:
    items = _body_items(obj)
    return f"{to_text(obj.head)} :- {', '.join(items) if items else 'true'}."


@to_text.register
def _(obj: ExtendedRule) -> str:
    items = _body_items(obj)
    text = f"{to_text(obj.head)} :- {', '.join(items)}" if items else f"{to_text(obj.head)} :-"
    if obj.tail is not None:
        text += f" |> {to_text(obj.tail)}"
    elif not items:
        text += " true"
    return text + "."


@to_text.register
def _(obj: Goal) -> str:
    items = _body_items(obj)
    return f"?- {', '.join(items) if items else 'true'}."


@to_text.register
def _(obj: ConstrainedLiteral) -> str:
    items = _constraint_items(obj.constraint) if not obj.constraint.is_true else []
    items += [to_text(u) for u in sorted(obj.updates, key=UpdateAtom.sort_key)]
    head = to_text(obj.head)
    return f"{head} <- {', '.join(items)}" if items else f"{head} <- true"


def facts_text(db: Database) -> str:
    """Fact store: `#domain` line, then sorted facts one per line."""
    lines = []
    if db.declared_domain:
        lines.append(f"#domain {', '.join(sorted(c.name for c in db.declared_domain))}.")
    lines += [f"{to_text(f)}." for f in sorted(db.edb, key=Atom.sort_key)]
    return "\n".join(lines) + ("\n" if lines else "")


@to_text.register
def _(obj: Database) -> str:
    lines = []
    if obj.declared_domain:
        lines.append(f"#domain {', '.join(sorted(c.name for c in obj.declared_domain))}.")
    bare = sorted(p for p in obj.extensional if not any(f.predicate == p for f in obj.edb))
    if bare:
        lines.append(f"#extensional {', '.join(f'{p}/{obj.arities[p]}' for p in bare)}.")
    lines += [f"{to_text(f)}." for f in sorted(obj.edb, key=Atom.sort_key)]
    lines += [to_text(r) for r in obj.idb]
    return "\n".join(lines) + ("\n" if lines else "")
