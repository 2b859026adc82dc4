"""Conservative static checks: name resolution, arity, assigned-before-use."""

from __future__ import annotations

from .nodes import (
    Alloc,
    Assign,
    CallExpr,
    CallStmt,
    FieldLoad,
    FieldStore,
    If,
    IsNull,
    Print,
    Program,
    Return,
    Var,
    While,
    iter_subexprs,
)

# builtin call names the interpreter provides; values are arities.
# __anchor_set_X / __anchor_get_X exist for any suffix X.
ANCHOR_SET_PREFIX = "__anchor_set_"
ANCHOR_GET_PREFIX = "__anchor_get_"
SNAPSHOT_BUILTIN = "__wm_snapshot"


class StaticCheckError(ValueError):
    pass


def builtin_arity(name: str):
    """Arity of a builtin call name, or None if not a builtin."""
    if name == SNAPSHOT_BUILTIN:
        return 0
    if name.startswith(ANCHOR_SET_PREFIX):
        return 1
    if name.startswith(ANCHOR_GET_PREFIX):
        return 0
    return None


def check_program(p: Program) -> None:
    arities = {}
    for f in p.functions:
        if f.name in arities:
            raise StaticCheckError(f"duplicate function name {f.name!r}")
        if builtin_arity(f.name) is not None:
            raise StaticCheckError(f"cannot define builtin {f.name!r}")
        arities[f.name] = len(f.params)
    if "main" not in arities:
        raise StaticCheckError("program has no main function")

    for f in p.functions:
        if len(set(f.params)) != len(f.params):
            raise StaticCheckError(f"{f.name}: duplicate parameter names")
        _check_body(f.name, f.body, set(f.params), arities)


def _check_call(fname: str, name: str, nargs: int, arities) -> None:
    arity = arities.get(name, builtin_arity(name))
    if arity is None:
        raise StaticCheckError(f"{fname}: call to undefined function {name!r}")
    if arity != nargs:
        raise StaticCheckError(
            f"{fname}: {name!r} takes {arity} argument(s), got {nargs}"
        )


def _check_expr(fname: str, e, assigned, arities) -> None:
    for sub in iter_subexprs(e):
        if isinstance(sub, Var) and sub.name not in assigned:
            raise StaticCheckError(f"{fname}: use of unassigned variable {sub.name!r}")
        if isinstance(sub, (FieldLoad, IsNull)) and sub.var not in assigned:
            raise StaticCheckError(f"{fname}: use of unassigned variable {sub.var!r}")
        if isinstance(sub, CallExpr):
            _check_call(fname, sub.name, len(sub.args), arities)


def _check_body(fname: str, body, assigned: set, arities) -> set:
    """Check a statement list; returns the definitely-assigned set after it."""
    assigned = set(assigned)
    for s in body:
        if isinstance(s, Assign):
            _check_expr(fname, s.expr, assigned, arities)
            assigned.add(s.var)
        elif isinstance(s, Alloc):
            assigned.add(s.var)
        elif isinstance(s, FieldStore):
            if s.var not in assigned:
                raise StaticCheckError(
                    f"{fname}: use of unassigned variable {s.var!r}"
                )
            _check_expr(fname, s.expr, assigned, arities)
        elif isinstance(s, (Print, Return)):
            _check_expr(fname, s.expr, assigned, arities)
        elif isinstance(s, CallStmt):
            for a in s.args:
                _check_expr(fname, a, assigned, arities)
            _check_call(fname, s.name, len(s.args), arities)
        elif isinstance(s, If):
            _check_expr(fname, s.cond, assigned, arities)
            after_then = _check_body(fname, s.then_body, assigned, arities)
            after_else = _check_body(fname, s.else_body, assigned, arities)
            assigned |= after_then & after_else
        elif isinstance(s, While):
            # body may run zero times: check it, but keep the pre-loop set
            _check_expr(fname, s.cond, assigned, arities)
            _check_body(fname, s.body, assigned, arities)
        else:
            raise StaticCheckError(f"{fname}: unknown statement {s!r}")
    return assigned
