"""AST for the mini-language and its canonical serializer.

Programs are plain dataclass trees.  Transformation passes treat them as
immutable and always build new lists/nodes instead of mutating in place.

The canonical serialization is fully deterministic: four-space indents,
one statement per line, every binary expression parenthesized, functions
separated by a single blank line, trailing newline.  Code size is defined
as the byte length of this form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

FIELDS = ("left", "right", "data")

BINARY_OPS = ("+", "-", "*", "/", "%", "==", "!=", "<", "<=", "and", "or")


# --- expressions --------------------------------------------------------


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class NullLit:
    pass


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class FieldLoad:
    var: str
    field: str


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class CallExpr:
    name: str
    args: tuple


@dataclass(frozen=True)
class IsNull:
    var: str


Expr = Union[IntLit, NullLit, Var, FieldLoad, Binary, CallExpr, IsNull]


# --- statements ---------------------------------------------------------


@dataclass(frozen=True)
class Assign:
    var: str
    expr: Expr


@dataclass(frozen=True)
class Alloc:
    var: str


@dataclass(frozen=True)
class FieldStore:
    var: str
    field: str
    expr: Expr


@dataclass(frozen=True)
class If:
    cond: Expr
    then_body: tuple
    else_body: tuple = ()


@dataclass(frozen=True)
class While:
    cond: Expr
    body: tuple


@dataclass(frozen=True)
class CallStmt:
    name: str
    args: tuple


@dataclass(frozen=True)
class Return:
    expr: Expr


@dataclass(frozen=True)
class Print:
    expr: Expr


Stmt = Union[Assign, Alloc, FieldStore, If, While, CallStmt, Return, Print]


@dataclass(frozen=True)
class Function:
    name: str
    params: tuple
    body: tuple


@dataclass(frozen=True)
class Program:
    functions: tuple

    def function(self, name: str) -> Optional[Function]:
        for f in self.functions:
            if f.name == name:
                return f
        return None


# --- serializer ---------------------------------------------------------


def serialize_expr(e: Expr) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, NullLit):
        return "null"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, FieldLoad):
        return f"{e.var}.{e.field}"
    if isinstance(e, IsNull):
        return f"is_null({e.var})"
    if isinstance(e, CallExpr):
        return f"{e.name}({', '.join(serialize_expr(a) for a in e.args)})"
    if isinstance(e, Binary):
        return f"({serialize_expr(e.left)} {e.op} {serialize_expr(e.right)})"
    raise TypeError(f"not an expression: {e!r}")


def _cond_text(e: Expr) -> str:
    # Binary serializations carry their own parentheses; reuse them as the
    # condition parentheses instead of doubling up.
    text = serialize_expr(e)
    return text if text.startswith("(") else f"({text})"


def _emit_stmt(s: Stmt, indent: int, out: list) -> None:
    pad = "    " * indent
    if isinstance(s, Assign):
        out.append(f"{pad}{s.var} = {serialize_expr(s.expr)};")
    elif isinstance(s, Alloc):
        out.append(f"{pad}{s.var} = node();")
    elif isinstance(s, FieldStore):
        out.append(f"{pad}{s.var}.{s.field} = {serialize_expr(s.expr)};")
    elif isinstance(s, Print):
        out.append(f"{pad}print({serialize_expr(s.expr)});")
    elif isinstance(s, Return):
        out.append(f"{pad}return {serialize_expr(s.expr)};")
    elif isinstance(s, CallStmt):
        args = ", ".join(serialize_expr(a) for a in s.args)
        out.append(f"{pad}{s.name}({args});")
    elif isinstance(s, If):
        out.append(f"{pad}if {_cond_text(s.cond)} {{")
        for inner in s.then_body:
            _emit_stmt(inner, indent + 1, out)
        if s.else_body:
            out.append(f"{pad}}} else {{")
            for inner in s.else_body:
                _emit_stmt(inner, indent + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(s, While):
        out.append(f"{pad}while {_cond_text(s.cond)} {{")
        for inner in s.body:
            _emit_stmt(inner, indent + 1, out)
        out.append(f"{pad}}}")
    else:
        raise TypeError(f"not a statement: {s!r}")


def serialize_function(f: Function) -> str:
    out = [f"fn {f.name}({', '.join(f.params)}) {{"]
    for s in f.body:
        _emit_stmt(s, 1, out)
    out.append("}")
    return "\n".join(out)


def serialize(p: Program) -> str:
    """Canonical source text of p (deterministic, used as the size metric)."""
    return "\n\n".join(serialize_function(f) for f in p.functions) + "\n"


def code_size(p: Program) -> int:
    return len(serialize(p).encode("utf-8"))


# --- walkers ------------------------------------------------------------


def iter_exprs(s: Stmt) -> Iterator[Expr]:
    """Top-level expressions of one statement (not recursing into bodies)."""
    if isinstance(s, (Assign, FieldStore, Print, Return)):
        yield s.expr
    elif isinstance(s, (CallStmt,)):
        yield from s.args
    elif isinstance(s, (If, While)):
        yield s.cond


def iter_subexprs(e: Expr) -> Iterator[Expr]:
    """e and all of its subexpressions, preorder."""
    yield e
    if isinstance(e, Binary):
        yield from iter_subexprs(e.left)
        yield from iter_subexprs(e.right)
    elif isinstance(e, CallExpr):
        for a in e.args:
            yield from iter_subexprs(a)


def iter_stmts(body) -> Iterator[Stmt]:
    """All statements in a body, preorder, recursing into nested bodies."""
    for s in body:
        yield s
        if isinstance(s, If):
            yield from iter_stmts(s.then_body)
            yield from iter_stmts(s.else_body)
        elif isinstance(s, While):
            yield from iter_stmts(s.body)


def expr_vars(e: Expr) -> set:
    """Names of variables read by e."""
    names = set()
    for sub in iter_subexprs(e):
        if isinstance(sub, Var):
            names.add(sub.name)
        elif isinstance(sub, FieldLoad):
            names.add(sub.var)
        elif isinstance(sub, IsNull):
            names.add(sub.var)
    return names


def stmt_uses(s: Stmt) -> set:
    used = set()
    for e in iter_exprs(s):
        used |= expr_vars(e)
    if isinstance(s, FieldStore):
        used.add(s.var)
    return used


def stmt_defs(s: Stmt) -> set:
    if isinstance(s, (Assign, Alloc)):
        return {s.var}
    return set()


def map_expr(e: Expr, fn) -> Expr:
    """Rebuild e bottom-up, applying fn to every subexpression."""
    if isinstance(e, Binary):
        e = Binary(e.op, map_expr(e.left, fn), map_expr(e.right, fn))
    elif isinstance(e, CallExpr):
        e = CallExpr(e.name, tuple(map_expr(a, fn) for a in e.args))
    return fn(e)
