"""Mini imperative language: AST, parser, canonical serializer, interpreter."""

from .analysis import basic_blocks, does_io, touches_heap
from .check import (
    ANCHOR_GET_PREFIX,
    ANCHOR_SET_PREFIX,
    SNAPSHOT_BUILTIN,
    StaticCheckError,
    builtin_arity,
    check_program,
)
from .interp import (
    HeapSnapshot,
    Interpreter,
    Limits,
    Ref,
    RunResult,
    interpret,
)
from .nodes import (
    Alloc,
    Assign,
    Binary,
    CallExpr,
    CallStmt,
    Expr,
    FieldLoad,
    FieldStore,
    FIELDS,
    Function,
    If,
    IntLit,
    IsNull,
    NullLit,
    Print,
    Program,
    Return,
    Stmt,
    Var,
    While,
    code_size,
    expr_vars,
    iter_exprs,
    iter_stmts,
    iter_subexprs,
    map_expr,
    serialize,
    serialize_expr,
    serialize_function,
    stmt_defs,
    stmt_uses,
)
from .parser import ParseError, parse, tokenize

__all__ = [name for name in dir() if not name.startswith("_")]
