"""Basic-block extraction and per-statement effect summaries."""

from __future__ import annotations

from .nodes import (
    Alloc,
    Assign,
    CallExpr,
    CallStmt,
    FieldLoad,
    FieldStore,
    Function,
    If,
    Print,
    Return,
    Stmt,
    While,
    iter_exprs,
    iter_subexprs,
)

STRAIGHT_LINE = (Assign, Alloc, FieldStore, CallStmt, Print)


def basic_blocks(f: Function) -> list:
    """Maximal straight-line statement runs of f, in source order.

    Control statements (if/while/return) end blocks; nested bodies are
    partitioned recursively and contribute their own blocks.
    """
    blocks: list = []

    def split(body) -> None:
        run: list = []
        for s in body:
            if isinstance(s, STRAIGHT_LINE):
                run.append(s)
                continue
            if run:
                blocks.append(run)
                run = []
            if isinstance(s, If):
                split(s.then_body)
                split(s.else_body)
            elif isinstance(s, While):
                split(s.body)
        if run:
            blocks.append(run)

    split(f.body)
    return blocks


def touches_heap(s: Stmt) -> bool:
    """Conservative: allocs, field access anywhere, or any call."""
    if isinstance(s, (Alloc, FieldStore)):
        return True
    for e in iter_exprs(s):
        for sub in iter_subexprs(e):
            if isinstance(sub, (FieldLoad, CallExpr)):
                return True
    return isinstance(s, CallStmt)


def does_io(s: Stmt) -> bool:
    """Conservative: prints, or any call (callees may print)."""
    if isinstance(s, Print):
        return True
    for e in iter_exprs(s):
        for sub in iter_subexprs(e):
            if isinstance(sub, CallExpr):
                return True
    return isinstance(s, CallStmt)
