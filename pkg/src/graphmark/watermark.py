"""Embedding and extraction of numeric heap-tree watermarks.

The watermark integer maps to a tree shape via the codec in `ppct`; a
synthesized builder function constructs that tree on the heap at main
entry on every run (decoders generated by the encoder module read it on
every execution, so the tree cannot be trigger-gated).  The secret
trigger arguments only control when a heap snapshot is captured for
extraction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import ppct
from .minilang import (
    ANCHOR_GET_PREFIX,
    ANCHOR_SET_PREFIX,
    SNAPSHOT_BUILTIN,
    Alloc,
    Binary,
    CallStmt,
    FieldStore,
    Function,
    If,
    IntLit,
    IsNull,
    Limits,
    Program,
    RunResult,
    Var,
    interpret,
    iter_stmts,
    iter_subexprs,
    iter_exprs,
    CallExpr,
)

DEFAULT_ANCHOR = "wm_root"
RESERVED_PREFIXES = ("__wm_", "__tp_", "__anchor_")

BUILDER_NAME = "__wm_build"


class EmbedError(ValueError):
    pass


@dataclass(frozen=True)
class WatermarkSpec:
    value: int
    trigger: tuple
    anchor: str = DEFAULT_ANCHOR
    max_leaves: int = ppct.DEFAULT_MAX_LEAVES

    def __post_init__(self):
        if self.value < 0:
            raise EmbedError("watermark value must be non-negative")
        if not self.trigger:
            raise EmbedError("trigger tuple must be non-empty")


def synthesize_builder(spec: WatermarkSpec) -> Function:
    """Straight-line function that builds the watermark tree on the heap.

    Nodes are numbered in preorder.  Statement order is fixed for
    deterministic code size: all allocations first, then internal-child
    wiring (preorder), then the leaf self-loops and leaf cycle
    (left-to-right), then the anchor store.
    """
    tree = ppct.unrank(spec.value, max_leaves=spec.max_leaves)

    internals: list = []  # (index, left index, right index), preorder
    leaves: list = []  # leaf indices, left-to-right
    counter = 0

    def number(t) -> int:
        nonlocal counter
        i = counter
        counter += 1
        if not t:
            leaves.append(i)
            return i
        slot = len(internals)
        internals.append(None)
        li = number(t[0])
        ri = number(t[1])
        internals[slot] = (i, li, ri)
        return i

    number(tree)

    stmts = [Alloc(f"n{i}") for i in range(counter)]
    for i, li, ri in internals:
        stmts.append(FieldStore(f"n{i}", "left", Var(f"n{li}")))
        stmts.append(FieldStore(f"n{i}", "right", Var(f"n{ri}")))
    for pos, i in enumerate(leaves):
        nxt = leaves[(pos + 1) % len(leaves)]
        stmts.append(FieldStore(f"n{i}", "left", Var(f"n{i}")))
        stmts.append(FieldStore(f"n{i}", "right", Var(f"n{nxt}")))
    stmts.append(CallStmt(ANCHOR_SET_PREFIX + spec.anchor, (Var("n0"),)))
    return Function(BUILDER_NAME, (), tuple(stmts))


def _uses_reserved_names(p: Program) -> Optional[str]:
    for f in p.functions:
        if f.name.startswith(RESERVED_PREFIXES):
            return f.name
        for s in iter_stmts(f.body):
            names = []
            if hasattr(s, "name"):
                names.append(s.name)
            for e in iter_exprs(s):
                for sub in iter_subexprs(e):
                    if isinstance(sub, CallExpr):
                        names.append(sub.name)
            for n in names:
                if n.startswith(RESERVED_PREFIXES) or n == SNAPSHOT_BUILTIN:
                    return n
    return None


def embed(p: Program, spec: WatermarkSpec) -> Program:
    """Insert the builder and a guarded snapshot trigger into main."""
    clash = _uses_reserved_names(p)
    if clash is not None:
        raise EmbedError(f"program already uses reserved name {clash!r}")
    main = p.function("main")
    if main is None:
        raise EmbedError("program has no main function")
    if len(main.params) != len(spec.trigger):
        raise EmbedError(
            f"trigger has {len(spec.trigger)} value(s) but main takes "
            f"{len(main.params)} argument(s)"
        )
    if not main.params:
        raise EmbedError("main must take at least one argument for the trigger")

    builder = synthesize_builder(spec)
    guard = None
    for param, tval in zip(main.params, spec.trigger):
        cmp = Binary("==", Var(param), IntLit(int(tval)))
        guard = cmp if guard is None else Binary("and", guard, cmp)
    trigger_stmt = If(guard, (CallStmt(SNAPSHOT_BUILTIN, ()),), ())

    new_main = Function(
        "main",
        main.params,
        (CallStmt(BUILDER_NAME, ()), trigger_stmt) + main.body,
    )
    functions = tuple(
        new_main if f.name == "main" else f for f in p.functions
    ) + (builder,)
    return Program(functions)


def extract(
    p: Program,
    trigger,
    limits: Limits = None,
    anchor: Optional[str] = None,
) -> Optional[int]:
    """Run p on the trigger args and decode the watermark, or None."""
    value, _ = extract_with_result(p, trigger, limits=limits, anchor=anchor)
    return value


def extract_with_result(
    p: Program,
    trigger,
    limits: Limits = None,
    anchor: Optional[str] = None,
):
    """Like extract, but also returns the underlying RunResult."""
    result = interpret(p, list(trigger), limits=limits)
    if result.snapshot is None:
        return None, result
    snap = result.snapshot
    nodes = snap.shape_nodes()
    roots = snap.anchor_roots()
    names = [anchor] if anchor is not None else sorted(roots)
    for name in names:
        root = roots.get(name)
        if root is None:
            continue
        shape = ppct.recognize_heap_ppct(nodes, root)
        if shape is not None:
            return ppct.rank(shape), result
    return None, result


def extract_tree(p: Program, trigger, limits: Limits = None,
                 anchor: Optional[str] = None) -> Optional[ppct.PlaneTree]:
    """The watermark tree shape recovered from a run, or None."""
    result = interpret(p, list(trigger), limits=limits)
    if result.snapshot is None:
        return None
    snap = result.snapshot
    nodes = snap.shape_nodes()
    roots = snap.anchor_roots()
    names = [anchor] if anchor is not None else sorted(roots)
    for name in names:
        root = roots.get(name)
        if root is None:
            continue
        shape = ppct.recognize_heap_ppct(nodes, root)
        if shape is not None:
            return shape
    return None
