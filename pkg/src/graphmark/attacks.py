"""Five semantics-preserving transformation attacks and their assessment.

The attack vocabulary is adapted from a JVM setting: class splitting
becomes function splitting and register duplication becomes local
variable duplication.  Every attack is a pure function of (program,
seed) and must preserve printed output; attack strength is traded away
for that guarantee where the two conflict (e.g. heap-touching
statements are kept totally ordered during reordering).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .minilang import (
    Alloc,
    Assign,
    CallStmt,
    FieldLoad,
    FieldStore,
    Function,
    If,
    IntLit,
    IsNull,
    Limits,
    NullLit,
    Print,
    Program,
    Return,
    Var,
    While,
    does_io,
    expr_vars,
    interpret,
    iter_exprs,
    iter_stmts,
    iter_subexprs,
    map_expr,
    stmt_defs,
    stmt_uses,
    touches_heap,
)
from .watermark import extract

ATTACK_KINDS = (
    "reorder",
    "split_function",
    "duplicate_variable",
    "bogus_field",
    "reassign_variables",
)

_STRAIGHT_LINE = (Assign, Alloc, FieldStore, CallStmt, Print)


def apply_attack(p: Program, kind: str, seed: int = 0) -> Program:
    if kind == "reorder":
        return reorder(p, seed)
    if kind == "split_function":
        return split_function(p, seed)
    if kind == "duplicate_variable":
        return duplicate_variable(p, seed)
    if kind == "bogus_field":
        return bogus_field(p, seed)
    if kind == "reassign_variables":
        return reassign_variables(p)
    raise ValueError(f"unknown attack kind {kind!r}")


# --- reorder ------------------------------------------------------------


def _shuffle_block(block, rng) -> list:
    n = len(block)
    uses = [stmt_uses(s) for s in block]
    defs = [stmt_defs(s) for s in block]
    heap = [touches_heap(s) for s in block]
    io = [does_io(s) for s in block]

    succs = [set() for _ in range(n)]
    indeg = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            dep = (
                bool(defs[i] & uses[j])
                or bool(uses[i] & defs[j])
                or bool(defs[i] & defs[j])
                or (heap[i] and heap[j])
                or (io[i] and io[j])
            )
            if dep and j not in succs[i]:
                succs[i].add(j)
                indeg[j] += 1

    ready = [i for i in range(n) if indeg[i] == 0]
    order = []
    while ready:
        pick = ready.pop(rng.randrange(len(ready)))
        order.append(pick)
        for j in sorted(succs[pick]):
            indeg[j] -= 1
            if indeg[j] == 0:
                ready.append(j)
        ready.sort()
    return [block[i] for i in order]


def _reorder_body(body, rng) -> tuple:
    out = []
    run = []

    def flush():
        if run:
            out.extend(_shuffle_block(run, rng) if len(run) > 1 else run)
            run.clear()

    for s in body:
        if isinstance(s, _STRAIGHT_LINE):
            run.append(s)
            continue
        flush()
        if isinstance(s, If):
            s = If(s.cond, _reorder_body(s.then_body, rng),
                   _reorder_body(s.else_body, rng))
        elif isinstance(s, While):
            s = While(s.cond, _reorder_body(s.body, rng))
        out.append(s)
    flush()
    return tuple(out)


def reorder(p: Program, seed: int = 0) -> Program:
    """Seeded shuffle within each basic block, preserving def-use, heap
    and output order."""
    rng = random.Random(seed)
    return Program(tuple(
        Function(f.name, f.params, _reorder_body(f.body, rng))
        for f in p.functions
    ))


# --- split_function -----------------------------------------------------


def _body_defs(body) -> set:
    names = set()
    for s in iter_stmts(body):
        names |= stmt_defs(s)
    return names


def _body_uses(body) -> set:
    names = set()
    for s in iter_stmts(body):
        names |= stmt_uses(s)
    return names


def _has_return(body) -> bool:
    return any(isinstance(s, Return) for s in iter_stmts(body))


def _fresh(base: str, taken: set) -> str:
    name = base
    k = 0
    while name in taken:
        k += 1
        name = f"{base}{k}"
    taken.add(name)
    return name


def split_function(p: Program, seed: int = 0) -> Program:
    """Move the first half of one function into a fresh helper.

    Locals crossing the cut travel in a chain of freshly allocated carrier
    nodes (values in the data field, chained through right pointers).
    Identity when no function is eligible.
    """
    rng = random.Random(seed)
    eligible = []
    for idx, f in enumerate(p.functions):
        if len(f.body) < 2:
            continue
        mid = len(f.body) // 2
        if _has_return(f.body[:mid]):
            continue
        eligible.append((idx, mid))
    if not eligible:
        return p

    idx, mid = eligible[rng.randrange(len(eligible))]
    target = p.functions[idx]
    first, second = target.body[:mid], target.body[mid:]

    crossing = sorted(_body_defs(first) & (_body_uses(second) | set()))
    taken = {f.name for f in p.functions}
    taken |= _body_defs(target.body) | set(target.params)
    helper_name = _fresh("__atk_half", {f.name for f in p.functions})

    helper_body = list(first)
    caller_head: list = []
    if crossing:
        box_vars = []
        for k, _ in enumerate(crossing):
            box_vars.append(_fresh(f"__atk_box{k}", taken))
        for k, var in enumerate(crossing):
            helper_body.append(Alloc(box_vars[k]))
            helper_body.append(FieldStore(box_vars[k], "data", Var(var)))
        for k in range(len(crossing) - 1):
            helper_body.append(
                FieldStore(box_vars[k], "right", Var(box_vars[k + 1]))
            )
        helper_body.append(Return(Var(box_vars[0])))

        cursor = _fresh("__atk_cur", taken)
        caller_head.append(
            Assign(cursor, _call_expr(helper_name, target.params))
        )
        for k, var in enumerate(crossing):
            caller_head.append(Assign(var, FieldLoad(cursor, "data")))
            if k + 1 < len(crossing):
                caller_head.append(Assign(cursor, FieldLoad(cursor, "right")))
    else:
        helper_body.append(Return(NullLit()))
        caller_head.append(
            CallStmt(helper_name, tuple(Var(x) for x in target.params))
        )

    helper = Function(helper_name, target.params, tuple(helper_body))
    new_target = Function(
        target.name, target.params, tuple(caller_head) + second
    )
    functions = list(p.functions)
    functions[idx] = new_target
    functions.append(helper)
    return Program(tuple(functions))


def _call_expr(name, params):
    from .minilang import CallExpr

    return CallExpr(name, tuple(Var(x) for x in params))


# --- duplicate_variable -------------------------------------------------


def _map_stmt_exprs(s, fn):
    from dataclasses import replace as dc_replace

    if isinstance(s, (Assign, FieldStore, Print, Return)):
        return dc_replace(s, expr=map_expr(s.expr, fn))
    if isinstance(s, CallStmt):
        return dc_replace(s, args=tuple(map_expr(a, fn) for a in s.args))
    if isinstance(s, If):
        return If(map_expr(s.cond, fn), s.then_body, s.else_body)
    if isinstance(s, While):
        return While(map_expr(s.cond, fn), s.body)
    return s


def duplicate_variable(p: Program, seed: int = 0) -> Program:
    """Shadow one local with a copy kept in sync after every definition,
    redirecting a seeded subset of its uses to the shadow."""
    rng = random.Random(seed)
    candidates = []
    for idx, f in enumerate(p.functions):
        names = sorted(_body_defs(f.body) | set(f.params))
        if names:
            candidates.append((idx, names))
    if not candidates:
        return p
    idx, names = candidates[rng.randrange(len(candidates))]
    target = p.functions[idx]
    var = names[rng.randrange(len(names))]
    taken = _body_defs(target.body) | set(target.params)
    taken |= {f.name for f in p.functions}
    shadow = _fresh(f"{var}__dup", taken)

    def redirect(e):
        if isinstance(e, Var) and e.name == var and rng.random() < 0.5:
            return Var(shadow)
        if isinstance(e, FieldLoad) and e.var == var and rng.random() < 0.5:
            return FieldLoad(shadow, e.field)
        if isinstance(e, IsNull) and e.var == var and rng.random() < 0.5:
            return IsNull(shadow)
        return e

    def transform(body) -> tuple:
        out = []
        for s in body:
            if isinstance(s, If):
                s = If(map_expr(s.cond, redirect),
                       transform(s.then_body), transform(s.else_body))
            elif isinstance(s, While):
                s = While(map_expr(s.cond, redirect), transform(s.body))
            else:
                s = _map_stmt_exprs(s, redirect)
                if isinstance(s, FieldStore) and s.var == var and rng.random() < 0.5:
                    from dataclasses import replace as dc_replace
                    s = dc_replace(s, var=shadow)
            out.append(s)
            if var in stmt_defs(s):
                out.append(Assign(shadow, Var(var)))
        return tuple(out)

    body = transform(target.body)
    if var in target.params:
        body = (Assign(shadow, Var(var)),) + body
    functions = list(p.functions)
    functions[idx] = Function(target.name, target.params, body)
    return Program(tuple(functions))


# --- bogus_field --------------------------------------------------------


def _program_reads_data(p: Program) -> bool:
    for f in p.functions:
        for s in iter_stmts(f.body):
            for e in iter_exprs(s):
                for sub in iter_subexprs(e):
                    if isinstance(sub, FieldLoad) and sub.field == "data":
                        return True
    return False


def bogus_field(p: Program, seed: int = 0) -> Program:
    """Insert stores to the unused data field after allocations.

    Conservatively the identity when any data field is read anywhere in
    the program (a node reference may flow between functions).
    """
    if _program_reads_data(p):
        return p
    rng = random.Random(seed)
    inserted = [0]

    def transform(body) -> tuple:
        out = []
        for s in body:
            if isinstance(s, If):
                s = If(s.cond, transform(s.then_body), transform(s.else_body))
            elif isinstance(s, While):
                s = While(s.cond, transform(s.body))
            out.append(s)
            if isinstance(s, Alloc) and rng.random() < 0.5:
                out.append(FieldStore(s.var, "data", IntLit(rng.randrange(1, 100))))
                inserted[0] += 1
        return tuple(out)

    functions = [
        Function(f.name, f.params, transform(f.body)) for f in p.functions
    ]
    q = Program(tuple(functions))
    if inserted[0] == 0:
        # make sure the attack does something when there is any target
        for f in p.functions:
            for s in iter_stmts(f.body):
                if isinstance(s, Alloc):
                    return _insert_after_first_alloc(p, rng.randrange(1, 100))
        return p
    return q


def _insert_after_first_alloc(p: Program, k: int) -> Program:
    done = [False]

    def transform(body) -> tuple:
        out = []
        for s in body:
            if isinstance(s, If):
                s = If(s.cond, transform(s.then_body), transform(s.else_body))
            elif isinstance(s, While):
                s = While(s.cond, transform(s.body))
            out.append(s)
            if isinstance(s, Alloc) and not done[0]:
                done[0] = True
                out.append(FieldStore(s.var, "data", IntLit(k)))
        return tuple(out)

    return Program(tuple(
        Function(f.name, f.params, transform(f.body)) for f in p.functions
    ))


# --- reassign_variables -------------------------------------------------


def _occurrence_ranges(f: Function):
    """Conservative [first, last] statement-position range per variable.

    Positions come from a preorder numbering; any variable occurring
    inside a loop has its range widened to the whole loop span, so values
    carried across iterations stay protected.
    """
    ranges: dict = {}
    pos = [0]

    def touch(name: str, at: int) -> None:
        lo, hi = ranges.get(name, (at, at))
        ranges[name] = (min(lo, at), max(hi, at))

    def widen(names, lo, hi) -> None:
        for name in names:
            a, b = ranges[name]
            ranges[name] = (min(a, lo), max(b, hi))

    def scan(body) -> None:
        for s in body:
            at = pos[0]
            pos[0] += 1
            for name in stmt_uses(s) | stmt_defs(s):
                touch(name, at)
            if isinstance(s, If):
                scan(s.then_body)
                scan(s.else_body)
            elif isinstance(s, While):
                start = at
                inner_before = dict(ranges)
                scan(s.body)
                end = pos[0]
                touched = {
                    n for n in ranges
                    if n not in inner_before or ranges[n] != inner_before[n]
                }
                touched |= expr_vars(s.cond)
                widen(touched & set(ranges), start, end)

    for param in f.params:
        touch(param, 0)
    scan(f.body)
    return ranges


def reassign_variables(p: Program) -> Program:
    """Merge locals with non-overlapping conservative live ranges into
    shared slots (greedy first-fit, deterministic order); parameters keep
    their names."""
    functions = []
    for f in p.functions:
        ranges = _occurrence_ranges(f)
        locals_ = [n for n in ranges if n not in f.params]
        locals_.sort(key=lambda n: (ranges[n][0], ranges[n][1], n))
        slots: list = []  # (representative name, [ranges])
        mapping: dict = {}
        for name in locals_:
            lo, hi = ranges[name]
            placed = False
            for rep, taken in slots:
                if all(hi < a or b < lo for a, b in taken):
                    taken.append((lo, hi))
                    mapping[name] = rep
                    placed = True
                    break
            if not placed:
                slots.append((name, [(lo, hi)]))
                mapping[name] = name
        if all(k == v for k, v in mapping.items()):
            functions.append(f)
            continue

        def rename_expr(e):
            if isinstance(e, Var):
                return Var(mapping.get(e.name, e.name))
            if isinstance(e, FieldLoad):
                return FieldLoad(mapping.get(e.var, e.var), e.field)
            if isinstance(e, IsNull):
                return IsNull(mapping.get(e.var, e.var))
            return e

        def rename_body(body) -> tuple:
            from dataclasses import replace as dc_replace

            out = []
            for s in body:
                if isinstance(s, If):
                    s = If(map_expr(s.cond, rename_expr),
                           rename_body(s.then_body), rename_body(s.else_body))
                elif isinstance(s, While):
                    s = While(map_expr(s.cond, rename_expr), rename_body(s.body))
                else:
                    s = _map_stmt_exprs(s, rename_expr)
                    if isinstance(s, (Assign, Alloc)):
                        s = dc_replace(s, var=mapping.get(s.var, s.var))
                    elif isinstance(s, FieldStore):
                        s = dc_replace(s, var=mapping.get(s.var, s.var))
                out.append(s)
            return tuple(out)

        functions.append(Function(f.name, f.params, rename_body(f.body)))
    return Program(tuple(functions))


# --- assessment ---------------------------------------------------------


@dataclass(frozen=True)
class AttackOutcome:
    kind: str
    runs_ok: bool
    watermark_survives: bool
    constants_intact: bool

    @property
    def verdict(self) -> str:
        return (
            "NotAffected" if self.runs_ok and self.watermark_survives
            else "Affected"
        )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "runs_ok": self.runs_ok,
            "watermark_survives": self.watermark_survives,
            "constants_intact": self.constants_intact,
            "verdict": self.verdict,
        }


def _outputs(p: Program, inputs, limits) -> Optional[list]:
    outs = []
    for vec in inputs:
        r = interpret(p, vec, limits=limits)
        if not r.ok:
            return None
        outs.append(r.output)
    return outs


def assess(
    p_wm: Program,
    p_tp: Program,
    watermark_value: int,
    trigger,
    inputs,
    kind: str,
    seed: int = 0,
    limits: Limits = None,
):
    """Attack both builds, check behavior and watermark survival.

    Returns (wm outcome, tp outcome); interpreter faults are captured
    into runs_ok=False, never raised.
    """
    outcomes = []
    for prog in (p_wm, p_tp):
        baseline = _outputs(prog, inputs, limits)
        attacked = apply_attack(prog, kind, seed)
        after = _outputs(attacked, inputs, limits)
        runs_ok = baseline is not None and after == baseline
        survives = extract(attacked, trigger, limits=limits) == watermark_value
        outcomes.append(
            AttackOutcome(
                kind=kind,
                runs_ok=runs_ok,
                watermark_survives=survives,
                constants_intact=runs_ok,
            )
        )
    return outcomes[0], outcomes[1]
