"""Deterministic tree-walking interpreter with step/heap accounting.

Values are 64-bit checked integers, heap node references, or null.  Heap
nodes carry three fields (left, right, data); fields are untyped at
runtime so transformation passes may stash any value in them, but the
snapshot recognizer only accepts well-formed trees.

The step count is the committed execution-time proxy: one step each time
a statement begins executing (loop headers count once per condition
evaluation); expression evaluation is free.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Optional

from .check import ANCHOR_GET_PREFIX, ANCHOR_SET_PREFIX, SNAPSHOT_BUILTIN
from .nodes import (
    Alloc,
    Assign,
    Binary,
    CallExpr,
    CallStmt,
    FieldLoad,
    FieldStore,
    If,
    IntLit,
    IsNull,
    NullLit,
    Print,
    Program,
    Return,
    Var,
    While,
)

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1

_FIELD_INDEX = {"left": 0, "right": 1, "data": 2}


class Ref:
    """Reference to a heap node."""

    __slots__ = ("id",)

    def __init__(self, nid: int):
        self.id = nid

    def __eq__(self, other):
        return isinstance(other, Ref) and other.id == self.id

    def __hash__(self):
        return hash(("ref", self.id))

    def __repr__(self):
        return f"Ref({self.id})"


@dataclass
class Limits:
    max_steps: int = 1_000_000
    max_allocs: int = 100_000
    max_call_depth: int = 128


@dataclass
class HeapSnapshot:
    """Heap state captured at the snapshot trigger.

    nodes: node id -> (left, right, data) with raw runtime values
    (ints, Refs, or None).  anchors: anchor name -> raw value.
    """

    nodes: dict
    anchors: dict

    def shape_nodes(self) -> dict:
        """Nodes with left/right reduced to node-id-or-None for recognition."""
        def as_id(v):
            return v.id if isinstance(v, Ref) else None

        return {
            nid: (as_id(l), as_id(r), d) for nid, (l, r, d) in self.nodes.items()
        }

    def anchor_roots(self) -> dict:
        return {
            name: v.id for name, v in self.anchors.items() if isinstance(v, Ref)
        }


@dataclass
class RunResult:
    output: list
    steps: int
    peak_live_nodes: int
    total_allocations: int
    status: str  # ok | step_limit | heap_limit | div_zero | null_deref
    #             | overflow | type_error | call_depth
    error: Optional[str] = None
    snapshot: Optional[HeapSnapshot] = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


class _Trap(Exception):
    def __init__(self, status: str, msg: str):
        super().__init__(msg)
        self.status = status


class _ReturnSignal(Exception):
    def __init__(self, value):
        self.value = value


class Interpreter:
    def __init__(self, program: Program, limits: Limits = None):
        self.program = program
        self.limits = limits or Limits()
        self.functions = {f.name: f for f in program.functions}

    def run(self, args) -> RunResult:
        self.heap: dict = {}
        self.next_id = 0
        self.steps = 0
        self.allocs = 0
        self.peak_live = 0
        self.output: list = []
        self.anchors: dict = {}
        self.frames: list = []
        self.snapshot: Optional[HeapSnapshot] = None

        main = self.functions.get("main")
        status, error = "ok", None
        old_limit = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old_limit, 20000))
        try:
            if main is None:
                raise _Trap("type_error", "no main function")
            if len(args) != len(main.params):
                raise _Trap(
                    "type_error",
                    f"main takes {len(main.params)} argument(s), got {len(args)}",
                )
            self._call(main, [int(a) for a in args])
        except _Trap as trap:
            status, error = trap.status, str(trap)
        finally:
            sys.setrecursionlimit(old_limit)
        return RunResult(
            output=self.output,
            steps=self.steps,
            peak_live_nodes=self.peak_live,
            total_allocations=self.allocs,
            status=status,
            error=error,
            snapshot=self.snapshot,
        )

    # --- execution -------------------------------------------------------

    def _call(self, func, argvals):
        if len(self.frames) >= self.limits.max_call_depth:
            raise _Trap("call_depth", f"call depth limit in {func.name!r}")
        env = dict(zip(func.params, argvals))
        self.frames.append(env)
        try:
            self._exec_body(func.body, env)
            return None
        except _ReturnSignal as ret:
            return ret.value
        finally:
            self.frames.pop()

    def _tick(self):
        if self.steps >= self.limits.max_steps:
            raise _Trap("step_limit", "step limit exceeded")
        self.steps += 1

    def _exec_body(self, body, env):
        for s in body:
            self._exec_stmt(s, env)

    def _exec_stmt(self, s, env):
        self._tick()
        if isinstance(s, Assign):
            env[s.var] = self._eval(s.expr, env)
        elif isinstance(s, Alloc):
            env[s.var] = self._alloc()
        elif isinstance(s, FieldStore):
            node = self._node_of(env.get(s.var), s.var)
            node[_FIELD_INDEX[s.field]] = self._eval(s.expr, env)
        elif isinstance(s, Print):
            v = self._eval(s.expr, env)
            if not isinstance(v, int):
                raise _Trap("type_error", "print expects an integer")
            self.output.append(str(v))
        elif isinstance(s, Return):
            raise _ReturnSignal(self._eval(s.expr, env))
        elif isinstance(s, CallStmt):
            self._eval_call(s.name, s.args, env)
        elif isinstance(s, If):
            if self._truthy(self._eval(s.cond, env)):
                self._exec_body(s.then_body, env)
            else:
                self._exec_body(s.else_body, env)
        elif isinstance(s, While):
            while self._truthy(self._eval(s.cond, env)):
                self._exec_body(s.body, env)
                self._tick()  # each re-check of the loop header is a step
        else:
            raise _Trap("type_error", f"unknown statement {s!r}")

    def _truthy(self, v) -> bool:
        if not isinstance(v, int):
            raise _Trap("type_error", "condition must be an integer")
        return v != 0

    def _alloc(self) -> Ref:
        self.allocs += 1
        if self.allocs > self.limits.max_allocs:
            raise _Trap("heap_limit", "allocation limit exceeded")
        nid = self.next_id
        self.next_id += 1
        self.heap[nid] = [None, None, 0]
        self.peak_live = max(self.peak_live, len(self._reachable()))
        return Ref(nid)

    def _reachable(self) -> set:
        roots = []
        for env in self.frames:
            roots.extend(v for v in env.values() if isinstance(v, Ref))
        roots.extend(v for v in self.anchors.values() if isinstance(v, Ref))
        seen = set()
        stack = [r.id for r in roots]
        while stack:
            nid = stack.pop()
            if nid in seen:
                continue
            seen.add(nid)
            for v in self.heap[nid]:
                if isinstance(v, Ref) and v.id not in seen:
                    stack.append(v.id)
        return seen

    def _node_of(self, v, name: str):
        if v is None:
            raise _Trap("null_deref", f"null dereference through {name!r}")
        if not isinstance(v, Ref):
            raise _Trap("type_error", f"{name!r} does not hold a node")
        return self.heap[v.id]

    # --- expressions -----------------------------------------------------

    def _eval(self, e, env):
        if isinstance(e, IntLit):
            return e.value
        if isinstance(e, NullLit):
            return None
        if isinstance(e, Var):
            if e.name not in env:
                raise _Trap("type_error", f"unassigned variable {e.name!r}")
            return env[e.name]
        if isinstance(e, FieldLoad):
            node = self._node_of(env.get(e.var), e.var)
            return node[_FIELD_INDEX[e.field]]
        if isinstance(e, IsNull):
            if e.var not in env:
                raise _Trap("type_error", f"unassigned variable {e.var!r}")
            return 1 if env[e.var] is None else 0
        if isinstance(e, CallExpr):
            return self._eval_call(e.name, e.args, env)
        if isinstance(e, Binary):
            return self._binary(e.op, self._eval(e.left, env), self._eval(e.right, env))
        raise _Trap("type_error", f"unknown expression {e!r}")

    def _eval_call(self, name, args, env):
        argvals = [self._eval(a, env) for a in args]
        if name == SNAPSHOT_BUILTIN:
            self._capture_snapshot()
            return None
        if name.startswith(ANCHOR_SET_PREFIX):
            self.anchors[name[len(ANCHOR_SET_PREFIX):]] = argvals[0]
            return None
        if name.startswith(ANCHOR_GET_PREFIX):
            return self.anchors.get(name[len(ANCHOR_GET_PREFIX):])
        func = self.functions.get(name)
        if func is None or len(func.params) != len(argvals):
            raise _Trap("type_error", f"bad call to {name!r}")
        return self._call(func, argvals)

    def _capture_snapshot(self):
        if self.snapshot is not None:
            return  # keep the first capture
        nodes = {nid: tuple(flds) for nid, flds in self.heap.items()}
        self.snapshot = HeapSnapshot(nodes=nodes, anchors=dict(self.anchors))

    def _ints(self, op, a, b):
        if not isinstance(a, int) or not isinstance(b, int):
            raise _Trap("type_error", f"operator {op!r} expects integers")
        return a, b

    def _checked(self, v: int) -> int:
        if v < INT_MIN or v > INT_MAX:
            raise _Trap("overflow", "integer overflow")
        return v

    def _binary(self, op, a, b):
        if op == "==":
            return 1 if self._values_equal(a, b) else 0
        if op == "!=":
            return 0 if self._values_equal(a, b) else 1
        if op in ("and", "or"):
            a, b = self._ints(op, a, b)
            if op == "and":
                return 1 if (a != 0 and b != 0) else 0
            return 1 if (a != 0 or b != 0) else 0
        a, b = self._ints(op, a, b)
        if op == "+":
            return self._checked(a + b)
        if op == "-":
            return self._checked(a - b)
        if op == "*":
            return self._checked(a * b)
        if op in ("/", "%"):
            if b == 0:
                raise _Trap("div_zero", "division by zero")
            q = abs(a) // abs(b)
            if (a < 0) != (b < 0):
                q = -q
            if op == "/":
                return self._checked(q)
            return self._checked(a - b * q)
        if op == "<":
            return 1 if a < b else 0
        if op == "<=":
            return 1 if a <= b else 0
        raise _Trap("type_error", f"unknown operator {op!r}")

    @staticmethod
    def _values_equal(a, b) -> bool:
        if isinstance(a, int) and isinstance(b, int):
            return a == b
        if a is None and b is None:
            return True
        if isinstance(a, Ref) and isinstance(b, Ref):
            return a.id == b.id
        return False


def interpret(program: Program, args, limits: Limits = None) -> RunResult:
    """Run program's main on integer args; never raises for runtime faults."""
    return Interpreter(program, limits).run(args)
