"""Constant encoding: replace integer literals with watermark-tree lookups.

Each selected literal's value is mapped to its tree shape and searched for
inside the watermark tree.  On a hit the literal becomes a runtime decode
call that navigates to the matched subtree and re-derives the value from
its shape.  On a miss the value is decomposed with the even/odd splitting
loop (halve while even, decrement while odd) into `even * current + odd`;
the components are then encoded recursively where possible, so at least
part of every constant ends up depending on the tree.

Splitting maintains `original == even * current + odd` after every step.
Note the odd step accumulates the current multiplier (odd += even), not a
bare 1: a unit increment fails to reconstruct once an odd step follows an
even step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from . import ppct
from .minilang import (
    Binary,
    CallExpr,
    Function,
    IntLit,
    Program,
    Stmt,
    If,
    While,
    iter_exprs,
    parse,
)
from .watermark import DEFAULT_ANCHOR, RESERVED_PREFIXES

DEFAULT_SPLIT_DEPTH = 8

DECODE_FN = "__tp_decode"


class EncoderError(ValueError):
    pass


class RewriteError(EncoderError):
    """The plan no longer matches the program's AST."""


# --- constant sites -----------------------------------------------------


@dataclass(frozen=True)
class ConstantSite:
    """Address of one integer literal: function, statement path, and the
    literal's preorder position among the statement's int literals."""

    function: str
    stmt_path: tuple
    literal_index: int
    value: int  # magnitude; sign recorded separately
    negative: bool = False

    @property
    def signed_value(self) -> int:
        return -self.value if self.negative else self.value


@dataclass(frozen=True)
class SelectionPolicy:
    kind: str = "all"  # "all" | "list"
    values: tuple = ()
    include_small: bool = False  # encode 0 and 1 as well

    @classmethod
    def parse(cls, text: str) -> "SelectionPolicy":
        if text == "all":
            return cls("all")
        if text.startswith("list:"):
            vals = tuple(int(v) for v in text[5:].split(",") if v)
            return cls("list", vals)
        raise EncoderError(f"bad policy {text!r} (expected all | list:v1,v2)")

    def render(self) -> str:
        if self.kind == "all":
            return "all"
        return "list:" + ",".join(str(v) for v in self.values)

    def admits(self, value: int) -> bool:
        if not self.include_small and abs(value) <= 1:
            return False
        if self.kind == "list":
            return abs(value) in self.values or value in self.values
        return True


def _walk_stmts(body, prefix):
    """(path, stmt) pairs; path alternates body slots and indices."""
    for i, s in enumerate(body):
        path = prefix + (i,)
        yield path, s
        if isinstance(s, If):
            yield from _walk_stmts(s.then_body, path + ("then",))
            yield from _walk_stmts(s.else_body, path + ("else",))
        elif isinstance(s, While):
            yield from _walk_stmts(s.body, path + ("body",))


def _stmt_literals(s: Stmt):
    """Values of the statement's int literals, in preorder."""
    from .minilang import iter_subexprs

    out = []
    for e in iter_exprs(s):
        for sub in iter_subexprs(e):
            if isinstance(sub, IntLit):
                out.append(sub.value)
    return out


def select_constants(p: Program, policy: SelectionPolicy = None) -> list:
    """Constant sites per policy, in deterministic program order."""
    policy = policy or SelectionPolicy()
    sites = []
    for f in p.functions:
        if f.name.startswith(RESERVED_PREFIXES):
            continue
        for path, s in _walk_stmts(f.body, ()):
            for k, v in enumerate(_stmt_literals(s)):
                if policy.admits(v):
                    sites.append(
                        ConstantSite(f.name, path, k, abs(v), negative=v < 0)
                    )
    return sites


# --- splitting ----------------------------------------------------------


@dataclass(frozen=True)
class Encodable:
    value: int


@dataclass(frozen=True)
class Residual:
    value: int


@dataclass(frozen=True)
class SumOf:
    left: "SplitExpr"
    right: "SplitExpr"


@dataclass(frozen=True)
class ProductOf:
    left: "SplitExpr"
    right: "SplitExpr"


SplitExpr = Union[Encodable, Residual, SumOf, ProductOf]


def eval_split(e: SplitExpr) -> int:
    if isinstance(e, (Encodable, Residual)):
        return e.value
    if isinstance(e, SumOf):
        return eval_split(e.left) + eval_split(e.right)
    if isinstance(e, ProductOf):
        return eval_split(e.left) * eval_split(e.right)
    raise TypeError(f"not a split expression: {e!r}")


def split_constant(
    c: int,
    encodable: Callable[[int], bool],
    max_depth: int = DEFAULT_SPLIT_DEPTH,
    on_step: Callable = None,
) -> SplitExpr:
    """Decompose c over {encodable values, residual literals, +, *}.

    Runs the halving/decrement loop keeping `c == even * current + odd`
    exact at every step (checked), then recursively splits the even and
    odd components.  A component that cannot be reduced within max_depth
    stays behind as a residual literal.
    """
    if c < 0:
        raise EncoderError("split_constant expects a non-negative value")
    if encodable(c):
        return Encodable(c)
    if c <= 1 or max_depth <= 0:
        return Residual(c)

    current, even, odd = c, 1, 0
    while current > 1 and not encodable(current):
        if current % 2 == 0:
            current //= 2
            even *= 2
        else:
            current -= 1
            odd += even
        if even * current + odd != c:
            raise AssertionError("split invariant violated")
        if on_step is not None:
            on_step(c, even, current, odd)

    if current == 1 and odd == 0:
        # fixed point: c is a power of two with no encodable stop, and
        # even == c would recurse forever
        return Residual(c)

    def component(v: int) -> SplitExpr:
        if encodable(v):
            return Encodable(v)
        if v <= 1:
            return Residual(v)
        return split_constant(v, encodable, max_depth - 1, on_step)

    cur_part = Encodable(current) if encodable(current) else Residual(current)
    expr: SplitExpr = cur_part
    if even != 1:
        expr = ProductOf(component(even), expr)
    if odd != 0:
        expr = SumOf(expr, component(odd))
    return expr


# --- planning -----------------------------------------------------------


@dataclass(frozen=True)
class Lookup:
    """Runtime decode of the subtree at `path`; its rank must equal expected."""

    path: tuple
    expected: int

    @property
    def pathcode(self) -> int:
        return ppct.path_to_code(self.path)


PlanExpr = Union[Lookup, Residual, SumOf, ProductOf]


def eval_plan_expr(e: PlanExpr) -> int:
    if isinstance(e, Lookup):
        return e.expected
    if isinstance(e, Residual):
        return e.value
    if isinstance(e, SumOf):
        return eval_plan_expr(e.left) + eval_plan_expr(e.right)
    if isinstance(e, ProductOf):
        return eval_plan_expr(e.left) * eval_plan_expr(e.right)
    raise TypeError(f"not a plan expression: {e!r}")


def _expr_lookups(e: PlanExpr) -> list:
    if isinstance(e, Lookup):
        return [e]
    if isinstance(e, (SumOf, ProductOf)):
        return _expr_lookups(e.left) + _expr_lookups(e.right)
    return []


def _expr_residuals(e: PlanExpr) -> list:
    if isinstance(e, Residual):
        return [e.value]
    if isinstance(e, (SumOf, ProductOf)):
        return _expr_residuals(e.left) + _expr_residuals(e.right)
    return []


def _expr_to_dict(e: PlanExpr) -> dict:
    if isinstance(e, Lookup):
        return {"op": "lookup", "pathcode": e.pathcode, "expected": e.expected}
    if isinstance(e, Residual):
        return {"op": "literal", "value": e.value}
    if isinstance(e, SumOf):
        return {"op": "+", "left": _expr_to_dict(e.left),
                "right": _expr_to_dict(e.right)}
    if isinstance(e, ProductOf):
        return {"op": "*", "left": _expr_to_dict(e.left),
                "right": _expr_to_dict(e.right)}
    raise TypeError(f"not a plan expression: {e!r}")


@dataclass(frozen=True)
class PlanEntry:
    site: ConstantSite
    expr: PlanExpr

    @property
    def protected(self) -> bool:
        return bool(_expr_lookups(self.expr))

    def to_dict(self) -> dict:
        lookups = _expr_lookups(self.expr)
        return {
            "function": self.site.function,
            "stmt_path": list(self.site.stmt_path),
            "literal_index": self.site.literal_index,
            "original": self.site.signed_value,
            "expression": _expr_to_dict(self.expr),
            "pathcodes": [lk.pathcode for lk in lookups],
            "expected": [lk.expected for lk in lookups],
            "residuals": _expr_residuals(self.expr),
            "protected": self.protected,
        }


@dataclass(frozen=True)
class EncodingPlan:
    entries: tuple
    anchor: str = DEFAULT_ANCHOR

    @property
    def lookup_count(self) -> int:
        return sum(len(_expr_lookups(e.expr)) for e in self.entries)

    def to_dict(self) -> dict:
        return {
            "anchor": self.anchor,
            "sites": [e.to_dict() for e in self.entries],
        }


def plan_encoding(
    p: Program,
    wm_tree: ppct.PlaneTree,
    sites,
    anchor: str = DEFAULT_ANCHOR,
    max_depth: int = DEFAULT_SPLIT_DEPTH,
) -> EncodingPlan:
    """Deterministic per-site lookup/split plan against the watermark tree."""
    wm_leaves = ppct.leaf_count(wm_tree)
    match_cache: dict = {}

    def match(v: int):
        if v in match_cache:
            return match_cache[v]
        size = ppct.rank_size(v)
        path = None
        if size is not None and size <= wm_leaves:
            path = ppct.find_substructure(wm_tree, ppct.unrank(v))
        match_cache[v] = path
        return path

    def encodable(v: int) -> bool:
        return match(v) is not None

    def to_plan_expr(e: SplitExpr) -> PlanExpr:
        if isinstance(e, Encodable):
            return Lookup(match(e.value), e.value)
        if isinstance(e, Residual):
            return e
        if isinstance(e, SumOf):
            return SumOf(to_plan_expr(e.left), to_plan_expr(e.right))
        if isinstance(e, ProductOf):
            return ProductOf(to_plan_expr(e.left), to_plan_expr(e.right))
        raise TypeError(f"not a split expression: {e!r}")

    entries = []
    for site in sites:
        split = split_constant(site.value, encodable, max_depth)
        entries.append(PlanEntry(site, to_plan_expr(split)))
    return EncodingPlan(tuple(entries), anchor=anchor)


# --- runtime support ----------------------------------------------------

_SUPPORT_TEMPLATE = """\
fn __tp_nav(root, pc) {{
    h = 1;
    while (((h + h) <= pc)) {{
        h = (h + h);
    }}
    pc = (pc - h);
    h = (h / 2);
    n = root;
    while ((1 <= h)) {{
        b = (pc / h);
        if ((b == 1)) {{
            n = n.right;
            pc = (pc - h);
        }} else {{
            n = n.left;
        }}
        h = (h / 2);
    }}
    return n;
}}

fn __tp_leaves(n) {{
    l = n.left;
    if ((l == n)) {{
        return 1;
    }}
    r = n.right;
    return (__tp_leaves(l) + __tp_leaves(r));
}}

fn __tp_cat(k) {{
    c = 1;
    i = 0;
    while ((i < k)) {{
        c = ((c * ((4 * i) + 2)) / (i + 2));
        i = (i + 1);
    }}
    return c;
}}

fn __tp_local(n) {{
    l = n.left;
    if ((l == n)) {{
        return 0;
    }}
    r = n.right;
    k = __tp_leaves(n);
    i = __tp_leaves(l);
    s = 0;
    j = 1;
    while ((j < i)) {{
        s = (s + (__tp_cat((j - 1)) * __tp_cat(((k - j) - 1))));
        j = (j + 1);
    }}
    s = (s + (__tp_local(l) * __tp_cat(((k - i) - 1))));
    s = (s + __tp_local(r));
    return s;
}}

fn __tp_rank(n) {{
    k = __tp_leaves(n);
    s = 0;
    j = 1;
    while ((j < k)) {{
        s = (s + __tp_cat((j - 1)));
        j = (j + 1);
    }}
    return (s + __tp_local(n));
}}

fn __tp_decode(pc) {{
    root = __anchor_get_{anchor}();
    n = __tp_nav(root, pc);
    return __tp_rank(n);
}}
"""

_support_cache: dict = {}


def gen_runtime_support(anchor: str = DEFAULT_ANCHOR) -> tuple:
    """Fixed decoder functions; byte-identical across programs and plans."""
    cached = _support_cache.get(anchor)
    if cached is None:
        src = _SUPPORT_TEMPLATE.format(anchor=anchor)
        cached = parse(src, check=False).functions
        _support_cache[anchor] = cached
    return cached


# --- rewriting ----------------------------------------------------------


def render_plan_expr(e: PlanExpr, negative: bool = False):
    """Plan expression as a mini-language expression."""
    def render(x: PlanExpr):
        if isinstance(x, Lookup):
            return CallExpr(DECODE_FN, (IntLit(x.pathcode),))
        if isinstance(x, Residual):
            return IntLit(x.value)
        if isinstance(x, SumOf):
            return Binary("+", render(x.left), render(x.right))
        if isinstance(x, ProductOf):
            return Binary("*", render(x.left), render(x.right))
        raise TypeError(f"not a plan expression: {x!r}")

    rendered = render(e)
    if negative:
        rendered = Binary("-", IntLit(0), rendered)
    return rendered


def _replace_stmt_literals(s: Stmt, entries):
    """Replace several int literals of s in one preorder pass.

    Replacement subexpressions are not descended into, so their own int
    literals (pathcodes, residuals) do not disturb the numbering.
    """
    by_index = {e.site.literal_index: e for e in entries}
    counter = [-1]
    remaining = set(by_index)

    def visit(e):
        if isinstance(e, IntLit):
            counter[0] += 1
            entry = by_index.get(counter[0])
            if entry is None:
                return e
            if e.value != entry.site.signed_value:
                raise RewriteError(
                    f"site drift: literal is {e.value}, plan says "
                    f"{entry.site.signed_value}"
                )
            remaining.discard(counter[0])
            return render_plan_expr(entry.expr, entry.site.negative)
        if isinstance(e, Binary):
            left = visit(e.left)
            return Binary(e.op, left, visit(e.right))
        if isinstance(e, CallExpr):
            return CallExpr(e.name, tuple(visit(a) for a in e.args))
        return e

    from dataclasses import replace as dc_replace
    from .minilang import Assign, FieldStore, Print, Return, CallStmt

    if isinstance(s, (Assign, FieldStore, Print, Return)):
        s = dc_replace(s, expr=visit(s.expr))
    elif isinstance(s, CallStmt):
        s = dc_replace(s, args=tuple(visit(a) for a in s.args))
    elif isinstance(s, (If, While)):
        s = dc_replace(s, cond=visit(s.cond))
    if remaining:
        raise RewriteError("site drift: literal index out of range")
    return s


def _rewrite_body(body, rel_sites, prefix):
    out = list(body)
    for i, s in enumerate(out):
        path = prefix + (i,)
        if isinstance(s, If):
            s = If(
                s.cond,
                _rewrite_body(s.then_body, rel_sites, path + ("then",)),
                _rewrite_body(s.else_body, rel_sites, path + ("else",)),
            )
            out[i] = s
        elif isinstance(s, While):
            s = While(s.cond, _rewrite_body(s.body, rel_sites, path + ("body",)))
            out[i] = s
        entries = rel_sites.get(path)
        if entries:
            out[i] = _replace_stmt_literals(out[i], entries)
    return tuple(out)


def rewrite(p: Program, plan: EncodingPlan) -> Program:
    """Apply the plan; appends the runtime support functions when any
    lookup is planned.  Raises RewriteError on site drift."""
    by_function: dict = {}
    for entry in plan.entries:
        by_function.setdefault(entry.site.function, {}).setdefault(
            entry.site.stmt_path, []
        ).append(entry)

    unknown = set(by_function) - {f.name for f in p.functions}
    if unknown:
        raise RewriteError(f"site drift: no such function(s) {sorted(unknown)}")

    functions = []
    for f in p.functions:
        rel = by_function.get(f.name)
        if rel:
            present = {path for path, _ in _walk_stmts(f.body, ())}
            missing = set(rel) - present
            if missing:
                raise RewriteError(
                    f"site drift: {f.name} has no statement at "
                    f"{sorted(missing)}"
                )
            f = Function(f.name, f.params, _rewrite_body(f.body, rel, ()))
        functions.append(f)

    if plan.lookup_count:
        functions.extend(gen_runtime_support(plan.anchor))
    return Program(tuple(functions))


def protect(
    p: Program,
    wm_tree: ppct.PlaneTree,
    policy: SelectionPolicy = None,
    anchor: str = DEFAULT_ANCHOR,
    max_depth: int = DEFAULT_SPLIT_DEPTH,
):
    """Select, plan, and rewrite in one step; returns (program, plan)."""
    sites = select_constants(p, policy)
    plan = plan_encoding(p, wm_tree, sites, anchor=anchor, max_depth=max_depth)
    return rewrite(p, plan), plan
