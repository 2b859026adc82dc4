"""Plane-tree shapes, the integer <-> tree bijection, and heap recognition.

A plane tree is represented as nested tuples: a leaf is the empty tuple
``()`` and an internal node is a pair ``(left, right)``.  Every internal
node has exactly two ordered children, so a tree with k leaves has k - 1
internal nodes and there are catalan(k - 1) distinct shapes of size k.

The global ranking orders trees by leaf count (1, 2, 3, ...) and, within
one size, recursively by (left-subtree leaf count, rank of left, rank of
right).  rank/unrank are exact inverses over all non-negative integers.
"""

from __future__ import annotations

from bisect import bisect_right
from typing import Iterator, Optional

PlaneTree = tuple
LEAF: PlaneTree = ()

#: default ceiling on tree sizes produced by unrank (leaves)
DEFAULT_MAX_LEAVES = 64

# sizes small enough to keep (size, local_rank) -> tree singletons around
_CACHE_MAX_LEAVES = 13


class TreeSizeError(ValueError):
    """The requested tree exceeds the configured maximum leaf count."""


_catalans: list[int] = [1]


def catalan(k: int) -> int:
    """k-th Catalan number; catalan(0) == 1."""
    if k < 0:
        raise ValueError("catalan index must be non-negative")
    while len(_catalans) <= k:
        n = len(_catalans) - 1
        _catalans.append(_catalans[-1] * (4 * n + 2) // (n + 2))
    return _catalans[k]


def is_leaf(t: PlaneTree) -> bool:
    return t == ()


def node(left: PlaneTree, right: PlaneTree) -> PlaneTree:
    return (left, right)


def leaf_count(t: PlaneTree) -> int:
    if not t:
        return 1
    return leaf_count(t[0]) + leaf_count(t[1])


def internal_count(t: PlaneTree) -> int:
    return leaf_count(t) - 1


def validate_tree(t) -> None:
    """Raise ValueError unless t is a well-formed plane tree."""
    stack = [t]
    while stack:
        cur = stack.pop()
        if not isinstance(cur, tuple) or len(cur) not in (0, 2):
            raise ValueError(f"not a plane tree node: {cur!r}")
        if cur:
            stack.append(cur[0])
            stack.append(cur[1])


def shape_equal(a: PlaneTree, b: PlaneTree) -> bool:
    """True iff a and b are identical as ordered trees."""
    return a == b


# --- ranking -----------------------------------------------------------

# _cum[i] = number of trees with at most i+1 leaves
_cum: list[int] = []

# per size k: prefix[i] = number of size-k trees whose left subtree has
# fewer than i+1 leaves (used for the within-size split ordering)
_split_prefix: dict[int, list[int]] = {}


def _cum_counts(upto: int) -> list[int]:
    while len(_cum) < upto:
        k = len(_cum) + 1
        prev = _cum[-1] if _cum else 0
        _cum.append(prev + catalan(k - 1))
    return _cum


def _splits(k: int) -> list[int]:
    pre = _split_prefix.get(k)
    if pre is None:
        pre = [0]
        for i in range(1, k):
            pre.append(pre[-1] + catalan(i - 1) * catalan(k - i - 1))
        _split_prefix[k] = pre
    return pre


_tree_cache: dict[tuple[int, int], PlaneTree] = {}


def _local_unrank(k: int, r: int) -> PlaneTree:
    """r-th tree (0-based) among the catalan(k-1) shapes with k leaves."""
    if k == 1:
        return LEAF
    cached = _tree_cache.get((k, r)) if k <= _CACHE_MAX_LEAVES else None
    if cached is not None:
        return cached
    pre = _splits(k)
    i = bisect_right(pre, r) - 1  # left subtree leaf count is i + 1... see below
    # pre is indexed so that split with left size i covers [pre[i-1], pre[i])
    # bisect gives the largest index with pre[idx] <= r; left size = idx + 1
    left_size = i + 1
    rem = r - pre[i]
    right_count = catalan(k - left_size - 1)
    left = _local_unrank(left_size, rem // right_count)
    right = _local_unrank(k - left_size, rem % right_count)
    t = (left, right)
    if k <= _CACHE_MAX_LEAVES:
        _tree_cache[(k, r)] = t
    return t


_rank_cache: dict[PlaneTree, int] = {}


def _local_rank(t: PlaneTree, k: int) -> int:
    if k == 1:
        return 0
    small = k <= _CACHE_MAX_LEAVES
    if small:
        cached = _rank_cache.get(t)
        if cached is not None:
            return cached
    left, right = t
    i = leaf_count(left)
    pre = _splits(k)
    r = (
        pre[i - 1]
        + _local_rank(left, i) * catalan(k - i - 1)
        + _local_rank(right, k - i)
    )
    if small:
        _rank_cache[t] = r
    return r


def unrank(n: int, max_leaves: int = DEFAULT_MAX_LEAVES) -> PlaneTree:
    """Tree of global rank n; unrank(0) is the single leaf."""
    if n < 0:
        raise ValueError("rank must be non-negative")
    cum = _cum_counts(max_leaves)
    if n >= cum[max_leaves - 1]:
        raise TreeSizeError(
            f"rank {n} needs a tree with more than {max_leaves} leaves"
        )
    k = bisect_right(cum, n, 0, max_leaves) + 1
    base = cum[k - 2] if k >= 2 else 0
    return _local_unrank(k, n - base)


def rank(t: PlaneTree) -> int:
    """Global rank of t; inverse of unrank."""
    k = leaf_count(t)
    base = _cum_counts(k)[k - 2] if k >= 2 else 0
    return base + _local_rank(t, k)


def tree_count_upto(max_leaves: int) -> int:
    """Number of distinct shapes with at most max_leaves leaves."""
    return _cum_counts(max_leaves)[max_leaves - 1]


def rank_size(n: int, max_leaves: int = DEFAULT_MAX_LEAVES) -> Optional[int]:
    """Leaf count of unrank(n), or None when it exceeds max_leaves."""
    if n < 0:
        raise ValueError("rank must be non-negative")
    cum = _cum_counts(max_leaves)
    if n >= cum[max_leaves - 1]:
        return None
    return bisect_right(cum, n, 0, max_leaves) + 1


# --- serialization -----------------------------------------------------


def to_paren(t: PlaneTree) -> str:
    """Canonical parenthesis form: leaf '*', internal '(' left right ')'."""
    if not t:
        return "*"
    return "(" + to_paren(t[0]) + to_paren(t[1]) + ")"


def from_paren(s: str) -> PlaneTree:
    pos = 0

    def parse() -> PlaneTree:
        nonlocal pos
        if pos >= len(s):
            raise ValueError("unexpected end of tree text")
        ch = s[pos]
        pos += 1
        if ch == "*":
            return LEAF
        if ch != "(":
            raise ValueError(f"unexpected character {ch!r} at {pos - 1}")
        left = parse()
        right = parse()
        if pos >= len(s) or s[pos] != ")":
            raise ValueError(f"expected ')' at {pos}")
        pos += 1
        return (left, right)

    t = parse()
    if pos != len(s):
        raise ValueError(f"trailing characters at {pos}")
    return t


# --- paths and subtree search ------------------------------------------

TreePath = tuple  # of "L" / "R" steps


def subtree_at(t: PlaneTree, path: TreePath) -> PlaneTree:
    for step in path:
        if not t:
            raise ValueError("path steps off a leaf")
        t = t[0] if step == "L" else t[1]
    return t


def iter_subtrees(t: PlaneTree) -> Iterator[tuple[TreePath, PlaneTree]]:
    """All (path, subtree) pairs of t in preorder."""
    stack = [((), t)]
    while stack:
        path, cur = stack.pop()
        yield path, cur
        if cur:
            stack.append((path + ("R",), cur[1]))
            stack.append((path + ("L",), cur[0]))


def find_substructure(haystack: PlaneTree, needle: PlaneTree) -> Optional[TreePath]:
    """Path to the first (preorder) node whose full subtree equals needle.

    The match is against the complete rooted subtree, never a prefix, so a
    decoder reading the whole subtree recovers exactly the intended value.
    """
    nk = leaf_count(needle)

    def search(t: PlaneTree, path: tuple) -> Optional[TreePath]:
        if t == needle:
            return path
        if not t or leaf_count(t) <= nk:
            return None
        return search(t[0], path + ("L",)) or search(t[1], path + ("R",))

    return search(haystack, ())


def path_to_code(path: TreePath) -> int:
    """Pack a path as an integer: leading 1, then one bit per step (R=1)."""
    code = 1
    for step in path:
        code = code * 2 + (1 if step == "R" else 0)
    return code


def code_to_path(code: int) -> TreePath:
    if code < 1:
        raise ValueError("path code must be >= 1")
    bits = bin(code)[3:]  # strip '0b' and the leading 1
    return tuple("R" if b == "1" else "L" for b in bits)


# --- heap recognition --------------------------------------------------


def recognize_heap_ppct(nodes, root) -> Optional[PlaneTree]:
    """Validate a PPCT rooted at `root` in a heap snapshot and derive its shape.

    `nodes` maps node id -> (left, right, data) where left/right are node
    ids or None; the data field is ignored.  A leaf points to itself via
    its left field and the leaf right fields form one circular list over
    all leaves in left-to-right order.  Returns the shape or None.
    """
    if root not in nodes:
        return None

    leaves: list = []
    seen: set = set()

    def walk(nid) -> Optional[PlaneTree]:
        if nid is None or nid not in nodes or nid in seen:
            return None
        left, right, _ = nodes[nid]
        if left == nid:  # leaf: self-loop on the left field
            leaves.append(nid)
            return LEAF
        seen.add(nid)
        if left is None or right is None:
            return None
        ls = walk(left)
        if ls is None:
            return None
        rs = walk(right)
        if rs is None:
            return None
        return (ls, rs)

    shape = walk(root)
    if shape is None:
        return None
    # leaves were collected left-to-right; their right fields must chain
    # each leaf to the next, wrapping around at the end
    n = len(leaves)
    leaf_set = set(leaves)
    if len(leaf_set) != n:
        return None
    for i, nid in enumerate(leaves):
        _, right, _ = nodes[nid]
        if right != leaves[(i + 1) % n]:
            return None
    return shape
