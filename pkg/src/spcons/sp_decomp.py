"""Two-terminal series-parallel decomposition trees.

A tree is built from 1-path leaves with :func:`leaf`, :func:`series` and
:func:`parallel`. Joins are O(1); the flat post-order layout used by the tree
passes (:class:`Arena`) is compiled lazily and cached.

Orientation is only used to decide which terminals merge: a series join
identifies the sink of its left child with the source of its right child, a
parallel join identifies sources with sources and sinks with sinks. Edges
themselves are undirected.
"""

from __future__ import annotations

import math
import re
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import Disconnected, NonPositiveWeight, NotSeriesParallel, ParseError, SelfLoop
from .graph_core import WeightedGraph

__all__ = [
    "LEAF",
    "SERIES",
    "PARALLEL",
    "Leaf",
    "Join",
    "DecompTree",
    "Arena",
    "TreeStats",
    "Realization",
    "leaf",
    "series",
    "parallel",
    "realize",
    "realization",
    "decompose",
    "tree_stats",
    "reversed_tree",
    "to_sexpr",
    "from_sexpr",
]

LEAF, SERIES, PARALLEL = 0, 1, 2
_NO_EDGE = math.inf


@dataclass(frozen=True, eq=False)
class Leaf:
    u: int
    v: int
    w: float
    edge_id: int | None = None

    @property
    def size(self) -> int:
        return 1

    @property
    def min_edge(self) -> float:
        return _NO_EDGE if self.edge_id is None else self.edge_id


@dataclass(frozen=True, eq=False)
class Join:
    kind: int
    left: "Leaf | Join"
    right: "Leaf | Join"
    size: int
    min_edge: float


def _join(kind, a, b):
    return Join(kind, a, b, a.size + b.size, min(a.min_edge, b.min_edge))


class Arena(NamedTuple):
    """Post-order layout of a tree: children always precede their parent.

    Leaf-only columns hold ``-1`` / ``nan`` at join rows. ``depth`` is the
    distance from the root; the root is the last row.
    """

    kind: np.ndarray
    left: np.ndarray
    right: np.ndarray
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    edge_id: np.ndarray
    height: np.ndarray
    depth: np.ndarray

    @property
    def root(self) -> int:
        return len(self.kind) - 1

    @property
    def leaves(self) -> np.ndarray:
        return np.flatnonzero(self.kind == LEAF)


def _compile(root) -> Arena:
    # a value stack rather than an id() map: subtrees may be shared objects
    rows: list = []
    kids: list[tuple[int, int]] = []
    done: list[int] = []
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if isinstance(node, Leaf):
            rows.append(node)
            kids.append((-1, -1))
            done.append(len(rows) - 1)
        elif expanded:
            b, a = done.pop(), done.pop()
            rows.append(node)
            kids.append((a, b))
            done.append(len(rows) - 1)
        else:
            stack += [(node, True), (node.right, False), (node.left, False)]
    n = len(rows)
    kind = np.zeros(n, dtype=np.int8)
    left = np.full(n, -1, dtype=np.int64)
    right = np.full(n, -1, dtype=np.int64)
    u = np.full(n, -1, dtype=np.int64)
    v = np.full(n, -1, dtype=np.int64)
    w = np.full(n, np.nan)
    eid = np.full(n, -1, dtype=np.int64)
    height = np.zeros(n, dtype=np.int64)
    for i, node in enumerate(rows):
        if isinstance(node, Leaf):
            u[i], v[i], w[i] = node.u, node.v, node.w
            if node.edge_id is not None:
                eid[i] = node.edge_id
        else:
            a, b = kids[i]
            kind[i], left[i], right[i] = node.kind, a, b
            height[i] = 1 + max(height[a], height[b])
    depth = np.zeros(n, dtype=np.int64)
    for i in range(n - 1, -1, -1):
        if kind[i] != LEAF:
            depth[left[i]] = depth[right[i]] = depth[i] + 1
    return Arena(kind, left, right, u, v, w, eid, height, depth)


class DecompTree:
    """Immutable complete binary tree of 1-paths and series/parallel joins."""

    __slots__ = ("root", "__dict__")

    def __init__(self, root: Leaf | Join):
        self.root = root

    @cached_property
    def arena(self) -> Arena:
        return _compile(self.root)

    @property
    def n_leaves(self) -> int:
        return self.root.size

    @property
    def height(self) -> int:
        return int(self.arena.height[-1])

    def stats(self) -> "TreeStats":
        return tree_stats(self)

    def __repr__(self):
        return f"DecompTree(leaves={self.n_leaves}, height={self.height})"


# -- construction -------------------------------------------------------------


def leaf(u: int, v: int, w: float, edge_id: int | None = None) -> DecompTree:
    """Single 1-path from ``u`` (source) to ``v`` (sink) with conductance ``w``."""
    if u == v:
        raise SelfLoop(f"1-path needs two distinct vertices, got {u} twice")
    if not w > 0:
        raise NonPositiveWeight(f"leaf weight must be positive, got {w!r}")
    return DecompTree(Leaf(int(u), int(v), float(w), edge_id))


def series(t1: DecompTree, t2: DecompTree) -> DecompTree:
    """Series join: sink of ``t1`` is identified with source of ``t2``."""
    return DecompTree(_join(SERIES, t1.root, t2.root))


def parallel(t1: DecompTree, t2: DecompTree) -> DecompTree:
    """Parallel join: sources identified, sinks identified."""
    return DecompTree(_join(PARALLEL, t1.root, t2.root))


def _reverse_node(root):
    """Swap source and sink of a subtree without recursion."""
    done = []
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if isinstance(node, Leaf):
            done.append(Leaf(node.v, node.u, node.w, node.edge_id))
        elif expanded:
            b, a = done.pop(), done.pop()
            if node.kind == SERIES:
                a, b = b, a
            done.append(Join(node.kind, a, b, node.size, node.min_edge))
        else:
            stack += [(node, True), (node.right, False), (node.left, False)]
    return done[0]


def reversed_tree(t: DecompTree) -> DecompTree:
    """Same graph with source and sink exchanged."""
    return DecompTree(_reverse_node(t.root))


# -- statistics ---------------------------------------------------------------


@dataclass(frozen=True)
class TreeStats:
    leaves: int
    parallel_joins: int
    series_joins: int
    tree_nodes: int
    height: int
    realized_nodes: int
    realized_edges: int

    def height_bounds_by_edges(self) -> tuple[float, float]:
        E = self.realized_edges
        return math.log2(E), E - 1

    def height_bounds_by_nodes(self, corrected: bool = True) -> tuple[float, float]:
        """Height bounds in terms of realized nodes and join counts.

        Both forms share the upper bound ``(N + 2p + s)/2 - 1``. The corrected
        lower bound is ``log2(N + 2p + s) - 1`` (equal to ``log2(l)``). With
        ``corrected=False`` the lower bound is ``log2(N + 2p - s)``, which is
        violated whenever the tree is shallow relative to its parallel joins,
        e.g. a single parallel join of two leaves.
        """
        N, p, s = self.realized_nodes, self.parallel_joins, self.series_joins
        upper = (N + 2 * p + s) / 2 - 1
        if corrected:
            return math.log2(N + 2 * p + s) - 1, upper
        return math.log2(N + 2 * p - s), upper

    def bounds_hold(self, corrected: bool = True) -> bool:
        h = self.height
        lo_e, hi_e = self.height_bounds_by_edges()
        lo_n, hi_n = self.height_bounds_by_nodes(corrected)
        eps = 1e-12
        return lo_e - eps <= h <= hi_e + eps and lo_n - eps <= h <= hi_n + eps


def tree_stats(t: DecompTree) -> TreeStats:
    """Exact counts, height and realized graph size of a tree."""
    kind = t.arena.kind
    l = int(np.count_nonzero(kind == LEAF))
    p = int(np.count_nonzero(kind == PARALLEL))
    s = int(np.count_nonzero(kind == SERIES))
    return TreeStats(
        leaves=l,
        parallel_joins=p,
        series_joins=s,
        tree_nodes=len(kind),
        height=t.height,
        realized_nodes=2 * l - 2 * p - s,
        realized_edges=l,
    )


# -- realization --------------------------------------------------------------


class Realization(NamedTuple):
    graph: WeightedGraph
    source: int
    sink: int
    terminals: np.ndarray  # (n_tree_nodes, 2): source/sink graph node per tree node


def _fresh_terminals(ar: Arena) -> np.ndarray:
    n = len(ar.kind)
    term = np.empty((n, 2), dtype=np.int64)
    term[-1] = (0, 1)
    nxt = 2
    for i in range(n - 1, -1, -1):
        k = ar.kind[i]
        if k == SERIES:
            a, b = term[i]
            term[ar.left[i]] = (a, nxt)
            term[ar.right[i]] = (nxt, b)
            nxt += 1
        elif k == PARALLEL:
            term[ar.left[i]] = term[i]
            term[ar.right[i]] = term[i]
    return term


def _label_map(ar: Arena, term: np.ndarray) -> dict | None:
    mapping = {}
    for i in ar.leaves:
        for fresh, label in ((term[i, 0], ar.u[i]), (term[i, 1], ar.v[i])):
            if mapping.setdefault(int(fresh), int(label)) != label:
                return None
    if len(set(mapping.values())) != len(mapping):
        return None
    return mapping


def realization(t: DecompTree, keep_labels: bool | None = None) -> Realization:
    """Build the multigraph of ``t`` and the terminals of every tree node.

    ``keep_labels=None`` keeps the leaves' node labels when they describe the
    realized graph consistently (as for trees returned by :func:`decompose` or
    parsed from text) and otherwise numbers nodes afresh: 0 is the source, 1 the
    sink, remaining nodes in pre-order of the series joins that create them.
    """
    ar = t.arena
    term = _fresh_terminals(ar)
    if keep_labels is not False:
        mapping = _label_map(ar, term)
        if mapping is None:
            if keep_labels:
                raise ValueError("leaf labels are inconsistent with the tree structure")
        else:
            term = np.vectorize(mapping.__getitem__, otypes=[np.int64])(term)
    leaves = ar.leaves
    ids = ar.edge_id[leaves]
    if np.any(ids < 0) or len(np.unique(ids)) != len(ids):
        ids = np.arange(len(leaves))
    edges = [
        (int(e), int(term[i, 0]), int(term[i, 1]), float(ar.w[i]))
        for e, i in zip(ids, leaves)
    ]
    g = WeightedGraph((), edges)
    return Realization(g, int(term[-1, 0]), int(term[-1, 1]), term)


def realize(t: DecompTree, keep_labels: bool | None = None):
    """Return ``(graph, source, sink)`` for the series-parallel graph of ``t``."""
    r = realization(t, keep_labels)
    return r.graph, r.source, r.sink


# -- recognition --------------------------------------------------------------


class _Arc:
    __slots__ = ("a", "b", "node")

    def __init__(self, a, b, node):
        self.a, self.b, self.node = a, b, node


def decompose(g: WeightedGraph, source: int, sink: int) -> DecompTree:
    """Decompose ``g`` into a tree with the given terminals.

    Repeatedly merges parallel edges and splices out non-terminal vertices of
    degree two. The graph is two-terminal series-parallel exactly when this
    ends at a single source-sink edge. Parallel children are ordered by the
    smallest edge id they contain, so the result is deterministic.

    Raises
    ------
    Disconnected
        If ``g`` is not connected.
    NotSeriesParallel
        If the reduction gets stuck; the exception carries the size of the
        stuck reduced graph.
    """
    if source not in g or sink not in g:
        raise ValueError("terminals must be nodes of the graph")
    if source == sink:
        raise ValueError("source and sink must differ")
    if not g.is_connected():
        raise Disconnected("graph is not connected")

    adj: dict[int, dict[int, _Arc]] = {n: {} for n in g.nodes}

    def orient(arc, a):
        """Subtree of ``arc`` and a flag telling whether it runs from ``a``."""
        return arc.node, arc.a == a

    def add(a, b, node):
        arc = adj[a].get(b)
        if arc is None:
            arc = _Arc(a, b, node)
            adj[a][b] = adj[b][a] = arc
            return
        old = arc.node
        if arc.a != a:
            # orientations disagree: reverse the smaller piece
            if node.size <= old.size:
                node = _reverse_node(node)
            else:
                old = _reverse_node(old)
                arc.a, arc.b = a, b
        first, second = (old, node) if old.min_edge <= node.min_edge else (node, old)
        arc.node = _join(PARALLEL, first, second)

    for e in g.edges:
        add(e.u, e.v, Leaf(e.u, e.v, e.w, e.id))

    terminals = (source, sink)
    queue = deque(n for n in g.nodes if n not in terminals and len(adj[n]) == 2)
    while queue:
        m = queue.popleft()
        if m not in adj or len(adj[m]) != 2:
            continue
        a, b = sorted(adj[m])
        t1, fwd1 = orient(adj[m][a], a)  # fwd1: runs a -> m
        t2, fwd2 = orient(adj[m][b], m)  # fwd2: runs m -> b
        # a->b needs every "not forward" piece reversed; b->a the complement
        cost_ab = (0 if fwd1 else t1.size) + (0 if fwd2 else t2.size)
        cost_ba = (t1.size if fwd1 else 0) + (t2.size if fwd2 else 0)
        if cost_ab <= cost_ba:
            t1 = t1 if fwd1 else _reverse_node(t1)
            t2 = t2 if fwd2 else _reverse_node(t2)
            ends, node = (a, b), _join(SERIES, t1, t2)
        else:
            t1 = _reverse_node(t1) if fwd1 else t1
            t2 = _reverse_node(t2) if fwd2 else t2
            ends, node = (b, a), _join(SERIES, t2, t1)
        del adj[a][m], adj[b][m], adj[m]
        add(ends[0], ends[1], node)
        for x in (a, b):
            if x not in terminals and len(adj[x]) == 2:
                queue.append(x)

    arc = adj[source].get(sink)
    if len(adj) != 2 or arc is None:
        n_edges = sum(len(nb) for nb in adj.values()) // 2
        raise NotSeriesParallel(
            f"reduction stalled with {len(adj)} nodes and {n_edges} edges",
            remaining_nodes=len(adj),
            remaining_edges=n_edges,
        )
    node = arc.node if arc.a == source else _reverse_node(arc.node)
    return DecompTree(node)


# -- text format --------------------------------------------------------------

_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def to_sexpr(t: DecompTree) -> str:
    """Render as ``(e u v w)`` / ``(S a b)`` / ``(P a b)`` with 17 significant digits."""
    out = []
    stack = [t.root]
    while stack:
        node = stack.pop()
        if isinstance(node, str):
            out.append(node)
        elif isinstance(node, Leaf):
            out.append(f"(e {node.u} {node.v} {node.w:.17g})")
        else:
            out.append("(S " if node.kind == SERIES else "(P ")
            stack.extend([")", node.right, " ", node.left])
    return "".join(out)


def from_sexpr(text: str) -> DecompTree:
    """Parse the s-expression tree format; leaves get edge ids in reading order."""
    tokens = _TOKEN.findall(text)
    if not tokens:
        raise ParseError("empty tree")
    frames: list[list] = []  # each: [tag, children...]
    result = None
    n_leaves = 0
    pos = 0
    while pos < len(tokens):
        tok = tokens[pos]
        if result is not None:
            raise ParseError(f"trailing tokens after tree: {tok!r}")
        if tok == "(":
            if pos + 1 >= len(tokens):
                raise ParseError("unexpected end of input")
            tag = tokens[pos + 1]
            if tag == "e":
                try:
                    u, v, w, close = tokens[pos + 2 : pos + 6]
                    if close != ")":
                        raise ValueError
                    node = leaf(int(u), int(v), float(w), n_leaves).root
                except ValueError as exc:
                    if isinstance(exc, (SelfLoop, NonPositiveWeight)):
                        raise
                    raise ParseError(f"malformed leaf near token {pos}") from None
                n_leaves += 1
                pos += 6
                if frames:
                    frames[-1].append(node)
                else:
                    result = node
                continue
            if tag not in ("S", "P"):
                raise ParseError(f"unknown node tag {tag!r}")
            frames.append([SERIES if tag == "S" else PARALLEL])
            pos += 2
        elif tok == ")":
            if not frames:
                raise ParseError("unbalanced ')'")
            frame = frames.pop()
            if len(frame) != 3:
                raise ParseError("joins take exactly two children")
            node = _join(frame[0], frame[1], frame[2])
            if frames:
                frames[-1].append(node)
            else:
                result = node
            pos += 1
        else:
            raise ParseError(f"unexpected token {tok!r}")
    if frames or result is None:
        raise ParseError("unexpected end of input")
    return DecompTree(result)
