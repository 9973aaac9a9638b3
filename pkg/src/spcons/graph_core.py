"""Weighted multigraphs, Laplacian assembly and the grounded leader-follower system.

Follower graphs are stored on their own; leaders never appear as graph nodes.
Each leader attaches with a unit-weight edge to exactly one follower (its
*input* node), so the dynamics matrix is

    A = -(L_followers + sum_{i in inputs} e_i e_i^T),

which is symmetric negative definite whenever the follower graph is connected
and at least one input exists.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import Disconnected, EmptyInputSet, NonPositiveWeight, SelfLoop

__all__ = [
    "Edge",
    "WeightedGraph",
    "LeaderFollowerSystem",
    "build_graph",
    "laplacian",
    "incidence",
    "grounded_matrix",
]


class Edge(NamedTuple):
    id: int
    u: int
    v: int
    w: float


def _check_edge(u, v, w):
    if u == v:
        raise SelfLoop(f"self-loop at node {u}")
    if not w > 0:
        raise NonPositiveWeight(f"edge ({u}, {v}) has non-positive weight {w!r}")


class WeightedGraph:
    """Undirected weighted multigraph with positive edge weights.

    Structure (nodes, edge ids, endpoints) is fixed at construction. Weights can
    be replaced through :meth:`set_weights`, which validates positivity and is
    serialized by an internal lock; everything else is read-only.

    Parameters
    ----------
    nodes : iterable of int
        Node ids. Endpoints of ``edges`` are added automatically.
    edges : iterable of (edge_id, u, v, w)
        Parallel edges are allowed as long as their ids differ.
    """

    def __init__(self, nodes: Iterable[int], edges: Iterable[Sequence]):
        node_set = {int(n) for n in nodes}
        ids, us, vs, ws = [], [], [], []
        for eid, u, v, w in edges:
            u, v, w = int(u), int(v), float(w)
            _check_edge(u, v, w)
            ids.append(int(eid))
            us.append(u)
            vs.append(v)
            ws.append(w)
            node_set.update((u, v))
        if len(set(ids)) != len(ids):
            raise ValueError("edge ids must be unique")
        self._nodes = tuple(sorted(node_set))
        self._index = {n: i for i, n in enumerate(self._nodes)}
        self._ids = np.array(ids, dtype=np.int64)
        self._u = np.array(us, dtype=np.int64)
        self._v = np.array(vs, dtype=np.int64)
        self._w = np.array(ws, dtype=float)
        self._lock = threading.Lock()

    # -- read access -----------------------------------------------------
    @property
    def nodes(self) -> tuple[int, ...]:
        """Sorted node ids; row/column order of every assembled matrix."""
        return self._nodes

    @property
    def edges(self) -> list[Edge]:
        return [
            Edge(int(i), int(u), int(v), float(w))
            for i, u, v, w in zip(self._ids, self._u, self._v, self._w)
        ]

    @property
    def edge_ids(self) -> np.ndarray:
        return self._ids.copy()

    @property
    def weights(self) -> np.ndarray:
        return self._w.copy()

    @property
    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        """Row indices (not node ids) of the two endpoints of every edge."""
        idx = self._index
        return (
            np.array([idx[u] for u in self._u], dtype=np.int64),
            np.array([idx[v] for v in self._v], dtype=np.int64),
        )

    @property
    def n_nodes(self) -> int:
        return len(self._nodes)

    @property
    def n_edges(self) -> int:
        return len(self._ids)

    def index(self, node: int) -> int:
        return self._index[node]

    def __contains__(self, node) -> bool:
        return node in self._index

    def __repr__(self):
        return f"WeightedGraph(n_nodes={self.n_nodes}, n_edges={self.n_edges})"

    def neighbors(self, node: int) -> set[int]:
        out = set(self._v[self._u == node].tolist())
        out.update(self._u[self._v == node].tolist())
        return out

    def is_connected(self) -> bool:
        n = self.n_nodes
        if n <= 1:
            return True
        iu, iv = self.endpoints
        adj = coo_matrix((np.ones(len(iu)), (iu, iv)), shape=(n, n))
        ncomp, _ = connected_components(adj, directed=False)
        return ncomp == 1

    # -- mutation --------------------------------------------------------
    def set_weights(self, weights) -> None:
        """Replace all edge weights (ordered like :attr:`edges`)."""
        w = np.asarray(weights, dtype=float).reshape(-1)
        if w.shape != self._w.shape:
            raise ValueError(f"expected {self._w.size} weights, got {w.size}")
        if not np.all(w > 0):
            raise NonPositiveWeight("all weights must be strictly positive")
        with self._lock:
            self._w = w.copy()

    def set_weight(self, edge_id: int, w: float) -> None:
        pos = np.flatnonzero(self._ids == edge_id)
        if pos.size == 0:
            raise KeyError(edge_id)
        new = self._w.copy()
        new[pos[0]] = w
        self.set_weights(new)

    def with_weights(self, weights) -> "WeightedGraph":
        g = WeightedGraph(self._nodes, zip(self._ids, self._u, self._v, self._w))
        g.set_weights(weights)
        return g

    # -- assembly --------------------------------------------------------
    def laplacian(self) -> np.ndarray:
        return laplacian(self)

    def incidence(self) -> np.ndarray:
        return incidence(self)


def build_graph(edge_list, nodes=None) -> WeightedGraph:
    """Build a graph from ``(u, v, w)`` triples; edge ids follow input order.

    >>> g = build_graph([(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])
    >>> float(np.trace(g.laplacian()))
    6.0
    """
    edges = [(i, u, v, w) for i, (u, v, w) in enumerate(edge_list)]
    return WeightedGraph(nodes if nodes is not None else (), edges)


def incidence(g: WeightedGraph) -> np.ndarray:
    """Node-by-edge incidence matrix with column ``e_u - e_v`` per edge."""
    iu, iv = g.endpoints
    E = np.zeros((g.n_nodes, g.n_edges))
    cols = np.arange(g.n_edges)
    E[iu, cols] = 1.0
    E[iv, cols] = -1.0
    return E


def laplacian(g: WeightedGraph) -> np.ndarray:
    """Weighted Laplacian ``sum_e w_e a_e a_e^T`` accumulated edge by edge."""
    iu, iv = g.endpoints
    w = g.weights
    L = np.zeros((g.n_nodes, g.n_nodes))
    np.add.at(L, (iu, iu), w)
    np.add.at(L, (iv, iv), w)
    np.add.at(L, (iu, iv), -w)
    np.add.at(L, (iv, iu), -w)
    return L


@dataclass
class LeaderFollowerSystem:
    """Follower graph plus the follower nodes that leaders attach to.

    Leader ``k`` is attached by a unit-weight edge to ``inputs[k]``. Leaders are
    opaque; only their count and attachment points matter.
    """

    followers: WeightedGraph
    inputs: list[int]
    leaders: list = field(default=None)

    def __post_init__(self):
        self.inputs = [int(i) for i in self.inputs]
        if len(set(self.inputs)) != len(self.inputs):
            raise ValueError("each leader must attach to a distinct input node")
        missing = [i for i in self.inputs if i not in self.followers]
        if missing:
            raise ValueError(f"input nodes {missing} are not follower nodes")
        if self.leaders is None:
            self.leaders = list(range(len(self.inputs)))
        elif len(self.leaders) != len(self.inputs):
            raise ValueError("need exactly one input node per leader")

    @property
    def n_followers(self) -> int:
        return self.followers.n_nodes

    def input_matrix(self) -> np.ndarray:
        """B: one indicator column per input node, rows in follower order."""
        B = np.zeros((self.followers.n_nodes, len(self.inputs)))
        for k, s in enumerate(self.inputs):
            B[self.followers.index(s), k] = 1.0
        return B

    def ground_node(self) -> int:
        """Id used for the single node that all leaders are identified into."""
        return max(self.followers.nodes) + 1

    def grounded_graph(self) -> tuple[WeightedGraph, int]:
        """Followers plus one node ``l`` standing in for the identified leaders.

        Follower edges keep their ids; the unit leader edges ``(s, l)`` get ids
        following the largest follower edge id, in input order.
        """
        g = self.followers
        ground = self.ground_node()
        start = int(g.edge_ids.max()) + 1 if g.n_edges else 0
        edges = [tuple(e) for e in g.edges]
        edges += [(start + k, s, ground, 1.0) for k, s in enumerate(self.inputs)]
        return WeightedGraph(g.nodes, edges), ground

    def with_weights(self, weights) -> "LeaderFollowerSystem":
        return LeaderFollowerSystem(
            self.followers.with_weights(weights), list(self.inputs), list(self.leaders)
        )


def grounded_matrix(sys: LeaderFollowerSystem) -> np.ndarray:
    """Return ``A = -(L_followers + sum_i e_i e_i^T)`` in follower node order."""
    if not sys.inputs:
        raise EmptyInputSet("at least one input node is required")
    if not sys.followers.is_connected():
        raise Disconnected("follower graph is not connected")
    M = laplacian(sys.followers)
    for s in sys.inputs:
        i = sys.followers.index(s)
        M[i, i] += 1.0
    return -M
