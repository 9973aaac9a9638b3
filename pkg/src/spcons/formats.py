"""Plain-text graph files.

One record per line, ``#`` starts a comment::

    nodes 3
    edge 0 1 1.0
    edge 1 2 0.5
    input 2

``input`` lines list the follower nodes leaders attach to, in leader order.
"""

from __future__ import annotations

from pathlib import Path

from .errors import ParseError
from .graph_core import LeaderFollowerSystem, WeightedGraph

__all__ = ["parse_graph", "format_graph", "read_graph", "write_graph", "system_from_text"]


def parse_graph(text: str) -> tuple[WeightedGraph, list[int]]:
    n_nodes = None
    edges, inputs = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "nodes" and len(parts) == 2:
                if n_nodes is not None or edges or inputs:
                    raise ParseError(f"line {lineno}: 'nodes' must come first and only once")
                n_nodes = int(parts[1])
            elif parts[0] == "edge" and len(parts) == 4:
                edges.append((len(edges), int(parts[1]), int(parts[2]), float(parts[3])))
            elif parts[0] == "input" and len(parts) == 2:
                inputs.append(int(parts[1]))
            else:
                raise ParseError(f"line {lineno}: cannot parse {raw.strip()!r}")
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"line {lineno}: bad number in {raw.strip()!r}") from None
    if n_nodes is None:
        raise ParseError("missing 'nodes <N>' header")
    g = WeightedGraph(range(n_nodes), edges)
    if g.n_nodes != n_nodes:
        raise ParseError(f"edges reference nodes outside 0..{n_nodes - 1}")
    return g, inputs


def format_graph(g: WeightedGraph, inputs=()) -> str:
    nodes = g.nodes
    if nodes and nodes != tuple(range(len(nodes))):
        raise ValueError("graph files need node ids 0..N-1")
    lines = [f"nodes {g.n_nodes}"]
    lines += [f"edge {e.u} {e.v} {e.w:.17g}" for e in g.edges]
    lines += [f"input {s}" for s in inputs]
    return "\n".join(lines) + "\n"


def read_graph(path) -> tuple[WeightedGraph, list[int]]:
    return parse_graph(Path(path).read_text(encoding="utf-8"))


def write_graph(path, g: WeightedGraph, inputs=()) -> None:
    Path(path).write_text(format_graph(g, inputs), encoding="utf-8")


def system_from_text(text: str) -> LeaderFollowerSystem:
    g, inputs = parse_graph(text)
    return LeaderFollowerSystem(g, inputs)
