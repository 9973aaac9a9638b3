"""
Building and reading decomposition trees
========================================

Series-parallel graphs are built from single edges by two joins. A tree of
those joins describes the graph completely; here we build one by hand, look at
its graph, and recover the tree from the graph again.
"""

from spcons import decompose, leaf, parallel, realize, series, to_sexpr, tree_stats

# A triangle: a two-edge path in parallel with a direct edge.
# Leaves are single edges ``(u, v, weight)``.
path = series(leaf(0, 2, 1.0), leaf(2, 1, 1.0))
triangle = parallel(path, leaf(0, 1, 1.0))
print(to_sexpr(triangle))

# Realizing the tree gives back an ordinary weighted graph with two terminals
g, source, sink = realize(triangle)
print("nodes", g.nodes, "edges", [(e.u, e.v, e.w) for e in g.edges])
print("terminals", source, sink)

# Counting: leaves are edges, and every join either merges two terminal pairs
# (parallel) or glues one pair of terminals together (series).
print(tree_stats(triangle))

# Recognition works in the other direction and fails loudly on graphs that
# are not series-parallel between the chosen terminals.
print(to_sexpr(decompose(g, source, sink)))

from spcons import NotSeriesParallel, build_graph

k4 = build_graph([(u, v, 1.0) for u in range(4) for v in range(u + 1, 4)])
try:
    decompose(k4, 0, 3)
except NotSeriesParallel as exc:
    print("K4:", exc)
