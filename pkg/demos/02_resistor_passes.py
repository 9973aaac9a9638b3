"""
Effective resistance, currents and potentials in three passes
=============================================================

Edges are resistors of resistance ``1/w``. One sweep up the tree gives the
effective resistance, one sweep down splits a unit current, and a last sweep
up gives the voltage across every subtree.
"""

import numpy as np

from spcons import realization, solve
from spcons import dense_oracle
from spcons.generators import random_tree

rng = np.random.default_rng(7)
t = random_tree(rng, 200)
sol = solve(t, i_total=1.0)
print("effective resistance", sol.reff, "in", t.height + 1, "rounds per pass")

# The same number from a Laplacian pseudoinverse of the realized graph
r = realization(t)
print("dense", dense_oracle.effective_resistance_dense(r.graph, r.source, r.sink))

# Parallel splits minimise dissipated power, so the total power equals i^2 r
leaves = t.arena.leaves
power = np.sum(sol.current[leaves] ** 2 / t.arena.w[leaves])
print("power", power, "i^2 r", sol.reff)

# Node potentials, with the sink grounded; every value lies between 0 and
# the source potential.
pot = np.array(list(sol.potentials.values()))
print("potential range", pot.min(), pot.max())
