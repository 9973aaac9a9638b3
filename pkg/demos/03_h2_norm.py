"""
H2 norm of leader-follower consensus
====================================

Leaders are grounded external nodes attached to input followers by unit edges.
When the grounded graph is series-parallel from every input to the leaders,
the squared H2 norm is a sum of tree passes, one per input.
"""

import numpy as np

from spcons import LeaderFollowerSystem, build_graph, h2_all_input
from spcons import dense_oracle
from spcons.generators import random_all_input_system

# Two followers joined by one edge, each with its own leader: 1/3 + 1/3.
two = LeaderFollowerSystem(build_graph([(0, 1, 1.0)]), inputs=[0, 1])
val = h2_all_input(two)
print(val.squared, val.per_source)

# A larger random system, checked against three dense computations
rng = np.random.default_rng(3)
sys = random_all_input_system(rng, n_inputs=5)
print("tree passes ", h2_all_input(sys).squared)
print("trace       ", dense_oracle.h2_dense(sys))
print("gramian     ", dense_oracle.h2_gramian(sys))
print("resistances ", dense_oracle.h2_resistance_sum(sys))
