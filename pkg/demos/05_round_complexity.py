"""
Rounds per pass: tree height, not graph size
============================================

Each pass over a tree takes one synchronous round per level. Balanced trees
need about ``log2 E`` rounds; caterpillars need ``E``.
"""

from spcons.cli import bench_records

for family in ("balanced", "chain"):
    print(family)
    for rec in bench_records(family, [1, 4, 16, 64, 256], sources=1):
        print("  E=%4d  height=%4d  rounds=%4d" % (rec["leaves"], rec["height"], rec["rounds"]))
