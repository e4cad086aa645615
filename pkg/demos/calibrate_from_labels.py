"""
Calibrating a curve from labeled pairs
======================================

Labels come from some reviewer; here they are drawn from a known step curve
with a little noise so the result can be checked. The sweep walks the
similarity grid downwards and, for every threshold, finds the smallest block
length at which the reviewed pairs are still precise enough.
"""

import warnings

import numpy as np

from clonecurve import LabeledPair, calibrate_curve
from clonecurve.harness import DEFAULT_ST_GRID, NoFeasibleLTLT

planted = [(780, 19), (740, 28), (700, 40), (660, 62), (620, 90), (580, 130), (540, 200)]


def is_clone(size, sim):
    return any(sim >= st and size >= ltlt for st, ltlt in planted)


rng = np.random.default_rng(3)
n = 50_000
# many small blocks, few large ones
sizes = np.minimum(np.floor(19 * (1 - rng.random(n)) ** -1.0), 5000).astype(int)
sims = rng.integers(500, 1001, n)
flip = rng.random(n) < 0.05
pairs = [LabeledPair(int(a), int(b), is_clone(a, b) != bool(f)) for a, b, f in zip(sizes, sims, flip)]

grid = [st for st, _ in planted]
curve = calibrate_curve(pairs, grid, target_precision=0.9)
print("planted:  ", "  ".join(f"({st / 10:g}%, {ltlt}+)" for st, ltlt in planted))
print("recovered:", curve)

# On the default 80%..50% grid, thresholds with no precise enough length are
# skipped with a warning (below 54% nothing is a clone here).
with warnings.catch_warnings(record=True) as caught:
    warnings.simplefilter("always", NoFeasibleLTLT)
    fine = calibrate_curve(pairs, DEFAULT_ST_GRID, target_precision=0.9)
print("default grid:", fine)
print("skipped:", sorted(w.message.st for w in caught))
