"""
Planning a parametric curve
===========================

A curve is a list of (similarity threshold, lower length threshold) points,
most similar first. Each point is one search instance. This script shows how
upper length bounds are derived so that no two instances do the same work.
"""

from clonecurve import ParametricCurve, apply_upper_bounds, preset

# Thresholds are integers: similarity in permille, lengths in tokens.
curve = ParametricCurve([(750, 40), (700, 60)])
print("as written:", curve)

# A block larger than (60 - 1) / 0.75 = 78.7 tokens can't reach 75% with any
# block under 60 tokens, and the second instance already covers every pair
# where both blocks have at least 60. So the first instance can stop at 78.
bounded = apply_upper_bounds(curve)
print("bounded:   ", bounded)

# The shipped presets carry their bounds already; stripping and re-deriving
# them gives the same curve back.
for name in ("sourcerercc-java", "cloneworks-java"):
    shipped = preset(name)
    assert apply_upper_bounds(shipped.unbounded()) == shipped
    print(f"{name}: {shipped}")

# A block one token past the bound really is out of reach.
for cur, nxt in zip(bounded, bounded[1:]):
    need = -(-cur.st * (cur.utlt + 1) // 1000)  # ceil(st * (utlt + 1) / 1000)
    print(f"size {cur.utlt + 1} needs {need} shared tokens; blocks the next instance skips have at most {nxt.ltlt - 1}")
