"""Geometry of the achievable mean-rate set for a small scheduling model.

Two equally likely channel states; the good state offers rate 2, the bad
state rate 1, and both allow idling.  The achievable set of long-run mean
rates is the interval [0, 1.5].
"""

import numpy as np

from oppsched import (
    build_model,
    decompose,
    dominance,
    enumerate_generators,
    membership,
    rate_region,
)
from oppsched.geometry import outer_halfspaces
from oppsched.region import support

model = build_model(
    ["bad", "good"], [0.5, 0.5], [[[0.0], [1.0]], [[0.0], [2.0]]]
)
region = rate_region(model)

gens = enumerate_generators(region)
print("deterministic stationary means:", sorted(gens.ravel().tolist()))
print("support(+1) =", support(region, [1.0]))
print("support(-1) =", support(region, [-1.0]))

for x in (0.0, 0.75, 1.5, 1.6):
    res = membership(region, [x])
    verdict = "inside" if res.inside else f"outside, cut {res.certificate}"
    print(f"membership({x}): {verdict}")

# A mean of 0.75 is achieved by splitting each state's choices half/half.
d = decompose(region, [0.75])
for s in range(model.n_states):
    print(f"state {model.label(s)}: weights {np.round(d.weights[s], 6)}")
print("recomputed mean:", d.mean(model), "residual:", d.residual)

# Dominance asks for componentwise coverage rather than exact equality.
wide = build_model(["s"], [1.0], [[[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]])
wide_region = rate_region(wide)
for a in ([0.4, 0.4], [0.6, 0.6], [0.9, 0.0]):
    print(f"dominance({a}) =", dominance(wide_region, a))

halves = outer_halfspaces(wide_region.body, [[1.0, 1.0], [1.0, 0.0], [0.0, 1.0]])
print("outer half-spaces:")
for h in halves:
    print("  ", h)
