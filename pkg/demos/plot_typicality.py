"""
Jointly matching sequences
==========================

How often a channel input/output pair looks "typical" for its reference
joint, compared with an independent pair of the same marginals.
"""

from dtmi.infotheory import bsc_joint
from dtmi.typicality import ReferenceJoint, independent_match_bound, matching_set_log_size_bound, typicality_probability

table = bsc_joint(0.1)
eps = 0.1
for n in (50, 200, 800):
    ref = ReferenceJoint.iid(table, n)
    joint = typicality_probability(ref, epsilon=eps, trials=5000, seed=1)
    indep = typicality_probability(ref, epsilon=eps, mode="product_draw", trials=5000, seed=2)
    print(f"n={n:4d}  dependent pair matches {joint.p:.3f}, independent pair {indep.p:.4f} "
          f"(bound {independent_match_bound(ref, eps):.2e}), log2 |set| <= {matching_set_log_size_bound(ref, epsilon=eps):.1f}")
