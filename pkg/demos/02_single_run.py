"""Single-Run on a random 3D lattice, read out as rank classes.

A reservoir site lets every particle count up to K_S share one sweep, so a
single evolution covers all coefficient vectors the offset allows. The final
distribution is grouped into classes {v, -v} ordered by norm.
"""
import numpy as np

from bosesvp import algorithms as alg
from bosesvp.lattice import format_basis, random_lattice, svp_enumerate

rng = np.random.default_rng(7)
B = random_lattice(3, "uniform-entries", rng, lo=-6, hi=6)
print(format_basis(B))
oracle = svp_enumerate(B)
print("enumeration: lambda1^2 =", oracle.lambda1_sq, "minimizers", oracle.minimizers)

m = alg.estimate_offset(3)
for T in (1.0, 10.0):
    rep = alg.single_run(B, m, T=T)
    print(f"\nT={T:g}, m={m}: P(0)={rep.p_zero:.3f}  P(lambda1)={rep.p_lambda1:.3f}  "
          f"P(lambda2)={rep.p_lambda2:.3f}  drift={rep.norm_drift:.1e}")
    for c in rep.table.classes[:6]:
        print(f"  rank {c.rank:2d}  |v|^2={c.norm_sq:5d}  P={c.probability:.4f}  v={c.representative}")
    best = alg.extract_candidates(rep, top_k=1)
    if best:
        print("  likeliest nonzero outcome", best[0].vector, f"gamma={best[0].gamma:.3f}")
