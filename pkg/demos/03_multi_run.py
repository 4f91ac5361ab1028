"""Multi-Run: one sweep per particle number, reading the ground state each time.

With N sites and K = N m + i bosons the coefficients satisfy sum(x) = i, so
the runs only see vectors whose coefficient sum is 1..c and whose entries
are at least -m. In the second lattice the minimizers within the offset sum
to 0, and those with sum 1 need a larger offset, so every run misses.
"""
from bosesvp import algorithms as alg
from bosesvp.lattice import svp_enumerate

lattices = {
    "shortest vector has coefficient sum 1": ((2, 1), (-1, 3)),
    "no minimizer fits the offset and the sum window": ((5, 1), (4, 1)),
}
for label, B in lattices.items():
    o = svp_enumerate(B)
    m = o.inf_norm_xmin
    rep = alg.multi_run(B, m)
    print(f"{label}: B={B}, lambda1^2={o.lambda1_sq}, minimizers {o.minimizers}")
    for k in rep.per_k:
        print(f"  K={k.K}: x={k.coefficients} v={k.vector} |v|^2={k.norm_sq} P={k.probability:.3f}")
    verdict = "found" if rep.best_norm_sq == o.lambda1_sq else "missed"
    print(f"  best |v|^2={rep.best_norm_sq} ({verdict})\n")
