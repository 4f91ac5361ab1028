"""Classical side: coefficient growth, band structure and qubit counts.

The offset m must cover the coefficients of a shortest vector. On HNF bases
those grow with dimension, while LLL keeps them small. Banding a prime
determinant HNF basis lowers the number of sites each hopping term couples.
"""
import math

from bosesvp import experiments as ex
from bosesvp.fock import qubit_bound

kg = ex.exp_kgrowth(range(3, 7), count=25, seed=3)
print("dim  mean |x|_inf (HNF)  (LLL)  mean |sum x|")
for N, n, h, _, l, _, k, _ in kg.tables["kgrowth"][1]:
    print(f"{N:3d}  {h:17.2f}  {l:5.2f}  {k:12.2f}")
print("fitted HNF slope per dimension:", round(kg.report["fits"]["hnf_inf"]["slope"], 3))

band = ex.exp_banding(dim=16, count=20, seed=3).report
print(f"\nbanding 20 HNF bases at N=16: mean volume factor {band['mean_volume_factor']:.2f}, "
      f"{band['extent_le_3_fraction']:.0%} of eliminations within extent 3")

print("\n  N   qubits (exact)  bound   bound/(N log2 N)")
for N in (4, 8, 16, 32, 64):
    r = qubit_bound(N)
    print(f"{N:3d}  {r.exact_log2_D:14.1f}  {r.stirling_bound_log2:6.1f}  "
          f"{r.stirling_bound_log2 / (N * math.log2(N)):.2f}")
