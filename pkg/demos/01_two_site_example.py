"""Two bosons on two sites: the smallest complete sweep.

The bad basis b1=(1,2), b2=(0,-2) spans the same lattice as (1,0),(0,2).
With offset m=0 the three Fock states |20>, |11>, |02> stand for the
coefficient vectors (2,0), (1,1), (0,2), whose lattice vectors have squared
norms 20, 1 and 16. An adiabatic sweep should end mostly in |11>.
"""
import numpy as np

from bosesvp import experiments as ex

out = ex.exp_appendix_c(T=2.0)
r = out.report

print("Gram matrix", r["gram"])
print("tunnelling matrix H0")
print(np.array2string(np.array(r["h0"]), precision=4))
print("initial condensate", np.round(r["psi0"], 6))
print("problem energies", r["energies"])

print("\nprobability of each state along the sweep:")
_, rows = out.tables["example2d_trajectory"]
times = sorted({t for t, _, _ in rows})
for want in (0.0, 0.5, 1.0, 1.5, 2.0):
    t = min(times, key=lambda s: abs(s - want))
    probs = [v for (tt, i, v) in rows if tt == t]
    print(f"  t={t:5.3f}  " + "  ".join(f"{p:.3f}" for p in probs))

print("\nmost likely final state", r["most_likely_state"],
      "-> lattice vector", r["decoded_vector"], f"with P={r['p_11']:.4f}")
for name, ok in r["checks"].items():
    print(f"  {name}: {ok}")
