"""How sweep length trades the zero vector against short vectors.

Slow sweeps follow the ground state, which is the zero vector, so P(0) grows
with T. Short vectors gain weight at intermediate T and lose it again as the
evolution becomes adiabatic. A small ensemble is enough to see the peak.
"""
from bosesvp import experiments as ex

cfg = ex.ExperimentConfig(name="payoff", dims=(2,), count=12, seed=1,
                          T_grid=(0.5, 1.0, 2.0, 4.0, 10.0, 32.0, 100.0))
out = ex.exp_payoff(cfg)
_, rows = out.tables["payoff"]
table = {}
for dim, T, q, mean, *_ in rows:
    table.setdefault(T, {})[q] = mean
print("     T    P(0)  P(lambda1)  P(lambda2)")
for T, q in table.items():
    print(f"{T:6g}  {q['p0']:.3f}       {q['p_lambda1']:.3f}       {q['p_lambda2']:.3f}")
print("P(lambda1) peaks at T =", out.report["lambda1_peak_T"]["2"])
