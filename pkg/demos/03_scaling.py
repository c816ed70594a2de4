"""Exact expected running times as the input grows.

L_middle pays a polynomial price for its tiny gadget; L_mpal pays an
exponential one for the flag loop.
"""
# %%
import numpy as np

from qam2qcfa.suites import loglog_slope, mpal_growth_ratios, sweep_rows

ns = list(range(11, 42, 6))
rows = sweep_rows("middle", ns, 0.25)
for r in rows:
    print(f"middle n={r['n']:3d}  steps/iteration {r['expected_steps_iter']:9.1f}  "
          f"total {r['expected_total_steps']:.4g}")
print(f"log-log slope {loglog_slope(ns, [r['expected_total_steps'] for r in rows]):.3f}")

# %% a ruin walk started next to the end-marker lasts O(n) steps on average,
# so one iteration costs O(n); the number of iterations is one over the
# gadget probability, O(n^2)
per = np.array([r["expected_steps_iter"] for r in rows])
its = np.array([1 / r["p_accept_iter"] for r in rows])
print("per-iteration slope", round(loglog_slope(ns, per), 3), " iteration-count slope", round(loglog_slope(ns, its), 3))

# %%
rows = sweep_rows("mpal", [3, 5, 7], 0.25)
for r in rows:
    print(f"mpal n={r['n']}  total {r['expected_total_steps']:.4g}")
print("measured / predicted growth (k n 2^(k n)):", [round(x, 3) for x in mpal_growth_ratios(rows)])
