"""How the knapsack verifier stores an integer in two amplitudes, and why a
wrong subset is caught at the final measurement at least half the time."""
# %%
import math

from qam2qcfa import analyze_exact, build_verifier, enumerate_adversaries, honest_prover, overall_rejection
from qam2qcfa.bounds import encode_state, encoded_value
from qam2qcfa.suites import encoded_after_b, encoded_after_item, step4_rejection

spec, params = build_verifier("knapsack", 0.25)

# %% reading b bit by bit doubles (and possibly increments) the stored value
for b in ["1", "10", "101", "1011", "10110"]:
    st = encoded_after_b(spec, b)
    print(f"b={b:>6}  stored value {encoded_value(st):6.3f}  v(b)={int(b, 2):3d}  "
          f"|state - encode_state(b)| = {abs(abs(st[:2] @ encode_state(b)[:2].conj()) - 1):.1e}")

# %% subtracting a selected item leaves (1, v(b) - v(a)) up to normalisation
for b, a in [("101", "10"), ("101", "101"), ("11", "110")]:
    d = int(b, 2) - int(a, 2)
    st = encoded_after_item(spec, b, a)
    st = st * abs(st[0]) / st[0]
    print(f"{b} - {a}: second amplitude {st[1].real:+.6f}, expected {d / math.sqrt(1 + d * d):+.6f}")

# %% a member and a non-member
w = "101#10#11"
o = analyze_exact(spec, w, honest_prover("knapsack", w))
print(f"\n{w}: honest prover, p_reject per iteration {o.p_reject:g}, accept {o.p_accept:.3g}")
w = "110#10#11"
for adv in enumerate_adversaries("knapsack", w):
    cond, reach, out = step4_rejection(spec, w, adv)
    print(f"{w}: subset {adv.parameter!s:>7}  reaches final check w.p. {reach:.3g}, "
          f"rejected there w.p. {cond:.3f}, overall rejection {overall_rejection(out):.6f}")
