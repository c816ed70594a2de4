"""L_middle end to end: a verifier that cannot count to the middle of its
input on its own, and a prover that tells it where the middle is.

Run with ``python3 demos/01_middle_walkthrough.py``.
"""
# %%
import numpy as np

from qam2qcfa import (analyze_exact, build_verifier, enumerate_adversaries, expected_runtime, honest_prover,
                      overall_acceptance, overall_rejection, reference_decider)
from qam2qcfa.bounds import gadget_accept, middle_reject_lb

eps = 0.25
spec, params = build_verifier("middle", eps)
print(f"verifier: {len(spec.states)} classical states, {spec.quantum_dim}-dim register, k = {params.k}")

# %% a member: the honest prover points at the centre, the register rotates
# forward and back by the same angle, and the only way to halt is the gadget
w = "ababa"
assert reference_decider("middle", w)
out = analyze_exact(spec, w, honest_prover("middle", w))
print(f"\n{w!r}: one iteration accepts w.p. {out.p_accept:.6g}"
      f" (gadget formula {gadget_accept(len(w), params.k):.6g}), rejects w.p. {out.p_reject:g}")
print(f"  overall acceptance {overall_acceptance(out):.12g}, expected total steps {expected_runtime(out):.6g}")

# %% a non-member: every claim the prover can make leaves a residual
# rotation, and the measurement catches it with probability >= 1/(2n^2+1)
w = "abbab"
print(f"\n{w!r} is a member: {reference_decider('middle', w)}")
rows = []
for adv in enumerate_adversaries("middle", w):
    o = analyze_exact(spec, w, adv)
    rows.append((adv.parameter, o.p_reject, overall_rejection(o)))
    print(f"  claim {adv.parameter!s:>4}: per-iteration reject {o.p_reject:.4f}, overall reject {rows[-1][2]:.6f}")
worst = min(r[1] for r in rows)
print(f"  weakest per-iteration rejection {worst:.4f} vs lower bound {middle_reject_lb(len(w)):.4f}")
print(f"  every adversary is rejected overall w.p. > 1 - eps = {1 - eps}: {all(r[2] > 1 - eps for r in rows)}")

# %% the rotation angle sqrt(2)*pi never closes up, which is where the bound comes from
j = np.arange(1, 11)
print("\nsin^2(sqrt2 j pi) * (2j^2+1):", np.round(np.sin(np.sqrt(2) * j * np.pi) ** 2 * (2 * j**2 + 1), 3))
