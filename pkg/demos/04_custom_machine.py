"""Build a small verifier by hand, save it as JSON, load it back and check
the exact engine against sampling."""
# %%
import json

import numpy as np

from qam2qcfa import analyze_exact, dump_machine, load_machine, monte_carlo
from qam2qcfa.linalg import ProjectiveMeasurement
from qam2qcfa.machine import LEFT, RIGHT, SpecBuilder

# A qubit is rotated by pi/8 for every 'a'; at the right end-marker it is
# measured, accepting on |0>.  On |1> the head walks back, the qubit is
# flipped to |0> at the left end-marker, and the machine is in its start
# configuration again.
theta = np.pi / 8
R = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
b = SpecBuilder("rotor", frozenset("a"), 2)
b.initial = b.state("s")
b.state("acc", "accept")
b.unitary("s", [LEFT], np.eye(2), "s", 1)
b.unitary("s", ["a"], R, "s", 1)
b.state("back")
b.measure("s", [RIGHT], ProjectiveMeasurement((("0", np.diag([1.0, 0])), ("1", np.diag([0, 1.0])))),
          {"0": ("acc", 0), "1": ("back", -1)})
b.unitary("back", ["a"], np.eye(2), "back", -1)
b.unitary("back", [LEFT], np.array([[0, 1], [1, 0]]), "s", 0)
spec = b.build()

# %%
doc = dump_machine(spec)
print(f"machine file: {len(doc)} bytes, top-level keys {sorted(json.loads(doc))}")
spec = load_machine(doc)
for n in range(5):
    out = analyze_exact(spec, "a" * n)
    est = monte_carlo(spec, "a" * n, trials=20000, seed=n)
    print(f"n={n}: exact accept {out.p_accept:.4f} (cos^2 = {np.cos(n * theta) ** 2:.4f}), "
          f"sampled {est.p_accept:.4f} +- {est.stderr:.4f}")
