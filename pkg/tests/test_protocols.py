import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qam2qcfa.bounds import encode_state, encoded_value, evaluate_bound, xy_gap_exact, xy_vector
from qam2qcfa.engine import analyze_exact, overall_acceptance
from qam2qcfa.languages import all_words, knapsack_witnesses, parse_knapsack, reference_decider
from qam2qcfa.linalg import is_unitary
from qam2qcfa.machine import validate_spec
from qam2qcfa.protocols import build_flag_loop_verifier, build_verifier, repetition_k
from qam2qcfa.prover import honest_prover
from qam2qcfa.suites import encoded_after_b, encoded_after_item


def test_repetition_parameter():
    assert build_verifier("middle", 0.25)[1].k == 3
    assert build_verifier("mpal", 0.2)[1].k == 3
    assert repetition_k("mpal", 0.4) == 3
    assert repetition_k("mpal", 0.1) == 4
    assert repetition_k("knapsack", 0.1) == 5
    assert repetition_k("L1", 0.4) == 3


@pytest.mark.parametrize("eps", [0, 0.5, -1, 0.7])
def test_epsilon_out_of_range(eps):
    with pytest.raises(ValueError):
        build_verifier("middle", eps)


def test_unknown_protocol():
    with pytest.raises(ValueError):
        build_verifier("lmiddle", 0.25)


def test_knapsack_verifier_register():
    spec, _ = build_verifier("knapsack", 0.25)
    assert spec.quantum_dim == 8 and validate_spec(spec) == []
    mats = [r.matrix for r in spec.theta.values() if hasattr(r, "matrix")]
    assert all(is_unitary(m, 1e-12) for m in mats)


def test_reference_decider_examples():
    assert reference_decider("middle", "aaa")
    assert not reference_decider("middle", "aba")
    assert reference_decider("knapsack", "101#10#11")
    assert not reference_decider("knapsack", "101#10#110")
    assert reference_decider("L2", "ab")
    assert not reference_decider("L2", "aba")
    assert reference_decider("L1", "b") and reference_decider("L1", "abba") and not reference_decider("L1", "ab")
    assert reference_decider("mpal", "ababa") and not reference_decider("mpal", "abaab")


@pytest.mark.parametrize("word", ["", "101", "#1", "1#", "1##1", "01#1", "1#01", "1#2"])
def test_malformed_knapsack_is_rejected(word):
    assert parse_knapsack(word) is None
    assert not reference_decider("knapsack", word)


def test_knapsack_witnesses():
    assert knapsack_witnesses("101#10#11") == [(1, 2)]
    assert knapsack_witnesses("11#1#10#11") == [(1, 2), (3,)]


def _l1_by_definition(w):
    # w = u b v with |u| = |v|, or w = u b z b v with |u| = |v|
    n = len(w)
    for cut in range(n + 1):
        u, rest = w[:cut], w[cut:]
        for split in range(len(rest) + 1):
            mid, v = rest[:split], rest[split:]
            if len(u) != len(v):
                continue
            if mid == "b" or (len(mid) >= 2 and mid[0] == "b" and mid[-1] == "b"):
                return True
    return False


def _l2_by_definition(w):
    n = len(w)
    for i in range(n):
        for j in range(i + 1, n):
            if i == n - 1 - j and {w[i], w[j]} == {"a", "b"}:
                return True
    return False


def test_decomposed_deciders_match_definitions():
    for w in all_words("ab", 9):
        assert reference_decider("L1", w) == _l1_by_definition(w)
        assert reference_decider("L2", w) == _l2_by_definition(w)


def test_bound_examples():
    assert evaluate_bound("gadget_accept", n=3, k=2) == pytest.approx(1 / 64)
    assert evaluate_bound("sin2_gap", j=1) == pytest.approx(math.sin(math.sqrt(2) * math.pi) ** 2)
    assert evaluate_bound("sin2_gap", j=1) == pytest.approx(0.929108, abs=1e-6)
    assert evaluate_bound("sin2_gap", j=1) > 1 / 3
    assert evaluate_bound("sin2_lower", j=1) == pytest.approx(1 / 3)
    assert evaluate_bound("middle_reject_lb", n=3) == pytest.approx(1 / 19)
    assert evaluate_bound("mpal_reject_lb", n=3) == pytest.approx(1 / 25)
    assert evaluate_bound("flag_accept", n=3, k=2) == pytest.approx(2.0**-6)
    assert evaluate_bound("knapsack_reject_lb") == 0.5
    assert evaluate_bound("knapsack_reach_lb", n=2) == pytest.approx(1 / 36)
    assert evaluate_bound("xy_gap", X=["A"], Y=["B"]) == pytest.approx(369 / 625)
    np.testing.assert_allclose(evaluate_bound("encode_state", b="101"), np.r_[1, 5, np.zeros(6)] / math.sqrt(26))


def test_xy_vector_example():
    assert xy_vector("A", "B") == (Fraction(16, 25), Fraction(-3, 5), Fraction(12, 25))
    assert xy_gap_exact("A", "B") == Fraction(369, 625)


@pytest.mark.parametrize("name,params", [
    ("sin2_gap", {"j": 0}), ("middle_reject_lb", {"n": 0}), ("xy_gap", {"X": ["C"], "Y": []}),
    ("gadget_accept", {"n": -1, "k": 1}), ("encode_state", {"b": "12"}), ("nope", {}),
    ("flag_accept", {"n": 2}),
])
def test_bound_domain_errors(name, params):
    with pytest.raises(ValueError):
        evaluate_bound(name, **params)


def test_sin2_floating_reduction_agrees_with_direct_formula():
    for j in range(1, 200):
        assert evaluate_bound("sin2_gap", j=j) == pytest.approx(math.sin(math.sqrt(2) * j * math.pi) ** 2, abs=1e-11)


@given(st.text(alphabet="01", min_size=0, max_size=5))
def test_encoding_through_engine(tail):
    spec = build_verifier("knapsack", 0.25)[0]
    b = "1" + tail
    got = encoded_after_b(spec, b)
    ref = encode_state(b)
    assert abs(abs(np.vdot(ref, got)) - 1) < 1e-12
    assert encoded_value(got) == pytest.approx(int(b, 2), abs=1e-9)


@given(st.text(alphabet="01", max_size=4), st.text(alphabet="01", max_size=4))
def test_subtraction_through_engine(tb, ta):
    spec = build_verifier("knapsack", 0.25)[0]
    b, a = "1" + tb, "1" + ta
    d = int(b, 2) - int(a, 2)
    assert encoded_value(encoded_after_item(spec, b, a)) == pytest.approx(d, abs=1e-9)


@pytest.mark.parametrize("k,n", [(1, 0), (1, 3), (2, 2), (3, 4)])
def test_flag_loop(k, n):
    out = analyze_exact(build_flag_loop_verifier(k), "b" * n)
    assert out.p_accept == pytest.approx(2.0 ** (-k * n), abs=1e-12)
    assert out.p_reject == 0


@pytest.mark.parametrize("protocol,word", [("middle", "abaaa"), ("mpal", "baaab"), ("knapsack", "110#11#11"),
                                           ("L1", "babab"), ("L2", "aabba")])
def test_honest_members_accepted(protocol, word):
    spec = build_verifier(protocol, 0.25)[0]
    out = analyze_exact(spec, word, honest_prover(protocol, word))
    assert out.p_reject == 0 and overall_acceptance(out) == 1
