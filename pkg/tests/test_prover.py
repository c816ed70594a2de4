import numpy as np
import pytest
from hypothesis import given, strategies as st

from qam2qcfa.engine import analyze_exact
from qam2qcfa.languages import all_words, reference_decider
from qam2qcfa.protocols import ASK_MIDDLE, ASK_TAKE, MIDDLE, NOT_MIDDLE, build_verifier
from qam2qcfa.prover import (BehaviouralMix, EnumerationBudgetExceeded, FunctionProver, MiddleClaim, MixedStrategy,
                             NoWitness, PositionPair, SubsetChoice, enumerate_adversaries, honest_prover, respond)


def test_honest_examples():
    assert honest_prover("middle", "aaa").parameter == 1
    assert honest_prover("knapsack", "101#10#11").parameter == (1, 2)
    assert honest_prover("mpal", "ababa").parameter == 2
    assert honest_prover("L1", "abba").parameter == (1, 2)
    assert honest_prover("L2", "ab").parameter == (0, 1)


def test_honest_knapsack_tie_break_is_smallest_subset():
    # 3 = 1 + 2 = 3: witnesses (1, 2) and (3,); the sorted-first one wins
    assert honest_prover("knapsack", "11#1#10#11").parameter == (1, 2)


def test_honest_requires_member():
    with pytest.raises(NoWitness):
        honest_prover("middle", "aba")
    with pytest.raises(NoWitness):
        honest_prover("knapsack", "101#10#110")


def test_adversary_counts():
    assert len(enumerate_adversaries("middle", "aba")) == 4
    assert len(enumerate_adversaries("knapsack", "101#10#110")) == 4
    assert len(enumerate_adversaries("mpal", "b")) == 2
    assert len(enumerate_adversaries("L1", "aab")) == 6 + 1
    assert len(enumerate_adversaries("L2", "aab")) == 3 + 1


def test_adversary_parameters_distinct():
    for protocol, word in [("middle", "abab"), ("knapsack", "1#1#1#1"), ("L1", "abab"), ("L2", "abab")]:
        params = [a.parameter for a in enumerate_adversaries(protocol, word)]
        assert len(set(params)) == len(params)


def test_knapsack_enumeration_cap():
    with pytest.raises(EnumerationBudgetExceeded):
        enumerate_adversaries("knapsack", "1" + "#1" * 21)


def test_respond_examples():
    at2 = MiddleClaim(2)
    assert respond(at2, "aaaaa", [(ASK_MIDDLE, NOT_MIDDLE)], ASK_MIDDLE) == NOT_MIDDLE
    assert respond(at2, "aaaaa", [(ASK_MIDDLE, NOT_MIDDLE)] * 2, ASK_MIDDLE) == MIDDLE
    assert respond(SubsetChoice(frozenset({2})), "1#1#1", [], ASK_TAKE) == "skip"
    assert respond(SubsetChoice(frozenset({2})), "1#1#1", [(ASK_TAKE, "skip")], ASK_TAKE) == "take"


@given(st.integers(-1, 6), st.lists(st.sampled_from([NOT_MIDDLE, MIDDLE]), max_size=6))
def test_respond_is_deterministic(claim, answers):
    s = MiddleClaim(None if claim < 0 else claim)
    hist = [(ASK_MIDDLE, a) for a in answers]
    assert len({respond(s, "abababa", hist, ASK_MIDDLE) for _ in range(3)}) == 1


def test_equal_parameters_give_equal_outcomes():
    spec = build_verifier("middle", 0.25)[0]
    mirror = FunctionProver(
        lambda w, h, e: MIDDLE if sum(1 for x, _ in h if x == ASK_MIDDLE) == 2 else NOT_MIDDLE, parameter=2)
    for word in ["abbab", "aabaa", "bbbb"]:
        assert analyze_exact(spec, word, MiddleClaim(2)) == analyze_exact(spec, word, mirror)
    spec = build_verifier("L2", 0.25)[0]
    assert analyze_exact(spec, "abab", PositionPair(1, 3, 1)) == analyze_exact(spec, "abab", PositionPair(1, 3, 1))


@pytest.mark.parametrize("protocol", ["middle", "mpal", "L1", "L2"])
def test_honest_completeness_small(protocol):
    spec = build_verifier(protocol, 0.25)[0]
    for w in all_words("ab", 5, 1):
        if reference_decider(protocol, w):
            out = analyze_exact(spec, w, honest_prover(protocol, w))
            assert out.p_reject == pytest.approx(0, abs=1e-9)
            assert out.p_accept > 0


@pytest.mark.parametrize("protocol,word", [("middle", "abba"), ("mpal", "abb"), ("knapsack", "11#1#1"),
                                           ("L1", "aab"), ("L2", "abaa")])
@given(seed=st.integers(0, 2**32 - 1))
def test_mixtures_are_affine_and_dominated(protocol, word, seed):
    spec = build_verifier(protocol, 0.25)[0]
    advs = enumerate_adversaries(protocol, word)
    outs = [analyze_exact(spec, word, a) for a in advs]
    w = np.random.default_rng(seed).dirichlet(np.ones(len(advs)))
    mixed = analyze_exact(spec, word, MixedStrategy(tuple(advs), tuple(w)))
    assert mixed.p_reject == pytest.approx(float(w @ [o.p_reject for o in outs]), abs=1e-9)
    assert mixed.p_accept == pytest.approx(float(w @ [o.p_accept for o in outs]), abs=1e-9)
    assert mixed.p_reject >= min(o.p_reject for o in outs) - 1e-12


@given(st.integers(0, 2**32 - 1))
def test_behavioural_randomization_dominated(seed):
    rng = np.random.default_rng(seed)
    spec = build_verifier("middle", 0.25)[0]
    word = "abbab"
    tables = []
    for _ in range(len(word) + 1):
        p = float(rng.random())
        tables.append(((MIDDLE, p), (NOT_MIDDLE, 1 - p)))
    out = analyze_exact(spec, word, BehaviouralMix(tuple(tables)))
    best = min(analyze_exact(spec, word, a).p_reject for a in enumerate_adversaries("middle", word))
    assert out.p_reject >= best - 1e-12
