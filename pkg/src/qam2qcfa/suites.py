"""Verification suites: exhaustive bound checks at desk scale.

Each suite returns a :class:`SuiteResult` made of aggregated cases; a case
records the worst measured value over everything it covers, the bound it is
held to and the margin (positive means the bound holds).
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import asdict, dataclass, field

import numpy as np

from . import bounds
from .constants import ALL_MEASUREMENTS, ALL_UNITARIES, U_HASH_PRINTED
from .engine import (DEFAULT_NODE_CAP, analyze_exact, build_config_graph, expected_iterations, expected_runtime,
                     hitting_probability, inline_law, monte_carlo, overall_acceptance, overall_rejection,
                     solve_absorption)
from .languages import ALPHABETS, all_words, reference_decider
from .linalg import is_unitary
from .protocols import (build_double_coin, build_flag_loop_verifier, build_gadget_verifier,
                        build_immediate_accept, build_ruin_walk, build_verifier)
from .prover import SubsetChoice, enumerate_adversaries, honest_prover

TOL = 1e-9
SUITES = ("unitarity", "middle", "mpal", "knapsack", "L1L2", "engine-selfcheck", "sin2", "xy")


@dataclass
class Case:
    name: str
    passed: bool
    measured: float | None = None
    bound: float | None = None
    margin: float | None = None
    count: int = 1
    detail: str = ""


@dataclass
class SuiteResult:
    suite: str
    params: dict
    cases: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    def add(self, case: Case) -> Case:
        self.cases.append(case)
        return case

    def as_dict(self) -> dict:
        return {"suite": self.suite, "params": self.params, "passed": self.passed,
                "cases": [asdict(c) for c in self.cases]}


def _at_least(name, values, bound, count=None, detail=""):
    """Case asserting ``min(values) >= bound`` (values as ``(x, label)``)."""
    worst = min(values, key=lambda t: t[0]) if values else (math.inf, "")
    return Case(name, worst[0] >= bound, worst[0], bound, worst[0] - bound,
                len(values) if count is None else count, detail or f"worst at {worst[1]!r}")


def _at_most(name, values, bound, detail=""):
    worst = max(values, key=lambda t: t[0]) if values else (-math.inf, "")
    return Case(name, worst[0] <= bound, worst[0], bound, bound - worst[0], len(values),
                detail or f"worst at {worst[1]!r}")


def _greater(name, values, bound):
    worst = min(values, key=lambda t: t[0]) if values else (math.inf, "")
    return Case(name, worst[0] > bound, worst[0], bound, worst[0] - bound, len(values), f"worst at {worst[1]!r}")


# -- individual suites ------------------------------------------------------------

def suite_unitarity(tol: float = 1e-12) -> SuiteResult:
    res = SuiteResult("unitarity", {"tol": tol})
    for name, U in ALL_UNITARIES.items():
        err = float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))
        res.add(Case(f"unitary {name}", is_unitary(U, tol), err, tol, tol - err))
    for name, M in ALL_MEASUREMENTS.items():
        problems = M.violations(tol)
        res.add(Case(f"measurement {name}", not problems, float(len(problems)), 0.0, 0.0 - len(problems),
                     detail="; ".join(problems)))
    # the subtraction operator without its 1/sqrt(2) factor is not unitary
    res.add(Case("printed U_# rejected", not is_unitary(U_HASH_PRINTED, tol)))
    return res


def _completeness(res, protocol, words, epsilons):
    for eps in epsilons:
        spec, _ = build_verifier(protocol, eps)
        rej, acc = [], []
        for w in words:
            out = analyze_exact(spec, w, honest_prover(protocol, w))
            rej.append((out.p_reject, w))
            acc.append((overall_acceptance(out), w))
        res.add(_at_most(f"{protocol} completeness p_reject (eps={eps})", rej, TOL))
        res.add(_at_least(f"{protocol} completeness overall acceptance (eps={eps})", acc, 1 - TOL))


def _soundness(protocol, words, epsilon):
    """Per word: (min per-iteration rejection, min overall rejection) over
    every enumerated adversary."""
    spec, _ = build_verifier(protocol, epsilon)
    out = {}
    for w in words:
        outs = [analyze_exact(spec, w, a) for a in enumerate_adversaries(protocol, w)]
        out[w] = (min(o.p_reject for o in outs), min(overall_rejection(o) for o in outs))
    return out


def _lb_case(name, per_word, lb):
    """Per-word lower bound ``lb(n)``; reports the word with the least slack."""
    if not per_word:
        return Case(name, True, count=0)
    w = min(per_word, key=lambda w: per_word[w][0] - lb(len(w)))
    r, bound = per_word[w][0], lb(len(w))
    return Case(name, r >= bound - TOL, r, bound, r - bound, len(per_word), f"worst at {w!r}")


def suite_middle(max_n: int = 9, complete_n: int = 11, sample_n: int = 11, samples: int = 100, seed: int = 0,
                 epsilons=(0.4, 0.1)) -> SuiteResult:
    res = SuiteResult("middle", dict(max_n=max_n, complete_n=complete_n, sample_n=sample_n, samples=samples,
                                     seed=seed, epsilons=list(epsilons)))
    ab = ALPHABETS["middle"]
    members = [w for w in all_words(ab, complete_n, 1) if reference_decider("middle", w)]
    _completeness(res, "middle", members, epsilons)
    words = [w for w in all_words(ab, max_n, 1) if not reference_decider("middle", w)]
    if sample_n and samples:
        rng = random.Random(seed)
        pool = []
        while len(pool) < samples:
            w = "".join(rng.choice("ab") for _ in range(sample_n))
            if not reference_decider("middle", w):
                pool.append(w)
        words += pool
    for eps in epsilons:
        per = _soundness("middle", words, eps)
        res.add(_lb_case(f"middle per-iteration rejection >= 1/(2n^2+1) (eps={eps})", per,
                         bounds.middle_reject_lb))
        res.add(_greater(f"middle overall rejection > 1-eps (eps={eps})",
                         [(r, w) for w, (_, r) in per.items()], 1 - eps))
    return res


def suite_mpal(max_n: int = 9, flag_n: int = 6, flag_k: int = 3, epsilons=(0.4, 0.1),
               complete_n: int | None = None) -> SuiteResult:
    complete_n = max_n if complete_n is None else complete_n
    res = SuiteResult("mpal", dict(max_n=max_n, complete_n=complete_n, flag_n=flag_n, flag_k=flag_k,
                                   epsilons=list(epsilons)))
    ab = ALPHABETS["mpal"]
    members = [w for w in all_words(ab, complete_n, 1) if reference_decider("mpal", w)]
    _completeness(res, "mpal", members, epsilons)
    words = [w for w in all_words(ab, max_n, 1) if not reference_decider("mpal", w)]
    for eps in epsilons:
        per = _soundness("mpal", words, eps)
        res.add(_lb_case(f"mpal per-iteration rejection >= 5^(1-n) (eps={eps})", per, bounds.mpal_reject_lb))
        res.add(_greater(f"mpal overall rejection > 1-eps (eps={eps})",
                         [(r, w) for w, (_, r) in per.items()], 1 - eps))
    errs = []
    for k in range(1, flag_k + 1):
        spec = build_flag_loop_verifier(k)
        for n in range(0, flag_n + 1):
            out = analyze_exact(spec, "a" * n)
            errs.append((abs(out.p_accept - bounds.flag_accept(n, k)), f"n={n},k={k}"))
    res.add(_at_most("flag loop accept = 2^(-kn)", errs, 1e-12))
    return res


def knapsack_instances(max_items: int = 2, max_bits: int = 4):
    """Every well-formed instance with ``b`` and up to ``max_items`` items,
    each block at most ``max_bits`` bits long."""
    blocks = ["1" + "".join(t) for L in range(max_bits) for t in itertools.product("01", repeat=L)]
    for items in range(1, max_items + 1):
        for combo in itertools.product(blocks, repeat=items + 1):
            yield "#".join(combo)


def encoded_after_b(spec, b: str) -> np.ndarray:
    """Register state when the verifier first asks about an item, i.e. after
    encoding ``b`` with every ``M_for`` outcome equal to ``f``."""
    graph = build_config_graph(spec, b + "#1", SubsetChoice(frozenset()))
    for cfg in graph.nodes:
        if cfg.classical == "ask" and not cfg.history:
            return cfg.quantum
    raise AssertionError("encoding phase never completes")


def encoded_after_item(spec, b: str, a: str) -> np.ndarray:
    """Register state on reaching the final check with item ``a`` selected."""
    graph = build_config_graph(spec, b + "#" + a, SubsetChoice(frozenset({1})))
    for cfg in graph.nodes:
        if cfg.classical == "fin":
            return cfg.quantum
    raise AssertionError("final check never reached")


def _phase_distance(u, v) -> float:
    """Largest amplitude difference after removing the relative global phase."""
    ov = np.vdot(v, u)
    if abs(ov) == 0:
        return float(np.max(np.abs(u - v)))
    return float(np.max(np.abs(u * (np.conj(ov) / abs(ov)) - v)))


def step4_rejection(spec, word: str, prover):
    """(rejection probability conditioned on reaching the final check,
    probability of reaching it, iteration outcome) for one iteration."""
    graph = build_config_graph(spec, word, prover)
    reach = hitting_probability(graph, lambda c: c.classical == "fin")
    out = solve_absorption(graph)
    return (out.p_reject / reach if reach > 0 else math.nan), reach, out


def suite_knapsack(max_items: int = 2, max_bits: int = 4, encode_bits: int = 6, epsilon: float = 0.25) -> SuiteResult:
    res = SuiteResult("knapsack", dict(max_items=max_items, max_bits=max_bits, encode_bits=encode_bits,
                                       epsilon=epsilon))
    spec, _ = build_verifier("knapsack", epsilon)
    bs = ["1" + "".join(t) for L in range(encode_bits) for t in itertools.product("01", repeat=L)]
    enc, rec, sub = [], [], []
    for b in bs:
        enc.append((_phase_distance(encoded_after_b(spec, b), bounds.encode_state(b)), b))
    for b in bs[: 2 ** (encode_bits - 1) - 1]:
        v = bounds.encoded_value(encoded_after_b(spec, b))
        v0 = bounds.encoded_value(encoded_after_b(spec, b + "0"))
        v1 = bounds.encoded_value(encoded_after_b(spec, b + "1"))
        rec.append((max(abs(v0 - 2 * v), abs(v1 - 2 * v - 1)), b))
    for b, a in itertools.product(bs[:31], bs[:15]):
        d = int(b, 2) - int(a, 2)
        got = encoded_after_item(spec, b, a)
        got = got * np.conj(got[0]) / abs(got[0])
        sub.append((abs(got[1].real - d / math.sqrt(1 + d * d)), f"{b}-{a}"))
    res.add(_at_most("encoded state after b = (1, v(b))/sqrt(1+v(b)^2)", enc, TOL))
    res.add(_at_most("recurrences v(w0)=2v(w), v(w1)=2v(w)+1", rec, TOL))
    res.add(_at_most("amplitude after subtraction = d/sqrt(1+d^2)", sub, TOL))

    comp, step4, overall, reach = [], [], [], []
    for w in knapsack_instances(max_items, max_bits):
        n = len(w)
        if reference_decider("knapsack", w):
            out = analyze_exact(spec, w, honest_prover("knapsack", w))
            comp.append((overall_acceptance(out), w))
            continue
        for adv in enumerate_adversaries("knapsack", w):
            cond, hit, out = step4_rejection(spec, w, adv)
            step4.append((cond, f"{w} I={adv.parameter}"))
            overall.append((overall_rejection(out), f"{w} I={adv.parameter}"))
            reach.append((hit - bounds.knapsack_reach_lb(n), w))
    res.add(_at_least("honest overall acceptance = 1", comp, 1 - TOL))
    res.add(_at_least("step-4 rejection >= 1/2", step4, bounds.knapsack_reject_lb() - TOL))
    res.add(_greater(f"overall rejection > 1-eps (eps={epsilon})", overall, 1 - epsilon))
    res.add(_at_least("reach final check >= (1/6)^n", reach, -TOL))
    return res


def suite_l1l2(max_n: int = 8, epsilon: float = 0.4, epsilons=None) -> SuiteResult:
    epsilons = (epsilon,) if epsilons is None else tuple(epsilons)
    res = SuiteResult("L1L2", dict(max_n=max_n, epsilons=list(epsilons)))
    for protocol in ("L1", "L2"):
        ab = ALPHABETS[protocol]
        words = list(all_words(ab, max_n, 0))
        members = [w for w in words if reference_decider(protocol, w)]
        _completeness(res, protocol, members, epsilons)
        others = [w for w in words if not reference_decider(protocol, w)]
        for eps in epsilons:
            per = _soundness(protocol, others, eps)
            res.add(_greater(f"{protocol} overall rejection > 1-eps (eps={eps})",
                             [(r, w) for w, (_, r) in per.items()], 1 - eps))
    return res


def selfcheck_corpus():
    """Twenty (label, spec, word, prover) cases mixing toy chains, honest
    runs and the hardest adversary on non-members.

    Inputs are chosen so that 10^5 trials see enough halting events for a
    normal-approximation comparison to mean something.
    """
    cases = [
        ("gadget k=1 n=3", build_gadget_verifier(1), "aaa", None),
        ("gadget k=2 n=2", build_gadget_verifier(2), "ab", None),
        ("ruin walk n=3", build_ruin_walk(), "aaa", None),
        ("double coin", build_double_coin(), "a", None),
        ("immediate accept", build_immediate_accept(), "", None),
    ]
    picks = {
        "middle": (["aaa"], ["ab", "abba", "abb"]),
        "mpal": (["bab"], ["ab", "abb"]),
        "knapsack": (["1#1#1"], ["10#1", "1#10"]),
        "L1": (["abba"], ["aab"]),
        "L2": (["ab"], ["aba", "abba"]),
    }
    for protocol, (good, bad) in picks.items():
        assert all(reference_decider(protocol, w) for w in good)
        assert not any(reference_decider(protocol, w) for w in bad)
        spec, _ = build_verifier(protocol, 0.25)
        for w in good:
            cases.append((f"{protocol} {w} honest", spec, w, honest_prover(protocol, w)))
        for w in bad:
            advs = enumerate_adversaries(protocol, w)
            outs = [analyze_exact(spec, w, a) for a in advs]
            best = min(range(len(advs)), key=lambda i: outs[i].p_reject)
            cases.append((f"{protocol} {w} adversary {advs[best].parameter}", spec, w, advs[best]))
    return cases


def suite_engine_selfcheck(trials: int = 10**5, seed: int = 2024) -> SuiteResult:
    res = SuiteResult("engine-selfcheck", dict(trials=trials, seed=seed))
    corpus = selfcheck_corpus()
    sums, its, mc_acc, mc_rej = [], [], [], []
    for c, (label, spec, word, prover) in enumerate(corpus):
        graph = build_config_graph(spec, word, prover)
        out = solve_absorption(graph)
        sums.append((abs(out.p_accept + out.p_reject + out.p_restart - 1), label))
        inl = inline_law(graph)
        ref = expected_iterations(out)
        its.append((abs(inl.expected_iterations - ref) / ref, label))
        est = monte_carlo(spec, word, prover, trials=trials, seed=seed + c)
        for got, exact, bucket in ((est.p_accept, out.p_accept, mc_acc), (est.p_reject, out.p_reject, mc_rej)):
            se = math.sqrt(exact * (1 - exact) / trials)
            z = 0.0 if got == exact else (abs(got - exact) / se if se > 0 else math.inf)
            bucket.append((z, label))
    res.add(_at_most("p_accept + p_reject + p_restart = 1", sums, TOL))
    res.add(_at_most("expected iterations = 1/h (relative)", its, TOL))
    res.add(_at_most("Monte-Carlo accept within 4 standard errors", mc_acc, 4.0))
    res.add(_at_most("Monte-Carlo reject within 4 standard errors", mc_rej, 4.0))
    return res


def suite_sin2(max_j: int = 10**4) -> SuiteResult:
    res = SuiteResult("sin2", {"max_j": max_j})
    ratios = [(bounds.sin2_gap(j) / bounds.sin2_lower(j), j) for j in range(1, max_j + 1)]
    res.add(_greater("sin^2(sqrt2 j pi) / (1/(2j^2+1)) > 1", ratios, 1.0))
    return res


def suite_xy(max_len: int = 8) -> SuiteResult:
    res = SuiteResult("xy", {"max_len": max_len})
    zero_ok, pos = 0, []
    total = 0
    for m in range(max_len + 1):
        for l in range(max_len + 1 - m):
            for X in itertools.product("AB", repeat=m):
                for Y in itertools.product("AB", repeat=l):
                    total += 1
                    g = bounds.xy_gap_exact(X, Y)
                    if m == l and X == Y:
                        zero_ok += g == 0
                    else:
                        pos.append((float(g * 5 ** (m + l)), f"{''.join(X)}|{''.join(Y)}"))
    matched = sum(2**m for m in range(max_len // 2 + 1))
    res.add(Case("gap is 0 when X = Y", zero_ok == matched, float(zero_ok), float(matched), 0.0, matched))
    res.add(_greater("gap * 5^(m+l) > 1 otherwise", pos, 1.0))
    res.cases[-1].count = total - matched
    return res


def run_suite(name: str, **limits) -> SuiteResult:
    fns = {"unitarity": suite_unitarity, "middle": suite_middle, "mpal": suite_mpal, "knapsack": suite_knapsack,
           "L1L2": suite_l1l2, "engine-selfcheck": suite_engine_selfcheck, "sin2": suite_sin2, "xy": suite_xy}
    if name not in fns:
        raise ValueError(f"unknown suite {name!r}; expected one of {SUITES}")
    return fns[name](**limits)


# -- scaling sweeps ------------------------------------------------------------------

def sweep_rows(protocol: str, ns, epsilon: float, word_for=None, max_nodes: int = DEFAULT_NODE_CAP):
    """Honest-prover exact analysis for one member input per length."""
    spec, params = build_verifier(protocol, epsilon)
    rows = []
    for n in ns:
        w = word_for(n) if word_for else member_of_length(protocol, n)
        out = analyze_exact(spec, w, honest_prover(protocol, w), max_nodes)
        rows.append({"protocol": protocol, "n": n, "k": params.k, "epsilon": epsilon,
                     "p_accept_iter": out.p_accept, "p_reject_iter": out.p_reject,
                     "expected_steps_iter": out.expected_steps, "overall_acceptance": overall_acceptance(out),
                     "expected_total_steps": expected_runtime(out)})
    return rows


def member_of_length(protocol: str, n: int) -> str:
    if protocol in ("middle", "mpal"):
        if n % 2 == 0:
            raise ValueError(f"{protocol} has no members of even length {n}")
        return "a" * n
    if protocol == "L1":
        return "b" * n
    if protocol == "L2":
        if n < 2:
            raise ValueError("L2 has no members shorter than 2")
        return "a" * (n - 1) + "b"
    raise ValueError("sweeps over knapsack lengths are not defined")


def loglog_slope(ns, ys) -> float:
    return float(np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(ys, float)), 1)[0])


def mpal_growth_ratios(rows):
    """Measured over predicted growth between consecutive sweep rows, with
    the prediction ``k n 2^(k n)``."""
    out = []
    for a, b in zip(rows, rows[1:]):
        pred = (b["k"] * b["n"] * 2.0 ** (b["k"] * b["n"])) / (a["k"] * a["n"] * 2.0 ** (a["k"] * a["n"]))
        out.append((b["expected_total_steps"] / a["expected_total_steps"]) / pred)
    return out


__all__ = ["Case", "SuiteResult", "SUITES", "run_suite", "sweep_rows", "loglog_slope", "mpal_growth_ratios",
           "knapsack_instances", "member_of_length", "step4_rejection", "selfcheck_corpus", "encoded_after_b",
           "encoded_after_item"]
