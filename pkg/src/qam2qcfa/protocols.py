"""Verifier constructions for the five protocols.

State names are dotted by phase (``g.`` acceptance gadget, ``f.`` flag loop,
``fc.`` knapsack format check, ...) so that graphs and traces stay readable.
Every non-halting outcome that does not reject ends in the start state with
the head on the left end-marker and the register in ``|q0>``, which the
engine recognises as a restart.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import (M_FIN, M_FOR, U_0, U_0P, U_1, U_1P, U_A, U_ALPHA, U_B, U_HASH, U_MINUS_ALPHA,
                        basis_measurement, coin_measurement, hadamard, swap)
from .languages import ALPHABETS, check_protocol
from .machine import ACCEPT, LEFT, REJECT, RIGHT, SpecBuilder, VerifierSpec, validate_spec

START, ACC, REJ = "s0", "acc", "rej"

# communication vocabulary
ASK_MIDDLE, MIDDLE, NOT_MIDDLE = "?", "middle", "not-middle"
ASK_TAKE, TAKE, SKIP = "take?", "take", "skip"
ASK_START, ASK_END, MARK, PASS = "start?", "end?", "mark", "pass"


@dataclass(frozen=True)
class ProtocolParams:
    protocol: str
    epsilon: float
    k: int


def repetition_k(protocol: str, epsilon: float) -> int:
    """Number of final coin flips (or flag-loop passes) for error ``epsilon``."""
    check_protocol(protocol)
    if not 0 < epsilon < 0.5:
        raise ValueError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    if protocol == "mpal":
        return math.ceil(max(math.log2(5), math.log2(1 / epsilon)))
    return 1 + math.ceil(math.log2(1 / epsilon))


def _new(name: str, alphabet, dim: int) -> SpecBuilder:
    b = SpecBuilder(name=name, input_alphabet=frozenset(alphabet), quantum_dim=dim)
    b.initial = b.state(START)
    b.state(ACC, ACCEPT)
    b.state(REJ, REJECT)
    return b


def _rewind(b: SpecBuilder, state: str, then: str, then_move: int, dim: int):
    """Walk left to the left end-marker, then enter ``then``."""
    eye = np.eye(dim)
    b.unitary(state, sorted(b.input_alphabet) + [RIGHT], eye, state, -1)
    b.unitary(state, [LEFT], eye, then, then_move)


def _coin_flips(b: SpecBuilder, prefix: str, k: int, symbols, dim: int, on_tails: str):
    """``k`` fair coin flips on the current cell; all heads accepts.

    A flip is a Hadamard on (q0, q1) followed by measuring q0; a tails
    outcome is swapped back to ``|q0>`` before control passes to ``on_tails``.
    """
    if k == 0:
        return ACC
    H, X, M = hadamard(dim), swap(dim), coin_measurement(dim)
    tail = f"{prefix}.tail"
    for j in range(1, k + 1):
        flip, meas = f"{prefix}{j}", f"{prefix}{j}.m"
        nxt = ACC if j == k else f"{prefix}{j + 1}"
        b.unitary(flip, symbols, H, meas, 0)
        b.measure(meas, symbols, M, {"heads": (nxt, 0), "tails": (tail, 0)})
    b.unitary(tail, symbols, X, on_tails, 0)
    return f"{prefix}1"


def _add_gadget(b: SpecBuilder, k: int, dim: int = 2) -> str:
    """Acceptance gadget: two fair random walks from the first input cell,
    each absorbed at an end-marker, then ``k`` coin flips.  Accepts only if
    both walks reach the right end-marker and every flip is heads, which
    happens with probability ``1 / (2^k (n+1)^2)``.  Every other outcome
    returns to the start configuration.  Returns the entry state, which
    expects the head anywhere on the tape."""
    interior = sorted(b.input_alphabet)
    H, X, M = hadamard(dim), swap(dim), coin_measurement(dim)
    eye = np.eye(dim)
    home = "g.home"
    _rewind(b, home, START, 0, dim)
    coins = _coin_flips(b, "g.c", k, [RIGHT], dim, home)
    for w, after in (("g.w1", "g.back2"), ("g.w2", coins)):
        meas, fix = f"{w}.m", f"{w}.x"
        b.unitary(w, interior, H, meas, 0)
        b.measure(meas, interior, M, {"heads": (w, 1), "tails": (fix, -1)})
        b.unitary(fix, interior, X, w, 0)
        b.unitary(fix, [LEFT], X, START, 0)  # walk fell off the left end
        b.unitary(w, [RIGHT], eye, after, -1 if after == "g.back2" else 0)
    _rewind(b, "g.back1", "g.w1", 1, dim)
    _rewind(b, "g.back2", "g.w2", 1, dim)
    return "g.back1"


def _add_flag_loop(b: SpecBuilder, k: int, dim: int) -> str:
    """``k`` left-to-right passes flipping one coin per input cell; a tails
    sets the flag.  Accepts iff the flag is still clear after the last
    pass (probability ``2^(-k n)``), otherwise restarts."""
    interior = sorted(b.input_alphabet)
    H, X, M = hadamard(dim), swap(dim), coin_measurement(dim)
    eye = np.eye(dim)
    home = "f.home"
    _rewind(b, home, START, 0, dim)
    for j in range(1, k + 1):
        fix = f"f.p{j}.x"
        b.unitary(fix, interior, X, f"f.p{j}.f1", 1)
        for flag in (0, 1):
            cur = f"f.p{j}.f{flag}"
            meas = f"{cur}.m"
            b.unitary(cur, interior, H, meas, 0)
            b.measure(meas, interior, M, {"heads": (cur, 1), "tails": (fix, 0)})
            if j < k:
                rw = f"f.rw{j + 1}.f{flag}"
                b.unitary(cur, [RIGHT], eye, rw, -1)
                _rewind(b, rw, f"f.p{j + 1}.f{flag}", 1, dim)
            elif flag == 0:
                b.unitary(cur, [RIGHT], eye, ACC, 0)
            else:
                b.unitary(cur, [RIGHT], eye, home, -1)
    _rewind(b, "f.back", "f.p1.f0", 1, dim)
    return "f.back"


def _finish(b: SpecBuilder) -> VerifierSpec:
    spec = b.build()
    problems = validate_spec(spec)
    if problems:
        raise AssertionError(f"{spec.name} verifier is malformed: {problems[:5]}")
    return spec


def _middle(k: int) -> VerifierSpec:
    b = _new("middle", ALPHABETS["middle"], 2)
    eye, ab = np.eye(2), ["a", "b"]
    gadget = _add_gadget(b, k)
    b.unitary(START, [LEFT], eye, "ask", 1)
    b.ask("ask", ASK_MIDDLE, {MIDDLE: "check", NOT_MIDDLE: "rot"})
    b.unitary("rot", ab, U_ALPHA, "ask", 1)
    b.unitary("rot", [RIGHT], eye, REJ, 0)  # never told where the middle is
    b.unitary("check", ["a"], eye, "unrot", 1)
    b.unitary("check", ["b", RIGHT], eye, REJ, 0)
    b.unitary("unrot", ab, U_MINUS_ALPHA, "unrot", 1)
    b.measure("unrot", [RIGHT], basis_measurement(2), {"q0": (gadget, -1), "q1": (REJ, 0)})
    return _finish(b)


def _mpal(k: int) -> VerifierSpec:
    b = _new("mpal", ALPHABETS["mpal"], 3)
    eye = np.eye(3)
    flags = _add_flag_loop(b, k, 3)
    b.unitary(START, [LEFT], eye, "ask", 1)
    b.ask("ask", ASK_MIDDLE, {MIDDLE: "check", NOT_MIDDLE: "fwd"})
    b.unitary("fwd", ["a"], U_A, "ask", 1)
    b.unitary("fwd", ["b"], U_B, "ask", 1)
    b.unitary("fwd", [RIGHT], eye, REJ, 0)
    b.unitary("check", ["a"], eye, "inv", 1)
    b.unitary("check", ["b", RIGHT], eye, REJ, 0)
    b.unitary("inv", ["a"], U_A.conj().T, "inv", 1)
    b.unitary("inv", ["b"], U_B.conj().T, "inv", 1)
    b.measure("inv", [RIGHT], basis_measurement(3), {"q0": (flags, -1), "q1": (REJ, 0)})
    return _finish(b)


def _knapsack(k: int) -> VerifierSpec:
    b = _new("knapsack", ALPHABETS["knapsack"], 8)
    eye, bits = np.eye(8), ["0", "1"]
    home = "home"
    _rewind(b, home, START, 0, 8)

    # reset: collapse with M_fin, rotate the basis state back to q0, go home
    b.measure("reset", ["0", "1", "#", RIGHT], M_FIN, {str(i): (f"reset.{i}", 0) for i in range(8)})
    for i in range(8):
        b.unitary(f"reset.{i}", ["0", "1", "#", RIGHT], swap(8, i, 0), home, 0)

    # format check: blocks in 1{0,1}*, at least one '#'
    b.unitary(START, [LEFT], eye, "fc.s0", 1)
    for seen in (0, 1):
        s, inside = f"fc.s{seen}", f"fc.in{seen}"
        b.unitary(s, ["1"], eye, inside, 1)
        b.unitary(s, ["0", "#", RIGHT], eye, REJ, 0)
        b.unitary(inside, bits, eye, inside, 1)
        b.unitary(inside, ["#"], eye, "fc.s1", 1)
    b.unitary("fc.in0", [RIGHT], eye, REJ, 0)
    b.unitary("fc.in1", [RIGHT], eye, "fc.back", -1)
    _rewind(b, "fc.back", "eb", 1, 8)

    # encode b into the q1 amplitude
    b.unitary("eb", ["0"], U_0, "eb.m", 0)
    b.unitary("eb", ["1"], U_1, "eb.m", 0)
    b.unitary("eb", ["#"], eye, "ask", 0)
    b.measure("eb.m", bits, M_FOR, {"f": ("eb", 1), "r": ("reset", 0)})

    # one question per item
    b.ask("ask", ASK_TAKE, {TAKE: "tk.go", SKIP: "sk.go"})
    b.unitary("tk.go", ["#"], eye, "tk", 1)
    b.unitary("sk.go", ["#"], eye, "sk", 1)
    b.unitary("tk", ["0"], U_0P, "tk.m", 0)
    b.unitary("tk", ["1"], U_1P, "tk.m", 0)
    b.unitary("tk", ["#", RIGHT], U_HASH, "tk.h", 0)
    b.measure("tk.m", bits, M_FOR, {"f": ("tk", 1), "r": ("reset", 0)})
    b.measure("tk.h", ["#"], M_FOR, {"f": ("ask", 0), "r": ("reset", 0)})
    b.measure("tk.h", [RIGHT], M_FOR, {"f": ("fin", 0), "r": ("reset", 0)})
    b.unitary("sk", bits, eye, "sk", 1)
    b.unitary("sk", ["#"], eye, "ask", 0)
    b.unitary("sk", [RIGHT], eye, "fin", 0)

    # final check on '$'
    coins = _coin_flips(b, "c", k, [RIGHT], 8, home)
    delta = {"0": (coins, 0), "1": (REJ, 0)}
    delta.update({str(i): (f"reset.{i}", 0) for i in range(2, 8)})
    b.measure("fin", [RIGHT], M_FIN, delta)
    return _finish(b)


def _decomposed(protocol: str, k: int) -> VerifierSpec:
    """L1 / L2: the prover marks a first position ``i`` and a second
    position ``j``; the verifier rotates by +alpha before ``i``, checks the
    two marked letters, rotates by -alpha after ``j`` and then proceeds as
    for the middle language."""
    b = _new(protocol, ALPHABETS[protocol], 2)
    eye, ab = np.eye(2), ["a", "b"]
    gadget = _add_gadget(b, k)
    b.unitary(START, [LEFT], eye, "ask1", 1)
    b.ask("ask1", ASK_START, {MARK: "m1", PASS: "rot"})
    b.unitary("rot", ab, U_ALPHA, "ask1", 1)
    b.unitary("rot", [RIGHT], eye, REJ, 0)
    if protocol == "L1":
        # second mark may be the same cell (w = u b v)
        b.unitary("m1", ["b"], eye, "ask2", 0)
        b.unitary("m1", ["a", RIGHT], eye, REJ, 0)
        b.ask("ask2", ASK_END, {MARK: "m2", PASS: "skip"})
        b.unitary("skip", ab, eye, "ask2", 1)
        b.unitary("skip", [RIGHT], eye, REJ, 0)
        b.unitary("m2", ["b"], eye, "unrot", 1)
        b.unitary("m2", ["a", RIGHT], eye, REJ, 0)
    else:
        b.unitary("m1", [RIGHT], eye, REJ, 0)
        for c in ab:
            other = "b" if c == "a" else "a"
            ask, skip, m2 = f"ask2.{c}", f"skip.{c}", f"m2.{c}"
            b.unitary("m1", [c], eye, ask, 1)
            b.ask(ask, ASK_END, {MARK: m2, PASS: skip})
            b.unitary(skip, ab, eye, ask, 1)
            b.unitary(skip, [RIGHT], eye, REJ, 0)
            b.unitary(m2, [other], eye, "unrot", 1)
            b.unitary(m2, [c, RIGHT], eye, REJ, 0)
    b.unitary("unrot", ab, U_MINUS_ALPHA, "unrot", 1)
    b.measure("unrot", [RIGHT], basis_measurement(2), {"q0": (gadget, -1), "q1": (REJ, 0)})
    return _finish(b)


def build_verifier(protocol: str, epsilon: float) -> tuple[VerifierSpec, ProtocolParams]:
    """Verifier for ``protocol`` with one-sided error ``epsilon``."""
    k = repetition_k(protocol, epsilon)
    if protocol == "middle":
        spec = _middle(k)
    elif protocol == "mpal":
        spec = _mpal(k)
    elif protocol == "knapsack":
        spec = _knapsack(k)
    else:
        spec = _decomposed(protocol, k)
    return spec, ProtocolParams(protocol, epsilon, k)


def build_gadget_verifier(k: int) -> VerifierSpec:
    """The acceptance gadget alone, over {a, b}, with an explicit ``k``."""
    if k < 0:
        raise ValueError("k must be non-negative")
    b = _new(f"gadget-k{k}", "ab", 2)
    b.unitary(START, [LEFT], np.eye(2), "g.w1", 1)
    _add_gadget(b, k)
    return _finish(b)


def build_flag_loop_verifier(k: int, dim: int = 3) -> VerifierSpec:
    """The flag loop alone, over {a, b}, with an explicit number of passes."""
    if k < 1:
        raise ValueError("k must be at least 1")
    b = _new(f"flag-loop-k{k}", "ab", dim)
    b.unitary(START, [LEFT], np.eye(dim), "f.p1.f0", 1)
    _add_flag_loop(b, k, dim)
    return _finish(b)


def build_ruin_walk() -> VerifierSpec:
    """Probabilistic (coin-tossing) fair walk over {a}: starts on the first
    cell, rejects on reaching the left end-marker, accepts on the right."""
    b = _new("ruin-walk", "a", 0)
    b.coin(START, [LEFT], [("walk", 1, 1)])
    b.coin("walk", ["a"], [("walk", -1, "1/2"), ("walk", 1, "1/2")])
    b.coin("walk", [LEFT], [(REJ, 0, 1)])
    b.coin("walk", [RIGHT], [(ACC, 0, 1)])
    return _finish(b)


def build_immediate_accept() -> VerifierSpec:
    b = _new("immediate-accept", "a", 0)
    b.coin(START, [LEFT], [(ACC, 0, 1)])
    return _finish(b)


def build_double_coin() -> VerifierSpec:
    """Two fair coins on the left end-marker: heads-heads accepts, anything
    else returns to the start."""
    b = _new("double-coin", "a", 0)
    b.state("c2")
    b.coin(START, [LEFT], [("c2", 0, "1/2"), ("back", 0, "1/2")])
    b.coin("c2", [LEFT], [(ACC, 0, "1/2"), ("back", 0, "1/2")])
    b.coin("back", [LEFT], [(START, 0, 1)])
    return _finish(b)
