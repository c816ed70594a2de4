import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qam2qcfa.constants import ALPHA, M_FOR, U_1, U_ALPHA
from qam2qcfa.languages import ALPHABETS, PROTOCOLS
from qam2qcfa.linalg import basis
from qam2qcfa.machine import (LEFT, RIGHT, CoinRule, Configuration, MachineError, MachineFileError,
                              ProtocolViolation, SpecBuilder, Tape, UnitaryRule, dump_machine, initial_config,
                              load_machine, specs_equivalent, step, validate_spec)
from qam2qcfa.protocols import ACC, REJ, build_ruin_walk, build_verifier
from qam2qcfa.prover import FunctionProver, MiddleClaim, honest_prover


@pytest.fixture(scope="module")
def middle():
    return build_verifier("middle", 0.25)[0]


def _toy(dim=8):
    b = SpecBuilder("toy", frozenset("a"), dim)
    b.initial = b.state("s")
    b.state("acc", "accept")
    b.state("rej", "reject")
    b.unitary("s", [LEFT], np.eye(dim), "s", 1)
    b.unitary("s", ["a"], U_1, "m", 0)
    b.unitary("s", [RIGHT], np.eye(dim), "acc", 0)
    b.measure("m", ["a"], M_FOR, {"f": ("acc", 0), "r": ("rej", 0)})
    return b


def test_validate_builtin_verifiers():
    for p in PROTOCOLS:
        assert validate_spec(build_verifier(p, 0.25)[0]) == []


def test_validate_reports_non_unitary_entry():
    spec = _toy().build()
    theta = dict(spec.theta)
    theta[("s", "a")] = UnitaryRule(2 * np.eye(8), "m", 0)
    bad = validate_spec(type(spec)(**{**spec.__dict__, "theta": theta}))
    assert len(bad) == 1 and "'s', 'a'" in bad[0] and "unitary" in bad[0]


def test_validate_reports_bad_coin_distribution():
    spec = build_ruin_walk()
    theta = dict(spec.theta)
    theta[("walk", "a")] = CoinRule((("walk", -1, Fraction(1)), ("walk", 1, Fraction(1, 2))))
    bad = validate_spec(type(spec)(**{**spec.__dict__, "theta": theta}))
    assert len(bad) == 1 and "3/2" in bad[0]


def test_validate_reports_move_off_tape():
    b = _toy()
    b.unitary("m", [LEFT], np.eye(8), "s", -1)
    assert any("left of the left end-marker" in v for v in validate_spec(b.build()))


def test_validate_reports_missing_measurement_outcome():
    b = _toy()
    b.theta[("m", "a")] = type(b.theta[("m", "a")])(M_FOR, {"f": ("acc", 0)})
    assert any("no classical transition" in v for v in validate_spec(b.build()))


def test_initial_config(middle):
    cfg = initial_config(middle, "aba")
    assert (cfg.classical, cfg.head, cfg.history) == ("s0", 0, ())
    np.testing.assert_array_equal(cfg.quantum, basis(2))
    knap = build_verifier("knapsack", 0.25)[0]
    cfg = initial_config(knap, "101#10#11")
    assert cfg.head == 0 and cfg.quantum.shape == (8,) and cfg.quantum[0] == 1
    with pytest.raises(ValueError):
        initial_config(middle, "ab#")


def test_tape_layout():
    t = Tape("ab")
    assert t == (LEFT, "a", "b", RIGHT) and t.n == 2 and t.word == "ab"


def test_step_rotation(middle):
    tape = Tape("ab")
    cfg = Configuration("rot", 1, basis(2), (("?", "not-middle"),))
    [(nxt, p)] = step(middle, tape, cfg, None)
    assert p == 1 and nxt.head == 2 and nxt.classical == "ask"
    np.testing.assert_allclose(nxt.quantum, [math.cos(ALPHA), math.sin(ALPHA)], atol=1e-15)
    np.testing.assert_allclose(nxt.quantum, U_ALPHA @ basis(2))


def test_step_measurement_branches():
    spec = _toy().build()
    tape = Tape("a")
    cfg = Configuration("m", 1, U_1 @ basis(8))
    succ = {c.classical: p for c, p in step(spec, tape, cfg, None)}
    assert succ["acc"] == pytest.approx(1 / 3) and succ["rej"] == pytest.approx(2 / 3)


def test_step_communication(middle):
    tape = Tape("aaa")
    cfg = Configuration("ask", 2, basis(2), (("?", "not-middle"),))
    [(nxt, p)] = step(middle, tape, cfg, MiddleClaim(1))
    assert p == 1 and nxt.classical == "check" and nxt.head == 2
    assert nxt.history == (("?", "not-middle"), ("?", "middle"))


def test_step_rejects_halting_and_bad_answers(middle):
    tape = Tape("a")
    with pytest.raises(MachineError):
        step(middle, tape, Configuration(ACC, 1, basis(2)), None)
    with pytest.raises(ProtocolViolation):
        step(middle, tape, Configuration("ask", 1, basis(2)), FunctionProver(lambda *a: "perhaps"))
    with pytest.raises(ProtocolViolation):
        step(middle, tape, Configuration("ask", 1, basis(2)), FunctionProver(lambda *a: "take"))


@pytest.mark.parametrize("protocol", PROTOCOLS)
def test_machine_file_round_trip(protocol):
    spec = build_verifier(protocol, 0.25)[0]
    text = dump_machine(spec)
    again = load_machine(text)
    assert specs_equivalent(spec, again)
    assert dump_machine(again) == text


def test_ruin_walk_round_trip():
    spec = build_ruin_walk()
    assert specs_equivalent(spec, load_machine(dump_machine(spec)))


def test_machine_file_errors(middle):
    with pytest.raises(MachineFileError, match="empty"):
        load_machine("")
    with pytest.raises(MachineFileError, match="invalid JSON"):
        load_machine("{")
    doc = json.loads(dump_machine(middle))
    del doc["states"]
    with pytest.raises(MachineFileError, match="schema"):
        load_machine(doc)
    doc = json.loads(dump_machine(middle))
    for e in doc["theta"]:
        if e["kind"] == "measurement":
            e["delta"].pop(next(iter(e["delta"])))
            break
    with pytest.raises(MachineFileError, match="no classical transition"):
        load_machine(doc)
    doc = json.loads(dump_machine(middle))
    doc["theta"][0]["matrix"] = [[[2, 0], [0, 0]], [[0, 0], [2, 0]]]
    with pytest.raises(MachineFileError, match="not unitary"):
        load_machine(doc)


def test_schema_error_names_location(middle):
    doc = json.loads(dump_machine(middle))
    doc["theta"][3]["symbol"] = 7
    with pytest.raises(MachineFileError, match=r"theta\[3\]"):
        load_machine(doc)


def _walk(spec, word, prover, rng, steps=400):
    tape = Tape(word, spec.input_alphabet)
    cfg = initial_config(spec, word)
    for _ in range(steps):
        if spec.is_halting(cfg.classical):
            return
        succ = step(spec, tape, cfg, prover)
        assert sum(p for _, p in succ) == pytest.approx(1, abs=1e-9)
        for c, _ in succ:
            assert 0 <= c.head <= tape.n + 1
            if spec.quantum_dim:
                assert np.linalg.norm(c.quantum) == pytest.approx(1, abs=1e-9)
            else:
                assert c.quantum is None
        i = rng.choice(len(succ), p=np.array([p for _, p in succ]) / sum(p for _, p in succ))
        cfg = succ[i][0]


@given(st.sampled_from(PROTOCOLS), st.integers(0, 2**32 - 1), st.data())
def test_random_trajectories_stay_on_tape(protocol, seed, data):
    spec = build_verifier(protocol, 0.25)[0]
    alphabet = sorted(ALPHABETS[protocol])
    word = data.draw(st.text(alphabet=alphabet, max_size=7))
    rng = np.random.default_rng(seed)
    options = {r.emit: sorted(r.responses) for r in spec.comm.values()}
    prover = FunctionProver(lambda w, h, e: options[e][rng.integers(len(options[e]))])
    _walk(spec, word, prover, rng)


@given(st.integers(0, 2**32 - 1), st.integers(0, 8))
def test_probabilistic_walk_never_touches_register(seed, n):
    _walk(build_ruin_walk(), "a" * n, None, np.random.default_rng(seed))


def test_honest_run_reaches_gadget(middle):
    rng = np.random.default_rng(0)
    _walk(middle, "aaa", honest_prover("middle", "aaa"), rng)
    assert REJ in middle.states
