"""Verifier machines: two-way automata with classical states, an optional
quantum register, and a communication cell shared with a prover.

One ``VerifierSpec`` type covers both flavours:

* quantum mode (``quantum_dim > 0``): every reading transition is either a
  unitary followed by a deterministic classical move, or a projective
  measurement whose outcome selects the classical move;
* probabilistic mode (``quantum_dim == 0``): every reading transition is a
  coin-tossing distribution over ``(next state, head move)`` with weights in
  ``{0, 1/2, 1}``.

Communication states write their symbol into the cell, the prover answers
with a symbol of the communication alphabet, and the verifier changes state
without moving its head.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Protocol, Union

import jsonschema
import numpy as np

from .linalg import ATOL, ProjectiveMeasurement, cvec, cmat, is_normalized, is_unitary, measure_branches

LEFT = "¢"
RIGHT = "$"

READING, COMMUNICATION, ACCEPT, REJECT = "reading", "communication", "accept", "reject"
STATE_KINDS = (READING, COMMUNICATION, ACCEPT, REJECT)
HALTING = (ACCEPT, REJECT)


class MachineError(Exception):
    """Misuse of a machine: undefined transition, stepping a halted configuration."""


class ProtocolViolation(MachineError):
    """The prover answered with a symbol the verifier cannot act on."""


class MachineFileError(ValueError):
    """A machine-description document could not be parsed."""


@dataclass(frozen=True)
class UnitaryRule:
    matrix: np.ndarray
    next: str
    move: int


@dataclass(frozen=True)
class MeasurementRule:
    measurement: ProjectiveMeasurement
    delta: Mapping[str, tuple[str, int]]


@dataclass(frozen=True)
class CoinRule:
    # (next state, head move, probability)
    distribution: tuple[tuple[str, int, Fraction], ...]


Rule = Union[UnitaryRule, MeasurementRule, CoinRule]


@dataclass(frozen=True)
class CommRule:
    emit: str
    responses: Mapping[str, str]


@dataclass(frozen=True)
class VerifierSpec:
    """Complete description of a verifier.

    ``theta`` maps ``(reading state, tape symbol)`` to the rule applied there;
    ``comm`` maps each communication state to the symbol it emits and its
    response table.
    """

    states: Mapping[str, str]
    initial: str
    input_alphabet: frozenset
    comm_alphabet: frozenset
    quantum_dim: int
    initial_quantum: np.ndarray | None
    theta: Mapping[tuple[str, str], Rule]
    comm: Mapping[str, CommRule]
    name: str = ""

    @property
    def tape_alphabet(self) -> frozenset:
        return self.input_alphabet | {LEFT, RIGHT}

    def kind(self, state: str) -> str:
        return self.states[state]

    def is_halting(self, state: str) -> bool:
        return self.states[state] in HALTING

    def states_of(self, kind: str) -> list[str]:
        return [s for s, k in self.states.items() if k == kind]


class Tape(tuple):
    """Input bracketed by the end-markers; ``tape[0]`` is the left marker."""

    def __new__(cls, word: str, alphabet=None):
        if alphabet is not None:
            bad = sorted({c for c in word if c not in alphabet})
            if bad:
                raise ValueError(f"input symbols {bad} are not in the alphabet {sorted(alphabet)}")
        return super().__new__(cls, (LEFT, *word, RIGHT))

    @property
    def word(self) -> str:
        return "".join(self[1:-1])

    @property
    def n(self) -> int:
        return len(self) - 2


@dataclass(frozen=True, eq=False)
class Configuration:
    classical: str
    head: int
    quantum: np.ndarray | None
    history: tuple[tuple[str, str], ...] = ()


class Prover(Protocol):
    """Anything with ``respond``.  A randomized prover may instead provide
    ``distribution(word, history, emitted) -> [(symbol, probability), ...]``."""

    def respond(self, word: str, history: tuple, emitted: str) -> str: ...


def initial_config(spec: VerifierSpec, word: str) -> Configuration:
    Tape(word, spec.input_alphabet)  # alphabet check
    q = None if spec.quantum_dim == 0 else np.array(spec.initial_quantum, dtype=complex)
    return Configuration(spec.initial, 0, q, ())


def step(spec: VerifierSpec, tape: Tape, cfg: Configuration, prover: Prover | None):
    """All successors of a non-halting configuration with their probabilities.

    Returns
    -------
    list of (Configuration, float)
    """
    kind = spec.states[cfg.classical]
    if kind in HALTING:
        raise MachineError(f"configuration in halting state {cfg.classical!r} has no successor")

    if kind == COMMUNICATION:
        rule = spec.comm[cfg.classical]
        if prover is None:
            raise MachineError(f"communication state {cfg.classical!r} reached without a prover")
        mixed = getattr(prover, "distribution", None)
        if mixed is not None:
            answers = [(g, float(p)) for g, p in mixed(tape.word, cfg.history, rule.emit) if p > 0]
        else:
            answers = [(prover.respond(tape.word, cfg.history, rule.emit), 1.0)]
        out = []
        for answer, p in answers:
            if answer not in spec.comm_alphabet or answer not in rule.responses:
                raise ProtocolViolation(
                    f"prover answered {answer!r} to {rule.emit!r} in state {cfg.classical!r}"
                )
            hist = cfg.history + ((rule.emit, answer),)
            out.append((Configuration(rule.responses[answer], cfg.head, cfg.quantum, hist), p))
        return out

    symbol = tape[cfg.head]
    rule = spec.theta.get((cfg.classical, symbol))
    if rule is None:
        raise MachineError(f"no transition for state {cfg.classical!r} on symbol {symbol!r}")

    if isinstance(rule, UnitaryRule):
        q = rule.matrix @ cfg.quantum
        return [(Configuration(rule.next, _moved(tape, cfg.head, rule.move), q, cfg.history), 1.0)]

    if isinstance(rule, MeasurementRule):
        out = []
        for label, prob, post in measure_branches(rule.measurement, cfg.quantum):
            nxt, move = rule.delta[label]
            out.append((Configuration(nxt, _moved(tape, cfg.head, move), post, cfg.history), prob))
        return out

    out = []
    for nxt, move, p in rule.distribution:
        if p:
            out.append((Configuration(nxt, _moved(tape, cfg.head, move), cfg.quantum, cfg.history), float(p)))
    return out


def _moved(tape: Tape, head: int, move: int) -> int:
    h = head + move
    if not 0 <= h < len(tape):
        raise MachineError(f"head moved off the tape (position {h})")
    return h


# -- validation ---------------------------------------------------------------

_COIN_VALUES = {Fraction(0), Fraction(1, 2), Fraction(1)}


def validate_spec(spec: VerifierSpec, tol: float = 1e-12) -> list[str]:
    """Every invariant violation of ``spec``; an empty list means valid."""
    errs: list[str] = []
    kinds = spec.states
    for s, k in kinds.items():
        if k not in STATE_KINDS:
            errs.append(f"state {s!r}: unknown kind {k!r}")
    if spec.initial not in kinds:
        errs.append(f"initial state {spec.initial!r} is not declared")
    elif kinds[spec.initial] != READING:
        errs.append(f"initial state {spec.initial!r} is not a reading state")
    if not spec.states_of(ACCEPT) and not spec.states_of(REJECT):
        errs.append("no halting states")
    if spec.input_alphabet & {LEFT, RIGHT}:
        errs.append("input alphabet contains an end-marker")

    quantum = spec.quantum_dim > 0
    if quantum:
        q0 = spec.initial_quantum
        if q0 is None or np.shape(q0) != (spec.quantum_dim,):
            errs.append(f"initial quantum state must have dimension {spec.quantum_dim}")
        elif not is_normalized(np.asarray(q0), ATOL):
            errs.append("initial quantum state is not normalized")
    elif spec.initial_quantum is not None:
        errs.append("probabilistic verifier must not carry a quantum state")

    def check_target(where, nxt, move, symbol):
        if nxt not in kinds:
            errs.append(f"{where}: target state {nxt!r} is not declared")
        if move not in (-1, 0, 1):
            errs.append(f"{where}: head move {move!r} not in {{-1, 0, 1}}")
        if symbol == LEFT and move == -1:
            errs.append(f"{where}: moves left of the left end-marker")
        if symbol == RIGHT and move == 1:
            errs.append(f"{where}: moves right of the right end-marker")

    for (s, sym), rule in spec.theta.items():
        where = f"theta[{s!r}, {sym!r}]"
        if kinds.get(s) != READING:
            errs.append(f"{where}: {s!r} is not a reading state")
        if sym not in spec.tape_alphabet:
            errs.append(f"{where}: symbol not in the tape alphabet")
        if isinstance(rule, UnitaryRule):
            if not quantum:
                errs.append(f"{where}: unitary rule in a probabilistic verifier")
            elif rule.matrix.shape != (spec.quantum_dim,) * 2:
                errs.append(f"{where}: matrix shape {rule.matrix.shape} does not match the register")
            elif not is_unitary(rule.matrix, tol):
                errs.append(f"{where}: matrix is not unitary")
            check_target(where, rule.next, rule.move, sym)
        elif isinstance(rule, MeasurementRule):
            m = rule.measurement
            if not quantum:
                errs.append(f"{where}: measurement in a probabilistic verifier")
            elif m.dim != spec.quantum_dim:
                errs.append(f"{where}: measurement dimension {m.dim} does not match the register")
            errs.extend(f"{where}: {v}" for v in m.violations(tol))
            missing = [lab for lab in m.labels if lab not in rule.delta]
            if missing:
                errs.append(f"{where}: no classical transition for outcomes {missing}")
            extra = [lab for lab in rule.delta if lab not in m.labels]
            if extra:
                errs.append(f"{where}: transitions for unknown outcomes {extra}")
            for lab, (nxt, move) in rule.delta.items():
                check_target(f"{where}[{lab!r}]", nxt, move, sym)
        elif isinstance(rule, CoinRule):
            if quantum:
                errs.append(f"{where}: coin-tossing rule in a quantum verifier")
            total = Fraction(0)
            for nxt, move, p in rule.distribution:
                if Fraction(p) not in _COIN_VALUES:
                    errs.append(f"{where}: probability {p} not in {{0, 1/2, 1}}")
                total += Fraction(p)
                check_target(where, nxt, move, sym)
            if total != 1:
                errs.append(f"{where}: distribution sums to {total}, not 1")
        else:
            errs.append(f"{where}: unknown rule type {type(rule).__name__}")

    for s in spec.states_of(COMMUNICATION):
        if s not in spec.comm:
            errs.append(f"communication state {s!r} has no emission")
    for s, rule in spec.comm.items():
        where = f"comm[{s!r}]"
        if kinds.get(s) != COMMUNICATION:
            errs.append(f"{where}: {s!r} is not a communication state")
        if rule.emit not in spec.comm_alphabet:
            errs.append(f"{where}: emitted symbol {rule.emit!r} not in the communication alphabet")
        for g, nxt in rule.responses.items():
            if g not in spec.comm_alphabet:
                errs.append(f"{where}: response {g!r} not in the communication alphabet")
            if nxt not in kinds:
                errs.append(f"{where}: target state {nxt!r} is not declared")
    return errs


# -- machine-description documents ---------------------------------------------

SCHEMA_VERSION = 1

_complex = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_matrix = {"type": "array", "items": {"type": "array", "items": _complex}}
_target = {"type": "array", "prefixItems": [{"type": "string"}, {"enum": [-1, 0, 1]}],
           "items": False, "minItems": 2}

MACHINE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "states", "initial", "quantum_dim", "input_alphabet",
                 "comm_alphabet", "theta", "comm"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "states": {
            "type": "array", "minItems": 1,
            "items": {"type": "object", "required": ["name", "kind"], "additionalProperties": False,
                      "properties": {"name": {"type": "string"}, "kind": {"enum": list(STATE_KINDS)}}},
        },
        "initial": {"type": "string"},
        "quantum_dim": {"type": "integer", "minimum": 0},
        "initial_quantum": {"type": "array", "items": _complex},
        "input_alphabet": {"type": "array", "items": {"type": "string", "minLength": 1, "maxLength": 1}},
        "comm_alphabet": {"type": "array", "items": {"type": "string"}},
        "theta": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["state", "symbol", "kind"],
                "properties": {
                    "state": {"type": "string"},
                    "symbol": {"type": "string", "minLength": 1, "maxLength": 1},
                    "kind": {"enum": ["unitary", "measurement", "coin"]},
                },
                "allOf": [
                    {"if": {"properties": {"kind": {"const": "unitary"}}},
                     "then": {"required": ["matrix", "delta"], "additionalProperties": False,
                              "properties": {"state": True, "symbol": True, "kind": True,
                                             "matrix": _matrix, "delta": _target}}},
                    {"if": {"properties": {"kind": {"const": "measurement"}}},
                     "then": {"required": ["outcomes", "delta"], "additionalProperties": False,
                              "properties": {
                                  "state": True, "symbol": True, "kind": True,
                                  "outcomes": {"type": "array", "minItems": 1, "items": {
                                      "type": "object", "required": ["label", "projector"],
                                      "additionalProperties": False,
                                      "properties": {"label": {"type": "string"}, "projector": _matrix}}},
                                  "delta": {"type": "object", "additionalProperties": _target}}}},
                    {"if": {"properties": {"kind": {"const": "coin"}}},
                     "then": {"required": ["distribution"], "additionalProperties": False,
                              "properties": {
                                  "state": True, "symbol": True, "kind": True,
                                  "distribution": {"type": "array", "minItems": 1, "items": {
                                      "type": "object", "required": ["next", "move", "p"],
                                      "additionalProperties": False,
                                      "properties": {"next": {"type": "string"},
                                                     "move": {"enum": [-1, 0, 1]},
                                                     "p": {"enum": ["0", "1/2", "1", 0, 0.5, 1]}}}}}}},
                ],
            },
        },
        "comm": {
            "type": "array",
            "items": {"type": "object", "required": ["state", "emit", "responses"], "additionalProperties": False,
                      "properties": {"state": {"type": "string"}, "emit": {"type": "string"},
                                     "responses": {"type": "object", "additionalProperties": {"type": "string"}}}},
        },
    },
}


def _c(z) -> list:
    return [float(z.real), float(z.imag)]


def _m(mat) -> list:
    return [[_c(z) for z in row] for row in np.asarray(mat)]


def _from_m(rows) -> np.ndarray:
    return cmat([[complex(re, im) for re, im in row] for row in rows])


def dump_machine(spec: VerifierSpec) -> str:
    """Serialize ``spec`` to a JSON machine-description document."""
    theta = []
    for (s, sym), rule in spec.theta.items():
        entry = {"state": s, "symbol": sym}
        if isinstance(rule, UnitaryRule):
            entry.update(kind="unitary", matrix=_m(rule.matrix), delta=[rule.next, rule.move])
        elif isinstance(rule, MeasurementRule):
            entry.update(kind="measurement",
                         outcomes=[{"label": str(lab), "projector": _m(p)} for lab, p in rule.measurement.outcomes],
                         delta={str(lab): [t[0], t[1]] for lab, t in rule.delta.items()})
        else:
            entry.update(kind="coin",
                         distribution=[{"next": nxt, "move": mv, "p": str(Fraction(p))}
                                       for nxt, mv, p in rule.distribution])
        theta.append(entry)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "name": spec.name,
        "states": [{"name": s, "kind": k} for s, k in spec.states.items()],
        "initial": spec.initial,
        "quantum_dim": spec.quantum_dim,
        "input_alphabet": sorted(spec.input_alphabet),
        "comm_alphabet": sorted(spec.comm_alphabet),
        "theta": theta,
        "comm": [{"state": s, "emit": r.emit, "responses": dict(r.responses)} for s, r in spec.comm.items()],
    }
    if spec.quantum_dim:
        doc["initial_quantum"] = [_c(z) for z in spec.initial_quantum]
    return json.dumps(doc, indent=1, ensure_ascii=False)


def load_machine(document, validate: bool = True) -> VerifierSpec:
    """Parse a machine-description document (JSON text or an already-decoded dict).

    Raises
    ------
    MachineFileError
        On malformed JSON, schema violations (the message carries the JSON
        path of the offending node) and, when ``validate`` is set, on any
        ``validate_spec`` violation.
    """
    if isinstance(document, (str, bytes)):
        if not str(document).strip():
            raise MachineFileError("empty machine description")
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise MachineFileError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    else:
        doc = document
    validator = jsonschema.Draft202012Validator(MACHINE_SCHEMA)
    error = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if error is not None:
        raise MachineFileError(f"schema violation at {error.json_path}: {error.message}")

    states = {}
    for st in doc["states"]:
        if st["name"] in states:
            raise MachineFileError(f"duplicate state {st['name']!r}")
        states[st["name"]] = st["kind"]
    dim = doc["quantum_dim"]
    q0 = None
    if dim:
        if "initial_quantum" not in doc:
            raise MachineFileError("quantum machine without initial_quantum")
        q0 = cvec([complex(re, im) for re, im in doc["initial_quantum"]])

    theta = {}
    for i, e in enumerate(doc["theta"]):
        key = (e["state"], e["symbol"])
        if key in theta:
            raise MachineFileError(f"$.theta[{i}]: duplicate entry for {key}")
        try:
            if e["kind"] == "unitary":
                theta[key] = UnitaryRule(_from_m(e["matrix"]), e["delta"][0], e["delta"][1])
            elif e["kind"] == "measurement":
                meas = ProjectiveMeasurement(tuple((o["label"], _from_m(o["projector"])) for o in e["outcomes"]))
                theta[key] = MeasurementRule(meas, {lab: (t[0], t[1]) for lab, t in e["delta"].items()})
            else:
                theta[key] = CoinRule(tuple((d["next"], d["move"], Fraction(d["p"]))
                                            for d in e["distribution"]))
        except ValueError as exc:
            raise MachineFileError(f"$.theta[{i}]: {exc}") from None
    comm = {c["state"]: CommRule(c["emit"], dict(c["responses"])) for c in doc["comm"]}

    spec = VerifierSpec(states=states, initial=doc["initial"], input_alphabet=frozenset(doc["input_alphabet"]),
                        comm_alphabet=frozenset(doc["comm_alphabet"]), quantum_dim=dim, initial_quantum=q0,
                        theta=theta, comm=comm, name=doc.get("name", ""))
    if validate:
        problems = validate_spec(spec)
        if problems:
            raise MachineFileError("invalid machine: " + "; ".join(problems))
    return spec


def specs_equivalent(a: VerifierSpec, b: VerifierSpec, atol: float = 1e-15) -> bool:
    """Structural equality of two specs, comparing matrices numerically."""
    if (dict(a.states), a.initial, a.input_alphabet, a.comm_alphabet, a.quantum_dim) != \
            (dict(b.states), b.initial, b.input_alphabet, b.comm_alphabet, b.quantum_dim):
        return False
    if (a.initial_quantum is None) != (b.initial_quantum is None):
        return False
    if a.initial_quantum is not None and not np.allclose(a.initial_quantum, b.initial_quantum, atol=atol, rtol=0):
        return False
    if {k: (r.emit, dict(r.responses)) for k, r in a.comm.items()} != \
            {k: (r.emit, dict(r.responses)) for k, r in b.comm.items()}:
        return False
    if set(a.theta) != set(b.theta):
        return False
    for key, ra in a.theta.items():
        rb = b.theta[key]
        if type(ra) is not type(rb):
            return False
        if isinstance(ra, UnitaryRule):
            if (ra.next, ra.move) != (rb.next, rb.move) or not np.allclose(ra.matrix, rb.matrix, atol=atol, rtol=0):
                return False
        elif isinstance(ra, MeasurementRule):
            if {str(k): tuple(v) for k, v in ra.delta.items()} != {str(k): tuple(v) for k, v in rb.delta.items()}:
                return False
            oa, ob = ra.measurement.outcomes, rb.measurement.outcomes
            if [str(l) for l, _ in oa] != [str(l) for l, _ in ob]:
                return False
            if not all(np.allclose(pa, pb, atol=atol, rtol=0) for (_, pa), (_, pb) in zip(oa, ob)):
                return False
        elif [(n, m, Fraction(p)) for n, m, p in ra.distribution] != \
                [(n, m, Fraction(p)) for n, m, p in rb.distribution]:
            return False
    return True


# -- construction helper --------------------------------------------------------

@dataclass
class SpecBuilder:
    """Mutable accumulator used by the protocol constructions."""

    name: str
    input_alphabet: frozenset
    quantum_dim: int
    comm_alphabet: set = field(default_factory=set)
    states: dict = field(default_factory=dict)
    theta: dict = field(default_factory=dict)
    comm: dict = field(default_factory=dict)
    initial: str | None = None

    def state(self, name: str, kind: str = READING) -> str:
        if self.states.get(name, kind) != kind:
            raise ValueError(f"state {name!r} declared with two kinds")
        self.states[name] = kind
        return name

    def _put(self, state, symbols, rule):
        self.state(state)
        for sym in symbols:
            if (state, sym) in self.theta:
                raise ValueError(f"duplicate transition for ({state!r}, {sym!r})")
            self.theta[(state, sym)] = rule

    def unitary(self, state, symbols, matrix, nxt, move):
        self._put(state, symbols, UnitaryRule(cmat(matrix), nxt, move))

    def measure(self, state, symbols, measurement, delta):
        self._put(state, symbols, MeasurementRule(measurement, dict(delta)))

    def coin(self, state, symbols, distribution):
        self._put(state, symbols, CoinRule(tuple((n, m, Fraction(p)) for n, m, p in distribution)))

    def ask(self, state, emit, responses):
        self.state(state, COMMUNICATION)
        self.comm_alphabet.add(emit)
        self.comm_alphabet.update(responses)
        self.comm[state] = CommRule(emit, dict(responses))

    def build(self) -> VerifierSpec:
        q0 = None
        if self.quantum_dim:
            q0 = np.zeros(self.quantum_dim, dtype=complex)
            q0[0] = 1.0
        targets = {r.next for r in self.theta.values() if isinstance(r, UnitaryRule)}
        targets |= {t[0] for r in self.theta.values() if isinstance(r, MeasurementRule) for t in r.delta.values()}
        targets |= {t[0] for r in self.theta.values() if isinstance(r, CoinRule) for t in r.distribution}
        targets |= {t for r in self.comm.values() for t in r.responses.values()}
        undeclared = targets - set(self.states)
        if undeclared:
            raise ValueError(f"transitions into undeclared states: {sorted(undeclared)}")
        return VerifierSpec(states=dict(self.states), initial=self.initial, input_alphabet=frozenset(self.input_alphabet),
                            comm_alphabet=frozenset(self.comm_alphabet), quantum_dim=self.quantum_dim,
                            initial_quantum=q0, theta=dict(self.theta), comm=dict(self.comm), name=self.name)
