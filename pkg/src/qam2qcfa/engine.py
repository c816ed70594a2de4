"""Exact per-iteration analysis of a verifier/prover pair, plus a Monte-Carlo
simulator used to cross-check it.

One *iteration* runs from the initial configuration until the verifier halts
or comes back to its initial configuration (classical start state, head on
the left end-marker, register in the initial state).  The reachable
configurations of one iteration form a finite absorbing Markov chain with
three absorbing classes: accept, reject and restart.  Repeating iterations
composes geometrically, so everything about the full run follows from the
three absorption probabilities and the expected iteration length.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .machine import (ACCEPT, REJECT, Configuration, MachineError, ProtocolViolation, Tape, VerifierSpec,
                      initial_config, step)

TRANSIENT, RESTART = "transient", "restart"
ABSORBING = (ACCEPT, REJECT, RESTART)

GRID = 1e-9
DEFAULT_NODE_CAP = 10**6
DENSE_LIMIT = 3000


class BudgetExceeded(RuntimeError):
    pass


class DivergingChain(ArithmeticError):
    """Some transient configuration cannot reach any absorbing class."""


class NonHalting(ArithmeticError):
    """Per-iteration halting probability is zero."""


def fingerprint(cfg: Configuration) -> tuple:
    """Hashable key of a configuration, insensitive to global phase and to
    amplitude noise below the ``GRID`` resolution."""
    q = cfg.quantum
    if q is None:
        qkey = None
    else:
        mag = np.abs(q)
        lead = int(np.argmax(mag > GRID))
        if mag[lead] > GRID:
            q = q * (np.conj(q[lead]) / mag[lead])
        qkey = np.rint(np.ascontiguousarray(q).view(np.float64) / GRID).astype(np.int64).tobytes()
    return cfg.classical, cfg.head, qkey, cfg.history


def is_restart(spec: VerifierSpec, cfg: Configuration) -> bool:
    """True when ``cfg`` is the start configuration (ignoring the history)."""
    if cfg.classical != spec.initial or cfg.head != 0:
        return False
    if cfg.quantum is None:
        return True
    return abs(abs(np.vdot(spec.initial_quantum, cfg.quantum)) - 1.0) <= GRID


@dataclass
class ConfigGraph:
    """Reachable configurations of one iteration; node 0 is the start."""

    nodes: list
    kinds: list
    edges: list  # edges[i] = [(j, probability), ...]

    def __len__(self):
        return len(self.nodes)

    def indices(self, kind: str) -> list[int]:
        return [i for i, k in enumerate(self.kinds) if k == kind]

    def check(self, tol: float = 1e-9) -> list[str]:
        out = []
        for i, (k, es) in enumerate(zip(self.kinds, self.edges)):
            total = sum(p for _, p in es)
            if k == TRANSIENT and abs(total - 1.0) > tol:
                out.append(f"node {i}: outgoing probability {total}")
            if k != TRANSIENT and es:
                out.append(f"absorbing node {i} has outgoing edges")
        return out


_VIOLATION = "<protocol violation>"


def build_config_graph(spec: VerifierSpec, word: str, prover=None, max_nodes: int = DEFAULT_NODE_CAP) -> ConfigGraph:
    """Breadth-first closure of the start configuration under ``step``.

    A prover answer outside the verifier's response table sends the
    iteration to a reject node (the verifier refuses to continue).
    """
    tape = Tape(word, spec.input_alphabet)
    root = initial_config(spec, word)
    nodes, kinds, edges = [root], [TRANSIENT], [[]]
    index = {fingerprint(root): 0}
    queue = deque([0])

    def node_for(cfg: Configuration, kind: str | None = None) -> int:
        if kind is None:
            if spec.is_halting(cfg.classical):
                kind = spec.kind(cfg.classical)
            elif is_restart(spec, cfg):
                kind = RESTART
            else:
                kind = TRANSIENT
        key = (RESTART,) if kind == RESTART else fingerprint(cfg)
        j = index.get(key)
        if j is None:
            if len(nodes) >= max_nodes:
                raise BudgetExceeded(f"configuration graph exceeds {max_nodes} nodes")
            j = len(nodes)
            index[key] = j
            nodes.append(cfg)
            kinds.append(kind)
            edges.append([])
            if kind == TRANSIENT:
                queue.append(j)
        return j

    while queue:
        i = queue.popleft()
        try:
            succ = step(spec, tape, nodes[i], prover)
        except ProtocolViolation:
            bad = Configuration(_VIOLATION, nodes[i].head, nodes[i].quantum, nodes[i].history)
            edges[i] = [(node_for(bad, REJECT), 1.0)]
            continue
        merged: dict[int, float] = {}
        for cfg, p in succ:
            j = node_for(cfg)
            merged[j] = merged.get(j, 0.0) + p
        edges[i] = list(merged.items())
    return ConfigGraph(nodes, kinds, edges)


@dataclass(frozen=True)
class IterationOutcome:
    p_accept: float
    p_reject: float
    p_restart: float
    expected_steps: float

    @property
    def halting_prob(self) -> float:
        return self.p_accept + self.p_reject

    def as_dict(self) -> dict:
        d = asdict(self)
        d["halting_prob"] = self.halting_prob
        return d


def _transient_system(graph: ConfigGraph):
    trans = graph.indices(TRANSIENT)
    pos = {node: r for r, node in enumerate(trans)}
    _require_absorbable(graph, pos)
    return trans, pos


def _require_absorbable(graph: ConfigGraph, pos: dict):
    preds: dict[int, list[int]] = {}
    for i, es in enumerate(graph.edges):
        for j, p in es:
            if p > 0:
                preds.setdefault(j, []).append(i)
    seen = {i for i, k in enumerate(graph.kinds) if k != TRANSIENT}
    queue = deque(seen)
    while queue:
        j = queue.popleft()
        for i in preds.get(j, ()):
            if i not in seen:
                seen.add(i)
                queue.append(i)
    stuck = [i for i in pos if i not in seen]
    if stuck:
        cfg = graph.nodes[stuck[0]]
        raise DivergingChain(
            f"{len(stuck)} configuration(s) never halt or restart, e.g. node {stuck[0]} "
            f"(state {cfg.classical!r}, head {cfg.head})")


def _solve(graph: ConfigGraph, trans: list, pos: dict, rhs: np.ndarray, redirect: dict | None = None) -> np.ndarray:
    """Solve ``(I - Q) X = rhs`` over the transient nodes.

    ``redirect`` maps absorbing node ids onto transient ones (used to fold
    restarts back into the start node).
    """
    m = len(trans)
    rows, cols, vals = [], [], []
    for r, i in enumerate(trans):
        for j, p in graph.edges[i]:
            c = pos.get(j)
            if c is None and redirect:
                c = pos.get(redirect.get(j))
            if c is not None:
                rows.append(r)
                cols.append(c)
                vals.append(p)
    Q = scipy.sparse.coo_matrix((vals, (rows, cols)), shape=(m, m)).tocsc()
    A = scipy.sparse.identity(m, format="csc") - Q
    if m <= DENSE_LIMIT:
        X = np.linalg.solve(A.toarray(), rhs)  # LU with partial pivoting
    else:
        X = scipy.sparse.linalg.splu(A).solve(rhs)
    resid = float(np.max(np.abs(A @ X - rhs))) if m else 0.0
    scale = max(1.0, float(np.max(np.abs(X)))) if m else 1.0
    if resid > 1e-10 * scale:
        raise ArithmeticError(f"absorption solve residual {resid:.3e} too large")
    return X


def solve_absorption(graph: ConfigGraph) -> IterationOutcome:
    """Absorption probabilities and expected length of one iteration."""
    if graph.kinds[0] != TRANSIENT:
        kind = graph.kinds[0]
        return IterationOutcome(float(kind == ACCEPT), float(kind == REJECT), float(kind == RESTART), 0.0)
    trans, pos = _transient_system(graph)
    m = len(trans)
    classes = {ACCEPT: 0, REJECT: 1, RESTART: 2}
    rhs = np.zeros((m, 4))
    rhs[:, 3] = 1.0
    for r, i in enumerate(trans):
        for j, p in graph.edges[i]:
            c = classes.get(graph.kinds[j])
            if c is not None:
                rhs[r, c] += p
    X = _solve(graph, trans, pos, rhs)
    a, rj, rs, t = (float(x) for x in X[pos[0]])
    return IterationOutcome(a, rj, rs, t)


def hitting_probability(graph: ConfigGraph, target) -> float:
    """Probability that an iteration visits a node satisfying ``target(cfg)``."""
    hit = {i for i, cfg in enumerate(graph.nodes) if graph.kinds[i] == TRANSIENT and target(cfg)}
    if 0 in hit:
        return 1.0
    trans = [i for i in graph.indices(TRANSIENT) if i not in hit]
    pos = {node: r for r, node in enumerate(trans)}
    rhs = np.zeros(len(trans))
    for r, i in enumerate(trans):
        rhs[r] = sum(p for j, p in graph.edges[i] if j in hit)
    X = _solve(graph, trans, pos, rhs)
    return float(X[pos[0]])


def overall_acceptance(outcome: IterationOutcome) -> float:
    """Probability that repeating iterations until halting ends in acceptance."""
    h = outcome.halting_prob
    if h <= 0:
        raise NonHalting("an iteration never halts")
    return outcome.p_accept / h


def overall_rejection(outcome: IterationOutcome) -> float:
    h = outcome.halting_prob
    if h <= 0:
        raise NonHalting("an iteration never halts")
    return outcome.p_reject / h


def series_acceptance(p_a: float, p_r: float) -> float:
    """Closed form ``P_a / (P_a + P_r - P_a P_r)`` of ``sum_i ((1-P_a)(1-P_r))^i P_a``.

    This is the law of a loop that accepts with probability ``p_a``, and
    otherwise rejects with probability ``p_r``, and otherwise repeats.
    """
    denom = p_a + p_r - p_a * p_r
    if denom <= 0:
        raise NonHalting("an iteration never halts")
    return p_a / denom


def expected_iterations(outcome: IterationOutcome) -> float:
    h = outcome.halting_prob
    if h <= 0:
        raise NonHalting("an iteration never halts")
    return 1.0 / h


def expected_runtime(outcome: IterationOutcome) -> float:
    """Expected total number of steps over all iterations.

    Exact by Wald's identity: the number of iterations is a stopping time for
    the i.i.d. sequence of iteration lengths.
    """
    return outcome.expected_steps * expected_iterations(outcome)


def compose(first: IterationOutcome, second: IterationOutcome) -> IterationOutcome:
    """Run ``first``; on restart run ``second``."""
    s = first.p_restart
    return IterationOutcome(first.p_accept + s * second.p_accept, first.p_reject + s * second.p_reject,
                            s * second.p_restart, first.expected_steps + s * second.expected_steps)


def unroll(graph: ConfigGraph, copies: int) -> ConfigGraph:
    """Chain ``copies`` iterations inline: every restart of copy ``c`` jumps to
    the start of copy ``c + 1``; restarts of the last copy stay absorbing."""
    m = len(graph)
    nodes, kinds, edges = [], [], []
    for c in range(copies):
        off = c * m
        last = c == copies - 1
        for i in range(m):
            nodes.append(graph.nodes[i])
            kind = graph.kinds[i]
            if kind == RESTART and not last:
                # unreachable placeholder; incoming edges are redirected below
                kinds.append(TRANSIENT)
                edges.append([(off + m, 1.0)])
                continue
            kinds.append(kind)
            out = []
            for j, p in graph.edges[i]:
                if graph.kinds[j] == RESTART and not last:
                    out.append((off + m, p))
                else:
                    out.append((off + j, p))
            edges.append(out)
    return ConfigGraph(nodes, kinds, edges)


@dataclass(frozen=True)
class InlineLaw:
    acceptance: float
    expected_total_steps: float
    expected_iterations: float


def inline_law(graph: ConfigGraph) -> InlineLaw:
    """Law of the full run obtained by wiring restarts back into the start
    node and solving the resulting chain directly (no geometric-series
    formula involved).  Restart hops cost no step."""
    restarts = graph.indices(RESTART)
    if not restarts:
        out = solve_absorption(graph)
        return InlineLaw(overall_acceptance(out), out.expected_steps, 1.0)
    trans, pos = _transient_system(graph)
    redirect = {j: 0 for j in restarts}
    m = len(trans)
    rhs = np.zeros((m, 3))
    rhs[pos[0], 2] = 1.0  # visits to the start node
    for r, i in enumerate(trans):
        for j, p in graph.edges[i]:
            if graph.kinds[j] == ACCEPT:
                rhs[r, 0] += p
        rhs[r, 1] = 1.0
    X = _solve(graph, trans, pos, rhs, redirect)
    # column 2 solves (I - Q) x = e_0, so x[start] = expected visits to start
    return InlineLaw(float(X[pos[0], 0]), float(X[pos[0], 1]), float(X[pos[0], 2]))


# -- Monte Carlo -----------------------------------------------------------------

@dataclass(frozen=True)
class McEstimate:
    trials: int
    accepts: int
    rejects: int
    restarts: int
    censored: int
    mean_steps: float
    seed: int
    per_iteration: bool

    @property
    def p_accept(self) -> float:
        return self.accepts / self.trials

    @property
    def p_reject(self) -> float:
        return self.rejects / self.trials

    @property
    def stderr(self) -> float:
        p = self.p_accept
        return math.sqrt(p * (1 - p) / self.trials)

    @property
    def stderr_reject(self) -> float:
        p = self.p_reject
        return math.sqrt(p * (1 - p) / self.trials)

    def as_dict(self) -> dict:
        d = asdict(self)
        d.update(p_accept=self.p_accept, p_reject=self.p_reject, stderr=self.stderr,
                 stderr_reject=self.stderr_reject)
        return d


class _Sampler:
    """Lazily explores the exact transition structure, interning each
    configuration (keyed on its raw amplitudes, not the fingerprint) as an
    integer id so the sampling loop only touches integers."""

    def __init__(self, spec: VerifierSpec, tape: Tape, prover):
        self.spec, self.tape, self.prover = spec, tape, prover
        self.ids: dict = {}
        self.cfgs: list = []
        self.status: list = []  # ACCEPT / REJECT / RESTART / None
        self.succ: list = []  # (ids, cumulative probabilities) or None until expanded

    def intern(self, cfg: Configuration, root: bool = False) -> int:
        q = None if cfg.quantum is None else cfg.quantum.tobytes()
        key = (root, cfg.classical, cfg.head, q, cfg.history)
        i = self.ids.get(key)
        if i is None:
            i = len(self.cfgs)
            self.ids[key] = i
            self.cfgs.append(cfg)
            if self.spec.is_halting(cfg.classical):
                status = self.spec.kind(cfg.classical)
            elif not root and is_restart(self.spec, cfg):
                status = RESTART
            else:
                status = None
            self.status.append(status)
            self.succ.append(None)
        return i

    def successors(self, i: int):
        hit = self.succ[i]
        if hit is None:
            try:
                succ = step(self.spec, self.tape, self.cfgs[i], self.prover)
            except ProtocolViolation:
                succ = []
            ids = [self.intern(c) for c, _ in succ]
            cum = np.cumsum([p for _, p in succ]) if succ else np.zeros(0)
            hit = self.succ[i] = (ids, cum)
        return hit


def monte_carlo(spec: VerifierSpec, word: str, prover=None, trials: int = 10**5, seed: int = 0,
                step_cap: int = 10**6, per_iteration: bool = True) -> McEstimate:
    """Sample verifier trajectories with ``numpy.random.default_rng(seed)``.

    With ``per_iteration`` each trial is a single iteration and a return to
    the start configuration is counted as a restart.  Otherwise each trial
    runs until the verifier halts; on every restart the prover starts a new
    round with an empty history.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    sampler = _Sampler(spec, Tape(word, spec.input_alphabet), prover)
    root = sampler.intern(initial_config(spec, word), root=True)
    status = sampler.status
    rng = np.random.default_rng(seed)
    buf, k = rng.random(1 << 16), 0
    counts = {ACCEPT: 0, REJECT: 0, RESTART: 0, "censored": 0}
    total_steps = 0
    for _ in range(trials):
        i, steps = root, 0
        while True:
            if steps >= step_cap:
                counts["censored"] += 1
                break
            nexts, cum = sampler.successors(i)
            if not nexts:
                counts[REJECT] += 1  # prover protocol violation
                break
            if len(nexts) == 1:
                i = nexts[0]
            else:
                if k == buf.size:
                    buf, k = rng.random(1 << 16), 0
                u = buf[k] * cum[-1]
                k += 1
                i = nexts[min(int(cum.searchsorted(u, side="right")), len(nexts) - 1)]
            steps += 1
            kind = status[i]
            if kind is None:
                continue
            if kind == RESTART:
                if per_iteration:
                    counts[RESTART] += 1
                    break
                i = root
                continue
            counts[kind] += 1
            break
        total_steps += steps
    return McEstimate(trials, counts[ACCEPT], counts[REJECT], counts[RESTART], counts["censored"],
                      total_steps / trials, seed, per_iteration)


def analyze_exact(spec: VerifierSpec, word: str, prover=None, max_nodes: int = DEFAULT_NODE_CAP) -> IterationOutcome:
    return solve_absorption(build_config_graph(spec, word, prover, max_nodes))


__all__ = [
    "ABSORBING", "BudgetExceeded", "ConfigGraph", "DivergingChain", "InlineLaw", "IterationOutcome", "McEstimate",
    "MachineError", "NonHalting", "RESTART", "TRANSIENT", "analyze_exact", "build_config_graph", "compose",
    "expected_iterations", "expected_runtime", "fingerprint", "hitting_probability", "inline_law", "is_restart",
    "monte_carlo", "overall_acceptance", "overall_rejection", "series_acceptance", "solve_absorption", "unroll",
]
