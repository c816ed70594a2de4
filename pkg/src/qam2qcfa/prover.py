"""Prover strategies: honest provers and the finite adversary families used to
check soundness exhaustively.

A strategy sees the input, the communication history of the current round
and the symbol the verifier just emitted.  Because the verifier asks exactly
one question per cell it scans, the number of earlier questions of a kind
tells the prover where the head is.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .languages import check_protocol, knapsack_witnesses, parse_knapsack, reference_decider
from .protocols import (ASK_END, ASK_MIDDLE, ASK_START, ASK_TAKE, MARK, MIDDLE, NOT_MIDDLE, PASS, SKIP, TAKE)

MAX_KNAPSACK_ITEMS = 20


class NoWitness(ValueError):
    """Honest prover requested for an input outside the language."""


class EnumerationBudgetExceeded(RuntimeError):
    pass


def _asked(history, emitted: str) -> int:
    return sum(1 for e, _ in history if e == emitted)


@dataclass(frozen=True)
class MiddleClaim:
    """Claims that the cell after ``claim`` scanned symbols is the middle one;
    ``claim=None`` never claims."""

    claim: int | None

    @property
    def parameter(self):
        return self.claim

    def respond(self, word, history, emitted):
        if emitted != ASK_MIDDLE:
            return NOT_MIDDLE
        return MIDDLE if _asked(history, ASK_MIDDLE) == self.claim else NOT_MIDDLE


@dataclass(frozen=True)
class SubsetChoice:
    """Selects the items whose 1-based indices are in ``subset``."""

    subset: frozenset

    @property
    def parameter(self):
        return tuple(sorted(self.subset))

    def respond(self, word, history, emitted):
        item = _asked(history, ASK_TAKE) + 1
        return TAKE if item in self.subset else SKIP


@dataclass(frozen=True)
class PositionPair:
    """Marks cell ``first`` then cell ``second`` (0-based input positions).

    ``second_offset`` is the cell where the verifier asks its first
    ``end?`` question relative to ``first``: 0 when both marks may coincide
    (L1), 1 otherwise (L2).  ``first=None`` never marks.
    """

    first: int | None
    second: int | None = None
    second_offset: int = 0

    @property
    def parameter(self):
        return None if self.first is None else (self.first, self.second)

    def respond(self, word, history, emitted):
        if self.first is None:
            return PASS
        if emitted == ASK_START:
            return MARK if _asked(history, ASK_START) == self.first else PASS
        if emitted == ASK_END:
            cell = self.first + self.second_offset + _asked(history, ASK_END)
            return MARK if cell == self.second else PASS
        return PASS


@dataclass(frozen=True)
class FunctionProver:
    """Wraps an arbitrary ``respond`` callable."""

    fn: Callable
    parameter: object = None

    def respond(self, word, history, emitted):
        return self.fn(word, history, emitted)


@dataclass(frozen=True)
class BehaviouralMix:
    """Randomized prover: answers each question with a probability table.

    ``tables[i]`` is the list of ``(symbol, probability)`` used for the
    ``i``-th question of the round; the last table repeats.
    """

    tables: tuple

    def distribution(self, word, history, emitted):
        i = min(len(history), len(self.tables) - 1)
        return self.tables[i]


@dataclass(frozen=True)
class MixedStrategy:
    """Convex combination of deterministic strategies, played by choosing
    one of them at random at the start of each round.

    Realised round by round: the answer distribution is the weight of the
    strategies consistent with the history so far, split by what each of
    them answers now.
    """

    strategies: tuple
    weights: tuple

    def __post_init__(self):
        if len(self.strategies) != len(self.weights) or not self.strategies:
            raise ValueError("need one weight per strategy")
        if any(w < 0 for w in self.weights) or sum(self.weights) <= 0:
            raise ValueError("weights must be non-negative with a positive sum")

    def distribution(self, word, history, emitted):
        mass: dict[str, float] = {}
        for s, w in zip(self.strategies, self.weights):
            if w and all(s.respond(word, history[:i], e) == a for i, (e, a) in enumerate(history)):
                a = s.respond(word, history, emitted)
                mass[a] = mass.get(a, 0.0) + w
        total = sum(mass.values())
        return [(a, m / total) for a, m in sorted(mass.items())]


def respond(strategy, word: str, history, emitted: str) -> str:
    return strategy.respond(word, tuple(history), emitted)


def honest_prover(protocol: str, word: str):
    """Prover that convinces the verifier of a member ``word`` with certainty."""
    check_protocol(protocol)
    if not reference_decider(protocol, word):
        raise NoWitness(f"{word!r} is not in {protocol}")
    n = len(word)
    if protocol in ("middle", "mpal"):
        return MiddleClaim(n // 2)
    if protocol == "knapsack":
        return SubsetChoice(frozenset(knapsack_witnesses(word)[0]))
    want = ("b", "b") if protocol == "L1" else None
    for i in range(n):
        j = n - 1 - i
        if protocol == "L1" and i <= j and (word[i], word[j]) == want:
            return PositionPair(i, j, 0)
        if protocol == "L2" and i < j and word[i] != word[j]:
            return PositionPair(i, j, 1)
    raise AssertionError("decider and witness search disagree")


def enumerate_adversaries(protocol: str, word: str) -> list:
    """Every deterministic strategy distinguished by the verifier, plus the
    one that never commits."""
    check_protocol(protocol)
    n = len(word)
    if protocol in ("middle", "mpal"):
        return [MiddleClaim(m) for m in range(n)] + [MiddleClaim(None)]
    if protocol == "knapsack":
        parsed = parse_knapsack(word)
        items = 0 if parsed is None else len(parsed[1])
        if items > MAX_KNAPSACK_ITEMS:
            raise EnumerationBudgetExceeded(f"{items} items exceed the enumeration cap of {MAX_KNAPSACK_ITEMS}")
        return [SubsetChoice(frozenset(i + 1 for i in range(items) if mask >> i & 1))
                for mask in range(1 << items)]
    off = 0 if protocol == "L1" else 1
    pairs = [PositionPair(i, j, off) for i in range(n) for j in range(i + off, n)]
    return pairs + [PositionPair(None)]
