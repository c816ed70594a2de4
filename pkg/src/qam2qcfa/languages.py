"""Brute-force membership tests for the five languages."""
from __future__ import annotations

import itertools

PROTOCOLS = ("middle", "mpal", "knapsack", "L1", "L2")

ALPHABETS = {
    "middle": frozenset("ab"),
    "mpal": frozenset("ab"),
    "knapsack": frozenset("01#"),
    "L1": frozenset("ab"),
    "L2": frozenset("ab"),
}


def check_protocol(protocol: str) -> str:
    if protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol!r}; expected one of {PROTOCOLS}")
    return protocol


def parse_knapsack(word: str):
    """Split ``b#a_1#...#a_N`` into ``(b, [a_1, ..., a_N])``.

    Returns ``None`` unless every block is a binary string without leading
    zeros and there is at least one item.
    """
    blocks = word.split("#")
    if len(blocks) < 2:
        return None
    for blk in blocks:
        if not blk or blk[0] != "1" or set(blk) - {"0", "1"}:
            return None
    return blocks[0], blocks[1:]


def knapsack_witnesses(word: str) -> list[tuple[int, ...]]:
    """All index sets ``I`` (1-based, sorted) with ``v(b) = sum_{i in I} v(a_i)``."""
    parsed = parse_knapsack(word)
    if parsed is None:
        return []
    b, items = parsed
    target = int(b, 2)
    vals = [int(a, 2) for a in items]
    found = []
    for r in range(len(vals) + 1):
        for sub in itertools.combinations(range(1, len(vals) + 1), r):
            if sum(vals[i - 1] for i in sub) == target:
                found.append(sub)
    return sorted(found)


def _pairs(word: str, first: str, second: str):
    """Positions ``(p, q)`` with ``word = s first t = u second v``, ``|s| = |v|``."""
    n = len(word)
    for p, c in enumerate(word):
        if c != first:
            continue
        for q, d in enumerate(word):
            if d == second and p == n - 1 - q:
                yield p, q


def reference_decider(protocol: str, word: str) -> bool:
    check_protocol(protocol)
    if protocol == "knapsack":
        return bool(knapsack_witnesses(word))
    if set(word) - ALPHABETS[protocol]:
        raise ValueError(f"{word!r} is not over the alphabet of {protocol}")
    n = len(word)
    if protocol == "middle":
        return n % 2 == 1 and word[n // 2] == "a"
    if protocol == "mpal":
        if n % 2 == 0:
            return False
        x = word[: n // 2]
        return word == x + "a" + x[::-1]
    if protocol == "L1":
        return any(True for _ in _pairs(word, "b", "b"))
    return any(True for _ in _pairs(word, "a", "b"))


def all_words(alphabet, max_len: int, min_len: int = 0):
    for n in range(min_len, max_len + 1):
        for t in itertools.product(sorted(alphabet), repeat=n):
            yield "".join(t)
