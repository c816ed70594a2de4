"""Closed-form probabilities and bounds attached to the protocols."""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

# integer forms of U_a, U_b (times 5); their inverses are the transposes
_A5 = ((4, 3, 0), (-3, 4, 0), (0, 0, 5))
_B5 = ((4, 0, 3), (0, 5, 0), (-3, 0, 4))
_XY = {"A": _A5, "B": _B5}


def _positive_int(name, value, minimum=1):
    if isinstance(value, bool) or int(value) != value or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def gadget_accept(n: int, k: int) -> float:
    n, k = _positive_int("n", n, 0), _positive_int("k", k, 0)
    return 1.0 / (2**k * (n + 1) ** 2)


def middle_reject_lb(n: int) -> float:
    n = _positive_int("n", n)
    return 1.0 / (2 * n * n + 1)


def sin2_gap(j: int) -> float:
    """``sin^2(sqrt(2) j pi)``, evaluated after reducing ``sqrt(2) j`` modulo 1."""
    if isinstance(j, bool) or int(j) != j or j == 0:
        raise ValueError(f"j must be a non-zero integer, got {j!r}")
    x = math.sqrt(2) * abs(int(j))
    return math.sin(math.pi * (x - round(x))) ** 2


def sin2_lower(j: int) -> float:
    if isinstance(j, bool) or int(j) != j or j == 0:
        raise ValueError(f"j must be a non-zero integer, got {j!r}")
    return 1.0 / (2 * j * j + 1)


def mpal_reject_lb(n: int) -> float:
    n = _positive_int("n", n)
    return 5.0 ** (1 - n)


def _word(seq, name):
    seq = list(seq)
    for s in seq:
        if s not in _XY:
            raise ValueError(f"{name} must be a sequence over {{A, B}}, got {s!r}")
    return seq


def xy_vector(X, Y) -> tuple[Fraction, Fraction, Fraction]:
    """``u = Y_1^-1 ... Y_l^-1 X_m ... X_1 (1,0,0)^T`` in exact arithmetic."""
    X, Y = _word(X, "X"), _word(Y, "Y")
    u = [Fraction(1), Fraction(0), Fraction(0)]
    for s in X:
        M = _XY[s]
        u = [sum(Fraction(M[r][c]) * u[c] for c in range(3)) / 5 for r in range(3)]
    for s in reversed(Y):
        M = _XY[s]
        u = [sum(Fraction(M[c][r]) * u[c] for c in range(3)) / 5 for r in range(3)]
    return tuple(u)


def xy_gap_exact(X, Y) -> Fraction:
    u = xy_vector(X, Y)
    return u[1] ** 2 + u[2] ** 2


def xy_gap(X, Y) -> float:
    return float(xy_gap_exact(X, Y))


def flag_accept(n: int, k: int) -> float:
    n, k = _positive_int("n", n, 0), _positive_int("k", k)
    return 2.0 ** (-k * n)


def knapsack_reject_lb() -> float:
    return 0.5


def knapsack_reach_lb(n: int) -> float:
    n = _positive_int("n", n, 0)
    return (1 / 6) ** n


def encode_state(b: str, dim: int = 8) -> np.ndarray:
    """Register state that encodes the binary string ``b``."""
    if not b or set(b) - {"0", "1"}:
        raise ValueError(f"b must be a non-empty binary string, got {b!r}")
    v = int(b, 2)
    out = np.zeros(dim, dtype=complex)
    out[0], out[1] = 1, v
    return out / math.sqrt(1 + v * v)


def encoded_value(state: np.ndarray) -> float:
    """Inverse of ``encode_state`` up to global phase: ``amp[1] / amp[0]``."""
    if abs(state[0]) < 1e-15:
        raise ValueError("state has no q0 component")
    return float((state[1] / state[0]).real)


BOUNDS = {
    "gadget_accept": gadget_accept,
    "middle_reject_lb": middle_reject_lb,
    "sin2_gap": sin2_gap,
    "sin2_lower": sin2_lower,
    "mpal_reject_lb": mpal_reject_lb,
    "xy_gap": xy_gap,
    "flag_accept": flag_accept,
    "knapsack_reject_lb": knapsack_reject_lb,
    "knapsack_reach_lb": knapsack_reach_lb,
    "encode_state": encode_state,
}


def evaluate_bound(name: str, **params):
    """Evaluate the bound ``name``; unknown names and out-of-domain
    parameters raise ``ValueError``."""
    try:
        fn = BOUNDS[name]
    except KeyError:
        raise ValueError(f"unknown bound {name!r}; expected one of {sorted(BOUNDS)}") from None
    try:
        return fn(**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {name}: {exc}") from None
