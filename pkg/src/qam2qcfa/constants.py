"""Fixed operators used by the protocol verifiers."""
import math

import numpy as np

from .linalg import ProjectiveMeasurement, computational_measurement, projector

ALPHA = math.sqrt(2) * math.pi


def rotation(theta: float) -> np.ndarray:
    """``|q0> -> cos t |q0> + sin t |q1>``, ``|q1> -> -sin t |q0> + cos t |q1>``."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


U_ALPHA = rotation(ALPHA)
U_MINUS_ALPHA = rotation(-ALPHA)

# 3x3 rotations by the Pythagorean angle, on (q0,q1) and (q0,q2)
U_A = np.array([[4, 3, 0], [-3, 4, 0], [0, 0, 5]], dtype=complex) / 5
U_B = np.array([[4, 0, 3], [0, 5, 0], [-3, 0, 4]], dtype=complex) / 5

_r6 = math.sqrt(6) / 2

# Encode a bit of b into the amplitude of q1 (used with P_f after each bit).
U_0 = np.array([
    [1, 0, 0, -_r6, _r6, 0, 0, 0],
    [0, 2, 0, 0, 0, 0, 0, 0],
    [0, 0, 1, _r6, _r6, 0, 0, 0],
    [-_r6, 0, _r6, -1, 0, 0, 0, 0],
    [_r6, 0, _r6, 0, -1, 0, 0, 0],
    [0, 0, 0, 0, 0, 2, 0, 0],
    [0, 0, 0, 0, 0, 0, 2, 0],
    [0, 0, 0, 0, 0, 0, 0, 2],
], dtype=complex) / 2

U_1 = np.array([
    [1, 0, 0, -1, 2, 0, 0, 0],
    [1, 2, 0, 1, 0, 0, 0, 0],
    [0, 0, 1, 0, 0, 1, 2, 0],
    [2, -1, 0, 0, -1, 0, 0, 0],
    [0, 1, 0, -2, -1, 0, 0, 0],
    [0, 0, 2, 0, 0, 0, -1, 1],
    [0, 0, -1, 0, 0, 1, 0, 2],
    [0, 0, 0, 0, 0, -2, 1, 1],
], dtype=complex) / math.sqrt(6)

# Same encodings acting on the amplitude of q2.
U_0P = np.array([
    [1, 0, 0, -_r6, _r6, 0, 0, 0],
    [0, 1, 0, _r6, _r6, 0, 0, 0],
    [0, 0, 2, 0, 0, 0, 0, 0],
    [-_r6, _r6, 0, -1, 0, 0, 0, 0],
    [_r6, _r6, 0, 0, -1, 0, 0, 0],
    [0, 0, 0, 0, 0, 2, 0, 0],
    [0, 0, 0, 0, 0, 0, 2, 0],
    [0, 0, 0, 0, 0, 0, 0, 2],
], dtype=complex) / 2

U_1P = np.array([
    [1, 0, 0, -1, 2, 0, 0, 0],
    [0, 1, 0, 0, 0, 1, 2, 0],
    [1, 0, 2, 1, 0, 0, 0, 0],
    [2, 0, -1, 0, -1, 0, 0, 0],
    [0, 0, 1, -2, -1, 0, 0, 0],
    [0, 2, 0, 0, 0, 0, -1, 1],
    [0, -1, 0, 0, 0, 1, 0, 2],
    [0, 0, 0, 0, 0, -2, 1, 1],
], dtype=complex) / math.sqrt(6)

# Subtraction operator as it is usually printed: rows have norm sqrt(2), so it
# is not unitary.  U_HASH carries the missing 1/sqrt(2).
U_HASH_PRINTED = np.array([
    [1, 0, 0, 1, 0, 0, 0, 0],
    [0, 1, -1, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 1, -1, 0, 0],
    [1, 0, 0, -1, 0, 0, 0, 0],
    [0, 1, 1, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 1, 1, 0, 0],
    [0, 0, 0, 0, 0, 0, math.sqrt(2), 0],
    [0, 0, 0, 0, 0, 0, 0, math.sqrt(2)],
], dtype=complex)
U_HASH = U_HASH_PRINTED / math.sqrt(2)

P_F = projector(8, range(0, 3))
P_R = projector(8, range(3, 8))
M_FOR = ProjectiveMeasurement((("f", P_F), ("r", P_R)))
M_FIN = computational_measurement(8)

KNAPSACK_UNITARIES = {"U_0": U_0, "U_1": U_1, "U_0'": U_0P, "U_1'": U_1P, "U_#": U_HASH}
ALL_UNITARIES = {"U_alpha": U_ALPHA, "U_-alpha": U_MINUS_ALPHA, "U_a": U_A, "U_b": U_B, **KNAPSACK_UNITARIES}
ALL_MEASUREMENTS = {"M_for": M_FOR, "M_fin": M_FIN}


def hadamard(dim: int) -> np.ndarray:
    """Hadamard on span{q0, q1}, identity on the rest of the register."""
    h = np.eye(dim, dtype=complex)
    h[:2, :2] = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    return h


def swap(dim: int, i: int = 1, j: int = 0) -> np.ndarray:
    """Permutation exchanging basis states ``q_i`` and ``q_j``."""
    s = np.eye(dim, dtype=complex)
    s[[i, j]] = s[[j, i]]
    return s


def coin_measurement(dim: int) -> ProjectiveMeasurement:
    """Heads = ``|q0>``, tails = everything orthogonal to it."""
    p0 = projector(dim, [0])
    return ProjectiveMeasurement((("heads", p0), ("tails", np.eye(dim) - p0)))


def basis_measurement(dim: int) -> ProjectiveMeasurement:
    """``q0`` against its complement; used for the final check of a scan."""
    p0 = projector(dim, [0])
    return ProjectiveMeasurement((("q0", p0), ("q1", np.eye(dim) - p0)))
