"""Small dense complex linear algebra for the verifier's quantum register.

Vectors and matrices are plain ``numpy`` arrays of dtype ``complex128``.
Register dimensions are tiny (2, 3 or 8), so nothing here tries to be clever.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

#: default tolerance for comparing amplitudes
ATOL = 1e-9
#: tolerance used when validating operators
VALIDATION_TOL = 1e-12
#: measurement branches below this probability are dropped
PRUNE = 1e-12


def cvec(amplitudes: Sequence[complex]) -> np.ndarray:
    """Build a complex column vector (stored 1-d)."""
    v = np.asarray(amplitudes, dtype=complex)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("a state vector must be a non-empty 1-d sequence")
    return v


def cmat(entries) -> np.ndarray:
    m = np.asarray(entries, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def basis(dim: int, i: int = 0) -> np.ndarray:
    """Computational basis vector ``|q_i>`` of dimension ``dim``."""
    v = np.zeros(dim, dtype=complex)
    v[i] = 1.0
    return v


def projector(dim: int, indices) -> np.ndarray:
    """Diagonal projector onto ``span{|q_i> : i in indices}``."""
    p = np.zeros((dim, dim), dtype=complex)
    for i in indices:
        p[i, i] = 1.0
    return p


def mat_apply(U: np.ndarray, v: np.ndarray) -> np.ndarray:
    if U.shape != (v.shape[0], v.shape[0]):
        raise ValueError(f"dimension mismatch: operator {U.shape} on vector of dim {v.shape[0]}")
    return U @ v


def is_unitary(U: np.ndarray, tol: float = VALIDATION_TOL) -> bool:
    """True iff ``max |U^dagger U - I| <= tol``."""
    U = np.asarray(U)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        return False
    err = U.conj().T @ U - np.eye(U.shape[0])
    return float(np.max(np.abs(err))) <= tol


def is_normalized(v: np.ndarray, tol: float = ATOL) -> bool:
    return abs(float(np.vdot(v, v).real) - 1.0) <= tol


@dataclass(frozen=True)
class ProjectiveMeasurement:
    """A projective measurement as an ordered list of ``(label, projector)``.

    Labels are arbitrary hashables (usually short strings such as ``"f"``,
    ``"r"``, ``"0"``); they are what the classical transition map keys on.
    """

    outcomes: tuple[tuple[Hashable, np.ndarray], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "outcomes", tuple((lab, cmat(p)) for lab, p in self.outcomes)
        )
        if not self.outcomes:
            raise ValueError("a measurement needs at least one outcome")
        dims = {p.shape[0] for _, p in self.outcomes}
        if len(dims) != 1:
            raise ValueError(f"projectors of differing dimensions: {sorted(dims)}")
        labels = [lab for lab, _ in self.outcomes]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate outcome labels: {labels}")

    @property
    def dim(self) -> int:
        return self.outcomes[0][1].shape[0]

    @property
    def labels(self) -> tuple:
        return tuple(lab for lab, _ in self.outcomes)

    def violations(self, tol: float = VALIDATION_TOL) -> list[str]:
        """Invariant violations: idempotence, hermiticity, completeness, orthogonality."""
        out = []
        total = np.zeros((self.dim, self.dim), dtype=complex)
        for lab, p in self.outcomes:
            if np.max(np.abs(p @ p - p)) > tol:
                out.append(f"projector {lab!r} is not idempotent")
            if np.max(np.abs(p - p.conj().T)) > tol:
                out.append(f"projector {lab!r} is not hermitian")
            total += p
        if np.max(np.abs(total - np.eye(self.dim))) > tol:
            out.append("projectors do not sum to the identity")
        for i, (li, pi) in enumerate(self.outcomes):
            for lj, pj in self.outcomes[i + 1:]:
                if np.max(np.abs(pi @ pj)) > tol:
                    out.append(f"projectors {li!r} and {lj!r} are not orthogonal")
        return out

    def is_valid(self, tol: float = VALIDATION_TOL) -> bool:
        return not self.violations(tol)


def computational_measurement(dim: int, labels=None) -> ProjectiveMeasurement:
    """Measurement in the computational basis, one outcome per basis state."""
    labels = labels if labels is not None else [str(i) for i in range(dim)]
    return ProjectiveMeasurement(tuple((lab, projector(dim, [i])) for i, lab in enumerate(labels)))


def measure_branches(M: ProjectiveMeasurement, v: np.ndarray, prune: float = PRUNE):
    """Born-rule branching of ``v`` under ``M``.

    Returns
    -------
    list of (label, probability, post_state)
        One entry per outcome with probability at least ``prune``; the
        post-measurement state is ``P v / ||P v||``.
    """
    if M.dim != v.shape[0]:
        raise ValueError(f"dimension mismatch: measurement of dim {M.dim} on vector of dim {v.shape[0]}")
    branches = []
    for label, p in M.outcomes:
        w = p @ v
        prob = float(np.vdot(w, w).real)
        if prob < prune:
            continue
        branches.append((label, prob, w / np.sqrt(prob)))
    return branches
