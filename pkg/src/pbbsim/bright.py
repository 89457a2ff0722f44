"""Coherent occupation of the '+' dressed ladder as a model of the bright state.

The state is ``c_0 |g,0> + sum_{m>=1} c_m |m,+>`` with
``|m,+> = (|g,m> + |e,m-1>)/sqrt(2)`` and Poisson amplitudes ``c_m``.
For this state ``<sigma_z> = -c_0**2`` and ``2<sigma> = coherence`` where

    coherence = sqrt(2) c_1 c_0 + sum_{m>=1} c_{m+1} c_m

The first term carries sqrt(2) instead of 1 because the m = 0 member of the
ladder is the bare ground state rather than an equal-weight doublet.  The
plain series ``sum_{m>=0} c_{m+1} c_m`` is kept as ``ladder_overlap``; the
two differ only while c_0 c_1 is appreciable (n_bright of order 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .model import PureState
from .telegraph import entropy_bits

__all__ = [
    "BrightAnsatz",
    "build",
    "ansatz_pseudospin",
    "ansatz_eigenvalues",
    "ansatz_mutual_information",
    "series_eigenvalues",
    "ansatz_state",
    "ansatz_curves",
]


def default_m_max(n_bright: float) -> int:
    return math.ceil(n_bright + 10 * math.sqrt(n_bright) + 20)


@dataclass(frozen=True)
class BrightAnsatz:
    n_bright: float
    m_max: int
    c: np.ndarray

    @property
    def c0_sq(self) -> float:
        return float(self.c[0] ** 2)

    @property
    def ladder_overlap(self) -> float:
        return float(np.dot(self.c[1:], self.c[:-1]))

    @property
    def coherence(self) -> float:
        """Twice the qubit polarization <sigma> of the ansatz state."""
        c = self.c
        if c.size < 2:
            return 0.0
        return float(math.sqrt(2) * c[1] * c[0] + np.dot(c[2:], c[1:-1]))

    @property
    def weight(self) -> float:
        return float(np.dot(self.c, self.c))


def build(n_bright: float, m_max: int | None = None) -> BrightAnsatz:
    """Poisson amplitudes exp(-n/2) sqrt(n^m / m!), evaluated in log space."""
    if n_bright < 0:
        raise ValueError("n_bright must be >= 0")
    if m_max is None:
        m_max = default_m_max(n_bright)
    m = np.arange(m_max + 1)
    if n_bright == 0:
        c = (m == 0).astype(float)
    else:
        c = np.exp(0.5 * (m * math.log(n_bright) - gammaln(m + 1) - n_bright))
    return BrightAnsatz(float(n_bright), int(m_max), c)


def ansatz_pseudospin(ansatz: BrightAnsatz) -> float:
    """c_0**4 + coherence**2."""
    return ansatz.c0_sq**2 + ansatz.coherence**2


def ansatz_eigenvalues(ansatz: BrightAnsatz) -> tuple[float, float]:
    """Eigenvalues (1 +- sqrt(S))/2 of the reduced qubit state, larger first."""
    root = math.sqrt(min(1.0, ansatz_pseudospin(ansatz)))
    return (1 + root) / 2, (1 - root) / 2


def series_eigenvalues(ansatz: BrightAnsatz) -> tuple[float, float]:
    """(2 - c0**2 +- sqrt(c0**4 + 4 C**2))/4 with the plain ladder overlap C.

    Kept for comparison only: the pair sums to 1 - c0**2/2 rather than 1,
    so it describes the reduced qubit state only once c0 is negligible.
    """
    c0 = ansatz.c0_sq
    root = math.sqrt(c0**2 + 4 * ansatz.ladder_overlap**2)
    return (2 - c0 + root) / 4, (2 - c0 - root) / 4


def ansatz_mutual_information(ansatz: BrightAnsatz) -> float:
    """2 S(rho_qubit) in bits."""
    return 2 * entropy_bits(ansatz_eigenvalues(ansatz))


def ansatz_state(ansatz: BrightAnsatz, n_max: int | None = None) -> PureState:
    """Explicit state vector on the qubit x Fock basis."""
    n_max = ansatz.m_max if n_max is None else n_max
    if n_max < ansatz.m_max:
        raise ValueError("n_max must cover the ansatz truncation")
    amps = np.zeros((2, n_max + 1), dtype=complex)
    c = ansatz.c
    amps[0, 0] = c[0]
    half = c[1:] / math.sqrt(2)
    amps[0, 1 : ansatz.m_max + 1] += half
    amps[1, 0 : ansatz.m_max] += half
    return PureState(amps)


def ansatz_curves(n_grid) -> list[tuple[float, float, float]]:
    """(n_bright, pseudospin, mutual information) along a sorted positive grid."""
    grid = [float(n) for n in n_grid]
    if any(n <= 0 for n in grid) or grid != sorted(grid):
        raise ValueError("n_grid must be positive and sorted")
    rows = []
    for n in grid:
        a = build(n)
        rows.append((n, ansatz_pseudospin(a), ansatz_mutual_information(a)))
    return rows
