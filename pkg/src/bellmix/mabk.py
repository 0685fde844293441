"""Four-qubit MABK bound, its N-party extension and generalized GHZ thresholds."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chsh import check_spectrum
from .errors import BadPartyCount, BadSpectrum, OutOfRange
from .qstate import DensityMatrix, diagonal_state, ghz_basis


def quantum_max(n: int) -> float:
    """Largest quantum value ``2^((n+1)/2)`` of the n-party MABK operator."""
    return 2 ** ((n + 1) / 2)


def lvm_bound(n: int) -> float:
    """Local-realist bound in the same normalisation, ``quantum_max(n) / 2^((n-1)/2) = 2``."""
    return quantum_max(n) / 2 ** ((n - 1) / 2)


def canonical_bell4_spectrum(lams) -> np.ndarray:
    return np.sort(check_spectrum(lams, 16))[::-1]


def bell4_diagonal_state(lams) -> DensityMatrix:
    return diagonal_state(canonical_bell4_spectrum(lams), ghz_basis(4))


def mabk_bound_diagonal(lams) -> float:
    """``4 sqrt(2) sqrt(sum_j (l_j^+ - l_j^-)^2)`` on the sorted 16-entry spectrum."""
    s = canonical_bell4_spectrum(lams)
    return quantum_max(4) * math.hypot(*(s[0::2] - s[1::2]))


def mabk_conjecture_bound(pairs, n: int) -> float:
    """``2^((n+1)/2) sqrt(sum_j (l_j^+ - l_j^-)^2)`` for ``2^(n-1)`` pairs taken in the order given.

    No re-pairing is done: at ``n = 2`` the CHSH result needs the pairing
    (largest, smallest), (second, third), which is not the adjacent pairing
    used for three and four qubits.
    """
    if n < 2:
        raise BadPartyCount(f"need at least two parties, got {n}")
    p = np.asarray(pairs, dtype=float)
    if p.shape != (2 ** (n - 1), 2):
        raise BadSpectrum(f"expected {2 ** (n - 1)} pairs for n={n}, got shape {p.shape}")
    check_spectrum(p.ravel())
    return quantum_max(n) * math.hypot(*(p[:, 0] - p[:, 1]))


# ---------------------------------------------------------------- per-basis-state table

# conjugation pattern of the Re[...] product for each j; '+' means x + iy
_QS_PATTERN = ("++++", "+++-", "++-+", "++--", "-+--", "+-+-", "-++-", "-+++")
_QS_ZSIGN = (1, -1, -1, 1, -1, 1, 1, -1)


def qs_expectation(j: int, sign: int, vectors) -> float:
    """Closed-form ``<Psi_j^{sign}| a.s (x) b.s (x) c.s (x) d.s |Psi_j^{sign}>`` for four unit vectors."""
    v = np.asarray(vectors, dtype=float)
    z = float(np.prod(v[:, 2]))
    prod = 1 + 0j
    for vec, c in zip(v, _QS_PATTERN[j]):
        prod *= complex(vec[0], vec[1] if c == "+" else -vec[1])
    return _QS_ZSIGN[j] * z + sign * prod.real


# ---------------------------------------------------------------- generalized GHZ


@dataclass(frozen=True)
class GeneralizedGHZ:
    """``sqrt(p)|0...0> + sqrt(1-p)|1...1>`` on ``n`` qubits."""

    n: int
    p: float

    def __post_init__(self):
        if self.n < 2:
            raise BadPartyCount(f"need at least two parties, got {self.n}")
        if not 0 <= self.p <= 1:
            raise OutOfRange(f"p must lie in [0, 1], got {self.p}")

    @property
    def alpha(self) -> float:
        return math.atan2(math.sqrt(1 - self.p), math.sqrt(self.p))

    @property
    def sin2alpha(self) -> float:
        return 2 * math.sqrt(self.p * (1 - self.p))

    def vector(self) -> np.ndarray:
        v = np.zeros(2**self.n)
        v[0], v[-1] = math.sqrt(self.p), math.sqrt(1 - self.p)
        return v


def ghz_bell_coeffs(g: GeneralizedGHZ) -> tuple[float, float]:
    """Weights on ``Psi_0^+`` and ``Psi_0^-``: ``1/2 +- sqrt(p(1-p))``."""
    r = math.sqrt(g.p * (1 - g.p))
    return 0.5 + r, 0.5 - r


def ghz_violation_leading(g: GeneralizedGHZ) -> float:
    """Leading-order MABK violation ``2 * 2^((n+1)/2) sqrt(p(1-p))``."""
    return quantum_max(g.n) * g.sin2alpha


def ghz_violation_threshold(n: int) -> float:
    """Value of ``sin 2 alpha`` at which the leading term reaches the local bound."""
    if n < 3:
        raise BadPartyCount(f"the leading-order threshold applies for n >= 3, got {n}")
    return 1 / math.sqrt(2 ** (n - 1))


def p_at_threshold(n: int) -> float:
    """The ``p <= 1/2`` solving ``2 sqrt(p(1-p)) = ghz_violation_threshold(n)``."""
    s = ghz_violation_threshold(n)
    return (1 - math.sqrt(1 - s * s)) / 2


@dataclass(frozen=True)
class GHZRow:
    n: int
    p: float
    sin2alpha: float
    leading_violation: float
    lvm_bound: float
    violates: bool


def ghz_sweep(n: int, p_from: float, p_to: float, steps: int) -> list[GHZRow]:
    ghz_violation_threshold(n)  # validates n
    rows = []
    for p in np.linspace(p_from, p_to, steps + 1):
        g = GeneralizedGHZ(n, float(p))
        lead = ghz_violation_leading(g)
        rows.append(GHZRow(n, g.p, g.sin2alpha, lead, lvm_bound(n), lead > lvm_bound(n)))
    return rows
