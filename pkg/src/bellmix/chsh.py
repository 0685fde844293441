"""Closed-form CHSH results for two qubits.

Bell-diagonal maxima, the maximal-nonlocality frontiers in participation
ratio and in largest eigenvalue, the MNMS and MEMS families, and real
superpositions of Bell states.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BadSpectrum, NotNormalized, NotOrthogonal, OutOfRange
from .qstate import DensityMatrix, bell_basis, diagonal_state, make_density

SQRT2 = math.sqrt(2)
TSIRELSON = 2 * SQRT2
SPECTRUM_TOL = 1e-12


def check_spectrum(lams, size: int | None = None, tol: float = SPECTRUM_TOL) -> np.ndarray:
    """Return ``lams`` as a float array after checking it is a probability vector."""
    lam = np.asarray(lams, dtype=float).ravel()
    if size is not None and lam.size != size:
        raise BadSpectrum(f"expected {size} eigenvalues, got {lam.size}")
    if np.any(lam < -tol) or np.any(lam > 1 + tol):
        raise BadSpectrum(f"eigenvalues must lie in [0, 1]: {lam}")
    if abs(lam.sum() - 1) > tol:
        raise BadSpectrum(f"eigenvalues must sum to 1, got {lam.sum():.15g}")
    return lam


def canonical_bell_spectrum(lams) -> np.ndarray:
    return np.sort(check_spectrum(lams, 4))[::-1]


def chsh_max_bell_diagonal(lams) -> float:
    """Maximal CHSH value of ``sum_i lams[i] |B_i><B_i|`` (Bell basis Phi+, Phi-, Psi+, Psi-).

    Input order does not matter; the largest-smallest and middle pairs give
    the maximum over all pairings.
    """
    l1, l2, l3, l4 = canonical_bell_spectrum(lams)
    return TSIRELSON * math.hypot(l1 - l4, l2 - l3)


def bell_diagonal_state(lams) -> DensityMatrix:
    return diagonal_state(check_spectrum(lams, 4), bell_basis())


# ---------------------------------------------------------------- frontiers


@dataclass(frozen=True)
class FrontierPoint:
    measure: str
    x: float
    b_max: float
    family_state: str


def _frontier_r_rank2(R: float) -> float:
    return math.sqrt(8 / R)


def _frontier_r_high(R: float) -> float:
    return 4 * math.sqrt((4 - R) / (4 * R))


def chsh_frontier_R(R: float) -> FrontierPoint:
    """Largest CHSH value reachable by any two-qubit state with participation ratio ``R``."""
    if not 1 <= R <= 4:
        raise OutOfRange(f"participation ratio must lie in [1, 4], got {R}")
    if R == 2:
        lo, hi = _frontier_r_rank2(R), _frontier_r_high(R)
        assert abs(lo - hi) <= 1e-12, (lo, hi)
        return FrontierPoint("R", R, lo, "rho_I")
    if R < 2:
        return FrontierPoint("R", R, _frontier_r_rank2(R), "rho_I")
    return FrontierPoint("R", R, _frontier_r_high(R), "rho_II")


def chsh_frontier_lambda(lmax: float) -> float:
    """Largest CHSH value reachable at a given maximal eigenvalue."""
    if not 0.25 <= lmax <= 1:
        raise OutOfRange(f"maximal eigenvalue must lie in [1/4, 1], got {lmax}")
    if lmax <= 1 / 3:
        return TSIRELSON * (4 * lmax - 1)
    if lmax <= 0.5:
        return TSIRELSON * math.hypot(lmax, 1 - 3 * lmax)
    return TSIRELSON * math.hypot(lmax, 1 - lmax)


def lambda_frontier_state_tag(lmax: float) -> str:
    # spectra (l, l, l, 1-3l), (l, l, 1-2l, 0) and (l, 1-l, 0, 0) saturate the three branches
    if lmax <= 1 / 3:
        return "rho_III"
    if lmax <= 0.5:
        return "rho_IV"
    return "rho_I"


def lambda_frontier_spectrum(lmax: float) -> np.ndarray:
    if lmax <= 1 / 3:
        return np.array([lmax, lmax, lmax, 1 - 3 * lmax])
    if lmax <= 0.5:
        return np.array([lmax, lmax, 1 - 2 * lmax, 0.0])
    return np.array([lmax, 1 - lmax, 0.0, 0.0])


# ---------------------------------------------------------------- MNMS / MEMS


def mnms_spectrum(x: float, region: str) -> np.ndarray:
    region = region.upper()
    if region == "I":
        if not 0 <= x <= 0.5:
            raise OutOfRange(f"region I needs x in [0, 1/2], got {x}")
        return np.array([1 - x, x, 0.0, 0.0])
    if region == "II":
        if not 0 <= x <= 0.25:
            raise OutOfRange(f"region II needs x in [0, 1/4], got {x}")
        h = (1 - 2 * x) / 2
        return np.array([x, x, h, h])
    raise OutOfRange(f"region must be 'I' or 'II', got {region!r}")


def mnms_state(x: float, region: str = "I") -> DensityMatrix:
    """Maximally nonlocal mixed state, Bell-diagonal, returned in the computational basis."""
    return diagonal_state(mnms_spectrum(x, region), bell_basis())


def mems_g(x: float) -> float:
    return 1 / 3 if x <= 2 / 3 else x / 2


def mems_state(x: float) -> DensityMatrix:
    """Maximally entangled mixed state with concurrence ``x`` (computational basis)."""
    if not 0 <= x <= 1:
        raise OutOfRange(f"MEMS parameter must lie in [0, 1], got {x}")
    g = mems_g(x)
    m = np.zeros((4, 4))
    m[0, 0] = m[3, 3] = g
    m[0, 3] = m[3, 0] = x / 2
    m[1, 1] = 1 - 2 * g
    return make_density(m)


def chsh_max_mems(x: float) -> float:
    if not 0 <= x <= 1:
        raise OutOfRange(f"MEMS parameter must lie in [0, 1], got {x}")
    if x <= 1 / 3:
        return (2 / 3) * math.sqrt(1 + 9 * x * x)
    return TSIRELSON * x


# ---------------------------------------------------------------- pure superpositions


def check_superposition(coeffs, tol: float = SPECTRUM_TOL) -> np.ndarray:
    c = np.asarray(coeffs)
    if np.iscomplexobj(c):
        if np.any(np.abs(c.imag) > 0):
            raise ValueError("complex Bell-basis coefficients are not supported")
        c = c.real
    c = c.astype(float).ravel()
    if c.size != 4:
        raise ValueError(f"expected 4 Bell-basis coefficients, got {c.size}")
    norm = float(np.sum(c * c))
    if abs(norm - 1) > tol:
        raise NotNormalized(f"sum of squared coefficients is {norm:.15g}, expected 1")
    return c


def chsh_max_pure(coeffs) -> float:
    """Maximal CHSH value of ``sum_i c_i |B_i>`` with real Bell-basis coefficients."""
    lam = check_superposition(coeffs) ** 2
    return TSIRELSON * math.hypot(lam[0] + lam[3], lam[1] + lam[2])


def pure_concurrence_sq(coeffs) -> float:
    lam = check_superposition(coeffs) ** 2
    return 1 - 4 * (lam[0] + lam[3]) * (lam[1] + lam[2])


def superposition_vector(coeffs) -> np.ndarray:
    """Computational-basis ket of a Bell-basis superposition."""
    return np.asarray(coeffs, dtype=complex) @ bell_basis().vectors


def theta_state_coeffs(alpha: float) -> np.ndarray:
    """Bell-basis coefficients of ``alpha |01> + sqrt(1 - alpha^2) |Phi+>``."""
    if not 0 <= alpha * alpha <= 1:
        raise OutOfRange(f"alpha^2 must lie in [0, 1], got {alpha * alpha}")
    beta = math.sqrt(1 - alpha * alpha)
    s = 1 / SQRT2
    # |01> = (|Psi+> + |Psi->)/sqrt(2)
    return np.array([beta, 0.0, alpha * s, alpha * s])


def superposition_example_theta(alpha: float) -> float:
    if not 0 <= alpha * alpha <= 1:
        raise OutOfRange(f"alpha^2 must lie in [0, 1], got {alpha * alpha}")
    a2 = alpha * alpha
    return 2 * math.sqrt(2 - a2 * (2 - a2))


@dataclass(frozen=True)
class SuperpositionBound:
    bound: float
    actual: float
    cross_term: float  # actual**2 - bound**2, the interference contribution


def theorem1_lower_bound(states: Sequence, alphas: Sequence[float], tol: float = 1e-10) -> SuperpositionBound:
    """Lower bound on the CHSH maximum of ``sum_i alpha_i |phi_i>`` for orthogonal ``phi_i``."""
    vecs = np.array([check_superposition(s) for s in states])
    a = np.asarray(alphas, dtype=float)
    if a.shape != (len(vecs),):
        raise ValueError(f"need one weight per state, got {a.size} weights for {len(vecs)} states")
    if abs(np.sum(a * a) - 1) > tol:
        raise NotNormalized(f"sum of squared weights is {np.sum(a * a):.15g}, expected 1")
    gram = vecs @ vecs.T
    off = np.abs(gram - np.eye(len(vecs)))
    if off.size and off.max() > tol:
        raise NotOrthogonal(f"states overlap by up to {off.max():.3e}")
    b_sq = np.array([chsh_max_pure(v) ** 2 for v in vecs])
    bound = math.sqrt(float(np.sum(a**4 * b_sq)))
    combined = a @ vecs
    combined = combined / np.linalg.norm(combined)
    actual = chsh_max_pure(combined)
    return SuperpositionBound(bound, actual, actual * actual - bound * bound)
