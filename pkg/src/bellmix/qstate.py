"""Density matrices for qubit registers: validation, bases, spectra, entanglement scalars.

Qubit ordering is big-endian throughout: party 0 is the most significant bit
of the computational index, so ``|j>`` in a GHZ basis vector means the
binary expansion of ``j`` read from party 0 to party n-1.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import reduce
from pathlib import Path

import numpy as np

from .errors import (
    BadPartyIndex,
    DimensionMismatch,
    NotHermitian,
    NotPSD,
    NotUnitTrace,
    ParseError,
)

TOL = 1e-10

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])


def kron(*mats: np.ndarray) -> np.ndarray:
    return reduce(np.kron, mats)


def n_qubits_of(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 2 or 2**n != dim:
        raise DimensionMismatch(f"dimension {dim} is not a qubit register size 2**n")
    return n


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class DensityMatrix:
    """A validated state on ``n`` qubits. Use :func:`make_density` to build one."""

    mat: np.ndarray

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @property
    def n_qubits(self) -> int:
        return n_qubits_of(self.dim)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.mat)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.mat, dtype=dtype)


def make_density(m, *, tol: float = TOL) -> DensityMatrix:
    """Validate ``m`` as a density matrix.

    Inputs that miss an invariant by at most ``tol`` are accepted and
    re-projected: Hermitian part taken, negative eigenvalues clamped to zero,
    trace renormalised to one.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    n_qubits_of(m.shape[0])

    herm_err = float(np.max(np.abs(m - m.conj().T)))
    if herm_err > tol:
        raise NotHermitian(f"Hermiticity violated: max |M - M^dagger| = {herm_err:.3e}")
    m = (m + m.conj().T) / 2

    tr = float(np.trace(m).real)
    if abs(tr - 1) > tol:
        raise NotUnitTrace(f"trace must be 1, got {tr:.12g} (deviation {abs(tr - 1):.3e})")

    w, v = np.linalg.eigh(m)
    if w[0] < -tol:
        raise NotPSD(f"negative eigenvalue {w[0]:.6g} (tolerance {tol:g})")
    if w[0] < 0:
        m = (v * np.clip(w, 0, None)) @ v.conj().T
        tr = float(np.trace(m).real)
    if tr != 1:
        m = m / tr
    return DensityMatrix(_frozen(m))


def pure_state(psi) -> DensityMatrix:
    psi = np.asarray(psi, dtype=complex).ravel()
    psi = psi / np.linalg.norm(psi)
    return make_density(np.outer(psi, psi.conj()))


def maximally_mixed(dim: int) -> DensityMatrix:
    return make_density(np.eye(dim) / dim)


def ket(bits: str) -> np.ndarray:
    """Computational basis vector for a bit string such as ``"0110"``."""
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1
    return v


# ---------------------------------------------------------------- bases


@dataclass(frozen=True)
class BasisSet:
    """Orthonormal basis; ``vectors[i]`` is the i-th basis ket."""

    kind: str
    vectors: np.ndarray
    theta: float = 0.0

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def unitary(self) -> np.ndarray:
        # row i is <b_i|, so (U rho U^dagger)_ij = <b_i| rho |b_j>
        return self.vectors.conj()

    def gram(self) -> np.ndarray:
        return self.vectors.conj() @ self.vectors.T


def computational_basis(n: int) -> BasisSet:
    return BasisSet("computational", _frozen(np.eye(2**n)))


def bell_basis(theta: float = 0.0) -> BasisSet:
    """Ordered as Phi+, Phi-, Psi+, Psi- with relative phase ``theta``."""
    e = np.exp(1j * theta)
    s = 1 / np.sqrt(2)
    vecs = np.array(
        [
            [s, 0, 0, s * e],
            [s, 0, 0, -s * e],
            [0, s, s * e, 0],
            [0, s, -s * e, 0],
        ]
    )
    return BasisSet("bell", _frozen(vecs), theta=float(theta))


def ghz_basis(n: int) -> BasisSet:
    """GHZ basis ordered Psi_0^+, Psi_0^-, Psi_1^+, Psi_1^-, ...

    ``Psi_j^{+-} = (|j> +- |2^n - 1 - j>)/sqrt(2)`` for ``j < 2^(n-1)``.
    """
    if n < 2:
        raise DimensionMismatch("a GHZ basis needs at least two qubits")
    d = 2**n
    vecs = np.zeros((d, d))
    s = 1 / np.sqrt(2)
    for j in range(d // 2):
        vecs[2 * j, j] = vecs[2 * j, d - 1 - j] = s
        vecs[2 * j + 1, j] = s
        vecs[2 * j + 1, d - 1 - j] = -s
    return BasisSet(f"ghz{n}", _frozen(vecs))


def change_basis(rho: DensityMatrix, basis: BasisSet) -> DensityMatrix:
    """Matrix elements ``<b_i|rho|b_j>`` of ``rho`` in ``basis``."""
    if rho.dim != basis.dim:
        raise DimensionMismatch(f"state has dim {rho.dim}, basis has dim {basis.dim}")
    u = basis.unitary()
    return make_density(u @ rho.mat @ u.conj().T)


def from_basis(coeffs, basis: BasisSet) -> DensityMatrix:
    """Inverse of :func:`change_basis`: map basis-frame elements to the computational frame."""
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.shape != (basis.dim, basis.dim):
        raise DimensionMismatch(f"expected {basis.dim}x{basis.dim}, got {coeffs.shape}")
    u = basis.unitary()
    return make_density(u.conj().T @ coeffs @ u)


def diagonal_state(weights, basis: BasisSet) -> DensityMatrix:
    """``sum_i w_i |b_i><b_i|`` in the computational frame."""
    return from_basis(np.diag(np.asarray(weights, dtype=float)), basis)


# entries of the Bell-frame matrix whose real part drives the CHSH expectation;
# the other off-diagonal entries contribute through their imaginary part
_PAR_REAL = np.zeros((4, 4), dtype=bool)
for _i, _j in [(0, 3), (1, 2)]:
    _PAR_REAL[_i, _j] = _PAR_REAL[_j, _i] = True
np.fill_diagonal(_PAR_REAL, True)
_PAR_IMAG = np.zeros((4, 4), dtype=bool)
for _i, _j in [(0, 1), (0, 2), (1, 3), (2, 3)]:
    _PAR_IMAG[_i, _j] = _PAR_IMAG[_j, _i] = True


def parallel_decompose(rho_bell) -> tuple[np.ndarray, np.ndarray]:
    """Split a Bell-frame (theta = 0) two-qubit matrix into CHSH-visible and invisible parts.

    The first part holds the diagonal, the real parts of the (Phi+, Psi-) and
    (Phi-, Psi+) coherences and the imaginary parts of the remaining four
    coherences. The second part is the complement and is traceless against
    every CHSH operator expressed in the same frame.
    """
    m = np.asarray(rho_bell.mat if isinstance(rho_bell, DensityMatrix) else rho_bell, dtype=complex)
    if m.shape != (4, 4):
        raise DimensionMismatch(f"parallel decomposition needs a 4x4 matrix, got {m.shape}")
    par = np.where(_PAR_REAL, m.real, 0) + 1j * np.where(_PAR_IMAG, m.imag, 0)
    return par, m - par


# ---------------------------------------------------------------- scalars


@dataclass(frozen=True)
class MixednessScalars:
    participation_ratio: float
    max_eigenvalue: float
    purity: float


def mixedness(rho: DensityMatrix) -> MixednessScalars:
    w = np.clip(rho.eigenvalues(), 0, None)
    purity = float(np.sum(w**2))
    return MixednessScalars(1 / purity, float(w[-1]), purity)


def participation_ratio(spectrum) -> float:
    w = np.asarray(spectrum, dtype=float)
    return float(1 / np.sum(w**2))


_YY = np.kron(SIGMA_Y, SIGMA_Y)


def concurrence(rho: DensityMatrix) -> float:
    """Wootters concurrence of a two-qubit state."""
    if rho.dim != 4:
        raise DimensionMismatch(f"concurrence is defined for two qubits, got dim {rho.dim}")
    w, v = np.linalg.eigh(rho.mat)
    # eigenvalues at round-off level would otherwise leak in as sqrt(1e-16) ~ 1e-8
    w = np.where(w > 1e-14 * w[-1], w, 0.0)
    vs = v * np.sqrt(w)
    # singular values of tau_ij = <v_i| YY |v_j*> are the square roots of the eigenvalues
    # of sqrt(rho) rho~ sqrt(rho), without the final square root amplifying round-off
    s = np.linalg.svd(vs.T @ _YY @ vs, compute_uv=False)
    return float(max(0.0, s[0] - s[1] - s[2] - s[3]))


def _partial_transpose(m: np.ndarray, n: int, party: int) -> np.ndarray:
    """Partial transpose on the last two axes of ``m`` (leading axes are batch)."""
    batch = m.shape[:-2]
    t = m.reshape(batch + (2,) * (2 * n))
    k = len(batch)
    t = np.swapaxes(t, k + party, k + n + party)
    return t.reshape(m.shape)


def partial_transpose(rho: DensityMatrix, party: int) -> np.ndarray:
    n = rho.n_qubits
    if not 0 <= party < n:
        raise BadPartyIndex(f"party {party} out of range for {n} qubits")
    return _partial_transpose(np.asarray(rho.mat), n, party)


def is_ppt(rho: DensityMatrix, party: int, tol: float = TOL) -> bool:
    return bool(np.linalg.eigvalsh(partial_transpose(rho, party))[0] >= -tol)


# ---------------------------------------------------------------- JSON


def density_to_json(rho: DensityMatrix) -> dict:
    m = np.asarray(rho.mat)
    return {"dim": rho.dim, "re": m.real.tolist(), "im": m.imag.tolist()}


def density_from_json(data: dict) -> DensityMatrix:
    try:
        dim = int(data["dim"])
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data.get("im", np.zeros((dim, dim))), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed density-matrix JSON: {exc}") from exc
    for name, part in (("re", re), ("im", im)):
        if part.shape != (dim, dim):
            raise ParseError(f"field '{name}' has shape {part.shape}, expected ({dim}, {dim})")
    return make_density(re + 1j * im)


def load_density(path) -> DensityMatrix:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return density_from_json(data)


def save_density(rho: DensityMatrix, path) -> None:
    Path(path).write_text(json.dumps(density_to_json(rho), indent=1) + "\n")
