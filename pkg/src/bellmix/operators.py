"""Bell operators (CHSH, Mermin, MABK) and their maximisation over observer settings.

Every operator here is a signed sum of products ``v_1.sigma (x) ... (x) v_n.sigma``
where party ``k`` contributes either its first setting ``a_k`` or its
second setting ``b_k``. Such an operator is encoded by a sign tensor ``S`` of
shape ``(2,)*n`` (index 0 picks ``a_k``, index 1 picks ``b_k``), so that

    Tr(rho B) = sum_{i, u} T[i_1..i_n] S[u_1..u_n] prod_k v[k, u_k, i_k]

with ``T`` the Pauli correlation tensor of ``rho``. The expectation is linear
in each party's pair of vectors, which the optimiser exploits.
"""
from __future__ import annotations

import itertools
import math
import string
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import DimensionMismatch, WrongPartyCount
from .qstate import PAULIS, DensityMatrix, kron

UNIT_TOL = 1e-8


# ---------------------------------------------------------------- settings


def unit_vector(theta: float, phi: float) -> np.ndarray:
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


def vector_angles(v) -> tuple[float, float]:
    x, y, z = np.asarray(v, dtype=float) / np.linalg.norm(v)
    theta = math.acos(min(1.0, max(-1.0, z)))
    phi = math.atan2(y, x) % (2 * math.pi)
    return theta, phi


@dataclass(frozen=True)
class ObserverSettings:
    """Two measurement directions per party.

    ``angles[k, s] = (theta, phi)`` for party ``k`` and setting ``s`` (0 for
    ``a_k``, 1 for ``b_k``); ``vectors[k, s]`` is the matching unit vector.
    For CHSH, party 0 holds Alice's ``(a1, a2)`` and party 1 Bob's ``(b1, b2)``.
    """

    angles: np.ndarray
    vectors: np.ndarray = field(repr=False)

    @property
    def n_parties(self) -> int:
        return self.angles.shape[0]

    @classmethod
    def from_angles(cls, angles) -> "ObserverSettings":
        ang = np.array(angles, dtype=float).reshape(-1, 2, 2)
        ang[..., 1] %= 2 * math.pi
        vec = np.stack(
            [
                np.sin(ang[..., 0]) * np.cos(ang[..., 1]),
                np.sin(ang[..., 0]) * np.sin(ang[..., 1]),
                np.cos(ang[..., 0]),
            ],
            axis=-1,
        )
        ang.flags.writeable = False
        vec.flags.writeable = False
        return cls(ang, vec)

    @classmethod
    def from_vectors(cls, vectors) -> "ObserverSettings":
        vec = np.array(vectors, dtype=float).reshape(-1, 2, 3)
        norms = np.linalg.norm(vec, axis=-1)
        if np.any(np.abs(norms - 1) > UNIT_TOL):
            raise ValueError(f"setting vectors must be unit length, got norms {norms.ravel()}")
        ang = [[vector_angles(v) for v in pair] for pair in vec]
        return cls.from_angles(ang)

    def to_dict(self) -> dict:
        return {"angles": self.angles.tolist(), "vectors": self.vectors.tolist()}


def chsh_settings(a1, a2, b1, b2) -> ObserverSettings:
    """Settings for Alice (a1, a2) and Bob (b1, b2) in the usual CHSH naming."""
    return ObserverSettings.from_vectors([[a1, a2], [b1, b2]])


CANONICAL_CHSH = chsh_settings(
    (1, 0, 0), (0, 0, -1), (1 / math.sqrt(2), 0, -1 / math.sqrt(2)), (1 / math.sqrt(2), 0, 1 / math.sqrt(2))
)


def random_settings(n_parties: int, rng: np.random.Generator) -> ObserverSettings:
    theta = rng.uniform(0, math.pi, size=(n_parties, 2))
    phi = rng.uniform(0, 2 * math.pi, size=(n_parties, 2))
    return ObserverSettings.from_angles(np.stack([theta, phi], axis=-1))


# ---------------------------------------------------------------- families


def _chsh_signs() -> np.ndarray:
    s = np.ones((2, 2))
    s[1, 1] = -1
    return s


def _mermin_signs() -> np.ndarray:
    s = np.zeros((2, 2, 2))
    s[0, 0, 0] = 1
    s[0, 1, 1] = s[1, 0, 1] = s[1, 1, 0] = -1
    return s


# sign of a 16-term MABK4 product, keyed by how many parties use their b setting
_MABK4_SIGN_BY_WEIGHT = {0: 1, 1: -1, 2: -1, 3: 1, 4: 1}


def _mabk4_signs() -> np.ndarray:
    s = np.zeros((2,) * 4)
    for u in itertools.product((0, 1), repeat=4):
        s[u] = _MABK4_SIGN_BY_WEIGHT[sum(u)]
    # halved so that the quantum maximum is 2**(5/2) and the local bound is 2
    return s / 2


@dataclass(frozen=True)
class BellFamily:
    name: str
    n_parties: int
    lvm_bound: float
    quantum_max: float

    @property
    def dim(self) -> int:
        return 2**self.n_parties

    def signs(self) -> np.ndarray:
        if self.name == "CHSH":
            return _chsh_signs()
        if self.name == "Mermin":
            return _mermin_signs()
        if self.name == "MABK4":
            return _mabk4_signs()
        raise NotImplementedError(f"no explicit operator for {self.name}")


CHSH = BellFamily("CHSH", 2, 2.0, 2 * math.sqrt(2))
MERMIN = BellFamily("Mermin", 3, 2.0, 4.0)
MABK4 = BellFamily("MABK4", 4, 2.0, 4 * math.sqrt(2))

FAMILIES = {"chsh": CHSH, "mermin": MERMIN, "mabk": MABK4, "mabk4": MABK4}


def mabk_family(n: int) -> BellFamily:
    """MABK_N in the normalisation with local bound 2 and quantum maximum 2**((n+1)/2)."""
    if n == 4:
        return MABK4
    return BellFamily(f"MABK_{n}", n, 2.0, 2 ** ((n + 1) / 2))


def family_for_dim(dim: int) -> BellFamily:
    for fam in (CHSH, MERMIN, MABK4):
        if fam.dim == dim:
            return fam
    raise DimensionMismatch(f"no Bell family for dimension {dim}")


# ---------------------------------------------------------------- operators


def bell_operator(settings: ObserverSettings, family: BellFamily) -> np.ndarray:
    if settings.n_parties != family.n_parties:
        raise WrongPartyCount(f"{family.name} needs {family.n_parties} parties, got {settings.n_parties}")
    local = np.einsum("ksi,iab->ksab", settings.vectors, PAULIS)
    signs = family.signs()
    out = np.zeros((family.dim, family.dim), dtype=complex)
    for u in itertools.product((0, 1), repeat=family.n_parties):
        if signs[u] != 0:
            out += signs[u] * kron(*(local[k, u[k]] for k in range(family.n_parties)))
    return out


def chsh_operator(settings: ObserverSettings) -> np.ndarray:
    return bell_operator(settings, CHSH)


def mermin_operator(settings: ObserverSettings) -> np.ndarray:
    return bell_operator(settings, MERMIN)


def mabk_operator(settings: ObserverSettings) -> np.ndarray:
    return bell_operator(settings, MABK4)


def expectation(rho: DensityMatrix, op: np.ndarray) -> float:
    op = np.asarray(op)
    if op.shape != (rho.dim, rho.dim):
        raise DimensionMismatch(f"state dim {rho.dim} does not match operator shape {op.shape}")
    val = np.trace(np.asarray(rho.mat) @ op)
    if abs(val.imag) > 1e-10:
        raise ValueError(f"expectation has imaginary part {val.imag:.3e}; operator not Hermitian?")
    return float(val.real)


def correlation_tensor(rho: DensityMatrix) -> np.ndarray:
    """``T[i_1..i_n] = Tr(rho sigma_{i_1} (x) ... (x) sigma_{i_n})`` over x, y, z."""
    n = rho.n_qubits
    letters = string.ascii_letters
    rows, cols, out = letters[:n], letters[n : 2 * n], letters[2 * n : 3 * n]
    spec = rows + cols + "," + ",".join(out[k] + cols[k] + rows[k] for k in range(n)) + "->" + out
    r = np.asarray(rho.mat).reshape((2,) * (2 * n))
    return np.einsum(spec, r, *([PAULIS] * n)).real


# ---------------------------------------------------------------- optimiser


@dataclass(frozen=True)
class OptimizationReport:
    value: float
    settings: ObserverSettings
    starts: int
    converged_fraction: float
    family: str = ""


class _Objective:
    """Multilinear objective over batches of settings.

    The correlation and sign tensors are fused into a kernel ``K`` with one
    6-dim index per party (3 vector components x 2 settings).
    """

    def __init__(self, T: np.ndarray, signs: np.ndarray):
        n = T.ndim
        self.n = n
        K = np.einsum(
            ",".join([string.ascii_lowercase[:n], string.ascii_uppercase[:n]])
            + "->"
            + "".join(a + b for a, b in zip(string.ascii_lowercase[:n], string.ascii_uppercase[:n])),
            T,
            signs,
        ).reshape((6,) * n)
        self.K = K
        letters = string.ascii_lowercase[:n]
        self._grad_specs = []
        for k in range(n):
            others = [m for m in range(n) if m != k]
            spec = letters + "," + ",".join("Z" + letters[m] for m in others) + "->Z" + letters[k]
            path = np.einsum_path(spec, K, *([np.zeros((1, 6))] * (n - 1)), optimize="greedy")[0]
            self._grad_specs.append((spec, path, others))

    def gradient(self, V: np.ndarray, k: int) -> np.ndarray:
        """d value / d V[:, k] for flattened settings ``V`` of shape (Z, n, 6)."""
        spec, path, others = self._grad_specs[k]
        return np.einsum(spec, self.K, *(V[:, m] for m in others), optimize=path)

    def value(self, V: np.ndarray) -> np.ndarray:
        return np.einsum("za,za->z", self.gradient(V, 0), V[:, 0])


def _vectors_from_angles(ang: np.ndarray) -> np.ndarray:
    th, ph = ang[..., 0], ang[..., 1]
    return np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)


def _flatten(vec: np.ndarray) -> np.ndarray:
    # (Z, n, 2, 3) -> (Z, n, 6) with index i*2 + u
    return np.ascontiguousarray(np.swapaxes(vec, -1, -2)).reshape(vec.shape[0], vec.shape[1], 6)


def _unflatten(V: np.ndarray) -> np.ndarray:
    return np.swapaxes(V.reshape(V.shape[0], V.shape[1], 3, 2), -1, -2)


def _seesaw(obj: _Objective, V: np.ndarray, tol: float, max_sweeps: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact block ascent: each party's pair of vectors is set to its optimum given the rest.

    Rows stop updating once their value changes by less than ``tol`` in a sweep,
    so each start's trajectory is independent of the other rows in the batch.
    """
    values = obj.value(V)
    active = np.arange(V.shape[0])
    for _ in range(max_sweeps):
        if active.size == 0:
            break
        W = V[active]
        for k in range(obj.n):
            g = obj.gradient(W, k).reshape(-1, 3, 2)
            norms = np.linalg.norm(g, axis=1, keepdims=True)
            ok = norms > 1e-300
            W[:, k] = np.where(ok, g / np.where(ok, norms, 1), W[:, k].reshape(-1, 3, 2)).reshape(-1, 6)
        new = obj.value(W)
        V[active] = W
        moved = np.abs(new - values[active]) >= tol
        values[active] = new
        active = active[moved]
    return V, values


def _polish(obj: _Objective, vec: np.ndarray) -> tuple[np.ndarray, float]:
    """BFGS on the spherical angles from a converged seesaw point."""
    n = obj.n
    ang0 = np.array([[vector_angles(v) for v in pair] for pair in vec]).ravel()

    def fun(x):
        ang = x.reshape(n, 2, 2)
        V = _flatten(_vectors_from_angles(ang)[None])
        val = obj.value(V)[0]
        th, ph = ang[..., 0], ang[..., 1]
        dth = np.stack([np.cos(th) * np.cos(ph), np.cos(th) * np.sin(ph), -np.sin(th)], axis=-1)
        dph = np.stack([-np.sin(th) * np.sin(ph), np.sin(th) * np.cos(ph), np.zeros_like(th)], axis=-1)
        grad = np.empty((n, 2, 2))
        for k in range(n):
            g = obj.gradient(V, k).reshape(3, 2).T  # (setting, component)
            grad[k, :, 0] = np.sum(g * dth[k], axis=-1)
            grad[k, :, 1] = np.sum(g * dph[k], axis=-1)
        return -val, -grad.ravel()

    res = minimize(fun, ang0, jac=True, method="BFGS", options={"gtol": 1e-11, "maxiter": 2000})
    ang = res.x.reshape(n, 2, 2)
    return _vectors_from_angles(ang), -float(res.fun)


def _start_angles(seed: int, starts: int, n: int) -> np.ndarray:
    out = np.empty((starts, n, 2, 2))
    for i in range(starts):
        rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
        out[i, ..., 0] = rng.uniform(0, math.pi, size=(n, 2))
        out[i, ..., 1] = rng.uniform(0, 2 * math.pi, size=(n, 2))
    return out


DEFAULT_STARTS = {"CHSH": 50, "Mermin": 200, "MABK4": 500}


def maximize_violation(
    rho: DensityMatrix,
    family: BellFamily,
    starts: int | None = None,
    seed: int = 0xB311,
    *,
    tol: float = 1e-10,
    max_sweeps: int = 100,
    polish: int = 3,
) -> OptimizationReport:
    """Maximise ``Tr(rho B)`` over all observer settings of ``family``.

    Multi-start block ascent from uniformly random spherical angles, followed
    by a gradient polish of the best few end points. Start ``i`` is seeded
    from ``(seed, i)`` alone, so adding starts never lowers the result.
    """
    if rho.dim != family.dim:
        raise DimensionMismatch(f"{family.name} needs dim {family.dim}, state has dim {rho.dim}")
    if starts is None:
        starts = DEFAULT_STARTS.get(family.name, 200)
    if starts < 1:
        raise ValueError("starts must be >= 1")
    n = family.n_parties
    obj = _Objective(correlation_tensor(rho), family.signs())

    V = _flatten(_vectors_from_angles(_start_angles(seed, starts, n)))
    V, values = _seesaw(obj, V, tol, max_sweeps)

    # stable sort: ties resolved by start index
    order = np.argsort(-values, kind="stable")
    best_val = float(values[order[0]])
    best_vec = _unflatten(V[order[0] : order[0] + 1])[0]
    if np.max(np.abs(obj.K)) > 0:
        for idx in order[:polish]:
            vec, val = _polish(obj, _unflatten(V[idx : idx + 1])[0])
            if val > best_val:
                best_val, best_vec = val, vec
    frac = float(np.mean(values >= best_val - 1e-6))
    settings = ObserverSettings.from_vectors(best_vec / np.linalg.norm(best_vec, axis=-1, keepdims=True))
    return OptimizationReport(best_val, settings, starts, frac, family.name)
