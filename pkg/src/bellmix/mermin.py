"""Three-qubit Mermin analysis for states diagonal in the GHZ basis.

Spectra are handled in canonical form: the eight eigenvalues sorted in
decreasing order and read as pairs ``(l_j^+, l_j^-)`` for ``j = 0..3``, where
pair ``j`` sits on ``Psi_j^{+-} = (|j> +- |7-j>)/sqrt(2)``.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .chsh import check_spectrum
from .errors import NoConvergence, OutOfRange
from .qstate import DensityMatrix, _partial_transpose, diagonal_state, ghz_basis, make_density

CATEGORIES = ("distillable_local", "distillable_nonlocal", "bound_local", "bound_nonlocal")
LVM_BOUND = 2.0


def canonical_mermin_spectrum(lams) -> np.ndarray:
    """Sorted (decreasing) copy of an 8-entry spectrum; reshape to (4, 2) for the pairs."""
    return np.sort(check_spectrum(lams, 8))[::-1]


def pair_differences(lams) -> np.ndarray:
    s = canonical_mermin_spectrum(lams)
    return s[0::2] - s[1::2]


def mermin_diagonal_state(lams) -> DensityMatrix:
    """GHZ-diagonal state with the canonical spectrum placed on Psi_0^+, Psi_0^-, Psi_1^+, ..."""
    return diagonal_state(canonical_mermin_spectrum(lams), ghz_basis(3))


def mermin_bound_diagonal(lams) -> float:
    """Upper bound ``4 sqrt(sum_j (l_j^+ - l_j^-)^2)`` on the Mermin maximum."""
    return 4 * math.hypot(*pair_differences(lams))


# ---------------------------------------------------------------- exact angle solve


def _angle_matrix(d: np.ndarray) -> np.ndarray:
    # F(phi, psi) = 4 (cos phi, sin phi) M (cos psi, sin psi)^T
    return np.array([[d[2], d[3]], [d[1], d[0]]])


def mermin_angle_objective(phi: float, psi: float, d) -> float:
    d = np.asarray(d, dtype=float)
    return 4 * (
        d[0] * math.sin(phi) * math.sin(psi)
        + d[1] * math.sin(phi) * math.cos(psi)
        + d[2] * math.cos(phi) * math.cos(psi)
        + d[3] * math.cos(phi) * math.sin(psi)
    )


def _fixed_point(m: np.ndarray, phi: float, psi: float, tol: float, max_iter: int):
    """Iterate the two tangent equations; each step is the exact best response."""
    for _ in range(max_iter):
        psi_new = math.atan2(m[0, 1] * math.cos(phi) + m[1, 1] * math.sin(phi),
                             m[0, 0] * math.cos(phi) + m[1, 0] * math.sin(phi))
        phi_new = math.atan2(m[1, 0] * math.cos(psi_new) + m[1, 1] * math.sin(psi_new),
                             m[0, 0] * math.cos(psi_new) + m[0, 1] * math.sin(psi_new))
        step = abs(math.remainder(phi_new - phi, 2 * math.pi)) + abs(math.remainder(psi_new - psi, 2 * math.pi))
        phi, psi = phi_new, psi_new
        if step < tol:
            return phi, psi, True
    return phi, psi, False


def _grid_refine(d: np.ndarray, n_grid: int = 200) -> tuple[float, float]:
    grid = np.linspace(-math.pi, math.pi, n_grid, endpoint=False)
    m = _angle_matrix(d)
    c, s = np.cos(grid), np.sin(grid)
    u = np.stack([c, s], axis=1)
    vals = 4 * u @ m @ u.T
    i, j = np.unravel_index(np.argmax(vals), vals.shape)
    phi, psi = grid[i], grid[j]
    h = 2 * math.pi / n_grid
    for _ in range(3):  # alternate golden-section line searches
        phi = minimize_scalar(lambda t: -mermin_angle_objective(t, psi, d),
                              bracket=(phi - h, phi, phi + h), method="golden").x
        psi = minimize_scalar(lambda t: -mermin_angle_objective(phi, t, d),
                              bracket=(psi - h, psi, psi + h), method="golden").x
    return float(phi), float(psi)


@dataclass(frozen=True)
class MerminAngles:
    phi: float
    psi: float
    value: float


def solve_mermin_angles(lams, *, seeds: int = 16, tol: float = 1e-14, max_iter: int = 10_000) -> MerminAngles:
    """Maximise the two-angle reduction of the Mermin expectation.

    Runs the tangent fixed-point iteration from a ``4 x 4`` grid of seeds and
    keeps the best stationary point. If no seed converges, a dense grid with
    golden-section refinement is used instead.
    """
    d = pair_differences(lams)
    m = _angle_matrix(d)
    if not np.any(m):
        return MerminAngles(0.0, 0.0, 0.0)
    side = max(1, int(round(math.sqrt(seeds))))
    starts = np.linspace(0, math.pi, side, endpoint=False) + math.pi / (2 * side)
    best = None
    for phi0 in starts:
        for psi0 in starts:
            phi, psi, ok = _fixed_point(m, phi0, psi0, tol, max_iter)
            if not ok:
                continue
            val = mermin_angle_objective(phi, psi, d)
            if best is None or val > best.value:
                best = MerminAngles(phi, psi, val)
    if best is None:
        phi, psi = _grid_refine(d)
        best = MerminAngles(phi, psi, mermin_angle_objective(phi, psi, d))
        if not np.isfinite(best.value):
            raise NoConvergence("angle solve failed on both the fixed-point and grid paths")
    return best


# ---------------------------------------------------------------- Werner family and frontier


def werner3_spectrum(xt: float) -> np.ndarray:
    if not 0 <= xt <= 1:
        raise OutOfRange(f"Werner weight must lie in [0, 1], got {xt}")
    lam = np.full(8, (1 - xt) / 8)
    lam[0] += xt
    return lam


def werner3(xt: float) -> DensityMatrix:
    """``xt |GHZ><GHZ| + (1 - xt) I/8``."""
    if not 0 <= xt <= 1:
        raise OutOfRange(f"Werner weight must lie in [0, 1], got {xt}")
    ghz = ghz_basis(3).vectors[0]
    return make_density(xt * np.outer(ghz, ghz) + (1 - xt) * np.eye(8) / 8)


def mermin_frontier_R(R: float) -> float:
    """Largest Mermin bound reachable by a GHZ-diagonal state with participation ratio ``R``."""
    if not 1 <= R <= 8:
        raise OutOfRange(f"participation ratio must lie in [1, 8], got {R}")
    return 4 * math.sqrt(max(0.0, (8 - R) / (7 * R)))


def critical_ratios() -> tuple[float, float]:
    """Participation ratios at the nonlocality threshold and at the Werner separability threshold."""
    return 32 / 11, 25 / 4


# ---------------------------------------------------------------- PPT and classification


def _ppt_from_sorted(s: np.ndarray) -> np.ndarray:
    """PPT flags for cuts on parties 0, 1, 2; ``s`` has shape (..., 8) in canonical order."""
    tot = s[..., 0::2] + s[..., 1::2]
    dif = s[..., 0::2] - s[..., 1::2]
    t1 = (tot[..., 2] >= dif[..., 1]) & (tot[..., 3] >= dif[..., 0])
    t2 = (tot[..., 2] >= dif[..., 0]) & (tot[..., 3] >= dif[..., 1])
    t3 = (tot[..., 1] >= dif[..., 0]) & (tot[..., 3] >= dif[..., 2])
    return np.stack([t1, t2, t3], axis=-1)


def ppt_flags(lams) -> tuple[bool, bool, bool]:
    """Whether the partial transpose on party 0, 1, 2 is positive."""
    flags = _ppt_from_sorted(canonical_mermin_spectrum(lams))
    return tuple(bool(f) for f in flags)


def ghz_diagonal_matrices(sorted_spectra: np.ndarray) -> np.ndarray:
    """Batch of real 8x8 GHZ-diagonal matrices from canonical spectra of shape (k, 8)."""
    s = np.asarray(sorted_spectra, dtype=float)
    tot = s[:, 0::2] + s[:, 1::2]
    dif = s[:, 0::2] - s[:, 1::2]
    out = np.zeros((len(s), 8, 8))
    j = np.arange(4)
    out[:, j, j] = out[:, 7 - j, 7 - j] = tot / 2
    out[:, j, 7 - j] = out[:, 7 - j, j] = dif / 2
    return out


def ppt_flags_explicit(lams, tol: float = 1e-12) -> tuple[bool, bool, bool]:
    """Same flags computed from the eigenvalues of the explicit partial transposes."""
    m = ghz_diagonal_matrices(canonical_mermin_spectrum(lams)[None])[0]
    return tuple(bool(np.linalg.eigvalsh(_partial_transpose(m, 3, k))[0] >= -tol) for k in range(3))


@dataclass(frozen=True)
class DistillabilityReport:
    ppt_flags: tuple[bool, bool, bool]
    distillable: bool
    mermin_value: float
    category: str


def _category(distillable, nonlocal_):
    return np.where(distillable, np.where(nonlocal_, 1, 0), np.where(nonlocal_, 3, 2))


def classify(lams) -> DistillabilityReport:
    flags = ppt_flags(lams)
    value = mermin_bound_diagonal(lams)
    distillable = not any(flags)
    if not distillable and value > LVM_BOUND:
        raise AssertionError(f"PPT state with Mermin bound {value} > 2 contradicts the incompatibility result")
    return DistillabilityReport(flags, distillable, value, CATEGORIES[int(_category(distillable, value > LVM_BOUND))])


# ---------------------------------------------------------------- Monte Carlo survey


def sample_simplex(dim: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Uniform point(s) on the (dim-1)-simplex from normalised unit-rate exponentials."""
    if dim < 2:
        raise OutOfRange(f"simplex dimension must be at least 2, got {dim}")
    shape = (dim,) if size is None else (size, dim)
    e = rng.standard_exponential(shape)
    return e / e.sum(axis=-1, keepdims=True)


CHUNK = 50_000
HIST_RANGE = (0.0, 4.0)


@dataclass(frozen=True)
class SurveyStats:
    n_samples: int
    seed: int
    category_counts: tuple[int, int, int, int]
    bin_edges: np.ndarray = field(repr=False)
    bin_counts: np.ndarray = field(repr=False)

    @property
    def category_probs(self) -> np.ndarray:
        return np.asarray(self.category_counts, dtype=float) / self.n_samples

    @property
    def histogram(self) -> np.ndarray:
        """Density per bin (integrates to one over [0, 4])."""
        width = np.diff(self.bin_edges)
        return self.bin_counts / (self.n_samples * width)

    def probability(self, category: str) -> float:
        return float(self.category_probs[CATEGORIES.index(category)])


def _survey_chunk(args) -> tuple[np.ndarray, np.ndarray, int]:
    seed, index, size, bins, verify = args
    rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
    s = np.sort(sample_simplex(8, rng, size), axis=1)[:, ::-1]
    flags = _ppt_from_sorted(s)
    dif = s[:, 0::2] - s[:, 1::2]
    value = 4 * np.sqrt(np.sum(dif * dif, axis=1))
    distillable = ~flags.any(axis=1)
    cats = _category(distillable, value > LVM_BOUND)
    mismatches = 0
    if verify:
        mats = ghz_diagonal_matrices(s)
        for k in range(3):
            mins = np.linalg.eigvalsh(_partial_transpose(mats, 3, k))[:, 0]
            mismatches += int(np.count_nonzero((mins >= -1e-12) != flags[:, k]))
    counts = np.bincount(cats, minlength=4)
    hist, _ = np.histogram(value, bins=bins, range=HIST_RANGE)
    return counts, hist, mismatches


def survey(n: int, seed: int, bins: int = 100, *, workers: int = 1, verify_ppt: bool = False) -> SurveyStats:
    """Sample ``n`` GHZ-diagonal spectra uniformly, classify them and histogram the Mermin bound.

    Samples are split into fixed-size chunks, each with its own RNG stream
    derived from ``(seed, chunk_index)``. Chunk results are integer counts, so
    the output does not depend on ``workers``.
    """
    if n < 1:
        raise OutOfRange(f"sample count must be positive, got {n}")
    if bins < 1:
        raise OutOfRange(f"bin count must be positive, got {bins}")
    tasks = [(seed, i, min(CHUNK, n - start), bins, verify_ppt) for i, start in enumerate(range(0, n, CHUNK))]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_survey_chunk, tasks))
    else:
        results = [_survey_chunk(t) for t in tasks]
    counts = sum(r[0] for r in results)
    hist = sum(r[1] for r in results)
    mismatches = sum(r[2] for r in results)
    if mismatches:
        raise AssertionError(f"{mismatches} PPT flags disagree with the explicit partial transpose")
    if counts[3]:
        raise AssertionError(f"{counts[3]} sampled states are PPT yet exceed the Mermin local bound")
    edges = np.linspace(*HIST_RANGE, bins + 1)
    return SurveyStats(n, seed, tuple(int(c) for c in counts), edges, hist.astype(np.int64))
