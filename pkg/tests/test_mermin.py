import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellmix import mermin as M
from bellmix import qstate as Q
from bellmix.errors import BadSpectrum, OutOfRange
from bellmix.operators import MERMIN, maximize_violation

GHZ_SPEC = [1, 0, 0, 0, 0, 0, 0, 0]

simplex8 = st.integers(0, 2**32 - 1).map(lambda s: M.sample_simplex(8, np.random.default_rng(s)))


def svd_oracle(lams) -> float:
    """Exact maximum of the two-angle form: 4 times the top singular value of its 2x2 matrix."""
    return 4 * np.linalg.svd(M._angle_matrix(M.pair_differences(lams)), compute_uv=False)[0]


class TestBound:
    @pytest.mark.parametrize("lam,expected", [(GHZ_SPEC, 4.0), ([1 / 8] * 8, 0.0)])
    def test_examples(self, lam, expected):
        assert M.mermin_bound_diagonal(lam) == pytest.approx(expected, abs=1e-12)

    def test_werner_half(self):
        assert M.mermin_bound_diagonal(M.werner3_spectrum(0.5)) == pytest.approx(2.0, abs=1e-12)

    def test_bad_spectrum(self):
        with pytest.raises(BadSpectrum):
            M.mermin_bound_diagonal([0.5] * 8)

    def test_diagonal_state_matches_matrix_helper(self):
        lam = M.sample_simplex(8, np.random.default_rng(0))
        rho = M.mermin_diagonal_state(lam)
        assert np.allclose(rho.mat, M.ghz_diagonal_matrices(M.canonical_mermin_spectrum(lam)[None])[0], atol=1e-14)


class TestAngleSolve:
    def test_ghz(self):
        r = M.solve_mermin_angles(GHZ_SPEC)
        assert r.value == pytest.approx(4.0, abs=1e-12)
        assert math.sin(r.phi) * math.sin(r.psi) == pytest.approx(1.0, abs=1e-12)

    def test_symmetric_spectrum_reaches_bound(self):
        lam = [0.16, 0.09, 0.16, 0.09, 0.16, 0.09, 0.16, 0.09]
        assert M.solve_mermin_angles(lam).value == pytest.approx(M.mermin_bound_diagonal(lam), abs=1e-12)

    def test_maximally_mixed(self):
        assert M.solve_mermin_angles([1 / 8] * 8).value == 0.0

    @settings(max_examples=300, deadline=None)
    @given(simplex8)
    def test_matches_svd_oracle_and_stays_below_bound(self, lam):
        r = M.solve_mermin_angles(lam)
        assert r.value == pytest.approx(svd_oracle(lam), abs=1e-12)
        assert r.value <= M.mermin_bound_diagonal(lam) + 1e-10
        assert M.mermin_angle_objective(r.phi, r.psi, M.pair_differences(lam)) == pytest.approx(r.value, abs=1e-14)

    def test_grid_fallback_agrees(self):
        lam = M.sample_simplex(8, np.random.default_rng(1))
        d = M.pair_differences(lam)
        phi, psi = M._grid_refine(d)
        assert M.mermin_angle_objective(phi, psi, d) == pytest.approx(svd_oracle(lam), abs=1e-9)

    def test_relative_gap_to_bound(self):
        rng = np.random.default_rng(2)
        for _ in range(1000):
            lam = np.sort(M.sample_simplex(8, rng))[::-1]
            bound = M.mermin_bound_diagonal(lam)
            assert (bound - M.solve_mermin_angles(lam).value) / bound < 0.05

    def test_optimizer_gap_to_bound(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            lam = M.sample_simplex(8, rng)
            bound = M.mermin_bound_diagonal(lam)
            opt = maximize_violation(M.mermin_diagonal_state(lam), MERMIN).value
            assert opt <= bound + 1e-9
            assert (bound - opt) / bound < 0.05
            assert opt >= M.solve_mermin_angles(lam).value - 1e-9

    def test_matches_twelve_angle_optimizer(self):
        rng = np.random.default_rng(3)
        worst = 0.0
        for _ in range(10):
            lam = M.sample_simplex(8, rng)
            opt = maximize_violation(M.mermin_diagonal_state(lam), MERMIN).value
            worst = max(worst, abs(opt - M.solve_mermin_angles(lam).value))
        assert worst < 1e-6


class TestWerner:
    @pytest.mark.parametrize("x,R,value", [(1, 1.0, 4.0), (0, 8.0, 0.0), (0.5, 32 / 11, 2.0)])
    def test_examples(self, x, R, value):
        rho = M.werner3(x)
        assert Q.mixedness(rho).participation_ratio == pytest.approx(R, abs=1e-12)
        assert M.mermin_bound_diagonal(M.werner3_spectrum(x)) == pytest.approx(value, abs=1e-12)

    def test_state_matches_spectrum(self):
        rho = M.werner3(0.37)
        assert np.allclose(rho.mat, M.mermin_diagonal_state(M.werner3_spectrum(0.37)).mat, atol=1e-14)

    def test_optimizer_on_werner(self):
        assert maximize_violation(M.werner3(0.7), MERMIN, starts=50).value == pytest.approx(2.8, abs=1e-6)

    @pytest.mark.parametrize("x", np.round(np.linspace(0.1, 0.9, 9), 10))
    def test_on_frontier(self, x):
        lam = M.werner3_spectrum(x)
        R = Q.participation_ratio(lam)
        assert M.mermin_bound_diagonal(lam) == pytest.approx(M.mermin_frontier_R(R), abs=1e-9)

    def test_domain(self):
        with pytest.raises(OutOfRange):
            M.werner3(1.2)


class TestFrontier:
    @pytest.mark.parametrize("R,expected", [(1, 4.0), (32 / 11, 2.0), (8, 0.0)])
    def test_examples(self, R, expected):
        assert M.mermin_frontier_R(R) == pytest.approx(expected, abs=1e-12)

    def test_domain(self):
        with pytest.raises(OutOfRange):
            M.mermin_frontier_R(0.5)

    def test_critical_ratios(self):
        r1, r2 = M.critical_ratios()
        assert r1 == pytest.approx(32 / 11) and r2 == 6.25
        assert M.mermin_frontier_R(r1) == pytest.approx(2.0, abs=1e-12)
        assert Q.mixedness(M.werner3(0.2)).participation_ratio == pytest.approx(r2, abs=1e-12)

    def test_dominance(self):
        rng = np.random.default_rng(4)
        for _ in range(1000):
            lam = M.sample_simplex(8, rng)
            assert M.mermin_bound_diagonal(lam) <= M.mermin_frontier_R(Q.participation_ratio(lam)) + 1e-6


class TestPPT:
    def test_ghz(self):
        assert M.ppt_flags(GHZ_SPEC) == (False, False, False)

    def test_identity(self):
        assert M.ppt_flags([1 / 8] * 8) == (True, True, True)

    def test_against_explicit_partial_transpose(self):
        rng = np.random.default_rng(5)
        for _ in range(1000):
            lam = M.sample_simplex(8, rng)
            assert M.ppt_flags(lam) == M.ppt_flags_explicit(lam)

    def test_explicit_path_uses_real_state(self):
        lam = M.sample_simplex(8, np.random.default_rng(6))
        rho = M.mermin_diagonal_state(lam)
        flags = tuple(Q.is_ppt(rho, k, tol=1e-12) for k in range(3))
        assert flags == M.ppt_flags(lam)

    @pytest.mark.parametrize(
        "x,expected",
        [(0.15, "bound_local"), (0.3, "distillable_local"), (0.9, "distillable_nonlocal")],
    )
    def test_werner_categories(self, x, expected):
        assert M.classify(M.werner3_spectrum(x)).category == expected

    def test_reports(self):
        ghz = M.classify(GHZ_SPEC)
        assert (ghz.category, ghz.distillable, ghz.mermin_value) == ("distillable_nonlocal", True, 4.0)
        mixed = M.classify([1 / 8] * 8)
        assert (mixed.category, mixed.ppt_flags) == ("bound_local", (True, True, True))


class TestSampling:
    def test_mean_and_sum(self):
        x = M.sample_simplex(8, np.random.default_rng(7), size=100_000)
        assert np.allclose(x.sum(axis=1), 1, atol=1e-12)
        assert np.all(np.abs(x.mean(axis=0) - 1 / 8) < 0.002)

    def test_against_rejection_sampler(self):
        rng = np.random.default_rng(8)
        fast = (M.sample_simplex(8, rng, size=100_000).max(axis=1) > 0.5).mean()
        # rejection oracle: uniform points of the unit 7-cube kept when their sum is at most one
        kept = []
        while sum(len(k) for k in kept) < 4000:
            u = rng.uniform(size=(1_000_000, 7))
            u = u[u.sum(axis=1) <= 1]
            kept.append(np.concatenate([u, 1 - u.sum(axis=1, keepdims=True)], axis=1))
        slow = (np.concatenate(kept).max(axis=1) > 0.5).mean()
        assert abs(fast - slow) < 0.01

    def test_dim_check(self):
        with pytest.raises(OutOfRange):
            M.sample_simplex(1, np.random.default_rng(0))


class TestSurvey:
    def test_small_survey_is_consistent(self):
        s = M.survey(200_000, seed=1, verify_ppt=True)
        assert s.category_probs.sum() == pytest.approx(1.0, abs=1e-9)
        assert np.sum(s.histogram * np.diff(s.bin_edges)) == pytest.approx(1.0, abs=1e-6)
        assert s.category_counts[3] == 0

    def test_reproducible_and_worker_independent(self):
        a = M.survey(120_000, seed=9, bins=50)
        b = M.survey(120_000, seed=9, bins=50, workers=3)
        assert a.category_counts == b.category_counts
        assert np.array_equal(a.bin_counts, b.bin_counts)

    def test_seed_matters(self):
        assert M.survey(1000, seed=1).category_counts != M.survey(1000, seed=2).category_counts

    def test_argument_checks(self):
        with pytest.raises(OutOfRange):
            M.survey(0, seed=1)
        with pytest.raises(OutOfRange):
            M.survey(10, seed=1, bins=0)
