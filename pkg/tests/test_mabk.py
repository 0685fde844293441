import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellmix import mabk as K
from bellmix import qstate as Q
from bellmix.chsh import chsh_max_bell_diagonal
from bellmix.errors import BadPartyCount, BadSpectrum, OutOfRange
from bellmix.mermin import canonical_mermin_spectrum, mermin_bound_diagonal, sample_simplex
from bellmix.operators import MABK4, MERMIN, maximize_violation, random_settings

GHZ4_SPEC = [1] + [0] * 15
SQ2 = math.sqrt(2)


class TestBound:
    def test_ghz4(self):
        assert K.mabk_bound_diagonal(GHZ4_SPEC) == pytest.approx(4 * SQ2, abs=1e-12)

    def test_uniform(self):
        assert K.mabk_bound_diagonal([1 / 16] * 16) == 0.0

    def test_bad_spectrum(self):
        with pytest.raises(BadSpectrum):
            K.mabk_bound_diagonal([1 / 8] * 8)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_ceiling(self, seed):
        lam = sample_simplex(16, np.random.default_rng(seed))
        assert K.mabk_bound_diagonal(lam) < 4 * SQ2

    def test_ghz4_optimum_matches(self):
        r = maximize_violation(K.bell4_diagonal_state(GHZ4_SPEC), MABK4, starts=50)
        assert r.value == pytest.approx(4 * SQ2, abs=1e-6)

    def test_optimizer_below_bound(self):
        rng = np.random.default_rng(20)
        for _ in range(10):
            lam = sample_simplex(16, rng)
            opt = maximize_violation(K.bell4_diagonal_state(lam), MABK4).value
            assert opt <= K.mabk_bound_diagonal(lam) + 1e-6


class TestConjecture:
    def test_two_parties(self):
        rng = np.random.default_rng(21)
        for _ in range(50):
            lam = np.sort(rng.dirichlet(np.ones(4)))[::-1]
            pairs = [(lam[0], lam[3]), (lam[1], lam[2])]
            assert K.mabk_conjecture_bound(pairs, 2) == chsh_max_bell_diagonal(lam)

    def test_three_parties(self):
        rng = np.random.default_rng(22)
        for _ in range(50):
            lam = sample_simplex(8, rng)
            pairs = canonical_mermin_spectrum(lam).reshape(4, 2)
            assert K.mabk_conjecture_bound(pairs, 3) == mermin_bound_diagonal(lam)

    def test_four_parties(self):
        lam = np.sort(sample_simplex(16, np.random.default_rng(23)))[::-1]
        assert K.mabk_conjecture_bound(lam.reshape(8, 2), 4) == pytest.approx(K.mabk_bound_diagonal(lam), abs=1e-15)

    def test_five_parties(self):
        pairs = np.zeros((16, 2))
        pairs[0, 0] = 1
        assert K.mabk_conjecture_bound(pairs, 5) == pytest.approx(8.0, abs=1e-12)

    def test_errors(self):
        with pytest.raises(BadPartyCount):
            K.mabk_conjecture_bound([[1, 0]], 1)
        with pytest.raises(BadSpectrum):
            K.mabk_conjecture_bound([[1, 0], [0, 0]], 3)


class TestQsTable:
    def test_against_direct_evaluation(self):
        rng = np.random.default_rng(24)
        basis = Q.ghz_basis(4).vectors
        for _ in range(50):
            v = random_settings(4, rng).vectors[:, int(rng.integers(2))]
            op = Q.kron(*(np.einsum("i,iab->ab", x, Q.PAULIS) for x in v))
            for j in range(8):
                for k, sign in ((0, 1), (1, -1)):
                    b = basis[2 * j + k]
                    assert K.qs_expectation(j, sign, v) == pytest.approx((b.conj() @ op @ b).real, abs=1e-10)


class TestGHZ:
    @pytest.mark.parametrize("p,expected", [(0.5, (1.0, 0.0)), (0.0, (0.5, 0.5)), (0.2, (0.9, 0.1))])
    def test_bell_coeffs(self, p, expected):
        assert K.ghz_bell_coeffs(K.GeneralizedGHZ(3, p)) == pytest.approx(expected, abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0, 1))
    def test_coefficient_identity(self, p):
        g = K.GeneralizedGHZ(4, p)
        l1, l2 = K.ghz_bell_coeffs(g)
        assert l1 + l2 == pytest.approx(1, abs=1e-12)
        assert l1 - l2 == pytest.approx(g.sin2alpha, abs=1e-12)
        assert g.sin2alpha == pytest.approx(math.sin(2 * g.alpha), abs=1e-12)

    def test_bell_coeffs_match_state(self):
        g = K.GeneralizedGHZ(4, 0.3)
        rho = Q.change_basis(Q.pure_state(g.vector()), Q.ghz_basis(4))
        assert (rho.mat[0, 0].real, rho.mat[1, 1].real) == pytest.approx(K.ghz_bell_coeffs(g), abs=1e-12)

    @pytest.mark.parametrize("n,p,expected", [(4, 0.5, 4 * SQ2), (3, 0.0, 0.0), (3, 0.5, 4.0), (7, 0.0, 0.0)])
    def test_leading(self, n, p, expected):
        assert K.ghz_violation_leading(K.GeneralizedGHZ(n, p)) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("n,p", [(3, 0.5), (3, 0.2), (4, 0.5), (4, 0.2)])
    def test_leading_never_exceeds_optimum(self, n, p):
        g = K.GeneralizedGHZ(n, p)
        family = MERMIN if n == 3 else MABK4
        opt = maximize_violation(Q.pure_state(g.vector()), family, starts=60).value
        assert opt >= K.ghz_violation_leading(g) - 1e-6

    @pytest.mark.parametrize("n,expected", [(3, 0.5), (4, 1 / math.sqrt(8)), (10, 1 / math.sqrt(512))])
    def test_threshold(self, n, expected):
        assert K.ghz_violation_threshold(n) == pytest.approx(expected, abs=1e-12)
        g = K.GeneralizedGHZ(n, K.p_at_threshold(n))
        assert K.ghz_violation_leading(g) == pytest.approx(K.lvm_bound(n), abs=1e-12)

    def test_threshold_needs_three_parties(self):
        with pytest.raises(BadPartyCount):
            K.ghz_violation_threshold(2)

    def test_alpha_at_threshold_n3(self):
        # sin 2 alpha is symmetric under p -> 1 - p; the p > 1/2 root has alpha = 15 degrees
        g = K.GeneralizedGHZ(3, 1 - K.p_at_threshold(3))
        assert math.degrees(g.alpha) == pytest.approx(15.0, abs=1e-9)
        assert g.sin2alpha == pytest.approx(0.5, abs=1e-12)

    def test_domain(self):
        with pytest.raises(OutOfRange):
            K.GeneralizedGHZ(3, 1.5)
        with pytest.raises(BadPartyCount):
            K.GeneralizedGHZ(1, 0.5)

    @pytest.mark.parametrize("n", [3, 4, 6])
    def test_sweep_flips_at_threshold(self, n):
        rows = K.ghz_sweep(n, 0.0, 0.5, 400)
        assert rows[0].violates is False
        t = K.ghz_violation_threshold(n)
        for r in rows:
            assert r.violates == (r.sin2alpha > t + 1e-12) or abs(r.sin2alpha - t) < 1e-12
