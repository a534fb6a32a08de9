import numpy as np
import pytest

from cfmmwave import beamform
from cfmmwave.config import ConfigError


def rng(seed=0):
    return np.random.default_rng(seed)


def crandn(gen, *shape):
    return (gen.standard_normal(shape) + 1j * gen.standard_normal(shape)) / np.sqrt(2)


class TestMsBeamformer:
    def test_default_grouping(self):
        L = beamform.ms_beamformer(8, 2)
        assert L.shape == (8, 2)
        assert np.array_equal(L[:4], np.tile([1.0, 0.0], (4, 1)))
        assert np.array_equal(L[4:], np.tile([0.0, 1.0], (4, 1)))

    def test_gram_is_scaled_identity(self):
        L = beamform.ms_beamformer(8, 2)
        assert np.array_equal(L.T @ L, 4.0 * np.eye(2))

    def test_degenerate_grouping_is_identity(self):
        assert np.array_equal(beamform.ms_beamformer(4, 4), np.eye(4))

    def test_rejects_non_divisible(self):
        with pytest.raises(ConfigError):
            beamform.ms_beamformer(8, 3)


class TestUcSelect:
    def test_select_all_matches_cellfree(self):
        gen = rng(1)
        eff = crandn(gen, 4, 6, 16, 2)
        assoc = beamform.uc_select(eff, 4)
        assert np.array_equal(assoc.mask, beamform.AssociationSets.cellfree(6, 4).mask)

    def test_largest_norms_win(self):
        norms = np.array([[5.0], [3.0], [1.0]])  # (K=3, M=1)
        assoc = beamform.uc_select(norms, 2)
        assert assoc.ap_serves(0).tolist() == [0, 1]

    def test_ties_break_to_lowest_index(self):
        norms = np.array([[2.0], [2.0], [2.0]])
        assoc = beamform.uc_select(norms, 1)
        assert assoc.ap_serves(0).tolist() == [0]

    def test_scale_invariance(self):
        gen = rng(2)
        norms = gen.uniform(0.1, 5.0, (6, 9))
        a = beamform.uc_select(norms, 2)
        b = beamform.uc_select(norms * 17.3, 2)
        assert np.array_equal(a.mask, b.mask)

    def test_set_sizes_and_inversion(self):
        gen = rng(3)
        assoc = beamform.uc_select(gen.uniform(0, 1, (5, 7)), 3)
        assert np.all(assoc.mask.sum(axis=1) == 3)
        for k in range(5):
            for m in assoc.ms_served_by(k):
                assert k in assoc.ap_serves(m)

    def test_rejects_bad_counts(self):
        with pytest.raises(ConfigError):
            beamform.uc_select(np.ones((3, 4)), 4)
        with pytest.raises(ConfigError):
            beamform.uc_select(np.ones((3, 4)), 0)


class TestZfPrecoder:
    def test_single_user_identity(self):
        gen = rng(4)
        s = crandn(gen, 1, 16, 2)
        q = beamform.zf_precoder(s)
        assert np.max(np.abs(s[0].conj().T @ q[0] - np.eye(2))) < 1e-10

    def test_cross_nulling_underloaded(self):
        # 5 users x 2 streams fit in 16 antennas: exact identity plus nulls.
        gen = rng(5)
        s = crandn(gen, 5, 16, 2)
        q = beamform.zf_precoder(s)
        for j in range(5):
            for k in range(5):
                prod = s[j].conj().T @ q[k]
                target = np.eye(2) if j == k else np.zeros((2, 2))
                assert np.max(np.abs(prod - target)) < 1e-9

    def test_overloaded_matches_least_squares_oracle(self):
        # 3 users x 2 streams through 4 antennas cannot be inverted; the
        # result must match the minimum-norm least-squares solution of
        # G^H Q = I computed by an independent solver.
        gen = rng(6)
        s = crandn(gen, 3, 4, 2)
        q = beamform.zf_precoder(s)
        g = s.transpose(1, 0, 2).reshape(4, 6)
        lstsq = np.linalg.lstsq(g.conj().T, np.eye(6), rcond=None)[0]
        mine = q.transpose(1, 0, 2).reshape(4, 6)
        assert np.max(np.abs(mine - lstsq)) < 1e-10
        res = np.linalg.norm(g.conj().T @ mine - np.eye(6))
        assert res > 0.1  # genuinely infeasible

    def test_residual_monotone_in_set_size(self):
        gen = rng(7)
        s = crandn(gen, 12, 8, 2)
        prev = 0.0
        for count in (4, 6, 8, 12):
            sub = s[:count]
            q = beamform.zf_precoder(sub)
            g = sub.transpose(1, 0, 2).reshape(8, count * 2)
            res = np.linalg.norm(g.conj().T @ q.transpose(1, 0, 2).reshape(8, -1)
                                 - np.eye(count * 2))
            assert res >= prev - 1e-9
            prev = res

    def test_zero_channels_zero_precoders(self):
        q = beamform.zf_precoder(np.zeros((2, 8, 2), dtype=complex))
        assert not np.any(q)


class TestHybridDecompose:
    def test_exact_factorization_recovered(self):
        # A precoder set already of the form F D (first user's digital
        # matrix diagonal) is a zero-residual fixed point, and the analog
        # matrix is recovered up to a per-column phase.
        gen = rng(8)
        n_ap, p = 16, 2
        f_true = np.exp(1j * gen.uniform(0, 2 * np.pi, (n_ap, p))) / np.sqrt(n_ap)
        d = crandn(gen, 3, p, p)
        d[0] = np.diag(1.0 + gen.uniform(0.5, 1.0, p))  # diagonal, nonzero
        q = f_true[None] @ d
        res = beamform.hybrid_decompose(q)
        assert res.objective < 1e-10
        assert res.converged
        align = np.abs(np.sum(res.analog.conj() * f_true, axis=0))
        assert np.allclose(align, 1.0, atol=1e-8)

    def test_constant_modulus_entries(self):
        gen = rng(9)
        res = beamform.hybrid_decompose(crandn(gen, 4, 16, 2))
        assert np.allclose(np.abs(res.analog), 1 / np.sqrt(16), atol=1e-12)

    def test_objective_history_non_increasing(self):
        gen = rng(10)
        for _ in range(100):
            q = crandn(gen, gen.integers(1, 6), 16, 2)
            res = beamform.hybrid_decompose(q)
            hist = np.array(res.history)
            assert np.all(np.diff(hist) <= 0)
            assert res.objective == hist[-1]
            assert hist[-1] <= hist[0]

    def test_scalar_polar_decomposition(self):
        q = np.array([[[1.5 - 2.0j]]])
        res = beamform.hybrid_decompose(q)
        assert abs(res.analog[0, 0] - np.exp(1j * np.angle(1.5 - 2.0j))) < 1e-12
        assert abs(res.digital[0, 0, 0] - abs(1.5 - 2.0j)) < 1e-12
        assert res.objective < 1e-20

    def test_reconstruction_shape(self):
        gen = rng(11)
        res = beamform.hybrid_decompose(crandn(gen, 3, 8, 2))
        assert res.reconstructed().shape == (3, 8, 2)


class TestPowerCoefficients:
    def test_downlink_arithmetic(self):
        # One AP, 5 served users, unit symbols: P_T/(K * tr(QQ^H)).
        q = np.zeros((1, 5, 8, 2), dtype=complex)
        q[0, :, 0, 0] = 1.0
        q[0, :, 1, 1] = 1.0  # trace 2 per user
        assoc = beamform.AssociationSets.cellfree(1, 5)
        eta = beamform.power_coefficients_dl(q, assoc, 1.0)
        assert np.allclose(eta, 0.1)

    def test_uplink_coefficient(self):
        L = beamform.ms_beamformer(8, 2)
        # tr(L^H L) = N_MS, so the coefficient is P/N_MS.
        assert beamform.power_coefficients_ul(L, 1.0) == pytest.approx(1.0 / 8.0, abs=1e-15)

    def test_per_ap_power_conservation(self):
        gen = rng(12)
        for _ in range(10):
            mask = gen.random((6, 5)) < 0.6
            mask[:, 0] = True  # keep at least one served user per AP
            assoc = beamform.AssociationSets(mask=mask)
            q = np.where(mask[:, :, None, None], crandn(gen, 6, 5, 8, 2), 0.0)
            eta = beamform.power_coefficients_dl(q, assoc, 2.5)
            radiated = np.sum(eta * np.sum(np.abs(q) ** 2, axis=(2, 3)), axis=1)
            assert np.allclose(radiated, 2.5, rtol=1e-10)

    def test_unserved_pairs_zero(self):
        gen = rng(13)
        mask = np.zeros((3, 4), dtype=bool)
        mask[:, 1] = True
        assoc = beamform.AssociationSets(mask=mask)
        q = crandn(gen, 3, 4, 8, 2)
        eta = beamform.power_coefficients_dl(q, assoc, 1.0)
        assert not np.any(eta[:, [0, 2, 3]])
        assert np.all(eta[:, 1] > 0)

    def test_zero_trace_pair_dropped(self):
        mask = np.ones((1, 2), dtype=bool)
        q = np.zeros((1, 2, 4, 2), dtype=complex)
        q[0, 0, 0, 0] = 1.0
        eta = beamform.power_coefficients_dl(q, beamform.AssociationSets(mask=mask), 1.0)
        assert eta[0, 1] == 0.0 and eta[0, 0] > 0
