"""
Tests for zero-forcing precoding, rates and the MRT upper bound
"""

import numpy as np
import pytest

from src.core.errors import DomainError, RankDeficiencyError
from src.physics.beamforming import (
    ChannelSet,
    inv_wnorm_closed,
    mrt_power_allocation,
    mrt_upper_bound,
    single_pair_rate_bound,
    user_rate,
    zf_beamformer,
    zf_power,
    zf_single,
)
from src.physics.channel import array_response, path_gain
from src.physics.correlation import corr_exact
from src.physics.geometry import ArrayGeometry

P = 100.0
NOISE = 1e-12
LAMBDA = 0.03


def _gaussian(rng, shape, scale=1e-5):
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


# ============= CHANNEL SET =============


class TestChannelSet:
    def test_vector_user_becomes_column(self, rng):
        ch = ChannelSet(_gaussian(rng, 8), np.zeros((8, 0)))
        assert ch.num_users == 1
        assert ch.num_eves == 0
        assert ch.stacked.shape == (8, 1)

    def test_zero_column_rejected(self, rng):
        H = _gaussian(rng, (8, 2))
        H[:, 1] = 0.0
        with pytest.raises(ValueError, match="all-zero"):
            ChannelSet(H, _gaussian(rng, (8, 1)))

    def test_row_mismatch(self, rng):
        with pytest.raises(ValueError):
            ChannelSet(_gaussian(rng, (8, 1)), _gaussian(rng, (6, 1)))


# ============= ZERO FORCING =============


class TestZeroForcing:
    """ZF beamformer with eavesdropper nulling and equal user gains"""

    def test_leakage_and_fairness(self, rng):
        """Eavesdropper leakage vanishes and every user sees the same effective gain"""
        for _ in range(100):
            ch = ChannelSet(_gaussian(rng, (64, 10)), _gaussian(rng, (64, 10)))
            out = zf_beamformer(ch, P, NOISE)
            g_max = np.max(np.linalg.norm(ch.G, axis=0))
            assert np.max(np.abs(ch.G.conj().T @ out.W)) < 1e-9 * np.sqrt(P) * g_max
            effective = ch.H.conj().T @ out.W
            diag = np.diag(effective)
            np.testing.assert_allclose(diag, diag[0], rtol=1e-9)
            off = effective - np.diag(diag)
            assert np.max(np.abs(off)) < 1e-9 * np.abs(diag[0])

    def test_total_power(self, rng):
        ch = ChannelSet(_gaussian(rng, (16, 3)), _gaussian(rng, (16, 2)))
        out = zf_beamformer(ch, P, NOISE)
        assert np.sum(np.abs(out.W) ** 2) == pytest.approx(P)
        assert out.rate == pytest.approx(user_rate(out.wbar_fro_sq, P, NOISE))

    def test_more_channels_than_antennas(self, rng):
        with pytest.raises(RankDeficiencyError):
            zf_beamformer(ChannelSet(_gaussian(rng, (4, 3)), _gaussian(rng, (4, 2))), P, NOISE)

    def test_duplicate_channel_is_rank_deficient(self, rng):
        h = _gaussian(rng, (8, 1))
        with pytest.raises(RankDeficiencyError) as exc_info:
            zf_beamformer(ChannelSet(h, h.copy()), P, NOISE)
        assert exc_info.value.condition > 1e12

    def test_batched_power_matches_beamformer(self, rng):
        """Trace of the leading block of the inverse Gram matrix equals ‖W̄‖_F²"""
        channels = [ChannelSet(_gaussian(rng, (16, 3)), _gaussian(rng, (16, 4))) for _ in range(3)]
        grams = np.stack([c.stacked.conj().T @ c.stacked for c in channels])
        wbar, deficient, _ = zf_power(grams, 3)
        assert not deficient.any()
        for value, ch in zip(wbar, channels):
            assert value == pytest.approx(zf_beamformer(ch, P, NOISE).wbar_fro_sq, rel=1e-10)

    def test_batched_flags_deficient(self, rng):
        h = _gaussian(rng, (8, 1))
        A = np.hstack([h, h])
        wbar, deficient, cond = zf_power((A.conj().T @ A)[None], 1)
        assert deficient[0]
        assert np.isinf(wbar[0])


class TestUserRate:
    def test_single_user_example(self):
        """K = 1, I = 0, MN = 64, |α| = 2.3873e-5 gives 21.80 bps/Hz"""
        alpha = 2.3873e-5
        assert user_rate(1.0 / (alpha**2 * 64), P, NOISE) == pytest.approx(21.80, abs=0.01)

    def test_infinite_norm_is_zero_rate(self):
        assert user_rate(float("inf"), P, NOISE) == 0.0

    def test_vectorized(self):
        rates = user_rate(np.array([1e10, np.inf]), P, NOISE)
        assert rates.shape == (2,)
        assert rates[1] == 0.0


# ============= SINGLE PAIR =============


class TestSinglePair:
    """Closed-form 1/‖w̄‖² for one user against one eavesdropper"""

    def test_closed_form_identity(self, rng):
        """zf_single's 1/‖w̄‖² equals |α|²MN − |α|² corr²/MN on random geometries"""
        for trial in range(100):
            M = (1, 2, 4)[trial % 3]
            tips = rng.standard_normal((M, 3))
            tips = 4.0 * tips / np.linalg.norm(tips, axis=1, keepdims=True)
            elements = ArrayGeometry(tips, 8, 4.0, 0.0).elements()
            r_u = rng.uniform(100, 1000) * _direction(rng)
            r_e = rng.uniform(100, 1000) * _direction(rng)
            alpha = path_gain(r_u, LAMBDA)
            h = alpha * array_response(elements, r_u, LAMBDA)
            g = path_gain(r_e, LAMBDA) * array_response(elements, r_e, LAMBDA)
            _, inv_norm_sq = zf_single(h, g)
            corr = corr_exact(elements, r_u, r_e, LAMBDA)
            expected = inv_wnorm_closed(alpha, 8 * M, corr)
            assert inv_norm_sq == pytest.approx(expected, rel=1e-10)

    def test_colinear_channels(self, rng):
        h = _gaussian(rng, 8)
        w, inv_norm_sq = zf_single(h, 2j * h)
        assert inv_norm_sq == 0.0
        assert not np.any(w)

    def test_orthogonal_eavesdropper(self):
        h = np.array([1.0, 1.0], dtype=complex)
        g = np.array([1.0, -1.0], dtype=complex)
        w, inv_norm_sq = zf_single(h, g)
        assert inv_norm_sq == pytest.approx(2.0)
        assert abs(np.vdot(g, w)) < 1e-15

    def test_inv_wnorm_substitution(self):
        """MN = 8, |α| = 1, corr = 4 gives 8 − 16/8 = 6"""
        assert inv_wnorm_closed(1.0, 8, 4.0) == pytest.approx(6.0)
        assert inv_wnorm_closed(1.0, 8, 0.0) == pytest.approx(8.0)
        assert inv_wnorm_closed(1.0, 8, 8.0) == 0.0

    def test_inv_wnorm_domain(self):
        with pytest.raises(DomainError):
            inv_wnorm_closed(1.0, 8, 9.0)
        with pytest.raises(DomainError):
            inv_wnorm_closed(1.0, 8, -0.5)

    def test_rate_bound(self):
        alpha = 2.3873e-5
        assert single_pair_rate_bound(alpha, 64, P, NOISE) == pytest.approx(21.80, abs=0.01)


def _direction(rng):
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v)


# ============= MRT BOUND =============


class TestMRTBound:
    def test_single_user(self, rng):
        h = _gaussian(rng, 16)
        expected = np.log2(1.0 + P * np.sum(np.abs(h) ** 2) / NOISE)
        assert mrt_upper_bound(h, P, NOISE) == pytest.approx(expected)

    def test_power_allocation_equalizes(self, rng):
        H = _gaussian(rng, (16, 4))
        powers = mrt_power_allocation(H, P)
        assert powers.sum() == pytest.approx(P)
        gains = powers * np.sum(np.abs(H) ** 2, axis=0)
        np.testing.assert_allclose(gains, gains[0])

    def test_bound_dominates_zf(self, rng):
        ch = ChannelSet(_gaussian(rng, (16, 3)), _gaussian(rng, (16, 3)))
        assert mrt_upper_bound(ch.H, P, NOISE) >= zf_beamformer(ch, P, NOISE).rate

    def test_no_users(self):
        assert mrt_upper_bound(np.zeros((8, 0)), P, NOISE) == 0.0
