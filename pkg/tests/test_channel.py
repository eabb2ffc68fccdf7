import math

import numpy as np
import pytest
from scipy import stats

from cort import BscChannel, error_weight_distribution, transmit


class TestBscChannel:
    def test_llr_scale(self):
        ch = BscChannel(0.03)
        assert math.isclose(ch.llr_scale, math.log2(0.97 / 0.03), rel_tol=1e-15)

    @pytest.mark.parametrize("p", [0.0, 0.5, 0.7, -0.1])
    def test_invalid_p_rejected(self, p):
        with pytest.raises(ValueError):
            BscChannel(p)

    def test_likelihoods(self):
        ch = BscChannel(0.1)
        assert ch.likelihood(0, 0) == 0.9
        assert ch.likelihood(0, 1) == 0.1


class TestTransmit:
    def test_zero_input_exposes_error_pattern(self):
        ch = BscChannel(0.2)
        x = np.zeros(64, dtype=np.uint8)
        y = transmit(ch, x, 5)
        ones = np.ones(64, dtype=np.uint8)
        # same seed, complementary input: flips land in the same places
        assert np.array_equal(transmit(ch, ones, 5) ^ ones, y)

    def test_deterministic(self):
        ch = BscChannel(0.1)
        x = np.arange(32) % 2
        assert np.array_equal(transmit(ch, x, 7), transmit(ch, x, 7))
        assert not np.array_equal(transmit(ch, x, 7), transmit(ch, x, 8))

    def test_flip_rate(self):
        ch = BscChannel(0.03)
        y = transmit(ch, np.zeros(1_000_000, dtype=np.uint8), 123)
        rate = y.mean()
        assert 0.029 <= rate <= 0.031

    def test_adjacent_flips_independent(self):
        # contingency table of (e_t, e_{t+1}) pairs should show no association
        ch = BscChannel(0.2)
        e = transmit(ch, np.zeros(200_000, dtype=np.uint8), 99)
        pairs = np.stack([e[:-1:2], e[1::2]], axis=1)
        table = np.zeros((2, 2))
        for a in (0, 1):
            for b in (0, 1):
                table[a, b] = np.sum((pairs[:, 0] == a) & (pairs[:, 1] == b))
        _, pvalue, _, _ = stats.chi2_contingency(table)
        assert pvalue > 1e-4

    def test_causal_factorization(self):
        # memoryless likelihood factorizes over symbols
        ch = BscChannel(0.12)
        rng = np.random.default_rng(4)
        for _ in range(25):
            n = rng.integers(1, 10)
            x = rng.integers(0, 2, n)
            y = rng.integers(0, 2, n)
            product = 1.0
            for t in range(n):
                product *= ch.likelihood(x[t], y[t])
            assert math.isclose(product, ch.sequence_likelihood(x, y), rel_tol=1e-12)


class TestErrorWeightDistribution:
    def test_single_use(self):
        dist = error_weight_distribution(BscChannel(0.03), 1)
        assert np.allclose(dist, [0.97, 0.03], atol=1e-15)

    def test_symmetric_half(self):
        dist = error_weight_distribution(BscChannel(0.499999), 2)
        assert np.allclose(dist, [0.25, 0.5, 0.25], atol=1e-5)

    def test_large_n_mode_and_mass(self):
        dist = error_weight_distribution(BscChannel(0.02), 128)
        assert int(np.argmax(dist)) == 2
        assert abs(dist.sum() - 1.0) < 1e-12

    def test_matches_direct_binomial(self):
        dist = error_weight_distribution(BscChannel(0.1), 20)
        direct = [math.comb(20, w) * 0.1 ** w * 0.9 ** (20 - w) for w in range(21)]
        assert np.allclose(dist, direct, rtol=1e-12)

    def test_invalid_n(self):
        with pytest.raises(ValueError):
            error_weight_distribution(BscChannel(0.1), 0)
