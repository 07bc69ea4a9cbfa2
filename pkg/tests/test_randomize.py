import subprocess
import sys

import numpy as np
import pytest
import scipy.stats

from oppsched import RandSource, draw_option, slot_uniform, slot_uniforms
from oppsched.errors import InputError
from oppsched.randomize import bit_positions, cantor_pair, uniform_across_seeds

# Regression constants: computed once with the pure-int reference
# implementation below (seed 42) and frozen.
SEED42_U1 = 0.3689971351981006
SEED42_U2 = 0.30287761549313785

_M64 = (1 << 64) - 1


def ref_word(seed, j):
    """Pure-int reference for the counter-based word stream."""
    z = (seed + ((j + 1) * 0x9E3779B97F4A7C15 & _M64)) & _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def ref_uniform(seed, k, depth=53):
    def bit(i):
        return (ref_word(seed, i >> 6) >> (i & 63)) & 1

    def pair(k, i):
        t = k + i
        return t * (t + 1) // 2 + i

    return sum(bit(pair(k, i)) * 2.0 ** -(i + 1) for i in range(depth))


class FixedBits(RandSource):
    """Source whose digit stream is a constant, for formula checks."""

    def __init__(self, value: int):
        super().__init__(0)
        object.__setattr__(self, "_value", value)

    def bits(self, positions):
        return np.full(np.asarray(positions).size, float(self._value))


class TestSlotUniform:
    def test_all_zero_stream(self):
        src = FixedBits(0)
        assert slot_uniform(src, 1) == 0.0
        assert slot_uniform(src, 7) == 0.0

    def test_all_one_stream(self):
        src = FixedBits(1)
        expected = 1.0 - 2.0 ** -53
        assert slot_uniform(src, 1) == expected
        assert slot_uniform(src, 3) == expected

    def test_pinned_regression_values(self):
        src = RandSource(42)
        assert slot_uniform(src, 1) == SEED42_U1
        assert slot_uniform(src, 2) == SEED42_U2
        # and the frozen constants still agree with the reference oracle
        assert ref_uniform(42, 1) == SEED42_U1
        assert ref_uniform(42, 2) == SEED42_U2

    def test_matches_reference_on_many_slots(self):
        src = RandSource(987654321)
        for k in (1, 2, 5, 17, 100, 4096):
            assert slot_uniform(src, k) == ref_uniform(987654321, k)

    def test_vectorized_matches_scalar(self):
        src = RandSource(5)
        ks = np.arange(1, 6000, dtype=np.uint64)  # crosses the cached fast path
        vec = slot_uniforms(src, ks)
        sample = [0, 1, 17, 4095, 4096, 5000, 5998]
        for i in sample:
            assert vec[i] == slot_uniform(src, int(ks[i]))

    def test_noncontiguous_slots_match_scalar(self):
        src = RandSource(8)
        ks = np.array([3, 1, 4096, 77, 77, 2], dtype=np.uint64)
        vec = slot_uniforms(src, ks)
        for i, k in enumerate(ks):
            assert vec[i] == slot_uniform(src, int(k))

    def test_rejects_slot_zero(self):
        with pytest.raises(InputError):
            slot_uniform(RandSource(0), 0)

    def test_values_in_unit_interval(self):
        src = RandSource(123)
        us = src.uniforms(1000)
        assert np.all(us >= 0.0) and np.all(us < 1.0)


class TestBitLayout:
    def test_cantor_pairing_formula(self):
        assert int(cantor_pair(np.uint64(3), np.uint64(4))) == 7 * 8 // 2 + 4

    def test_disjoint_positions_first_100_slots(self):
        seen = set()
        for k in range(1, 101):
            pos = set(int(p) for p in bit_positions(k))
            assert len(pos) == 53
            assert not (seen & pos)
            seen |= pos

    def test_determinism_across_processes(self):
        code = (
            "from oppsched import RandSource, slot_uniform;"
            "print(repr([slot_uniform(RandSource(42), k) for k in (1, 2, 3)]))"
        )
        outs = {
            subprocess.run(
                [sys.executable, "-c", code], capture_output=True, text=True, check=True
            ).stdout
            for _ in range(2)
        }
        assert len(outs) == 1
        assert repr(SEED42_U1) in outs.pop()


class TestStatisticalQuality:
    def test_across_seeds_matches_scalar(self):
        seeds = np.array([0, 1, 42, 2**63, 123456789], dtype=np.uint64)
        vec = uniform_across_seeds(seeds, 3)
        for i, t in enumerate(seeds):
            assert vec[i] == RandSource(int(t)).uniform(3)

    def test_chi_square_uniformity(self):
        us = uniform_across_seeds(np.arange(100_000), 1)
        counts = np.histogram(us, bins=32, range=(0.0, 1.0))[0]
        _, p = scipy.stats.chisquare(counts)
        assert p > 0.001

    def test_cross_slot_correlation(self):
        seeds = np.arange(100_000)
        u1 = uniform_across_seeds(seeds, 1)
        u2 = uniform_across_seeds(seeds, 2)
        assert abs(np.corrcoef(u1, u2)[0, 1]) < 0.01

    def test_streams_are_unrelated(self):
        a = RandSource(9).stream("states")
        b = RandSource(9).stream("policy")
        assert a.seed != b.seed
        ua = a.uniforms(5000)
        ub = b.uniforms(5000)
        assert abs(np.corrcoef(ua, ub)[0, 1]) < 0.05


class TestDrawOption:
    def test_degenerate_weights(self):
        for u in (0.0, 0.3, 0.999):
            assert draw_option(u, [1.0, 0.0]) == 0

    def test_halfway_split(self):
        assert draw_option(0.75, [0.5, 0.5]) == 1
        assert draw_option(0.25, [0.5, 0.5]) == 0

    def test_cumulative_thresholds(self):
        assert draw_option(0.49, [0.2, 0.3, 0.5]) == 1
        assert draw_option(0.19, [0.2, 0.3, 0.5]) == 0
        assert draw_option(0.51, [0.2, 0.3, 0.5]) == 2

    def test_boundary_ties_go_low(self):
        assert draw_option(0.5, [0.5, 0.5]) == 0
        assert draw_option(0.2, [0.2, 0.3, 0.5]) == 0

    def test_unnormalized_rejected(self):
        with pytest.raises(InputError):
            draw_option(0.5, [0.5, 0.4])
