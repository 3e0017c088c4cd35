import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chua_link.crypto import BitStream, DigitizerConfig, digitize, keystream_stats, xor_stream
from chua_link.dynamics import ChuaField
from chua_link.errors import AlignmentError, DomainError
from chua_link.solver import SimConfig, Trajectory, integrate


def const_traj(values, dt=1e-6, cols=("va", "vb", "il")):
    v = np.asarray(values, dtype=float)
    return Trajectory(0.0, dt, np.column_stack([v, v, v]), cols)


def bits(seq, t0=0.0, dt=1.0):
    return BitStream(t0, dt, np.array(seq, dtype=np.uint8))


class TestDigitize:
    def test_all_ones(self):
        assert digitize(const_traj(np.ones(50))).bits.tolist() == [1] * 50

    def test_tie_is_zero(self):
        out = digitize(const_traj([0.25, 0.25]), DigitizerConfig(threshold=0.25))
        assert out.bits.tolist() == [0, 0]

    def test_decimation(self):
        tr = const_traj(np.arange(10) - 4.5)
        out = digitize(tr, DigitizerConfig(decimation=3))
        assert out.bits.tolist() == [0, 0, 1, 1]
        assert out.bit_dt == pytest.approx(3e-6)

    def test_sample_rate(self):
        tr = const_traj(np.arange(12) - 5.5, dt=1e-6)
        out = digitize(tr, DigitizerConfig(sample_rate=250e3, decimation=2))
        assert out.bit_dt == pytest.approx(8e-6)
        assert len(out) == 2

    def test_sample_rate_must_divide_grid(self):
        with pytest.raises(DomainError):
            digitize(const_traj(np.ones(10)), DigitizerConfig(sample_rate=3e5))

    def test_missing_source(self):
        tr = const_traj(np.ones(5), cols=("a", "b", "c"))
        with pytest.raises(DomainError):
            digitize(tr)

    def test_chaotic_balance(self, params):
        # 1e6 samples; a long dt/10 oracle run gave balance 0.486-0.507
        cfg = SimConfig(duration=0.005 + 5e-7 * (1e6 - 1), transient_cut=0.005)
        ks = digitize(integrate(ChuaField(params), [0.1, 0, 0], cfg))
        assert len(ks) == 1_000_000
        assert 0.45 <= keystream_stats(ks).balance <= 0.55

    def test_deterministic(self, params):
        cfg = SimConfig(duration=0.01, transient_cut=0)
        a = digitize(integrate(ChuaField(params), [0.1, 0, 0], cfg))
        b = digitize(integrate(ChuaField(params), [0.1, 0, 0], cfg))
        assert np.array_equal(a.bits, b.bits)


class TestXor:
    def test_truth_table(self):
        assert xor_stream(bits([1, 0, 1, 0]), bits([1, 1, 0, 0])).bits.tolist() == [0, 1, 1, 0]

    def test_zero_key(self):
        m = bits([1, 0, 0, 1, 1])
        assert np.array_equal(xor_stream(m, bits([0] * 5)).bits, m.bits)

    @given(st.lists(st.tuples(st.booleans(), st.booleans()), min_size=1, max_size=200))
    def test_involution(self, pairs):
        m = bits([a for a, _ in pairs])
        k = bits([b for _, b in pairs])
        assert np.array_equal(xor_stream(xor_stream(m, k), k).bits, m.bits)

    def test_timing_preserved(self):
        out = xor_stream(bits([1, 0], t0=2.0, dt=0.5), bits([0, 0], t0=2.0, dt=0.5))
        assert (out.t0, out.bit_dt) == (2.0, 0.5)

    @pytest.mark.parametrize("key", [bits([1, 0, 1]), bits([1, 0], dt=2.0), bits([1, 0], t0=1.0)])
    def test_misaligned(self, key):
        with pytest.raises(AlignmentError):
            xor_stream(bits([1, 0]), key)


class TestStats:
    def test_alternating(self):
        s = keystream_stats(bits([0, 1] * 100))
        assert s.balance == 0.5
        assert s.serial_corr == pytest.approx(-1.0)
        assert s.runs_z > 0  # far too many runs

    def test_all_ones_degenerate(self):
        s = keystream_stats(bits([1] * 200))
        assert s.degenerate and s.balance == 1.0 and math.isnan(s.runs_z)

    def test_random_bits(self):
        rng = np.random.default_rng(0)
        s = keystream_stats(bits(rng.integers(0, 2, 100_000)))
        assert abs(s.runs_z) < 4
        assert abs(s.serial_corr) < 0.02
        assert s.length == 100_000

    def test_runs_z_matches_direct_count(self):
        seq = [1, 1, 0, 1, 0, 0, 0, 1] * 20
        n, p = len(seq), np.mean(seq)
        runs = 1 + sum(a != b for a, b in zip(seq, seq[1:]))
        z = (runs - 2 * n * p * (1 - p) - 1) / (2 * math.sqrt(2 * n) * p * (1 - p))
        assert keystream_stats(bits(seq)).runs_z == pytest.approx(z)

    def test_too_short(self):
        with pytest.raises(DomainError):
            keystream_stats(bits([0, 1] * 10))
