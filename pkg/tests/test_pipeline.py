import math
from dataclasses import replace

import numpy as np
import pytest

from chua_link.crypto import DigitizerConfig, digitize, keystream_stats, xor_stream
from chua_link.dynamics import ChuaState
from chua_link.errors import ChuaLinkError, DomainError
from chua_link.pipeline import (
    SystemConfig, apply_awgn, hold, levels, mismatch_experiment, run_end_to_end, slice_levels,
)
from chua_link.signal import AnalogTrace, MessageParams, bit_error_rate, message_trace, rc_lowpass, threshold_decode
from chua_link.solver import SimConfig
from chua_link.sync import CouplingConfig, PairState, simulate_pair, split_pair, sync_error

SHORT = SimConfig(duration=0.04, transient_cut=0.005)
PERFECT = PairState(ChuaState(0.1, 0.0, 0.0), ChuaState(0.1, 0.0, 0.0))


@pytest.fixture(scope="module")
def default_report():
    return run_end_to_end(SystemConfig())


class TestAwgn:
    def test_zero_sigma_identity(self):
        tr = AnalogTrace(0.0, 1.0, np.linspace(-1, 1, 50))
        assert apply_awgn(tr, 0.0, 1).samples.tobytes() == tr.samples.tobytes()

    def test_std(self):
        out = apply_awgn(AnalogTrace(0.0, 1.0, np.zeros(10 ** 6)), 1.0, 11)
        assert 0.99 <= out.samples.std() <= 1.01

    def test_seeded(self):
        tr = AnalogTrace(0.0, 1.0, np.zeros(100))
        assert np.array_equal(apply_awgn(tr, 0.3, 5).samples, apply_awgn(tr, 0.3, 5).samples)

    def test_negative_sigma(self):
        with pytest.raises(DomainError):
            apply_awgn(AnalogTrace(0.0, 1.0, np.zeros(3)), -1.0, 0)


class TestEndToEnd:
    @pytest.mark.parametrize("payload", ["", "0", "1101000110"])
    def test_perfect_sync_exact(self, payload):
        cfg = SystemConfig(init=PERFECT, sim=SHORT, message=MessageParams(payload=payload))
        rep = run_end_to_end(cfg)
        assert rep.message_ber == 0.0 and rep.raw_ber == 0.0
        assert rep.n_message_bits == math.floor(0.035 * 6000)

    def test_default_recovers(self, default_report):
        assert default_report.n_message_bits >= 1000
        assert default_report.message_ber <= 1e-3

    def test_uncoupled_unreadable(self):
        rep = run_end_to_end(SystemConfig(coupling=CouplingConfig(r_c=math.inf)))
        assert 0.45 <= rep.message_ber <= 0.55

    def test_traces(self, default_report):
        tr = default_report.traces
        assert set(tr) == {"initial", "encrypted", "decrypted"}
        assert len({len(t) for t in tr.values()}) == 1
        assert set(np.unique(tr["encrypted"].samples)) <= {0.0, 2.5}

    def test_manual_composition(self):
        cfg = SystemConfig(sim=SHORT, message=MessageParams(payload="1011"))
        rep = run_end_to_end(cfg)

        traj = simulate_pair(cfg.init, cfg.tx_params, cfg.rx_params, cfg.coupling, cfg.sim)
        tx, rx = split_pair(traj)
        k_tx, k_rx = digitize(tx, cfg.digitizer), digitize(rx, cfg.digitizer)
        msg = message_trace(cfg.message, traj.t0, traj.sample_dt, len(traj))
        plain = slice_levels(msg, cfg.message)
        cipher = levels(xor_stream(plain, k_tx), cfg.message)
        recovered = xor_stream(slice_levels(cipher, cfg.message), k_rx)
        out = rc_lowpass(levels(recovered, cfg.message), cfg.filter)
        ber = bit_error_rate(threshold_decode(msg, cfg.message), threshold_decode(out, cfg.message))

        assert rep.sync == sync_error(traj, traj.t0)
        assert rep.keystream == keystream_stats(k_tx)
        assert rep.raw_ber == bit_error_rate(plain, recovered)
        assert rep.message_ber == ber
        assert np.array_equal(rep.traces["decrypted"].samples, out.samples)

    def test_seeded_noisy_runs_reproduce(self):
        cfg = SystemConfig(sim=SHORT, channel_noise_sigma=0.8, rng_seed=9)
        a, b = run_end_to_end(cfg), run_end_to_end(cfg)
        assert a == b
        assert np.array_equal(a.traces["decrypted"].samples, b.traces["decrypted"].samples)
        assert a.raw_ber > 0

    def test_decimated_keystream(self):
        cfg = SystemConfig(init=PERFECT, sim=SHORT, digitizer=DigitizerConfig(decimation=8))
        assert run_end_to_end(cfg).message_ber == 0.0

    def test_ciphertext_balance(self):
        # all-zero payload: plaintext is constant low, so any balance comes from the key
        for payload in ("", "0"):
            cfg = SystemConfig(message=MessageParams(payload=payload))
            rep = run_end_to_end(cfg)
            enc = rep.traces["encrypted"].samples
            assert len(enc) >= 1e5
            assert 0.4 <= np.mean(enc > cfg.message.offset) <= 0.6

    def test_stage_label(self):
        cfg = SystemConfig(sim=SHORT, digitizer=DigitizerConfig(sample_rate=3e5))
        with pytest.raises(ChuaLinkError) as info:
            run_end_to_end(cfg)
        assert info.value.stage == "digitize"
        assert str(info.value).startswith("[digitize]")


def test_hold():
    from chua_link.crypto import BitStream
    b = hold(BitStream(0.0, 4.0, [1, 0, 1]), 1.0, 10)
    assert b.bits.tolist() == [1, 1, 1, 1, 0, 0, 0, 0, 1, 1]


@pytest.fixture(scope="module")
def rows():
    return mismatch_experiment([0.0, 0.05, 0.10], SystemConfig())


class TestMismatch:
    def test_zero_row_is_baseline(self, rows, default_report):
        assert rows[0].sync == default_report.sync
        assert rows[0].message_ber == default_report.message_ber

    def test_five_percent(self, rows):
        assert rows[1].sync.normalized_rms >= 10 * rows[0].sync.normalized_rms

    def test_ten_percent(self, rows):
        assert rows[2].message_ber > rows[0].message_ber

    def test_error_rows(self):
        rows = mismatch_experiment([-1.0, 0.0], SystemConfig(sim=SHORT))
        assert rows[0].error and rows[0].sync is None
        assert rows[1].error is None

    def test_capacitor_flags(self):
        (row,) = mismatch_experiment([0.05], SystemConfig(sim=SHORT), fields=("c_a", "c_b"))
        assert row.sync.normalized_rms > 1e-3

    def test_empty(self):
        with pytest.raises(DomainError):
            mismatch_experiment([], SystemConfig())
