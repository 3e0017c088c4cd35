"""End-to-end transmit/receive chain and the experiments built on it.

simulate pair -> digitise both ends -> XOR at tx -> channel -> re-threshold
-> XOR at rx -> two-level analog -> RC filter -> decode -> metrics.
"""
from __future__ import annotations

import logging
from contextlib import contextmanager
from dataclasses import dataclass, field, replace

import numpy as np

from .crypto import BitStream, DigitizerConfig, KeystreamStats, digitize, keystream_stats, xor_stream
from .dynamics import ChuaState, CircuitParams, default_params, validate_params
from .errors import ChuaLinkError, DomainError
from .signal import (AnalogTrace, FilterConfig, MessageParams, bit_error_rate, message_trace,
                     rc_lowpass, threshold_decode)
from .solver import SimConfig
from .sync import CouplingConfig, PairState, SyncMetrics, simulate_pair, split_pair, sync_error

log = logging.getLogger(__name__)


def _default_init():
    # receiver starts 0.5 V away on v_a so sync has something to do
    return PairState(ChuaState(0.1, 0.0, 0.0), ChuaState(0.6, 0.0, 0.0))


@dataclass(frozen=True)
class SystemConfig:
    tx_params: CircuitParams = field(default_factory=default_params)
    rx_params: CircuitParams = field(default_factory=default_params)
    coupling: CouplingConfig = CouplingConfig()
    digitizer: DigitizerConfig = DigitizerConfig()
    message: MessageParams = MessageParams()
    filter: FilterConfig = FilterConfig()
    sim: SimConfig = SimConfig()
    init: PairState = field(default_factory=_default_init)
    channel_noise_sigma: float = 0.0
    rng_seed: int = 0

    def validate(self):
        for side, p in (("tx", self.tx_params), ("rx", self.rx_params)):
            rep = validate_params(p)
            if not rep.ok:
                raise DomainError(f"{side} params invalid: {rep}")
        if not (self.channel_noise_sigma >= 0):
            raise DomainError("channel_noise_sigma must be >= 0")


@dataclass
class EndToEndReport:
    sync: SyncMetrics
    keystream: KeystreamStats
    raw_ber: float
    message_ber: float
    n_message_bits: int
    traces: dict = field(default_factory=dict, repr=False, compare=False)


@contextmanager
def _stage(name):
    try:
        yield
    except ChuaLinkError as e:
        if e.stage is None:
            e.stage = name
        raise


def apply_awgn(trace: AnalogTrace, sigma, seed) -> AnalogTrace:
    if sigma < 0:
        raise DomainError("sigma must be >= 0")
    if sigma == 0:
        return AnalogTrace(trace.t0, trace.sample_dt, np.array(trace.samples, copy=True))
    rng = np.random.default_rng(seed)
    noisy = np.asarray(trace.samples, dtype=float) + rng.normal(0.0, sigma, len(trace))
    return AnalogTrace(trace.t0, trace.sample_dt, noisy)


def hold(bits: BitStream, sample_dt, n) -> BitStream:
    """Zero-order hold of a (possibly decimated) bit stream onto a finer grid."""
    factor = round(bits.bit_dt / sample_dt)
    if factor < 1 or abs(factor * sample_dt - bits.bit_dt) > 1e-9 * bits.bit_dt:
        raise DomainError("bit period is not a multiple of the sample grid")
    held = np.repeat(bits.bits, factor)[:n]
    if len(held) < n:
        raise DomainError("bit stream too short for the grid")
    return BitStream(bits.t0, sample_dt, held)


def levels(bits: BitStream, mp: MessageParams) -> AnalogTrace:
    return AnalogTrace(bits.t0, bits.bit_dt, np.where(bits.bits.astype(bool), mp.high, mp.low))


def slice_levels(trace: AnalogTrace, mp: MessageParams) -> BitStream:
    return BitStream(trace.t0, trace.sample_dt, np.asarray(trace.samples) > mp.offset)


def run_end_to_end(cfg: SystemConfig) -> EndToEndReport:
    with _stage("config"):
        cfg.validate()
    mp = cfg.message

    with _stage("sync"):
        traj = simulate_pair(cfg.init, cfg.tx_params, cfg.rx_params, cfg.coupling, cfg.sim,
                             seed=cfg.rng_seed)
        sync = sync_error(traj, traj.t0, node=cfg.coupling.node)
    n, t0, dt = len(traj), traj.t0, traj.sample_dt

    with _stage("digitize"):
        tx, rx = split_pair(traj)
        key_tx = digitize(tx, cfg.digitizer)
        key_rx = digitize(rx, cfg.digitizer)
        kstats = keystream_stats(key_tx)
        key_tx = hold(key_tx, dt, n)
        key_rx = hold(key_rx, dt, n)

    with _stage("encrypt"):
        initial = message_trace(mp, t0, dt, n)
        plain = slice_levels(initial, mp)
        encrypted = levels(xor_stream(plain, key_tx), mp)

    with _stage("channel"):
        received = apply_awgn(encrypted, cfg.channel_noise_sigma, cfg.rng_seed)

    with _stage("decrypt"):
        recovered = xor_stream(slice_levels(received, mp), key_rx)
        raw_ber = bit_error_rate(plain, recovered)
        decrypted = rc_lowpass(levels(recovered, mp), cfg.filter)

    with _stage("decode"):
        sent = threshold_decode(initial, mp)
        got = threshold_decode(decrypted, mp)
        message_ber = bit_error_rate(sent, got)

    log.debug("e2e: nrms=%.3g raw_ber=%.4g message_ber=%.4g bits=%d",
              sync.normalized_rms, raw_ber, message_ber, len(sent))
    return EndToEndReport(sync, kstats, raw_ber, message_ber, len(sent),
                          traces={"initial": initial, "encrypted": encrypted, "decrypted": decrypted})


@dataclass(frozen=True)
class MismatchRow:
    mismatch: float
    sync: SyncMetrics | None
    message_ber: float | None
    error: str | None = None


def mismatch_experiment(rel_mismatch_list, cfg: SystemConfig, fields=("r",)) -> list[MismatchRow]:
    """Scale the named receiver parameters by ``1 + m`` for each ``m``."""
    rel_mismatch_list = list(rel_mismatch_list)
    if not rel_mismatch_list:
        raise DomainError("mismatch list must not be empty")
    rows = []
    for m in rel_mismatch_list:
        try:
            rx = cfg.rx_params.scaled(**{f: 1.0 + m for f in fields})
            rep = run_end_to_end(replace(cfg, rx_params=rx))
            rows.append(MismatchRow(float(m), rep.sync, rep.message_ber))
        except ChuaLinkError as e:
            rows.append(MismatchRow(float(m), None, None, str(e)))
    return rows


def coupling_experiment(r_c_values, cfg: SystemConfig) -> list[tuple[float, EndToEndReport | None, str | None]]:
    """End-to-end run for each coupling resistance; failures become rows."""
    r_c_values = list(r_c_values)
    if not r_c_values:
        raise DomainError("r_c list must not be empty")
    rows = []
    for r_c in r_c_values:
        try:
            c = replace(cfg.coupling, r_c=float(r_c))
            rows.append((float(r_c), run_end_to_end(replace(cfg, coupling=c)), None))
        except ChuaLinkError as e:
            rows.append((float(r_c), None, str(e)))
    return rows
