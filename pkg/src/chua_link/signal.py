"""Message generator, RC low-pass recovery, decoding and BER."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .crypto import BitStream
from .errors import AlignmentError, DomainError


@dataclass(frozen=True)
class MessageParams:
    """Wave-generator settings: 6 kHz, 2.5 Vpp, +1.25 V offset, 0 deg, 50 %.

    ``payload`` is an optional 0/1 string; each generator period carries the
    next payload bit (cycled), a 0 holding the low level for the whole period.
    Empty payload means the plain square wave (every period is a 1).
    """
    frequency: float = 6000.0
    amplitude_pp: float = 2.5
    offset: float = 1.25
    phase: float = 0.0
    duty: float = 0.5
    payload: str = ""

    def __post_init__(self):
        if not (self.frequency > 0):
            raise DomainError("frequency must be positive")
        if not (0 < self.duty < 1):
            raise DomainError("duty must lie in (0, 1)")
        if not (self.amplitude_pp >= 0):
            raise DomainError("amplitude_pp must be >= 0")
        if self.payload.strip("01"):
            raise DomainError("payload must contain only 0 and 1")

    @property
    def period(self):
        return 1.0 / self.frequency

    @property
    def high(self):
        return self.offset + 0.5 * self.amplitude_pp

    @property
    def low(self):
        return self.offset - 0.5 * self.amplitude_pp

    def payload_bits(self, n):
        if not self.payload:
            return np.ones(n, dtype=np.uint8)
        pat = np.frombuffer(self.payload.encode(), dtype=np.uint8) - ord("0")
        return np.resize(pat, n).astype(np.uint8)


@dataclass(frozen=True)
class FilterConfig:
    r_fil: float = 1e3
    c_fil: float = 7e-9

    def __post_init__(self):
        if not (self.r_fil > 0 and self.c_fil > 0):
            raise DomainError("r_fil and c_fil must be positive")

    @property
    def tau(self):
        return self.r_fil * self.c_fil

    @property
    def cutoff(self):
        return 1.0 / (2 * math.pi * self.tau)


@dataclass(frozen=True)
class AnalogTrace:
    t0: float
    sample_dt: float
    samples: np.ndarray

    def __len__(self):
        return len(self.samples)

    @property
    def times(self):
        return self.t0 + self.sample_dt * np.arange(len(self.samples))


def _cycle_position(mp, t, t_origin):
    x = (np.asarray(t, dtype=float) - t_origin) * mp.frequency - mp.phase / 360.0
    k = np.floor(x)
    return k.astype(np.int64), x - k


def square_wave(mp: MessageParams, t, t_origin=0.0):
    """Generator output at time(s) ``t``; high during the first ``duty`` of
    each period. ``t_origin`` is when the generator's first period starts."""
    k, u = _cycle_position(mp, t, t_origin)
    on = u < mp.duty
    if mp.payload:
        on &= mp.payload_bits(int(k.max()) + 1 if k.size else 0)[np.maximum(k, 0)].astype(bool)
    out = np.where(on, mp.high, mp.low)
    return float(out) if np.ndim(out) == 0 else out


def message_trace(mp: MessageParams, t0, sample_dt, n, t_origin=None) -> AnalogTrace:
    t_origin = t0 if t_origin is None else t_origin
    t = t0 + sample_dt * np.arange(n)
    return AnalogTrace(t0, sample_dt, square_wave(mp, t, t_origin))


def rc_lowpass(trace: AnalogTrace, f: FilterConfig = FilterConfig(), y0=None) -> AnalogTrace:
    """First-order RC filter, exact for inputs held constant over a sample.

    ``y0`` is the initial capacitor voltage (defaults to the first input).
    """
    tau = f.tau
    if trace.sample_dt > tau / 5:
        warnings.warn(f"sample_dt {trace.sample_dt:.3g} s is coarse for RC = {tau:.3g} s",
                      RuntimeWarning, stacklevel=2)
    x = np.asarray(trace.samples, dtype=float)
    if len(x) == 0:
        return AnalogTrace(trace.t0, trace.sample_dt, x.copy())
    a = -math.expm1(-trace.sample_dt / tau)
    y = _kernels.rc_filter(x, float(x[0] if y0 is None else y0), a)
    return AnalogTrace(trace.t0, trace.sample_dt, y)


def threshold_decode(trace: AnalogTrace, mp: MessageParams = MessageParams(), t_origin=None) -> BitStream:
    """One bit per complete generator period, read at the middle of its
    high window and compared with the generator offset (ties give 0)."""
    t_origin = trace.t0 if t_origin is None else t_origin
    span_end = trace.t0 + len(trace) * trace.sample_dt  # samples hold over [t, t + dt)
    T = mp.period
    first_start = t_origin + (mp.phase / 360.0) * T
    k_first = math.ceil((trace.t0 - first_start) / T - 1e-9)
    k_last = math.floor((span_end - first_start) / T + 1e-9) - 1
    if k_last < k_first:
        raise DomainError("trace is shorter than one message period")
    k = np.arange(k_first, k_last + 1)
    t_mid = first_start + (k + 0.5 * mp.duty) * T
    idx = np.rint((t_mid - trace.t0) / trace.sample_dt).astype(np.int64)
    bits = (np.asarray(trace.samples)[idx] > mp.offset).astype(np.uint8)
    return BitStream(first_start + k_first * T, T, bits)


def bit_error_rate(sent: BitStream, received: BitStream) -> float:
    if len(sent) != len(received):
        raise AlignmentError(f"length mismatch: {len(sent)} vs {len(received)}")
    if len(sent) == 0:
        raise DomainError("empty streams")
    return float(np.count_nonzero(sent.bits != received.bits)) / len(sent)
