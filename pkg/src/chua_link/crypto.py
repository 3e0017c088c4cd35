"""Comparator keystreams, XOR stream cipher, keystream statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError, DomainError
from .solver import Trajectory

_SOURCES = {"v_a": "va", "v_b": "vb"}


@dataclass(frozen=True)
class DigitizerConfig:
    threshold: float = 0.0
    source: str = "v_a"
    sample_rate: float | None = None  # Hz; None means every trajectory sample
    decimation: int = 1

    def __post_init__(self):
        if self.source not in _SOURCES:
            raise DomainError(f"source must be one of {sorted(_SOURCES)}, got {self.source!r}")
        if int(self.decimation) != self.decimation or self.decimation < 1:
            raise DomainError(f"decimation must be a positive integer, got {self.decimation!r}")
        if self.sample_rate is not None and not (self.sample_rate > 0):
            raise DomainError("sample_rate must be positive")

    def step(self, sample_dt):
        """Trajectory samples per emitted bit."""
        per_sample = 1
        if self.sample_rate is not None:
            ratio = 1.0 / (self.sample_rate * sample_dt)
            per_sample = round(ratio)
            if per_sample < 1 or not math.isclose(ratio, per_sample, rel_tol=1e-9):
                raise DomainError(f"sample_rate {self.sample_rate!r} Hz is not an integer divisor "
                                  f"of the trajectory rate {1 / sample_dt:.6g} Hz")
        return per_sample * int(self.decimation)


@dataclass(frozen=True)
class BitStream:
    t0: float
    bit_dt: float
    bits: np.ndarray

    def __post_init__(self):
        if not (self.bit_dt > 0):
            raise DomainError("bit_dt must be positive")
        object.__setattr__(self, "bits", np.asarray(self.bits, dtype=np.uint8))

    def __len__(self):
        return len(self.bits)

    @property
    def times(self):
        return self.t0 + self.bit_dt * np.arange(len(self.bits))


@dataclass(frozen=True)
class KeystreamStats:
    balance: float
    runs_z: float
    serial_corr: float
    length: int
    degenerate: bool = False


def digitize(traj: Trajectory, cfg: DigitizerConfig = DigitizerConfig()) -> BitStream:
    """bit = 1 iff source voltage > threshold (ties give 0)."""
    col = _SOURCES[cfg.source]
    try:
        v = traj.column(col)
    except KeyError:
        raise DomainError(f"trajectory has no {cfg.source} column") from None
    step = cfg.step(traj.sample_dt)
    return BitStream(traj.t0, traj.sample_dt * step, (v[::step] > cfg.threshold).astype(np.uint8))


def xor_stream(data: BitStream, key: BitStream) -> BitStream:
    if len(data) != len(key):
        raise AlignmentError(f"length mismatch: data {len(data)} bits, key {len(key)} bits")
    if data.bit_dt != key.bit_dt:
        raise AlignmentError(f"bit period mismatch: {data.bit_dt!r} vs {key.bit_dt!r}")
    if not math.isclose(data.t0, key.t0, rel_tol=0.0, abs_tol=1e-3 * data.bit_dt):
        raise AlignmentError(f"start time mismatch: {data.t0!r} vs {key.t0!r}")
    return BitStream(data.t0, data.bit_dt, np.bitwise_xor(data.bits, key.bits))


def keystream_stats(bits: BitStream) -> KeystreamStats:
    """Balance, runs-test z-score and lag-1 autocorrelation.

    The runs statistic follows the usual monobit-conditioned form: with
    ones fraction p, the run count has mean 2np(1-p) + 1 and standard
    deviation 2 sqrt(2n) p(1-p).
    """
    b = np.asarray(bits.bits, dtype=np.int8)
    n = len(b)
    if n < 100:
        raise DomainError(f"need at least 100 bits, got {n}")
    p = float(b.mean())
    if p in (0.0, 1.0):
        return KeystreamStats(p, math.nan, math.nan, n, degenerate=True)

    runs = 1 + int(np.count_nonzero(b[1:] != b[:-1]))
    pq = p * (1 - p)
    runs_z = (runs - (2 * n * pq + 1)) / (2 * math.sqrt(2 * n) * pq)

    x, y = b[:-1].astype(float), b[1:].astype(float)
    sx, sy = x.std(), y.std()
    if sx == 0 or sy == 0:
        corr = math.nan
    else:
        corr = float(np.clip(np.mean((x - x.mean()) * (y - y.mean())) / (sx * sy), -1.0, 1.0))
    return KeystreamStats(p, float(runs_z), corr, n)
