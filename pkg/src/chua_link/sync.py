"""Bidirectionally coupled transmitter/receiver pair and sync metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .dynamics import ChuaState, CircuitParams, StateDerivative, chua_derivatives
from .errors import ChuaLinkError, DomainError
from .solver import SimConfig, Trajectory, integrate

NODES = {"diode_node": 0, "inductor_node": 1}
NODE_COLUMN = {"diode_node": "va", "inductor_node": "vb"}
PAIR_COLUMNS = ("va_tx", "vb_tx", "il_tx", "va_rx", "vb_rx", "il_rx")


@dataclass(frozen=True)
class CouplingConfig:
    r_c: float = 100.0
    node: str = "inductor_node"
    noise_sigma: float = 0.0  # V, on the sync line only

    def __post_init__(self):
        if not (self.r_c > 0):
            raise DomainError(f"r_c must be positive or inf, got {self.r_c!r}")
        if self.node not in NODES:
            raise DomainError(f"node must be one of {sorted(NODES)}, got {self.node!r}")
        if not (self.noise_sigma >= 0):
            raise DomainError("noise_sigma must be >= 0")

    @property
    def conductance(self):
        return 0.0 if math.isinf(self.r_c) else 1.0 / self.r_c


@dataclass(frozen=True)
class PairState:
    tx: ChuaState
    rx: ChuaState

    def as_array(self):
        return np.concatenate([self.tx.as_array(), self.rx.as_array()])

    @classmethod
    def from_array(cls, a):
        return cls(ChuaState.from_array(a[:3]), ChuaState.from_array(a[3:]))


@dataclass(frozen=True)
class SyncMetrics:
    rms_error: float
    max_error: float
    normalized_rms: float
    settle_time: float


def coupled_derivatives(ps: PairState, p_tx: CircuitParams, p_rx: CircuitParams,
                        c: CouplingConfig) -> tuple[StateDerivative, StateDerivative]:
    d_tx = chua_derivatives(ps.tx, p_tx)
    d_rx = chua_derivatives(ps.rx, p_rx)
    g = c.conductance
    if g == 0.0:
        return d_tx, d_rx
    if c.node == "inductor_node":
        i_c = (ps.tx.v_b - ps.rx.v_b) * g
        return (replace(d_tx, dv_b=d_tx.dv_b - i_c / p_tx.c_b),
                replace(d_rx, dv_b=d_rx.dv_b + i_c / p_rx.c_b))
    i_c = (ps.tx.v_a - ps.rx.v_a) * g
    return (replace(d_tx, dv_a=d_tx.dv_a - i_c / p_tx.c_a),
            replace(d_rx, dv_a=d_rx.dv_a + i_c / p_rx.c_a))


class PairField:
    """Vector field on the joint 6-vector ``(tx..., rx...)``."""

    dim = 6
    columns = PAIR_COLUMNS

    def __init__(self, p_tx: CircuitParams, p_rx: CircuitParams, c: CouplingConfig, seed=None):
        self.p_tx, self.p_rx, self.coupling = p_tx, p_rx, c
        self._ptx = p_tx.as_vector()
        self._prx = p_rx.as_vector()
        self._g = c.conductance
        self._node = NODES[c.node]
        self._seed = seed

    def __call__(self, s):
        out = np.empty(6)
        _kernels.pair_rhs(np.asarray(s, dtype=float), self._ptx, self._prx, self._g, self._node, 0.0, out)
        return out

    def _noise(self, n):
        if self.coupling.noise_sigma == 0.0 or self._g == 0.0:
            return np.empty(0)
        rng = np.random.default_rng(self._seed)
        return rng.normal(0.0, self.coupling.noise_sigma, n)

    def run(self, s0, dt, n_skip, n_keep, stride):
        noise = self._noise(n_skip + max(n_keep - 1, 0) * stride)
        return _kernels.run_pair(np.asarray(s0, dtype=float), self._ptx, self._prx, self._g,
                                 self._node, noise, dt, n_skip, n_keep, stride)

    def advance(self, s0, dt, n):
        if self.coupling.noise_sigma:
            raise DomainError("noisy sync line is only supported for full runs")
        return _kernels.advance_pair(np.asarray(s0, dtype=float), self._ptx, self._prx,
                                     self._g, self._node, dt, n)


def simulate_pair(s0: PairState, p_tx: CircuitParams, p_rx: CircuitParams, c: CouplingConfig,
                  cfg: SimConfig, seed=None) -> Trajectory:
    """Coupled run; ``seed`` only matters when the sync line is noisy."""
    return integrate(PairField(p_tx, p_rx, c, seed), s0.as_array(), cfg)


def split_pair(traj: Trajectory) -> tuple[Trajectory, Trajectory]:
    """Per-circuit views of a pair trajectory (columns ``va, vb, il``)."""
    cols = ("va", "vb", "il")
    return (Trajectory(traj.t0, traj.sample_dt, traj.samples[:, :3], cols),
            Trajectory(traj.t0, traj.sample_dt, traj.samples[:, 3:], cols))


def sync_error(pair_traj: Trajectory, transient_cut=0.0, threshold=0.01,
               node="inductor_node") -> SyncMetrics:
    """Sync quality on the coupled node voltage over ``t >= transient_cut``."""
    col = NODE_COLUMN[node]
    keep = pair_traj.times >= transient_cut - 0.5 * pair_traj.sample_dt
    if not keep.any():
        raise DomainError(f"no samples after transient_cut = {transient_cut!r}")
    tx = pair_traj.column(f"{col}_tx")[keep]
    rx = pair_traj.column(f"{col}_rx")[keep]
    times = pair_traj.times[keep]

    err = np.abs(rx - tx)
    rms = float(np.sqrt(np.mean(err ** 2)))
    ref = float(np.sqrt(np.mean(tx ** 2)))
    nrms = rms / ref if ref > 0 else (0.0 if rms == 0 else math.inf)

    # settle: first index after which every normalized error stays below threshold
    bad = err >= threshold * ref if ref > 0 else err > 0
    if not bad.any():
        settle = float(times[0])
    elif bad[-1]:
        settle = math.inf
    else:
        settle = float(times[np.flatnonzero(bad)[-1] + 1])
    return SyncMetrics(rms, float(err.max()), nrms, settle)


@dataclass(frozen=True)
class SweepRow:
    r_c: float
    mismatch: float
    metrics: SyncMetrics | None
    error: str | None = None


def coupling_sweep(r_c_values, mismatch=0.0, s0: PairState | None = None, cfg: SimConfig | None = None,
                   params: CircuitParams | None = None, node="inductor_node",
                   metric_cut=None) -> list[SweepRow]:
    """Sync metrics for each coupling resistance, with rx's r scaled by
    ``1 + mismatch``. Rows that fail carry the error text instead of metrics."""
    from .dynamics import default_params

    r_c_values = list(r_c_values)
    if not r_c_values:
        raise DomainError("r_c_values must not be empty")
    params = params or default_params()
    cfg = cfg or SimConfig(duration=0.05, transient_cut=0.005)
    if s0 is None:
        s0 = PairState(ChuaState(0.1, 0.0, 0.0), ChuaState(0.6, 0.0, 0.0))
    p_rx = params.scaled(r=1.0 + mismatch)
    cut = cfg.transient_cut if metric_cut is None else metric_cut

    rows = []
    for r_c in r_c_values:
        try:
            c = CouplingConfig(r_c=float(r_c), node=node)
            traj = simulate_pair(s0, params, p_rx, c, cfg)
            rows.append(SweepRow(float(r_c), mismatch, sync_error(traj, cut, node=node)))
        except ChuaLinkError as e:
            rows.append(SweepRow(float(r_c), mismatch, None, str(e)))
    return rows
