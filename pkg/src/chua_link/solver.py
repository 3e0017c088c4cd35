"""Fixed-step RK4 integration and trajectory-level numerics.

A vector field is any callable ``f(state_array) -> derivative_array``.
Fields that also provide ``run``/``advance`` (``ChuaField``, ``PairField``)
are integrated by their compiled loops; the arithmetic is the same.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, DomainError, NumericalError


@dataclass(frozen=True)
class SimConfig:
    dt: float = 5e-7
    duration: float = 0.175
    transient_cut: float = 0.005
    record_stride: int = 1

    def __post_init__(self):
        if not (0 < self.dt <= 1e-5):
            raise DomainError(f"dt must be in (0, 1e-5], got {self.dt!r}")
        if not (self.transient_cut >= 0):
            raise DomainError(f"transient_cut must be >= 0, got {self.transient_cut!r}")
        if not (self.duration >= self.transient_cut):
            raise DomainError("duration must not be shorter than transient_cut")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise DomainError(f"record_stride must be a positive integer, got {self.record_stride!r}")

    @property
    def n_skip(self):
        return _steps(self.transient_cut, self.dt)

    @property
    def n_keep(self):
        return int(math.floor((self.duration - self.transient_cut) / (self.dt * self.record_stride)
                              * (1 + 1e-12))) + 1

    @property
    def sample_dt(self):
        return self.dt * self.record_stride


def _steps(span, dt):
    # tolerate representation error in span/dt (e.g. 5e-3/5e-7)
    return int(math.floor(span / dt * (1 + 1e-12)))


@dataclass(frozen=True)
class Trajectory:
    t0: float
    sample_dt: float
    samples: np.ndarray
    columns: tuple = ()

    def __len__(self):
        return len(self.samples)

    @property
    def times(self):
        return self.t0 + self.sample_dt * np.arange(len(self.samples))

    def column(self, name):
        try:
            return self.samples[:, self.columns.index(name)]
        except ValueError:
            raise KeyError(f"trajectory has no column {name!r} (has {self.columns})") from None


def rk4_step(deriv, s, dt):
    """One classical RK4 step of ``ds/dt = deriv(s)``."""
    s = np.asarray(s, dtype=float)
    k1 = np.asarray(deriv(s), dtype=float)
    k2 = np.asarray(deriv(s + 0.5 * dt * k1), dtype=float)
    k3 = np.asarray(deriv(s + 0.5 * dt * k2), dtype=float)
    k4 = np.asarray(deriv(s + dt * k3), dtype=float)
    for k in (k1, k2, k3, k4):
        if not np.all(np.isfinite(k)):
            raise DivergenceError("non-finite RK4 stage")
    return s + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _advance(deriv, s, dt, n, t_start=0.0):
    if hasattr(deriv, "advance"):
        out, failed = deriv.advance(np.asarray(s, dtype=float), dt, n)
        if failed >= 0:
            t = t_start + failed * dt
            raise DivergenceError(f"state diverged at t = {t:.6g} s", t=t)
        return out
    s = np.asarray(s, dtype=float)
    for i in range(n):
        try:
            s = rk4_step(deriv, s, dt)
        except DivergenceError as e:
            t = t_start + i * dt
            raise DivergenceError(f"non-finite RK4 stage at t = {t:.6g} s", t=t) from e
    return s


def integrate(deriv, s0, cfg: SimConfig) -> Trajectory:
    """Integrate from t = 0 and keep samples from ``transient_cut`` onward."""
    s0 = np.asarray(s0, dtype=float)
    n_skip, n_keep, stride = cfg.n_skip, cfg.n_keep, cfg.record_stride
    columns = tuple(getattr(deriv, "columns", ()))
    t0 = n_skip * cfg.dt

    if hasattr(deriv, "run"):
        samples, failed = deriv.run(s0, cfg.dt, n_skip, n_keep, stride)
        if failed >= 0:
            t = failed * cfg.dt
            raise DivergenceError(f"state diverged at t = {t:.6g} s", t=t)
        return Trajectory(t0, cfg.sample_dt, samples, columns)

    s = _advance(deriv, s0, cfg.dt, n_skip)
    out = np.empty((n_keep, s0.size))
    out[0] = s
    for i in range(1, n_keep):
        s = _advance(deriv, s, cfg.dt, stride, t_start=t0 + (i - 1) * cfg.sample_dt)
        out[i] = s
    return Trajectory(t0, cfg.sample_dt, out, columns)


def convergence_ratio(deriv, s0, dt, horizon=5e-4):
    """err(dt) / err(dt/2), both measured against a dt/8 reference run.

    About 16 for a fourth-order method on a smooth trajectory.
    """
    n = _steps(horizon, dt)
    if n < 1:
        raise DomainError("horizon shorter than one step")
    ref = _advance(deriv, s0, dt / 8, 8 * n)
    if not np.all(np.isfinite(ref)):
        raise NumericalError("reference run diverged")
    coarse = _advance(deriv, s0, dt, n)
    fine = _advance(deriv, s0, dt / 2, 2 * n)
    e1 = np.linalg.norm(coarse - ref)
    e2 = np.linalg.norm(fine - ref)
    if e2 == 0.0:
        raise NumericalError("half-step error is exactly zero; ratio undefined")
    return float(e1 / e2)


def largest_lyapunov(deriv, s0, cfg: SimConfig, renorm_interval=1e-4, d0=1e-8, seed=None):
    """Benettin two-trajectory estimate of the largest Lyapunov exponent (1/s).

    A companion trajectory starts ``d0`` away (direction random if ``seed`` is
    given, otherwise along the diagonal) and is pulled back to distance
    ``d0`` every ``renorm_interval`` seconds after the transient.
    """
    s = np.asarray(s0, dtype=float)
    m = _steps(renorm_interval, cfg.dt)
    if m < 1:
        raise DomainError("renorm_interval shorter than one step")
    n_renorm = _steps(cfg.duration - cfg.transient_cut, m * cfg.dt)
    if n_renorm < 1:
        raise DomainError("measurement window shorter than one renormalisation interval")

    if seed is None:
        direction = np.ones_like(s)
    else:
        direction = np.random.default_rng(seed).standard_normal(s.size)
    direction /= np.linalg.norm(direction)

    s = _advance(deriv, s, cfg.dt, cfg.n_skip)
    t = cfg.n_skip * cfg.dt
    p = s + d0 * direction
    total = 0.0
    for _ in range(n_renorm):
        s = _advance(deriv, s, cfg.dt, m, t_start=t)
        p = _advance(deriv, p, cfg.dt, m, t_start=t)
        t += m * cfg.dt
        dist = np.linalg.norm(p - s)
        if dist == 0.0:
            raise NumericalError(f"perturbation collapsed to zero at t = {t:.6g} s")
        total += math.log(dist / d0)
        p = s + (p - s) * (d0 / dist)
    return total / (n_renorm * m * cfg.dt)
