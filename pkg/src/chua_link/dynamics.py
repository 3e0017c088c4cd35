"""Physical Chua circuit: op-amp Chua diode, state equations, equilibria.

State vectors are ordered ``(v_a, v_b, i_l)``: the voltage on the capacitor
across the diode, the voltage on the capacitor across the inductor, and the
inductor current.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import _kernels
from .errors import AmbiguityError, DomainError, RegimeError

# op-amp output swing on a 9 V rail with TL08x headroom
DEFAULT_E_SAT = 8.3

_BREAKPOINT_RTOL = 1e-9


@dataclass(frozen=True)
class NicResistors:
    """One negative-impedance-converter stage of the diode.

    ``r_port`` is the resistor between the op-amp output and the port node,
    ``r_f``/``r_g`` the feedback divider on the inverting input.
    """
    r_port: float
    r_f: float
    r_g: float

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{f.name} must be positive and finite, got {v!r}")

    @property
    def gain(self):
        return self.r_f / self.r_g

    @property
    def slope(self):
        return -self.gain / self.r_port

    @property
    def breakpoint_per_volt(self):
        return 1.0 / (1.0 + self.gain)


# Table 1 resistor set wired as two NIC stages
KENNEDY_NIC_A = NicResistors(220.0, 220.0, 2200.0)
KENNEDY_NIC_B = NicResistors(22e3, 22e3, 3300.0)


@dataclass(frozen=True)
class DiodeParams:
    g_a: float
    g_b: float
    b_p: float
    b_outer: float = math.inf
    g_outer: float = math.inf
    e_sat: float = DEFAULT_E_SAT
    five_segment: bool = False


@dataclass(frozen=True)
class CircuitParams:
    c_a: float
    c_b: float
    l: float
    r: float
    diode: DiodeParams
    r_0: float = 0.0

    def as_vector(self):
        d = self.diode
        b_o = d.b_outer if math.isfinite(d.b_outer) else 0.0
        g_o = d.g_outer if math.isfinite(d.g_outer) else 0.0
        return np.array([self.c_a, self.c_b, self.l, self.r, self.r_0,
                         d.g_a, d.g_b, d.b_p, b_o, g_o, float(d.five_segment)])

    def scaled(self, **factors):
        """Copy with the named fields multiplied by the given factors."""
        return replace(self, **{k: getattr(self, k) * v for k, v in factors.items()})


@dataclass(frozen=True)
class ChuaState:
    v_a: float
    v_b: float
    i_l: float

    def as_array(self):
        return np.array([self.v_a, self.v_b, self.i_l], dtype=float)

    @classmethod
    def from_array(cls, a):
        return cls(float(a[0]), float(a[1]), float(a[2]))


@dataclass(frozen=True)
class StateDerivative:
    dv_a: float
    dv_b: float
    di_l: float

    def as_array(self):
        return np.array([self.dv_a, self.dv_b, self.di_l], dtype=float)


def diode_current(v, d: DiodeParams):
    """Current drawn by the Chua diode at voltage ``v`` (odd, continuous PWL).

    Accepts scalars or arrays.
    """
    v_arr = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v_arr)):
        raise DomainError("diode voltage must be finite")
    inner = 0.5 * (d.g_a - d.g_b) * (np.abs(v_arr + d.b_p) - np.abs(v_arr - d.b_p))
    if d.five_segment:
        i = (d.g_outer * v_arr + inner
             + 0.5 * (d.g_b - d.g_outer) * (np.abs(v_arr + d.b_outer) - np.abs(v_arr - d.b_outer)))
    else:
        i = d.g_b * v_arr + inner
    return float(i) if np.ndim(i) == 0 else i


def derive_diode_params(nic_a: NicResistors, nic_b: NicResistors, e_sat: float = DEFAULT_E_SAT,
                        five_segment: bool = False) -> DiodeParams:
    """Sum the characteristics of two parallel NIC stages.

    Each stage has slope -(r_f/r_g)/r_port until its op-amp saturates at
    e_sat/(1 + r_f/r_g), after which it behaves as +1/r_port.
    """
    if not (math.isfinite(e_sat) and e_sat > 0):
        raise DomainError(f"e_sat must be positive, got {e_sat!r}")
    bp_a = e_sat * nic_a.breakpoint_per_volt
    bp_b = e_sat * nic_b.breakpoint_per_volt
    if math.isclose(bp_a, bp_b, rel_tol=_BREAKPOINT_RTOL):
        raise AmbiguityError(f"both NIC stages saturate at {bp_a:.6g} V; PWL is degenerate")
    first, second = (nic_a, nic_b) if bp_a < bp_b else (nic_b, nic_a)

    g_a = nic_a.slope + nic_b.slope
    g_b = second.slope + 1.0 / first.r_port
    g_outer = 1.0 / first.r_port + 1.0 / second.r_port
    return DiodeParams(g_a=g_a, g_b=g_b, b_p=min(bp_a, bp_b), b_outer=max(bp_a, bp_b),
                       g_outer=g_outer, e_sat=e_sat, five_segment=five_segment)


def default_params(**overrides) -> CircuitParams:
    """Table 1 circuit: L = 18 mH, 10 nF across the diode, 100 nF across the
    inductor, Rv = 1555 ohm, Kennedy two-NIC diode on a 9 V rail."""
    five = overrides.pop("five_segment", False)
    e_sat = overrides.pop("e_sat", DEFAULT_E_SAT)
    diode = derive_diode_params(KENNEDY_NIC_A, KENNEDY_NIC_B, e_sat, five_segment=five)
    base = dict(c_a=10e-9, c_b=100e-9, l=18e-3, r=1555.0, r_0=0.0, diode=diode)
    base.update(overrides)
    return CircuitParams(**base)


def chua_derivatives(s: ChuaState, p: CircuitParams) -> StateDerivative:
    if not all(math.isfinite(x) for x in (s.v_a, s.v_b, s.i_l)):
        raise DomainError(f"non-finite state {s}")
    g = diode_current(s.v_a, p.diode)
    return StateDerivative(
        dv_a=((s.v_b - s.v_a) / p.r - g) / p.c_a,
        dv_b=((s.v_a - s.v_b) / p.r + s.i_l) / p.c_b,
        di_l=(-s.v_b - p.r_0 * s.i_l) / p.l,
    )


def equilibria(p: CircuitParams) -> tuple[ChuaState, ChuaState, ChuaState]:
    """Return (P-, origin, P+).

    With inductor resistance r_0 the outer equilibria sit where the diode
    line meets a load of r + r_0.
    """
    d = p.diode
    r_eff = p.r + p.r_0
    denom = d.g_b + 1.0 / r_eff
    if denom == 0.0:
        raise RegimeError("g_b + 1/r = 0: outer equilibria at infinity")
    v_star = (d.g_b - d.g_a) * d.b_p / denom
    if not v_star > d.b_p:
        raise RegimeError(f"v* = {v_star:.6g} V does not exceed b_p = {d.b_p:.6g} V; "
                          "no outer equilibria (not a double-scroll configuration)")
    if d.five_segment and v_star >= d.b_outer:
        raise RegimeError(f"v* = {v_star:.6g} V lies beyond the outer breakpoint")
    i_star = -v_star / r_eff
    vb_star = -p.r_0 * i_star
    plus = ChuaState(v_star, vb_star, i_star)
    minus = ChuaState(-v_star, -vb_star, -i_star)
    return minus, ChuaState(0.0, 0.0, 0.0), plus


@dataclass
class ValidationReport:
    problems: list[tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self):
        return not self.problems

    def fields(self):
        return [name for name, _ in self.problems]

    def __str__(self):
        if self.ok:
            return "valid"
        return "; ".join(f"{k}: {msg}" for k, msg in self.problems)


def validate_params(p: CircuitParams) -> ValidationReport:
    rep = ValidationReport()

    def check(name, value, ok, msg):
        if not (isinstance(value, (int, float)) and math.isfinite(value) and ok(value)):
            rep.problems.append((name, f"{msg}, got {value!r}"))

    for name in ("c_a", "c_b", "l", "r"):
        check(name, getattr(p, name), lambda v: v > 0, "must be positive")
    check("r_0", p.r_0, lambda v: v >= 0, "must be non-negative")

    d = p.diode
    check("diode.e_sat", d.e_sat, lambda v: v > 0, "must be positive")
    check("diode.b_p", d.b_p, lambda v: v > 0, "must be positive")
    if not d.g_a < d.g_b:
        rep.problems.append(("diode.g_a", f"slope ordering requires g_a < g_b ({d.g_a!r} >= {d.g_b!r})"))
    if not d.g_b < 0:
        rep.problems.append(("diode.g_b", f"must be negative, got {d.g_b!r}"))
    if d.five_segment:
        if not d.b_outer > d.b_p:
            rep.problems.append(("diode.b_outer", "must exceed b_p"))
        if not (math.isfinite(d.g_outer) and d.g_outer > 0):
            rep.problems.append(("diode.g_outer", f"must be positive, got {d.g_outer!r}"))
    return rep


class ChuaField:
    """Autonomous vector field of one circuit, usable by ``solver``.

    Calling it on a state array returns the derivative array; the solver
    picks up ``run``/``advance`` to use the compiled integration loop.
    """

    dim = 3
    columns = ("va", "vb", "il")

    def __init__(self, params: CircuitParams):
        self.params = params
        self._p = params.as_vector()

    def __call__(self, s):
        out = np.empty(3)
        _kernels.chua_rhs(np.asarray(s, dtype=float), 0, self._p, out)
        return out

    def run(self, s0, dt, n_skip, n_keep, stride):
        return _kernels.run_single(np.asarray(s0, dtype=float), self._p, dt, n_skip, n_keep, stride)

    def advance(self, s0, dt, n):
        return _kernels.advance_single(np.asarray(s0, dtype=float), self._p, dt, n)
