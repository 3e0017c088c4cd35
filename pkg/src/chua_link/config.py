"""Flat dotted-key configuration (``section.key = value``).

Unspecified keys take the Table 1 / wave-generator defaults. ``rx.*`` keys
default to the corresponding ``circuit.*`` value, so a bare file describes
two identical circuits. Unknown keys are rejected.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from pathlib import Path

from .crypto import DigitizerConfig
from .dynamics import ChuaState, CircuitParams, NicResistors, derive_diode_params
from .errors import ChuaLinkError, ConfigError
from .pipeline import SystemConfig
from .signal import FilterConfig, MessageParams
from .solver import SimConfig
from .sync import CouplingConfig, PairState


def _pos(v):
    return v > 0


def _nonneg(v):
    return v >= 0


_CIRCUIT = {
    "c_a": (10e-9, float, _pos),
    "c_b": (100e-9, float, _pos),
    "l": (18e-3, float, _pos),
    "r": (1555.0, float, _pos),
    "r_0": (0.0, float, _nonneg),
    "e_sat": (8.3, float, _pos),
    "five_segment": (False, bool, None),
    "nic_a.r_port": (220.0, float, _pos),
    "nic_a.r_f": (220.0, float, _pos),
    "nic_a.r_g": (2200.0, float, _pos),
    "nic_b.r_port": (22e3, float, _pos),
    "nic_b.r_f": (22e3, float, _pos),
    "nic_b.r_g": (3300.0, float, _pos),
}

# key -> (default, type, check); a check of None accepts any parsed value
SCHEMA = {
    **{f"circuit.{k}": v for k, v in _CIRCUIT.items()},
    **{f"rx.{k}": (None, t, c) for k, (_, t, c) in _CIRCUIT.items()},
    "coupling.r_c": (100.0, float, _pos),
    "coupling.node": ("inductor_node", str, lambda v: v in ("inductor_node", "diode_node")),
    "coupling.noise_sigma": (0.0, float, _nonneg),
    "digitizer.threshold": (0.0, float, math.isfinite),
    "digitizer.source": ("v_a", str, lambda v: v in ("v_a", "v_b")),
    "digitizer.sample_rate": (None, float, _pos),
    "digitizer.decimation": (1, int, lambda v: v >= 1),
    "message.frequency": (6000.0, float, _pos),
    "message.amplitude_pp": (2.5, float, _nonneg),
    "message.offset": (1.25, float, math.isfinite),
    "message.phase": (0.0, float, math.isfinite),
    "message.duty": (0.5, float, lambda v: 0 < v < 1),
    "message.payload": ("", str, lambda v: not v.strip("01")),
    "filter.r_fil": (1e3, float, _pos),
    "filter.c_fil": (7e-9, float, _pos),
    "sim.dt": (5e-7, float, lambda v: 0 < v <= 1e-5),
    "sim.duration": (0.175, float, _pos),
    "sim.transient_cut": (0.005, float, _nonneg),
    "sim.record_stride": (1, int, lambda v: v >= 1),
    "init.tx_v_a": (0.1, float, math.isfinite),
    "init.tx_v_b": (0.0, float, math.isfinite),
    "init.tx_i_l": (0.0, float, math.isfinite),
    "init.rx_v_a": (0.6, float, math.isfinite),
    "init.rx_v_b": (0.0, float, math.isfinite),
    "init.rx_i_l": (0.0, float, math.isfinite),
    "channel.noise_sigma": (0.0, float, _nonneg),
    "run.seed": (0, int, None),
    "lyapunov.renorm_interval": (1e-4, float, _pos),
    "lyapunov.d0": (1e-8, float, _pos),
    "export.stride": (10, int, lambda v: v >= 1),
}


@dataclass(frozen=True)
class Settings:
    """Resolved flat key map plus the objects built from it."""
    values: dict
    system: SystemConfig

    @property
    def digest(self):
        return hashlib.sha256(dump_config(self.values).encode()).hexdigest()

    def get(self, key):
        return self.values[key]


def _parse(key, raw, typ):
    raw = raw.strip()
    try:
        if typ is bool:
            low = raw.lower()
            if low in ("true", "yes", "1"):
                return True
            if low in ("false", "no", "0"):
                return False
            raise ValueError(raw)
        if typ is float:
            if key == "digitizer.sample_rate" and raw.lower() in ("", "auto", "none"):
                return None
            return float(raw)
        if typ is int:
            return int(raw)
        return raw.strip('"')
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {typ.__name__}", key=key) from None


def parse_text(text, source="<config>"):
    """Parse ``key = value`` lines into a dict of raw typed values."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}", key=key)
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}", key=key)
        out[key] = _parse(key, raw, SCHEMA[key][1])
    return out


def resolve(overrides: dict) -> dict:
    values = {}
    for key, (default, _, check) in SCHEMA.items():
        v = overrides.get(key, default)
        if v is None and key.startswith("rx."):
            v = overrides.get("circuit." + key[3:], SCHEMA["circuit." + key[3:]][0])
        if v is not None and check is not None:
            ok = False
            try:
                ok = bool(check(v))
            except TypeError:
                pass
            if not ok:
                raise ConfigError(f"{key}: invalid value {v!r}", key=key)
        values[key] = v
    return values


def _circuit(values, prefix):
    g = lambda k: values[f"{prefix}.{k}"]  # noqa: E731
    nic = lambda n: NicResistors(g(f"{n}.r_port"), g(f"{n}.r_f"), g(f"{n}.r_g"))  # noqa: E731
    try:
        diode = derive_diode_params(nic("nic_a"), nic("nic_b"), g("e_sat"), five_segment=g("five_segment"))
    except ChuaLinkError as e:
        raise ConfigError(f"{prefix}.nic_*: {e}", key=f"{prefix}.nic_a.r_port") from e
    return CircuitParams(c_a=g("c_a"), c_b=g("c_b"), l=g("l"), r=g("r"), r_0=g("r_0"), diode=diode)


def build(values: dict) -> SystemConfig:
    v = values
    sections = {}
    try:
        sections["sim"] = SimConfig(v["sim.dt"], v["sim.duration"], v["sim.transient_cut"],
                                    v["sim.record_stride"])
    except ChuaLinkError as e:
        raise ConfigError(f"sim.duration: {e}", key="sim.duration") from e
    return SystemConfig(
        tx_params=_circuit(v, "circuit"),
        rx_params=_circuit(v, "rx"),
        coupling=CouplingConfig(v["coupling.r_c"], v["coupling.node"], v["coupling.noise_sigma"]),
        digitizer=DigitizerConfig(v["digitizer.threshold"], v["digitizer.source"],
                                  v["digitizer.sample_rate"], v["digitizer.decimation"]),
        message=MessageParams(v["message.frequency"], v["message.amplitude_pp"], v["message.offset"],
                              v["message.phase"], v["message.duty"], v["message.payload"]),
        filter=FilterConfig(v["filter.r_fil"], v["filter.c_fil"]),
        sim=sections["sim"],
        init=PairState(ChuaState(v["init.tx_v_a"], v["init.tx_v_b"], v["init.tx_i_l"]),
                       ChuaState(v["init.rx_v_a"], v["init.rx_v_b"], v["init.rx_i_l"])),
        channel_noise_sigma=v["channel.noise_sigma"],
        rng_seed=v["run.seed"],
    )


def settings_from_text(text, source="<config>", **overrides) -> Settings:
    raw = parse_text(text, source)
    for k, val in overrides.items():
        if val is not None:
            raw[k] = val
    values = resolve(raw)
    return Settings(values, build(values))


def load_settings(path=None, **overrides) -> Settings:
    """``overrides`` use dotted keys, e.g. ``{"run.seed": 3}``; None is ignored."""
    if path is None:
        return settings_from_text("", **overrides)
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {p}: {e}") from e
    return settings_from_text(text, str(p), **overrides)


def load_config(path=None) -> SystemConfig:
    return load_settings(path).system


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "auto"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def dump_config(values: dict) -> str:
    """Resolved config as text; feeding it back to ``load_config`` is lossless."""
    return "".join(f"{k} = {_fmt(values[k])}\n" for k in SCHEMA)
