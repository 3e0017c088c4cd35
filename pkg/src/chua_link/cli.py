"""``chua-link`` command line: one subcommand per experiment.

Exit codes: 0 success, 1 usage/config, 2 numerical divergence,
3 acceptance-gate failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np

from . import __version__
from .config import Settings, dump_config, load_settings
from .dynamics import ChuaField, equilibria
from .errors import (ChuaLinkError, ConfigError, DivergenceError, DomainError, NumericalError,
                     RegimeError)
from .export import export_csv, write_json
from .pipeline import coupling_experiment, mismatch_experiment, run_end_to_end
from .solver import integrate, largest_lyapunov
from .sync import NODE_COLUMN, simulate_pair, sync_error

log = logging.getLogger("chua_link")

EXIT_OK, EXIT_USAGE, EXIT_DIVERGENCE, EXIT_GATE = 0, 1, 2, 3


@dataclass
class RunManifest:
    command: str
    config_digest: str
    artifact_paths: list = field(default_factory=list)
    versions: str = ""
    wall_time: float = 0.0
    gate_passed: bool = True
    failed_rows: list = field(default_factory=list)


def _versions():
    return f"chua_link {__version__}; numpy {np.__version__}; numba {numba.__version__}"


class _Run:
    def __init__(self, command, settings: Settings, out_dir):
        self.out = Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.settings = settings
        self.stride = settings.get("export.stride")
        self.manifest = RunManifest(command, settings.digest, versions=_versions())
        self._t = time.perf_counter()
        self.text("config.resolved", dump_config(settings.values))

    def _add(self, path):
        self.manifest.artifact_paths.append(str(path))
        return path

    def text(self, name, content):
        path = self.out / name
        path.write_text(content)
        return self._add(path)

    def csv(self, name, obj, **kw):
        kw.setdefault("stride", self.stride)
        return self._add(export_csv(obj, self.out / name, **kw))

    def json(self, name, data):
        return self._add(write_json(data, self.out / name))

    def finish(self):
        self.manifest.wall_time = time.perf_counter() - self._t
        write_json(self.manifest, self.out / "manifest.json")
        return self.manifest


def cmd_attractor(settings: Settings, out_dir) -> RunManifest:
    """Transmitter portrait (v_a, v_b) plus a Lyapunov estimate; the gate
    fails when the exponent is not positive."""
    run = _Run("attractor", settings, out_dir)
    cfg = settings.system
    f = ChuaField(cfg.tx_params)
    s0 = cfg.init.tx.as_array()
    traj = integrate(f, s0, cfg.sim)
    run.csv("attractor.csv", traj, columns=("va", "vb"))

    lyap = largest_lyapunov(f, s0, cfg.sim, settings.get("lyapunov.renorm_interval"),
                            settings.get("lyapunov.d0"), seed=cfg.rng_seed)
    va = traj.column("va")
    try:
        p_minus, _, p_plus = equilibria(cfg.tx_params)
        outer = [p_minus.v_a, p_plus.v_a]
    except RegimeError:
        outer = None
    run.manifest.gate_passed = lyap > 0
    run.json("lyapunov.json", {
        "largest_lyapunov": lyap,
        "seed": cfg.rng_seed,
        "renorm_interval": settings.get("lyapunov.renorm_interval"),
        "d0": settings.get("lyapunov.d0"),
        "equilibrium_v_a": outer,
        "v_a_min": float(va.min()),
        "v_a_max": float(va.max()),
        "chaotic": lyap > 0,
    })
    return run.finish()


def cmd_sync(settings: Settings, out_dir) -> RunManifest:
    run = _Run("sync", settings, out_dir)
    cfg = settings.system
    traj = simulate_pair(cfg.init, cfg.tx_params, cfg.rx_params, cfg.coupling, cfg.sim, seed=cfg.rng_seed)
    col = NODE_COLUMN[cfg.coupling.node]
    run.csv("sync_portrait.csv", traj, columns=(f"{col}_tx", f"{col}_rx"))
    run.json("sync_metrics.json", sync_error(traj, traj.t0, node=cfg.coupling.node))
    return run.finish()


def cmd_encrypt(settings: Settings, out_dir) -> RunManifest:
    run = _Run("encrypt", settings, out_dir)
    rep = run_end_to_end(settings.system)
    # relative names keep report.json independent of the output directory
    paths = {name: run.csv(f"{name}.csv", trace).name for name, trace in rep.traces.items()}
    run.json("report.json", {
        "sync": rep.sync, "keystream": rep.keystream, "raw_ber": rep.raw_ber,
        "message_ber": rep.message_ber, "n_message_bits": rep.n_message_bits, "traces": paths,
    })
    return run.finish()


SWEEP_COLUMNS = "kind,value,rms_error,max_error,normalized_rms,settle_time,message_ber,error"


def parse_sweep(text: str):
    """``r_c=100,1000,inf`` or ``mismatch=0,0.05,0.1``."""
    kind, sep, vals = text.partition("=")
    kind = kind.strip()
    if not sep or kind not in ("r_c", "mismatch"):
        raise ConfigError(f"--sweep must be 'r_c=...' or 'mismatch=...', got {text!r}")
    try:
        values = [float(v) for v in vals.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse sweep values in {text!r}") from None
    if not values:
        raise ConfigError("sweep needs at least one value")
    return kind, values


def cmd_sweep(settings: Settings, sweep_arg: str, out_dir) -> RunManifest:
    kind, values = parse_sweep(sweep_arg)
    run = _Run("sweep", settings, out_dir)
    cfg = settings.system
    rows = []
    if kind == "r_c":
        for r_c, rep, err in coupling_experiment(values, cfg):
            rows.append((r_c, rep.sync if rep else None, rep.message_ber if rep else None, err))
    else:
        for row in mismatch_experiment(values, cfg):
            rows.append((row.mismatch, row.sync, row.message_ber, row.error))

    lines = [SWEEP_COLUMNS]
    for value, sync, ber, err in rows:
        if err is not None:
            run.manifest.failed_rows.append({"value": value, "error": err})
            lines.append(f"{kind},{value:.9g},,,,,,\"{err}\"")
            continue
        lines.append(",".join([kind, f"{value:.9g}", f"{sync.rms_error:.9g}", f"{sync.max_error:.9g}",
                               f"{sync.normalized_rms:.9g}", f"{sync.settle_time:.9g}", f"{ber:.9g}", ""]))
    run.text("sweep.csv", "\n".join(lines) + "\n")
    return run.finish()


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="chua-link", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("attractor", "transmitter phase portrait and Lyapunov exponent"),
                        ("sync", "transmitter/receiver synchronisation portrait"),
                        ("encrypt", "full encrypt/transmit/decrypt chain"),
                        ("sweep", "coupling or mismatch sweep")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", type=Path, default=None)
        sp.add_argument("--out", type=Path, required=True)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--duration", type=float, default=None, help="simulated seconds")
        if name == "sweep":
            sp.add_argument("--sweep", required=True, help="r_c=100,1000,inf or mismatch=0,0.05,0.1")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.duration is not None and not args.duration > 0:
        print("chua-link: error: --duration must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        settings = load_settings(args.config, **{"run.seed": args.seed, "sim.duration": args.duration})
        log.debug("resolved config:\n%s", dump_config(settings.values))
        if args.command == "attractor":
            manifest = cmd_attractor(settings, args.out)
        elif args.command == "sync":
            manifest = cmd_sync(settings, args.out)
        elif args.command == "encrypt":
            manifest = cmd_encrypt(settings, args.out)
        else:
            manifest = cmd_sweep(settings, args.sweep, args.out)
    except (DivergenceError, NumericalError) as e:
        print(f"chua-link: numerical failure: {e}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (ConfigError, DomainError) as e:
        print(f"chua-link: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ChuaLinkError as e:
        print(f"chua-link: error: {e}", file=sys.stderr)
        return EXIT_DIVERGENCE

    log.info("%s: %d artifacts in %s (%.2f s)", manifest.command, len(manifest.artifact_paths),
             args.out, manifest.wall_time)
    if not manifest.gate_passed:
        print("chua-link: acceptance gate failed", file=sys.stderr)
        return EXIT_GATE
    if manifest.failed_rows:
        return EXIT_DIVERGENCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
