"""CSV and JSON writers. Output bytes depend only on the data."""
from __future__ import annotations

import dataclasses
import json
import math
from pathlib import Path

import numpy as np

from .crypto import BitStream
from .errors import ChuaLinkError
from .signal import AnalogTrace
from .solver import Trajectory


class ExportError(ChuaLinkError, OSError):
    pass


def _table(obj, columns=None):
    if isinstance(obj, Trajectory):
        names = list(obj.columns) or [f"x{i}" for i in range(obj.samples.shape[1])]
        data = obj.samples
        if columns is not None:
            data = np.column_stack([obj.column(c) for c in columns])
            names = list(columns)
        return obj.times, names, data, "%.9g"
    if isinstance(obj, AnalogTrace):
        return obj.times, ["v"], np.asarray(obj.samples, dtype=float)[:, None], "%.9g"
    if isinstance(obj, BitStream):
        return obj.times, ["bit"], obj.bits[:, None], "%d"
    raise TypeError(f"cannot export {type(obj).__name__}")


def export_csv(obj, path, stride=1, columns=None):
    """Write ``t,<columns>`` rows with 9 significant digits.

    ``stride`` keeps every n-th row; ``columns`` picks trajectory columns.
    """
    t, names, data, fmt = _table(obj, columns)
    t, data = t[::stride], data[::stride]
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(["t", *names]) + "\n")
            np.savetxt(fh, np.column_stack([t, data]), fmt=["%.9g"] + [fmt] * len(names), delimiter=",")
    except OSError as e:
        raise ExportError(f"cannot write {path}: {e}") from e
    return path


# kept for the name used in docs and tests
export_trajectory_csv = export_csv


def to_jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, Path):
        return obj.as_posix()
    return obj


def write_json(data, path):
    path = Path(path)
    try:
        path.write_text(json.dumps(to_jsonable(data), indent=2, sort_keys=True) + "\n")
    except OSError as e:
        raise ExportError(f"cannot write {path}: {e}") from e
    return path
