"""CSV data products and the JSON run manifest."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from . import __version__

FLOAT_FORMAT = "%.17g"  # 17 significant digits round-trip IEEE doubles exactly


def _columns(columns: Mapping[str, tuple[np.ndarray, str]]):
    names, data = [], []
    for name, (values, unit) in columns.items():
        values = np.asarray(values).reshape(-1)
        if np.iscomplexobj(values):
            names += [f"{name}.re [{unit}]", f"{name}.im [{unit}]"]
            data += [values.real, values.imag]
        else:
            names.append(f"{name} [{unit}]")
            data.append(values.astype(float))
    lengths = {len(d) for d in data}
    if len(lengths) != 1:
        raise ValueError(f"columns have different lengths: {sorted(lengths)}")
    return names, np.column_stack(data)


def write_csv(path: str | Path, columns: Mapping[str, tuple[np.ndarray, str]]) -> Path:
    """Write named columns (``{name: (values, unit)}``); complex columns become ``.re``/``.im``."""
    names, table = _columns(columns)
    path = Path(path)
    np.savetxt(path, table, fmt=FLOAT_FORMAT, delimiter=",", header=",".join(names), comments="")
    return path


def read_csv(path: str | Path) -> dict[str, np.ndarray]:
    """Read a product written by :func:`write_csv`; ``.re``/``.im`` pairs are recombined."""
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip().split(",")
    table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    names = [h.split(" [", 1)[0] for h in header]
    out: dict[str, np.ndarray] = {}
    for j, name in enumerate(names):
        if name.endswith(".re"):
            base = name[:-3]
            out[base] = table[:, j] + 1j * table[:, names.index(base + ".im")]
        elif name.endswith(".im"):
            continue
        else:
            out[name] = table[:, j]
    return out


def write_field_map(path: str | Path, fmap, value_unit: str) -> Path:
    """Long format, row-major over the spatial axis: one row per ``(x1, axis2)`` pair."""
    n1, n2 = fmap.values.shape
    axis2_unit = "rad/s" if fmap.axis2_name == "omega" else "s"
    return write_csv(
        path,
        {
            "x1": (np.repeat(fmap.axis1, n2), "m"),
            fmap.axis2_name: (np.tile(fmap.axis2, n1), axis2_unit),
            fmap.value_name: (fmap.values.reshape(-1), value_unit),
        },
    )


def read_field_map(path: str | Path):
    from .experiments import FieldMap

    cols = read_csv(path)
    names = list(cols)
    x_all, a2_all, v_all = (cols[n] for n in names[:3])
    n2 = int(np.argmax(x_all != x_all[0])) or len(x_all)
    n1 = len(x_all) // n2
    axis2 = a2_all[:n2]
    return FieldMap(
        axis1=x_all[::n2],
        axis2=axis2,
        values=v_all.reshape(n1, n2),
        axis2_name=names[1],
        value_name=names[2],
    )


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


@dataclass
class RunManifest:
    command: str
    config: dict
    config_hash: str
    seed: int
    version: str = __version__
    timings: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    results: dict = field(default_factory=dict)

    def add_output(self, path: str | Path) -> None:
        p = Path(path)
        self.outputs.append({"file": p.name, "sha256": sha256_file(p)})

    def content_hash(self) -> str:
        """Hash of everything except wall-clock timings; equal for identical runs."""
        stable = {k: v for k, v in asdict(self).items() if k != "timings"}
        return hashlib.sha256(json.dumps(stable, sort_keys=True, default=repr).encode()).hexdigest()

    def write(self, out_dir: str | Path) -> Path:
        """Atomically write ``manifest.json`` into ``out_dir``."""
        out_dir = Path(out_dir)
        payload = asdict(self)
        payload["manifest_hash"] = self.content_hash()
        fd, tmp = tempfile.mkstemp(dir=out_dir, prefix=".manifest.", suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True, default=repr)
            fh.write("\n")
        target = out_dir / "manifest.json"
        os.replace(tmp, target)
        return target


def read_manifest(path: str | Path) -> dict:
    p = Path(path)
    if p.is_dir():
        p = p / "manifest.json"
    return json.loads(p.read_text())
