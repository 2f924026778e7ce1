"""Simulation records and their on-disk formats.

Snapshot files: 16-byte header (magic ``GEMF``, little-endian u32 ``nx``,
u32 ``nz``, u32 reserved = 0) followed by ``nz`` rows of ``nx`` little-endian
float64 values. Waveform files: one value per line, 17 significant digits.
Both reload bit-exactly.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MAGIC = b"GEMF"
_HEADER = struct.Struct("<4sIII")


@dataclass
class SimulationRecord:
    """Probe waveforms, snapshots and column series produced by one run.

    ``probes`` has shape ``(n_probes, n_recorded)``; ``snapshots`` maps a
    0-based step to the E_y field after that step; ``columns`` maps a column
    index ``i`` to an ``(n_recorded, nz)`` array of E_y along that column.
    """

    probe_coords: tuple[tuple[int, int], ...]
    probes: np.ndarray
    snapshots: dict[int, np.ndarray] = field(default_factory=dict)
    columns: dict[int, np.ndarray] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    valid: bool = True

    @property
    def n_recorded(self) -> int:
        return self.probes.shape[1]

    def schedule(self) -> tuple:
        return (tuple(self.probe_coords), self.n_recorded,
                tuple(sorted(self.snapshots)), tuple(sorted(self.columns)))

    def samples(self) -> np.ndarray:
        """All spatiotemporal samples concatenated in a fixed order."""
        parts = [self.probes.ravel()]
        parts += [self.snapshots[s].ravel() for s in sorted(self.snapshots)]
        parts += [self.columns[c].ravel() for c in sorted(self.columns)]
        return np.concatenate(parts) if parts else np.zeros(0)


def write_snapshot(array: np.ndarray, path) -> None:
    a = np.asarray(array, dtype="<f8")
    if a.ndim != 2:
        raise ValueError(f"snapshot must be 2D, got shape {a.shape}")
    nz, nx = a.shape
    path = Path(path)
    try:
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, nx, nz, 0))
            fh.write(np.ascontiguousarray(a).tobytes())
    except OSError as exc:
        raise OSError(f"cannot write snapshot {path}: {exc}") from exc


def read_snapshot(path) -> np.ndarray:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise OSError(f"cannot read snapshot {path}: {exc}") from exc
    if len(data) < _HEADER.size:
        raise ValueError(f"{path}: truncated snapshot header")
    magic, nx, nz, _ = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    expected = _HEADER.size + 8 * nx * nz
    if len(data) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(data)}")
    return np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(nz, nx).astype(np.float64)


def write_waveform(series: np.ndarray, path) -> None:
    path = Path(path)
    text = "".join(f"{v:.17g}\n" for v in np.asarray(series, dtype=np.float64).tolist())
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write waveform {path}: {exc}") from exc


def read_waveform(path) -> np.ndarray:
    path = Path(path)
    try:
        lines = path.read_text().split()
    except OSError as exc:
        raise OSError(f"cannot read waveform {path}: {exc}") from exc
    return np.array([float(v) for v in lines], dtype=np.float64)


def save_record(record: SimulationRecord, directory) -> Path:
    """Write a record as ``metadata.json`` plus waveform and snapshot files."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    meta = dict(record.metadata)
    meta.update(
        valid=record.valid,
        n_recorded=record.n_recorded,
        probes=[list(p) for p in record.probe_coords],
        snapshot_steps=sorted(record.snapshots),
        columns=sorted(record.columns),
    )
    (out / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    for j in range(len(record.probe_coords)):
        write_waveform(record.probes[j], out / f"probe_{j:03d}.txt")
    for step, snap in record.snapshots.items():
        write_snapshot(snap, out / f"snap_{step:06d}.gemf")
    for col, series in record.columns.items():
        write_snapshot(series, out / f"column_{col:05d}.gemf")
    return out


def load_record(directory) -> SimulationRecord:
    src = Path(directory)
    try:
        meta = json.loads((src / "metadata.json").read_text())
    except OSError as exc:
        raise OSError(f"cannot read record in {src}: {exc}") from exc
    coords = tuple(tuple(p) for p in meta.pop("probes"))
    n = meta.pop("n_recorded")
    probes = np.zeros((len(coords), n))
    for j in range(len(coords)):
        probes[j] = read_waveform(src / f"probe_{j:03d}.txt")
    snaps = {s: read_snapshot(src / f"snap_{s:06d}.gemf") for s in meta.pop("snapshot_steps")}
    cols = {c: read_snapshot(src / f"column_{c:05d}.gemf") for c in meta.pop("columns")}
    valid = meta.pop("valid")
    return SimulationRecord(coords, probes, snaps, cols, meta, valid)
