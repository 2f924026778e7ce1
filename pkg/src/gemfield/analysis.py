"""Equivalence metrics between records and SAR post-processing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import MaterialGrid
from .record import SimulationRecord


def r_squared(reference: np.ndarray, other: np.ndarray) -> float:
    """``1 - SS_res / SS_tot`` with ``reference`` as the baseline.

    Sums are exactly rounded (``math.fsum``), so identical inputs give exactly 1.
    A constant reference with a nonzero residual gives ``-inf``.
    """
    a = np.asarray(reference, dtype=np.float64).ravel()
    b = np.asarray(other, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ValueError(f"sample counts differ: {a.size} vs {b.size}")
    ss_res = math.fsum(((a - b) ** 2).tolist())
    if ss_res == 0.0:
        return 1.0
    mean = math.fsum(a.tolist()) / a.size
    ss_tot = math.fsum(((a - mean) ** 2).tolist())
    return 1.0 - ss_res / ss_tot if ss_tot > 0 else -math.inf


def _diffs(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    if a.size == 0:
        return 0.0, 0.0
    max_abs = float(np.max(np.abs(a - b)))
    scale = float(np.max(np.abs(a)))
    max_rel = max_abs / scale if scale > 0 else (0.0 if max_abs == 0 else math.inf)
    return max_abs, max_rel


@dataclass
class ComparisonReport:
    """R² and difference norms of record ``b`` against reference ``a``.

    ``passed`` requires the overall R² and every per-probe R² to reach
    ``threshold``.
    """

    r2: float
    max_abs: float
    max_rel: float
    n_samples: int
    threshold: float
    per_probe: list[dict] = field(default_factory=list)

    @property
    def min_probe_r2(self) -> float:
        return min((p["r2"] for p in self.per_probe), default=self.r2)

    @property
    def passed(self) -> bool:
        return self.r2 >= self.threshold and self.min_probe_r2 >= self.threshold

    def to_dict(self) -> dict:
        return {"r2": self.r2, "max_abs": self.max_abs, "max_rel": self.max_rel,
                "n_samples": self.n_samples, "threshold": self.threshold,
                "passed": self.passed, "per_probe": self.per_probe}

    def to_text(self) -> str:
        lines = [f"samples      {self.n_samples}",
                 f"R^2          {self.r2:.15g}",
                 f"max |a-b|    {self.max_abs:.6e}",
                 f"max rel      {self.max_rel:.6e}"]
        for p in self.per_probe:
            lines.append(f"probe {p['index']:3d} at {tuple(p['cell'])}: R^2 {p['r2']:.15g}, "
                         f"max |a-b| {p['max_abs']:.3e}")
        lines.append(f"{'PASS' if self.passed else 'FAIL'} (threshold {self.threshold})")
        return "\n".join(lines)


def compare(a: SimulationRecord, b: SimulationRecord, threshold: float = 0.9999) -> ComparisonReport:
    """Compare ``b`` against the reference record ``a`` over all samples."""
    if a.schedule() != b.schedule():
        raise ValueError("records have different probe/snapshot/column schedules")
    sa, sb = a.samples(), b.samples()
    max_abs, max_rel = _diffs(sa, sb)
    per_probe = []
    for j, cell in enumerate(a.probe_coords):
        pa, pb = a.probes[j], b.probes[j]
        pm, pr = _diffs(pa, pb)
        per_probe.append({"index": j, "cell": list(cell), "r2": r_squared(pa, pb),
                          "max_abs": pm, "max_rel": pr})
    return ComparisonReport(r_squared(sa, sb), max_abs, max_rel, int(sa.size), threshold, per_probe)


def compute_sar(record: SimulationRecord, materials: MaterialGrid, column: int,
                window: tuple[int, int] | None = None, density=None) -> np.ndarray:
    """Point SAR ``sigma * E_rms**2 / rho`` (W/kg) along column ``i = column``.

    ``E_rms**2`` is the mean of ``E_y**2`` over recorded steps
    ``window = (start, stop)`` (default: all). ``density`` overrides the
    per-cell densities of ``materials``. Cells with zero conductivity give 0.
    """
    if column not in record.columns:
        raise ValueError(f"record has no column monitor at i = {column}")
    series = record.columns[column]
    start, stop = window if window is not None else (0, series.shape[0])
    if not 0 <= start < stop <= series.shape[0]:
        raise ValueError(f"window {window} outside the {series.shape[0]} recorded steps")
    sigma = materials.sigma[:, column]
    rho = materials.density[:, column] if density is None else np.broadcast_to(
        np.asarray(density, dtype=np.float64), sigma.shape)
    lossy = sigma > 0
    if np.any(lossy & ~(rho > 0)):
        k = int(np.flatnonzero(lossy & ~(rho > 0))[0])
        raise ValueError(f"lossy cell k = {k} has non-positive density {rho[k]}")
    e2 = np.mean(series[start:stop] ** 2, axis=0)
    sar = np.zeros_like(e2)
    sar[lossy] = sigma[lossy] * e2[lossy] / rho[lossy]
    return sar
