"""Scenario preparation and recording shared by both backends."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import EPS0, MU0
from .grid import (CoefficientGrid, MaterialGrid, ScenarioSpec, compute_coefficients,
                   courant_time_step, max_phase_velocity, rasterize)
from .pml import apply_profile, build_profile
from .record import SimulationRecord
from .scenario_io import scenario_hash
from .sources import source_series


@dataclass(frozen=True)
class Setup:
    """Everything a backend needs to run a scenario.

    ``source_values[j, n]`` is the amplitude source ``j`` adds at step ``n``;
    ``source_cells[j]`` its ``(i, k)`` cell arrays.
    """

    scenario: ScenarioSpec
    materials: MaterialGrid
    coeffs: CoefficientGrid
    split: bool
    source_values: np.ndarray
    source_cells: tuple[tuple[np.ndarray, np.ndarray], ...]

    @property
    def n_steps(self) -> int:
        return self.source_values.shape[1]

    @property
    def dtype(self):
        return self.coeffs.dtype


def build_materials(scenario: ScenarioSpec) -> MaterialGrid:
    """Rasterize and, when the scenario has one, add the PML profile.

    The profile is matched to the background medium.
    """
    materials = rasterize(scenario)
    if scenario.pml is not None:
        bg = scenario.background
        profile = build_profile(scenario.pml, scenario.nx, scenario.nz, scenario.dx,
                                scenario.dz, bg.eps_r * EPS0, bg.mu_r * MU0)
        materials = apply_profile(materials, profile)
    return materials


def prepare(scenario: ScenarioSpec, *, split: bool | None = None, dt: float | None = None,
            n_steps: int | None = None, dtype=np.float64) -> Setup:
    """Rasterize, time-step and precompute coefficients and source series.

    ``split`` defaults to ``True`` iff the scenario has a PML. ``dt`` overrides
    the Courant-derived step (used to probe the stability limit).
    """
    materials = build_materials(scenario)
    if split is None:
        split = scenario.pml is not None
    if dt is None:
        dt = courant_time_step(scenario.dx, scenario.dz, max_phase_velocity(materials),
                               scenario.courant_factor)
    coeffs = compute_coefficients(materials, dt, dtype=dtype)
    steps = scenario.n_steps if n_steps is None else n_steps
    values = np.array([source_series(s, steps, dt) for s in scenario.sources]).reshape(-1, steps)
    cells = tuple(s.cells(scenario.nz) for s in scenario.sources)
    return Setup(scenario, materials, coeffs, bool(split), values, cells)


class Recorder:
    """Collects probe samples, snapshots and column series step by step."""

    def __init__(self, setup: Setup, backend: str, **extra_meta):
        sc = setup.scenario
        self.setup = setup
        self.n_steps = setup.n_steps
        self.probe_coords = sc.probes
        self.probe_i = np.array([p[0] for p in sc.probes], dtype=np.intp)
        self.probe_k = np.array([p[1] for p in sc.probes], dtype=np.intp)
        self.probes = np.zeros((len(sc.probes), self.n_steps))
        self.columns = {c: np.zeros((self.n_steps, sc.nz)) for c in sc.columns}
        self._rows = np.arange(sc.nz)
        self.snapshots: dict[int, np.ndarray] = {}
        self.every = sc.snapshot_every
        self.recorded = 0
        c = setup.coeffs
        self.metadata = dict(
            backend=backend, dt=c.dt, dx=c.dx, dz=c.dz, nx=sc.nx, nz=sc.nz,
            scenario_hash=scenario_hash(sc), split=setup.split, **extra_meta,
        )

    def wants_snapshot(self, n: int) -> bool:
        return self.every > 0 and (n + 1) % self.every == 0

    def record(self, n: int, ey_at, ey_field) -> None:
        """Store step ``n``. ``ey_at(i, k)`` samples E_y at index arrays and
        ``ey_field()`` returns the whole field (only called for snapshots)."""
        if self.probe_i.size:
            self.probes[:, n] = ey_at(self.probe_i, self.probe_k)
        for col, series in self.columns.items():
            series[n] = ey_at(np.full(self._rows.size, col), self._rows)
        if self.wants_snapshot(n):
            self.snapshots[n] = np.array(ey_field(), dtype=np.float64)
        self.recorded = n + 1

    def finish(self, valid: bool = True) -> SimulationRecord:
        m = self.recorded
        return SimulationRecord(
            probe_coords=self.probe_coords,
            probes=self.probes[:, :m].copy(),
            snapshots=dict(self.snapshots),
            columns={c: s[:m].copy() for c, s in self.columns.items()},
            metadata=dict(self.metadata, n_steps=self.n_steps),
            valid=valid,
        )
