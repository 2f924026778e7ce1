"""Reference Yee-grid FDTD stepper (the oracle backend).

One time step is ``step_h`` (H to n+1/2), ``step_e`` (E to n+1), then soft
source injection. Out-of-grid neighbours read as zero. In split mode the
observable field is ``ey = eyx + eyz``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .constants import DIVERGENCE_LIMIT
from .errors import DivergenceError
from .grid import CoefficientGrid, ScenarioSpec
from .record import SimulationRecord
from .simulation import Recorder, Setup, prepare
from .sources import SourceSpec, source_series


@dataclass
class FieldState:
    """Field arrays (shape ``(nz, nx)``) at time index ``n``.

    Plain mode uses ``ey``; split mode uses ``eyx`` and ``eyz`` and leaves
    ``ey`` as ``None``.
    """

    hx: np.ndarray
    hz: np.ndarray
    ey: np.ndarray | None = None
    eyx: np.ndarray | None = None
    eyz: np.ndarray | None = None
    n: int = 0

    @classmethod
    def zeros(cls, nz: int, nx: int, *, split: bool = False, dtype=np.float64) -> FieldState:
        z = lambda: np.zeros((nz, nx), dtype=dtype)  # noqa: E731
        if split:
            return cls(hx=z(), hz=z(), eyx=z(), eyz=z())
        return cls(hx=z(), hz=z(), ey=z())

    @property
    def split(self) -> bool:
        return self.ey is None

    def observable_ey(self) -> np.ndarray:
        return self.eyx + self.eyz if self.split else self.ey

    def copy(self) -> FieldState:
        cp = lambda a: None if a is None else a.copy()  # noqa: E731
        return FieldState(cp(self.hx), cp(self.hz), cp(self.ey), cp(self.eyx), cp(self.eyz), self.n)


def _check(bad: int, n: int) -> None:
    if bad >= 0:
        raise DivergenceError(n, bad)


def step_h(state: FieldState, coeffs: CoefficientGrid, *, inplace: bool = False) -> FieldState:
    """Advance H_x, H_z by half a step from the current E."""
    s = state if inplace else state.copy()
    c = coeffs
    if s.split:
        bad = _kernels.h_split(s.eyx, s.eyz, s.hx, s.hz, c.dax_s, c.dbx_s, c.daz_s, c.dbz_s,
                               DIVERGENCE_LIMIT)
    else:
        bad = _kernels.h_plain(s.ey, s.hx, s.hz, c.dax, c.dbx, c.daz, c.dbz, DIVERGENCE_LIMIT)
    _check(bad, s.n)
    return s


def step_e(state: FieldState, coeffs: CoefficientGrid, *, inplace: bool = False) -> FieldState:
    """Advance E from n to n+1 using the freshly updated H."""
    s = state if inplace else state.copy()
    c = coeffs
    if s.split:
        bad = _kernels.e_split(s.eyx, s.eyz, s.hx, s.hz, c.ca_x, c.cbx_s, c.ca_z, c.cbz_s,
                               DIVERGENCE_LIMIT)
    else:
        bad = _kernels.e_plain(s.ey, s.hx, s.hz, c.ca, c.cbx, c.cbz, DIVERGENCE_LIMIT)
    _check(bad, s.n)
    s.n += 1
    return s


def add_source(state: FieldState, cells: tuple[np.ndarray, np.ndarray], value: float) -> None:
    """Soft injection of ``value`` at the given ``(i, k)`` cells, in place.

    Split mode adds half of the increment to each subcomponent.
    """
    i, k = cells
    if state.split:
        half = 0.5 * value
        state.eyx[k, i] += half
        state.eyz[k, i] += half
    else:
        state.ey[k, i] += value


def inject_source(state: FieldState, source: SourceSpec, n: int, dt: float, nz: int | None = None,
                  *, inplace: bool = False) -> FieldState:
    """Add ``source``'s amplitude at step ``n`` to the field."""
    s = state if inplace else state.copy()
    nz = s.hx.shape[0] if nz is None else nz
    value = source_series(source, n + 1, dt)[n]
    add_source(s, source.cells(nz), value)
    return s


def run(scenario: ScenarioSpec | None = None, *, setup: Setup | None = None,
        split: bool | None = None) -> SimulationRecord:
    """Run a scenario to completion with the stencil backend.

    On divergence the raised :class:`DivergenceError` carries the partial
    record, flagged invalid.
    """
    if setup is None:
        setup = prepare(scenario, split=split)
    sc = setup.scenario
    c = setup.coeffs
    state = FieldState.zeros(sc.nz, sc.nx, split=setup.split, dtype=setup.dtype)
    rec = Recorder(setup, "fdtd")
    if state.split:
        at = lambda i, k: state.eyx[k, i] + state.eyz[k, i]  # noqa: E731
    else:
        at = lambda i, k: state.ey[k, i]  # noqa: E731
    for n in range(setup.n_steps):
        try:
            step_h(state, c, inplace=True)
            step_e(state, c, inplace=True)
        except DivergenceError as exc:
            exc.step = n
            exc.record = rec.finish(valid=False)
            raise
        for j, cells in enumerate(setup.source_cells):
            add_source(state, cells, setup.source_values[j, n])
        rec.record(n, at, state.observable_ey)
    return rec.finish()
