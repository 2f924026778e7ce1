"""Graph message-passing backend.

The hidden state is one scalar per graph node. A step runs the H phase, then
the E phase (each node replaced by the weighted sum over its in-edges), then
adds the source bias to the E nodes.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .constants import DIVERGENCE_LIMIT
from .errors import DivergenceError
from .fdtd import FieldState
from .graph import E_PHASE, H_PHASE, FieldGraph, FieldKind, build_graph
from .grid import ScenarioSpec
from .record import SimulationRecord
from .simulation import Recorder, Setup, prepare


@dataclass
class HiddenState:
    """Node values ``h`` at time index ``n``."""

    h: np.ndarray
    n: int = 0

    @classmethod
    def zeros(cls, graph: FieldGraph) -> HiddenState:
        return cls(np.zeros(graph.node_count, dtype=graph.weight.dtype))

    def copy(self) -> HiddenState:
        return HiddenState(self.h.copy(), self.n)


def _pass_inplace(graph: FieldGraph, h: np.ndarray, phase: int, ordered: bool) -> int:
    rows = graph.phase_rows[phase]
    if ordered:
        return _kernels.csr_phase_ordered(rows, graph.indptr, graph.src, graph.weight, h,
                                          DIVERGENCE_LIMIT)
    bad = _kernels.csr_phase_parallel(rows, graph.indptr, graph.src, graph.weight, h,
                                      DIVERGENCE_LIMIT)
    if bad < -1:
        return int(rows[_kernels.first_bad(h[rows])])
    return -1


def message_pass(graph: FieldGraph, h: np.ndarray, phase: int, *, ordered: bool = True) -> np.ndarray:
    """Return ``h`` with every node of ``phase`` replaced by its weighted in-sum.

    Raises :class:`DivergenceError` (step -1) if a result is non-finite or
    exceeds the divergence limit.
    """
    out = np.array(h, dtype=graph.weight.dtype)
    bad = _pass_inplace(graph, out, phase, ordered)
    if bad >= 0:
        raise DivergenceError(-1, bad)
    return out


def add_bias(graph: FieldGraph, h: np.ndarray, values) -> None:
    """Add each source's amplitude (times its slot scale) to its E nodes, in place."""
    for (nodes, scale), v in zip(graph.bias_slots, values):
        h[nodes] += scale * v


def gem_step(graph: FieldGraph, state: HiddenState, values=(), *, ordered: bool = True,
             inplace: bool = False) -> HiddenState:
    """Advance one time step; ``values[j]`` is source ``j``'s amplitude at this step."""
    s = state if inplace else state.copy()
    for phase in (H_PHASE, E_PHASE):
        bad = _pass_inplace(graph, s.h, phase, ordered)
        if bad >= 0:
            raise DivergenceError(s.n, bad)
    add_bias(graph, s.h, values)
    s.n += 1
    return s


def scatter(state: FieldState, graph: FieldGraph) -> HiddenState:
    """Pack a field state into node values."""
    if state.split != graph.split:
        raise ValueError("field state and graph disagree on split mode")
    h = np.zeros(graph.node_count, dtype=graph.weight.dtype)
    arrays = {FieldKind.HX: state.hx, FieldKind.HZ: state.hz}
    if graph.split:
        arrays.update({FieldKind.EYX: state.eyx, FieldKind.EYZ: state.eyz})
    else:
        arrays[FieldKind.EY] = state.ey
    for kind, arr in arrays.items():
        h[graph.maps[kind]] = arr
    return HiddenState(h, state.n)


def gather(h: np.ndarray, graph: FieldGraph, kind: FieldKind) -> np.ndarray:
    """``(nz, nx)`` field of ``kind``. E_y on a split graph is E_yx + E_yz."""
    kind = FieldKind(kind)
    if kind == FieldKind.EY and graph.split:
        return h[graph.maps[FieldKind.EYX]] + h[graph.maps[FieldKind.EYZ]]
    if kind not in graph.maps:
        raise ValueError(f"{kind.name} is not a node kind of this graph")
    return h[graph.maps[kind]]


def to_field_state(state: HiddenState, graph: FieldGraph) -> FieldState:
    g = lambda kind: gather(state.h, graph, kind)  # noqa: E731
    if graph.split:
        return FieldState(g(FieldKind.HX), g(FieldKind.HZ), eyx=g(FieldKind.EYX),
                          eyz=g(FieldKind.EYZ), n=state.n)
    return FieldState(g(FieldKind.HX), g(FieldKind.HZ), ey=g(FieldKind.EY), n=state.n)


def run_gem(scenario: ScenarioSpec | None = None, *, setup: Setup | None = None,
            split: bool | None = None, ordered: bool = True,
            graph: FieldGraph | None = None) -> SimulationRecord:
    """Run a scenario with message passing; same record schema as ``fdtd.run``."""
    if setup is None:
        setup = prepare(scenario, split=split)
    t0 = time.perf_counter()
    if graph is None:
        graph = build_graph(setup.coeffs, setup.split, setup.scenario.sources)
    build_s = time.perf_counter() - t0
    state = HiddenState.zeros(graph)
    rec = Recorder(setup, "gem", ordered=ordered, graph_build_s=build_s,
                   nodes=graph.node_count, edges=graph.edge_count)
    h = state.h
    if graph.split:
        mx, mz = graph.maps[FieldKind.EYX], graph.maps[FieldKind.EYZ]
        at = lambda i, k: h[mx[k, i]] + h[mz[k, i]]  # noqa: E731
    else:
        my = graph.maps[FieldKind.EY]
        at = lambda i, k: h[my[k, i]]  # noqa: E731
    field = lambda: gather(h, graph, FieldKind.EY)  # noqa: E731
    for n in range(setup.n_steps):
        try:
            gem_step(graph, state, setup.source_values[:, n], ordered=ordered, inplace=True)
        except DivergenceError as exc:
            exc.step = n
            exc.record = rec.finish(valid=False)
            raise
        rec.record(n, at, field)
    return rec.finish()
