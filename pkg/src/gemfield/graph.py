"""Compilation of the update coefficients into a static weighted graph.

Node layout (per row ``k`` of an ``nx``-wide grid):

plain   H_x ``u = i + 3k nx``; H_z ``q = 2i + nx(3k+1)``; E_y ``t = 2i + 1 + nx(3k+1)``
split   H_x ``u = i + 4k nx``; H_z ``q = 3i + nx(4k+1)``;
        E_yx ``tx = 3i + 1 + nx(4k+1)``; E_yz ``tz = 3i + 2 + nx(4k+1)``

Each destination node's in-edges are its physical stencil neighbours plus a
self-loop, stored grouped by destination (CSR) with sources in ascending flat
index. Neighbours that fall outside the grid are dropped.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from .grid import CoefficientGrid
from .sources import SourceSpec


class FieldKind(enum.IntEnum):
    HX = 0
    HZ = 1
    EY = 2
    EYX = 3
    EYZ = 4

    @property
    def is_magnetic(self) -> bool:
        return self in (FieldKind.HX, FieldKind.HZ)


H_PHASE = 1
E_PHASE = 2

PLAIN_KINDS = (FieldKind.HX, FieldKind.HZ, FieldKind.EY)
SPLIT_KINDS = (FieldKind.HX, FieldKind.HZ, FieldKind.EYX, FieldKind.EYZ)

K = FieldKind
# destination kind -> in-neighbours in ascending flat-index order:
# (source kind, di, dk, coefficient name, sign)
STENCILS = {
    False: {
        K.HX: ((K.EY, 0, -1, "dbx", -1), (K.HX, 0, 0, "dax", 1), (K.EY, 0, 0, "dbx", 1)),
        K.HZ: ((K.EY, -1, 0, "dbz", 1), (K.HZ, 0, 0, "daz", 1), (K.EY, 0, 0, "dbz", -1)),
        K.EY: ((K.HX, 0, 0, "cbz", -1), (K.HZ, 0, 0, "cbx", 1), (K.EY, 0, 0, "ca", 1),
               (K.HZ, 1, 0, "cbx", -1), (K.HX, 0, 1, "cbz", 1)),
    },
    True: {
        K.HX: ((K.EYX, 0, -1, "dbx_s", -1), (K.EYZ, 0, -1, "dbx_s", -1), (K.HX, 0, 0, "dax_s", 1),
               (K.EYX, 0, 0, "dbx_s", 1), (K.EYZ, 0, 0, "dbx_s", 1)),
        K.HZ: ((K.EYX, -1, 0, "dbz_s", 1), (K.EYZ, -1, 0, "dbz_s", 1), (K.HZ, 0, 0, "daz_s", 1),
               (K.EYX, 0, 0, "dbz_s", -1), (K.EYZ, 0, 0, "dbz_s", -1)),
        K.EYX: ((K.HZ, 0, 0, "cbx_s", 1), (K.EYX, 0, 0, "ca_x", 1), (K.HZ, 1, 0, "cbx_s", -1)),
        K.EYZ: ((K.HX, 0, 0, "cbz_s", -1), (K.EYZ, 0, 0, "ca_z", 1), (K.HX, 0, 1, "cbz_s", 1)),
    },
}
del K


def kinds_for(split: bool) -> tuple[FieldKind, ...]:
    return SPLIT_KINDS if split else PLAIN_KINDS


def node_index(kind, i, k, nx: int, nz: int, *, split: bool = False):
    """Flat node index of field ``kind`` at cell ``(i, k)``; accepts arrays."""
    kind = FieldKind(kind)
    if kind not in kinds_for(split):
        raise ValueError(f"{kind.name} nodes do not exist in a {'split' if split else 'plain'} graph")
    i_arr = np.asarray(i)
    k_arr = np.asarray(k)
    if np.any((i_arr < 0) | (i_arr >= nx) | (k_arr < 0) | (k_arr >= nz)):
        raise ValueError(f"cell index out of range for a {nx}x{nz} grid")
    i_arr = i_arr.astype(np.int64)
    k_arr = k_arr.astype(np.int64)
    if split:
        base = nx * (4 * k_arr + 1)
        out = {FieldKind.HX: i_arr + 4 * k_arr * nx, FieldKind.HZ: 3 * i_arr + base,
               FieldKind.EYX: 3 * i_arr + 1 + base, FieldKind.EYZ: 3 * i_arr + 2 + base}[kind]
    else:
        base = nx * (3 * k_arr + 1)
        out = {FieldKind.HX: i_arr + 3 * k_arr * nx, FieldKind.HZ: 2 * i_arr + base,
               FieldKind.EY: 2 * i_arr + 1 + base}[kind]
    return int(out) if out.ndim == 0 else out


def index_maps(nx: int, nz: int, split: bool) -> dict[FieldKind, np.ndarray]:
    """``{kind: (nz, nx) array of node ids}``."""
    kk, ii = np.meshgrid(np.arange(nz), np.arange(nx), indexing="ij")
    return {kind: node_index(kind, ii, kk, nx, nz, split=split) for kind in kinds_for(split)}


@dataclass(frozen=True)
class FieldGraph:
    """Static weighted directed graph of one FDTD step.

    ``indptr``/``src``/``weight`` hold in-edges grouped by destination. Edges
    of destination ``v`` are ``src[indptr[v]:indptr[v+1]]``. ``phase[v]`` is 1
    for H nodes and 2 for E nodes. ``bias_slots[j]`` are the E node ids and
    the scale with which source ``j``'s amplitude is added after each step.
    """

    nx: int
    nz: int
    split: bool
    node_kind: np.ndarray
    phase: np.ndarray
    indptr: np.ndarray
    src: np.ndarray
    weight: np.ndarray
    maps: dict = field(repr=False)
    phase_rows: dict = field(repr=False)
    bias_slots: tuple = ()

    @property
    def node_count(self) -> int:
        return self.node_kind.shape[0]

    @property
    def edge_count(self) -> int:
        return self.src.shape[0]

    def in_degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    def dst(self) -> np.ndarray:
        """Destination of every edge (expanded from ``indptr``)."""
        return np.repeat(np.arange(self.node_count, dtype=np.int64), self.in_degree())

    def observable_nodes(self, i, k):
        """Node ids whose sum is E_y at cells ``(i, k)``."""
        if self.split:
            return self.maps[FieldKind.EYX][k, i], self.maps[FieldKind.EYZ][k, i]
        return (self.maps[FieldKind.EY][k, i],)


def _freeze(*arrays):
    for a in arrays:
        a.flags.writeable = False


def build_graph(coeffs: CoefficientGrid, split: bool = False,
                sources: tuple[SourceSpec, ...] = ()) -> FieldGraph:
    """Compile ``coeffs`` into the plain (3 nodes/cell) or split (4 nodes/cell) graph."""
    nx, nz = coeffs.nx, coeffs.nz
    kinds = kinds_for(split)
    maps = index_maps(nx, nz, split)
    n_nodes = len(kinds) * nx * nz
    idx_dtype = np.int32 if n_nodes < 2**31 else np.int64
    kk, ii = np.meshgrid(np.arange(nz), np.arange(nx), indexing="ij")

    node_kind = np.empty(n_nodes, dtype=np.int8)
    degree = np.zeros(n_nodes, dtype=np.int64)
    masks = {}
    for kind in kinds:
        node_kind[maps[kind]] = kind
        for slot, (_, di, dk, _, _) in enumerate(STENCILS[split][kind]):
            valid = (ii + di >= 0) & (ii + di < nx) & (kk + dk >= 0) & (kk + dk < nz)
            masks[kind, slot] = valid
            degree[maps[kind][valid]] += 1

    indptr = np.zeros(n_nodes + 1, dtype=np.int64)
    np.cumsum(degree, out=indptr[1:])
    src = np.empty(indptr[-1], dtype=idx_dtype)
    weight = np.empty(indptr[-1], dtype=coeffs.dtype)
    for kind in kinds:
        cursor = indptr[:-1][maps[kind]]
        for slot, (skind, di, dk, name, sign) in enumerate(STENCILS[split][kind]):
            valid = masks[kind, slot]
            pos = cursor[valid]
            src[pos] = maps[skind][kk[valid] + dk, ii[valid] + di]
            coef = getattr(coeffs, name)[valid]
            weight[pos] = coef if sign > 0 else -coef
            cursor = cursor + valid
        del cursor

    phase = np.where(np.isin(node_kind, [FieldKind.HX, FieldKind.HZ]), H_PHASE, E_PHASE)
    phase = phase.astype(np.int8)
    phase_rows = {p: np.flatnonzero(phase == p).astype(np.int64) for p in (H_PHASE, E_PHASE)}

    slots = []
    for s in sources:
        ci, ck = s.cells(nz)
        if split:
            nodes = np.concatenate([maps[FieldKind.EYX][ck, ci], maps[FieldKind.EYZ][ck, ci]])
            slots.append((nodes, 0.5))
        else:
            slots.append((maps[FieldKind.EY][ck, ci], 1.0))

    _freeze(node_kind, phase, indptr, src, weight, *maps.values(), *phase_rows.values(),
            *(n for n, _ in slots))
    return FieldGraph(nx=nx, nz=nz, split=split, node_kind=node_kind, phase=phase,
                      indptr=indptr, src=src, weight=weight, maps=maps, phase_rows=phase_rows,
                      bias_slots=tuple(slots))


# --- validation -------------------------------------------------------------

@dataclass
class ValidationReport:
    """Outcome of :func:`validate_graph`: failure messages per named check."""

    failures: dict[str, list[str]]
    degree_histogram: dict[str, dict[int, int]] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not any(self.failures.values())

    def summary(self, limit: int = 10) -> str:
        lines = []
        for name, msgs in self.failures.items():
            lines.append(f"[{'PASS' if not msgs else 'FAIL'}] {name}")
            lines += [f"    {m}" for m in msgs[:limit]]
            if len(msgs) > limit:
                lines.append(f"    ... {len(msgs) - limit} more")
        for name, hist in self.degree_histogram.items():
            lines.append(f"  in-degree {name}: " +
                         ", ".join(f"{d}:{c}" for d, c in sorted(hist.items())))
        lines.append("graph OK" if self.ok else "graph INVALID")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {"ok": self.ok, "failures": self.failures,
                "degree_histogram": {k: {str(d): c for d, c in v.items()}
                                     for k, v in self.degree_histogram.items()}}


# (destination kind, source kind, di, dk) -> (coefficient, sign). Kept separate
# from STENCILS so the validator does not read the builder's table.
def _expected_edges(split: bool):
    K = FieldKind
    if not split:
        return {
            (K.HX, K.HX, 0, 0): ("dax", 1), (K.HX, K.EY, 0, 0): ("dbx", 1),
            (K.HX, K.EY, 0, -1): ("dbx", -1),
            (K.HZ, K.HZ, 0, 0): ("daz", 1), (K.HZ, K.EY, 0, 0): ("dbz", -1),
            (K.HZ, K.EY, -1, 0): ("dbz", 1),
            (K.EY, K.EY, 0, 0): ("ca", 1), (K.EY, K.HX, 0, 1): ("cbz", 1),
            (K.EY, K.HX, 0, 0): ("cbz", -1), (K.EY, K.HZ, 1, 0): ("cbx", -1),
            (K.EY, K.HZ, 0, 0): ("cbx", 1),
        }
    table = {
        (K.EYX, K.EYX, 0, 0): ("ca_x", 1), (K.EYX, K.HZ, 1, 0): ("cbx_s", -1),
        (K.EYX, K.HZ, 0, 0): ("cbx_s", 1),
        (K.EYZ, K.EYZ, 0, 0): ("ca_z", 1), (K.EYZ, K.HX, 0, 1): ("cbz_s", 1),
        (K.EYZ, K.HX, 0, 0): ("cbz_s", -1),
        (K.HX, K.HX, 0, 0): ("dax_s", 1), (K.HZ, K.HZ, 0, 0): ("daz_s", 1),
    }
    for sub in (K.EYX, K.EYZ):
        table[K.HX, sub, 0, 0] = ("dbx_s", 1)
        table[K.HX, sub, 0, -1] = ("dbx_s", -1)
        table[K.HZ, sub, 0, 0] = ("dbz_s", -1)
        table[K.HZ, sub, -1, 0] = ("dbz_s", 1)
    return table


def validate_graph(graph: FieldGraph, coeffs: CoefficientGrid, max_messages: int = 50) -> ValidationReport:
    """Check index bijection, in-degrees, edge weights and phase partition."""
    nx, nz, split = graph.nx, graph.nz, graph.split
    kinds = kinds_for(split)
    failures: dict[str, list[str]] = {"index bijection": [], "degree": [],
                                      "weight reconciliation": [], "phase partition": []}
    hist: dict[str, dict[int, int]] = {}
    n_expected = len(kinds) * nx * nz

    # (a) index maps computed afresh, independent of graph.maps
    maps = index_maps(nx, nz, split)
    msgs = failures["index bijection"]
    if graph.node_count != n_expected:
        msgs.append(f"node count {graph.node_count} != {len(kinds)}*nx*nz = {n_expected}")
    allidx = np.concatenate([m.ravel() for m in maps.values()])
    if not np.array_equal(np.sort(allidx), np.arange(n_expected)):
        msgs.append("index maps are not a bijection onto [0, node_count)")
    if graph.node_count == n_expected:
        for kind in kinds:
            wrong = np.flatnonzero(graph.node_kind[maps[kind].ravel()] != kind)
            msgs += [f"node {int(maps[kind].ravel()[w])} tagged "
                     f"{FieldKind(int(graph.node_kind[maps[kind].ravel()[w]])).name}, "
                     f"expected {kind.name}" for w in wrong[:max_messages]]
            if not np.array_equal(graph.maps.get(kind), maps[kind]):
                msgs.append(f"stored index map for {kind.name} differs from the formula")
    if msgs:
        return ValidationReport(failures, hist)

    cell_i = np.empty(n_expected, dtype=np.int64)
    cell_k = np.empty(n_expected, dtype=np.int64)
    true_kind = np.empty(n_expected, dtype=np.int8)
    kk, ii = np.meshgrid(np.arange(nz), np.arange(nx), indexing="ij")
    for kind in kinds:
        cell_i[maps[kind]] = ii
        cell_k[maps[kind]] = kk
        true_kind[maps[kind]] = kind

    # (b) in-degree per node from the count of in-grid neighbours
    table = _expected_edges(split)
    expected_deg = np.zeros(n_expected, dtype=np.int64)
    for (dkind, _, di, dk) in table:
        ok = (ii + di >= 0) & (ii + di < nx) & (kk + dk >= 0) & (kk + dk < nz)
        expected_deg[maps[dkind]] += ok
    deg = graph.in_degree()
    msgs = failures["degree"]
    if deg.shape[0] != n_expected or graph.indptr[0] != 0 or np.any(deg < 0):
        msgs.append("malformed indptr")
        return ValidationReport(failures, hist)
    for kind in kinds:
        nodes = maps[kind].ravel()
        hist[kind.name] = dict(Counter(deg[nodes].tolist()))
        bad = nodes[deg[nodes] != expected_deg[nodes]]
        msgs += [f"node {int(v)} ({kind.name} at i={int(cell_i[v])}, k={int(cell_k[v])}) has "
                 f"in-degree {int(deg[v])}, expected {int(expected_deg[v])}"
                 for v in bad[:max_messages]]

    # (c) every edge decodes to a known stencil entry with an exactly equal weight
    msgs = failures["weight reconciliation"]
    dst = graph.dst()
    src = graph.src.astype(np.int64)
    if np.any((src < 0) | (src >= n_expected)):
        msgs.append("edge source out of range")
        return ValidationReport(failures, hist)
    same_row = dst[1:] == dst[:-1]
    unsorted = np.flatnonzero(same_row & (src[1:] <= src[:-1]))
    msgs += [f"edges of node {int(dst[p])} not strictly ascending at source {int(src[p + 1])}"
             for p in unsorted[:max_messages]]
    dkind = true_kind[dst]
    skind = true_kind[src]
    di = cell_i[src] - cell_i[dst]
    dk = cell_k[src] - cell_k[dst]
    matched = np.zeros(dst.shape[0], dtype=bool)
    for (tk, sk, oi, ok_), (name, sign) in table.items():
        sel = np.flatnonzero((dkind == tk) & (skind == sk) & (di == oi) & (dk == ok_))
        if not sel.size:
            continue
        matched[sel] = True
        coef = getattr(coeffs, name)[cell_k[dst[sel]], cell_i[dst[sel]]]
        expected = coef if sign > 0 else -coef
        wrong = sel[graph.weight[sel] != expected]
        for p in wrong[:max_messages]:
            v = int(dst[p])
            exp = expected[np.searchsorted(sel, p)]
            msgs.append(f"edge {v}<-{int(src[p])} ({FieldKind(int(dkind[p])).name}<-"
                        f"{FieldKind(int(skind[p])).name}, offset ({int(di[p])},{int(dk[p])})): "
                        f"weight {graph.weight[p]!r} != {'+' if sign > 0 else '-'}{name}"
                        f"[k={int(cell_k[v])}, i={int(cell_i[v])}] = {exp!r}")
    for p in np.flatnonzero(~matched)[:max_messages]:
        msgs.append(f"edge {int(dst[p])}<-{int(src[p])} matches no stencil entry "
                    f"({FieldKind(int(dkind[p])).name}<-{FieldKind(int(skind[p])).name}, "
                    f"offset ({int(di[p])},{int(dk[p])}))")

    # (d) H nodes in phase 1, E nodes in phase 2, cross-kind edges only
    msgs = failures["phase partition"]
    is_h = np.isin(true_kind, [FieldKind.HX, FieldKind.HZ])
    want = np.where(is_h, H_PHASE, E_PHASE)
    for v in np.flatnonzero(graph.phase != want)[:max_messages]:
        msgs.append(f"node {int(v)} ({FieldKind(int(true_kind[v])).name}) in phase "
                    f"{int(graph.phase[v])}, expected {int(want[v])}")
    cross = (src != dst) & (is_h[src] == is_h[dst])
    for p in np.flatnonzero(cross)[:max_messages]:
        msgs.append(f"edge {int(dst[p])}<-{int(src[p])} joins two nodes of the same phase")
    for p in (H_PHASE, E_PHASE):
        rows = graph.phase_rows.get(p)
        if rows is None or not np.array_equal(rows, np.flatnonzero(want == p)):
            msgs.append(f"phase {p} row list does not match the node kinds")
    return ValidationReport(failures, hist)


def export_edges(graph: FieldGraph, out: TextIO) -> None:
    """Write ``dst src weight phase`` lines, grouped by destination, sources ascending."""
    dst = graph.dst()
    for d, s, w in zip(dst.tolist(), graph.src.tolist(), graph.weight.tolist()):
        out.write(f"{d} {s} {w:.17g} {int(graph.phase[d])}\n")
