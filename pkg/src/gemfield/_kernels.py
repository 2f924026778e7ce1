"""Compiled inner loops.

Every update is accumulated term by term in ascending flat-index order of the
corresponding graph node's sources (see ``graph.py``), so the stencil kernels
and the ordered message-passing kernel perform the identical sequence of
floating-point operations. Each kernel returns the flat index of the first
value whose magnitude exceeds ``limit`` (or is NaN), else -1.
"""

from __future__ import annotations

import numba
import numpy as np

from .constants import DIVERGENCE_LIMIT

# the system TBB is too old for numba; skip it rather than warn
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

_jit = numba.njit(cache=True, nogil=True)


@_jit
def h_plain(ey, hx, hz, dax, dbx, daz, dbz, limit):
    nz, nx = ey.shape
    bad = -1
    for k in range(nz):
        for i in range(nx):
            # H_x(i,k) <- E_y(i,k-1), H_x(i,k), E_y(i,k)
            if k > 0:
                acc = -dbx[k, i] * ey[k - 1, i]
                acc += dax[k, i] * hx[k, i]
            else:
                acc = dax[k, i] * hx[k, i]
            acc += dbx[k, i] * ey[k, i]
            hx[k, i] = acc
            if bad < 0 and not abs(acc) <= limit:
                bad = k * nx + i
            # H_z(i,k) <- E_y(i-1,k), H_z(i,k), E_y(i,k)
            if i > 0:
                acc = dbz[k, i] * ey[k, i - 1]
                acc += daz[k, i] * hz[k, i]
            else:
                acc = daz[k, i] * hz[k, i]
            acc += -dbz[k, i] * ey[k, i]
            hz[k, i] = acc
            if bad < 0 and not abs(acc) <= limit:
                bad = k * nx + i
    return bad


@_jit
def e_plain(ey, hx, hz, ca, cbx, cbz, limit):
    nz, nx = ey.shape
    bad = -1
    for k in range(nz):
        for i in range(nx):
            # E_y(i,k) <- H_x(i,k), H_z(i,k), E_y(i,k), H_z(i+1,k), H_x(i,k+1)
            acc = -cbz[k, i] * hx[k, i]
            acc += cbx[k, i] * hz[k, i]
            acc += ca[k, i] * ey[k, i]
            if i + 1 < nx:
                acc += -cbx[k, i] * hz[k, i + 1]
            if k + 1 < nz:
                acc += cbz[k, i] * hx[k + 1, i]
            ey[k, i] = acc
            if bad < 0 and not abs(acc) <= limit:
                bad = k * nx + i
    return bad


@_jit
def h_split(eyx, eyz, hx, hz, dax, dbx, daz, dbz, limit):
    nz, nx = eyx.shape
    bad = -1
    for k in range(nz):
        for i in range(nx):
            # H_x(i,k) <- E_yx(i,k-1), E_yz(i,k-1), H_x(i,k), E_yx(i,k), E_yz(i,k)
            if k > 0:
                acc = -dbx[k, i] * eyx[k - 1, i]
                acc += -dbx[k, i] * eyz[k - 1, i]
                acc += dax[k, i] * hx[k, i]
            else:
                acc = dax[k, i] * hx[k, i]
            acc += dbx[k, i] * eyx[k, i]
            acc += dbx[k, i] * eyz[k, i]
            hx[k, i] = acc
            if bad < 0 and not abs(acc) <= limit:
                bad = k * nx + i
            # H_z(i,k) <- E_yx(i-1,k), E_yz(i-1,k), H_z(i,k), E_yx(i,k), E_yz(i,k)
            if i > 0:
                acc = dbz[k, i] * eyx[k, i - 1]
                acc += dbz[k, i] * eyz[k, i - 1]
                acc += daz[k, i] * hz[k, i]
            else:
                acc = daz[k, i] * hz[k, i]
            acc += -dbz[k, i] * eyx[k, i]
            acc += -dbz[k, i] * eyz[k, i]
            hz[k, i] = acc
            if bad < 0 and not abs(acc) <= limit:
                bad = k * nx + i
    return bad


@_jit
def e_split(eyx, eyz, hx, hz, ca_x, cbx, ca_z, cbz, limit):
    nz, nx = eyx.shape
    bad = -1
    for k in range(nz):
        for i in range(nx):
            # E_yx(i,k) <- H_z(i,k), E_yx(i,k), H_z(i+1,k)
            acc = cbx[k, i] * hz[k, i]
            acc += ca_x[k, i] * eyx[k, i]
            if i + 1 < nx:
                acc += -cbx[k, i] * hz[k, i + 1]
            eyx[k, i] = acc
            if bad < 0 and not abs(acc) <= limit:
                bad = k * nx + i
            # E_yz(i,k) <- H_x(i,k), E_yz(i,k), H_x(i,k+1)
            acc = -cbz[k, i] * hx[k, i]
            acc += ca_z[k, i] * eyz[k, i]
            if k + 1 < nz:
                acc += cbz[k, i] * hx[k + 1, i]
            eyz[k, i] = acc
            if bad < 0 and not abs(acc) <= limit:
                bad = k * nx + i
    return bad


@_jit
def csr_phase_ordered(rows, indptr, src, weight, h, limit):
    """Weighted in-neighbour sum for each row, sources in stored order.

    Updates ``h`` in place: a destination's only same-phase source is itself,
    which is read before it is written.
    """
    bad = -1
    for r in range(rows.shape[0]):
        v = rows[r]
        p0 = indptr[v]
        p1 = indptr[v + 1]
        acc = weight[p0] * h[src[p0]]
        for p in range(p0 + 1, p1):
            acc += weight[p] * h[src[p]]
        h[v] = acc
        if bad < 0 and not abs(acc) <= limit:
            bad = v
    return bad


@numba.njit(cache=True, nogil=True, parallel=True)
def csr_phase_parallel(rows, indptr, src, weight, h, limit):
    """Same contract as ``csr_phase_ordered`` with destinations split over threads.

    Returns -1 or the number of offending rows negated minus one; the caller
    locates the node.
    """
    nbad = 0
    for r in numba.prange(rows.shape[0]):
        v = rows[r]
        p0 = indptr[v]
        p1 = indptr[v + 1]
        acc = 0.0
        for p in range(p0, p1):
            acc += weight[p] * h[src[p]]
        h[v] = acc
        if not abs(acc) <= limit:
            nbad += 1
    return -1 if nbad == 0 else -1 - nbad


def first_bad(values: np.ndarray, limit: float = DIVERGENCE_LIMIT) -> int:
    """Flat index of the first non-finite or over-limit entry, or -1."""
    flat = values.ravel()
    bad = np.flatnonzero(~(np.abs(flat) <= limit))
    return int(bad[0]) if bad.size else -1
