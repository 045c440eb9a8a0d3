"""Spreading (nonuniform points -> fine grid) and interpolation (fine grid ->
points), the adjoint pair at the heart of every transform here.

Spreading runs in two phases so that thread count never changes the result:

1. Sorted points are cut into subproblems of at most SUBPROBLEM_CAP points.
   Each subproblem spreads into a private cuboid that bounds all of its
   kernel footprints (so no periodic wrapping happens inside the hot loop).
   Subproblems are independent and run on a thread pool; the compiled kernels
   release the GIL.
2. Cuboids are added back into the global fine grid serially, in subproblem
   order, wrapping indices periodically.  This phase touches each cuboid cell
   once and is a small fraction of the work; doing it serially makes the
   output bit-identical for every thread count.

Interpolation is a pure gather and parallelizes over blocks of points with no
shared writes.  Both directions use identical kernel values, which is what
makes the pair exactly adjoint up to rounding.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from threading import get_ident

import numpy as np
from numba import njit

from .errors import DataError, SizeError
from .grid import TWO_PI, bin_sort, fold_coords
from .kernel import KernelParams, build_piecewise_poly

# Sorted points per subproblem; small enough that private cuboids stay cache
# friendly, large enough that per-task overhead is negligible.
SUBPROBLEM_CAP = 10_000

# Below this many points the pool is skipped entirely.
MIN_POINTS_FOR_POOL = 20_000

_DUMMY_COEFFS = np.zeros((1, 1), dtype=np.float64)


@dataclass(frozen=True)
class NuPointSet:
    """Nonuniform points in grid units.

    grid_coords[d] holds coordinate / h_d in [0, n_d) for logical dimension
    d+1 (dimension 1 is the fast axis).  perm, when present, is a bin-sort
    permutation over the points.
    """

    grid_coords: tuple[np.ndarray, ...]
    sizes: tuple[int, ...]
    perm: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return len(self.grid_coords)

    @property
    def count(self) -> int:
        return len(self.grid_coords[0])


@dataclass(frozen=True)
class Subproblem:
    """A contiguous slice of the sorted order plus its padded cuboid."""

    start: int
    stop: int
    lo: tuple[int, ...]      # cuboid origin per dimension (may be negative)
    extent: tuple[int, ...]  # cuboid size per dimension


def build_point_set(coords, sizes: tuple[int, ...],
                    check_bounds: bool = False) -> NuPointSet:
    """Fold raw coordinates and convert them to grid units.

    coords is a sequence of d arrays (dimension 1 first).  Non-finite values
    raise DataError naming the index; bounds checking follows fold_coords.
    """
    if len(coords) != len(sizes):
        raise SizeError(f"{len(coords)} coordinate arrays for {len(sizes)} sizes")
    m = len(np.asarray(coords[0]))
    gcs = []
    for d, raw in enumerate(coords):
        x = np.asarray(raw, dtype=np.float64)
        if x.ndim != 1 or len(x) != m:
            raise SizeError(
                f"coordinate array {d + 1} has shape {x.shape}, expected ({m},)")
        finite = np.isfinite(x)
        if not finite.all():
            i = int(np.argmin(finite))
            raise DataError(f"non-finite coordinate at index {i} in dimension {d + 1}")
        g = fold_coords(x, check_bounds) * (sizes[d] / TWO_PI)
        g[g >= sizes[d]] -= sizes[d]
        gcs.append(g)
    return NuPointSet(grid_coords=tuple(gcs), sizes=tuple(sizes))


def ensure_sorted(points: NuPointSet, threads: int = 1) -> NuPointSet:
    """Attach a bin-sort permutation if one is not present yet."""
    if points.perm is not None:
        return points
    if points.count == 0:
        perm = np.empty(0, dtype=np.int64)
    else:
        perm = bin_sort(points.grid_coords, points.sizes, threads).perm
    return NuPointSet(grid_coords=points.grid_coords, sizes=points.sizes,
                      perm=perm)


def _base_indices(points: NuPointSet, w: int) -> list[np.ndarray]:
    # First grid node of each point's footprint, per dimension.
    return [np.floor(g - 0.5 * w + 1.0).astype(np.int64)
            for g in points.grid_coords]


def partition_subproblems(points: NuPointSet, params: KernelParams,
                          cap: int = SUBPROBLEM_CAP) -> list[Subproblem]:
    """Cut the sorted order into runs of <= cap points with padded cuboids.

    Every point's full w-wide footprint lies inside its cuboid, so the spread
    kernel never wraps; the cuboid pad is ceil(w/2) around the points' span.
    """
    if points.perm is None:
        raise SizeError("points must carry a bin-sort permutation")
    m = points.count
    if m == 0:
        return []
    if cap < 1:
        raise SizeError(f"subproblem cap must be >= 1, got {cap}")
    base = _base_indices(points, params.w)
    edges = list(range(0, m, cap)) + [m]
    subs = []
    for i in range(len(edges) - 1):
        s, e = edges[i], edges[i + 1]
        idx = points.perm[s:e]
        lo, extent = [], []
        for d in range(points.dim):
            b = base[d][idx]
            blo, bhi = int(b.min()), int(b.max())
            lo.append(blo)
            extent.append(bhi - blo + params.w)
        subs.append(Subproblem(start=s, stop=e, lo=tuple(lo), extent=tuple(extent)))
    return subs


def _resolve_threads(threads: int) -> int:
    if threads < 0:
        raise SizeError(f"threads must be >= 0, got {threads}")
    return threads if threads > 0 else (os.cpu_count() or 1)


def _kernel_table(params: KernelParams, use_exact: bool) -> np.ndarray:
    if use_exact:
        return _DUMMY_COEFFS
    return np.ascontiguousarray(build_piecewise_poly(params).coeffs)


def _run_tasks(tasks, threads: int, stats: dict | None) -> None:
    busy: dict[int, float] = {}

    def wrapped(task):
        t0 = time.perf_counter()
        task()
        if stats is not None:
            tid = get_ident()
            busy[tid] = busy.get(tid, 0.0) + (time.perf_counter() - t0)

    if threads <= 1 or len(tasks) <= 1:
        for task in tasks:
            wrapped(task)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            # list() propagates the first exception, if any
            list(pool.map(wrapped, tasks))
    if stats is not None:
        stats["busy_per_thread"] = busy
        stats["tasks"] = len(tasks)


def spread(points: NuPointSet, strengths: np.ndarray, params: KernelParams,
           threads: int = 1, use_exact: bool = False,
           stats: dict | None = None) -> np.ndarray:
    """Spread strengths onto the fine grid; returns array of shape
    (n_d, ..., n_1) complex128.

    b_l = sum_j c_j psi~(l h - x_j) per dimension product, psi~ the
    2 pi-periodized width-w kernel.
    """
    threads = _resolve_threads(threads)
    m = points.count
    c = np.ascontiguousarray(strengths, dtype=np.complex128)
    if c.shape != (m,):
        raise SizeError(f"strengths shape {c.shape} does not match M={m}")
    if m:
        finite = np.isfinite(c.real) & np.isfinite(c.imag)
        if not finite.all():
            raise DataError(f"non-finite strength at index {int(np.argmin(finite))}")
    shape = tuple(reversed(points.sizes))
    grid = np.zeros(shape, dtype=np.complex128)
    if m == 0:
        return grid
    points = ensure_sorted(points, threads)
    subs = partition_subproblems(points, params)
    coeffs = _kernel_table(params, use_exact)
    w, beta = params.w, params.beta
    gcs = points.grid_coords
    perm = points.perm
    dim = points.dim
    locs: list[np.ndarray | None] = [None] * len(subs)

    def make_task(i: int):
        sub = subs[i]

        def task():
            loc = np.zeros(int(np.prod(sub.extent)), dtype=np.complex128)
            if dim == 1:
                _spread_sub_1d(gcs[0], c, perm, sub.start, sub.stop,
                               sub.lo[0], loc, w, coeffs, beta, use_exact)
            elif dim == 2:
                _spread_sub_2d(gcs[0], gcs[1], c, perm, sub.start, sub.stop,
                               sub.lo[0], sub.lo[1], sub.extent[0], loc,
                               w, coeffs, beta, use_exact)
            else:
                _spread_sub_3d(gcs[0], gcs[1], gcs[2], c, perm,
                               sub.start, sub.stop,
                               sub.lo[0], sub.lo[1], sub.lo[2],
                               sub.extent[0], sub.extent[1], loc,
                               w, coeffs, beta, use_exact)
            locs[i] = loc

        return task

    _run_tasks([make_task(i) for i in range(len(subs))], threads, stats)

    flat = grid.reshape(-1)
    n = points.sizes
    for i, sub in enumerate(subs):
        loc = locs[i]
        if dim == 1:
            _add_back_1d(flat, loc, sub.lo[0], n[0])
        elif dim == 2:
            _add_back_2d(flat, loc, sub.lo[0], sub.lo[1],
                         sub.extent[0], sub.extent[1], n[0], n[1])
        else:
            _add_back_3d(flat, loc, sub.lo[0], sub.lo[1], sub.lo[2],
                         sub.extent[0], sub.extent[1], sub.extent[2],
                         n[0], n[1], n[2])
        locs[i] = None
    return grid


def interp(points: NuPointSet, grid: np.ndarray, params: KernelParams,
           threads: int = 1, use_exact: bool = False,
           stats: dict | None = None) -> np.ndarray:
    """Evaluate the periodized-kernel expansion of ``grid`` at the points.

    c_j = sum_l b_l psi~(l h - x_j): the exact adjoint of spread (same kernel
    values, gather instead of scatter).
    """
    threads = _resolve_threads(threads)
    m = points.count
    shape = tuple(reversed(points.sizes))
    if tuple(grid.shape) != shape:
        raise SizeError(f"grid shape {grid.shape}, expected {shape}")
    out = np.empty(m, dtype=np.complex128)
    if m == 0:
        return out
    grid = np.ascontiguousarray(grid, dtype=np.complex128)
    points = ensure_sorted(points, threads)
    coeffs = _kernel_table(params, use_exact)
    w, beta = params.w, params.beta
    gcs = points.grid_coords
    perm = points.perm
    dim = points.dim
    n = points.sizes
    flat = grid.reshape(-1)

    nblocks = max(1, -(-m // SUBPROBLEM_CAP))
    edges = np.linspace(0, m, nblocks + 1, dtype=np.int64)

    def make_task(i: int):
        s, e = int(edges[i]), int(edges[i + 1])

        def task():
            if dim == 1:
                _interp_block_1d(gcs[0], out, perm, s, e, flat, n[0],
                                 w, coeffs, beta, use_exact)
            elif dim == 2:
                _interp_block_2d(gcs[0], gcs[1], out, perm, s, e, flat,
                                 n[0], n[1], w, coeffs, beta, use_exact)
            else:
                _interp_block_3d(gcs[0], gcs[1], gcs[2], out, perm, s, e,
                                 flat, n[0], n[1], n[2],
                                 w, coeffs, beta, use_exact)

        return task

    _run_tasks([make_task(i) for i in range(nblocks)], threads, stats)
    return out


# ---------------------------------------------------------------------------
# compiled kernels


@njit(inline="always")
def _row(g, w, coeffs, beta, use_exact, row):
    # Fill the w kernel ordinates for a point at grid coordinate g; returns
    # the base node index.  Ordinate m falls in polynomial piece m and all
    # pieces share the local coordinate t.
    i0 = int(np.floor(g - 0.5 * w + 1.0))
    if use_exact:
        step = 2.0 / w
        z = step * (i0 - g)
        for m in range(w):
            a = 1.0 - z * z
            if a < 0.0:
                a = 0.0
            row[m] = np.exp(beta * (np.sqrt(a) - 1.0))
            z += step
    else:
        t = 2.0 * (i0 - g) + (w - 1.0)
        deg1 = coeffs.shape[1]
        for m in range(w):
            v = coeffs[m, 0]
            for q in range(1, deg1):
                v = v * t + coeffs[m, q]
            row[m] = v
    return i0


@njit(cache=True, nogil=True)
def _spread_sub_1d(g1, c, perm, j0, j1, lo1, loc, w, coeffs, beta, use_exact):
    row = np.empty(w, dtype=np.float64)
    for s in range(j0, j1):
        j = perm[s]
        i1 = _row(g1[j], w, coeffs, beta, use_exact, row)
        b = i1 - lo1
        cj = c[j]
        for m in range(w):
            loc[b + m] += cj * row[m]


@njit(cache=True, nogil=True)
def _spread_sub_2d(g1, g2, c, perm, j0, j1, lo1, lo2, s1, loc,
                   w, coeffs, beta, use_exact):
    row1 = np.empty(w, dtype=np.float64)
    row2 = np.empty(w, dtype=np.float64)
    for s in range(j0, j1):
        j = perm[s]
        i1 = _row(g1[j], w, coeffs, beta, use_exact, row1)
        i2 = _row(g2[j], w, coeffs, beta, use_exact, row2)
        b1 = i1 - lo1
        b2 = i2 - lo2
        cj = c[j]
        for m2 in range(w):
            a2 = cj * row2[m2]
            base = (b2 + m2) * s1 + b1
            for m1 in range(w):
                loc[base + m1] += a2 * row1[m1]


@njit(cache=True, nogil=True)
def _spread_sub_3d(g1, g2, g3, c, perm, j0, j1, lo1, lo2, lo3, s1, s2, loc,
                   w, coeffs, beta, use_exact):
    row1 = np.empty(w, dtype=np.float64)
    row2 = np.empty(w, dtype=np.float64)
    row3 = np.empty(w, dtype=np.float64)
    for s in range(j0, j1):
        j = perm[s]
        i1 = _row(g1[j], w, coeffs, beta, use_exact, row1)
        i2 = _row(g2[j], w, coeffs, beta, use_exact, row2)
        i3 = _row(g3[j], w, coeffs, beta, use_exact, row3)
        b1 = i1 - lo1
        b2 = i2 - lo2
        b3 = i3 - lo3
        cj = c[j]
        for m3 in range(w):
            a3 = cj * row3[m3]
            plane = (b3 + m3) * s2
            for m2 in range(w):
                a23 = a3 * row2[m2]
                base = (plane + b2 + m2) * s1 + b1
                for m1 in range(w):
                    loc[base + m1] += a23 * row1[m1]


@njit(cache=True, nogil=True)
def _add_back_1d(grid, loc, lo1, n1):
    for q in range(loc.shape[0]):
        grid[(lo1 + q) % n1] += loc[q]


@njit(cache=True, nogil=True)
def _add_back_2d(grid, loc, lo1, lo2, s1, s2, n1, n2):
    idx1 = np.empty(s1, dtype=np.int64)
    for q in range(s1):
        idx1[q] = (lo1 + q) % n1
    for q2 in range(s2):
        gbase = ((lo2 + q2) % n2) * n1
        lbase = q2 * s1
        for q1 in range(s1):
            grid[gbase + idx1[q1]] += loc[lbase + q1]


@njit(cache=True, nogil=True)
def _add_back_3d(grid, loc, lo1, lo2, lo3, s1, s2, s3, n1, n2, n3):
    idx1 = np.empty(s1, dtype=np.int64)
    for q in range(s1):
        idx1[q] = (lo1 + q) % n1
    idx2 = np.empty(s2, dtype=np.int64)
    for q in range(s2):
        idx2[q] = ((lo2 + q) % n2) * n1
    for q3 in range(s3):
        gplane = ((lo3 + q3) % n3) * n2 * n1
        lplane = q3 * s2 * s1
        for q2 in range(s2):
            gbase = gplane + idx2[q2]
            lbase = lplane + q2 * s1
            for q1 in range(s1):
                grid[gbase + idx1[q1]] += loc[lbase + q1]


@njit(inline="always")
def _wrap_indices(i0, w, n, idx):
    for m in range(w):
        i = i0 + m
        if i < 0:
            i += n
        elif i >= n:
            i -= n
        idx[m] = i


@njit(cache=True, nogil=True)
def _interp_block_1d(g1, out, perm, j0, j1, grid, n1, w, coeffs, beta, use_exact):
    row = np.empty(w, dtype=np.float64)
    idx = np.empty(w, dtype=np.int64)
    for s in range(j0, j1):
        j = perm[s]
        i1 = _row(g1[j], w, coeffs, beta, use_exact, row)
        _wrap_indices(i1, w, n1, idx)
        acc = complex(0.0)
        for m in range(w):
            acc += row[m] * grid[idx[m]]
        out[j] = acc


@njit(cache=True, nogil=True)
def _interp_block_2d(g1, g2, out, perm, j0, j1, grid, n1, n2,
                     w, coeffs, beta, use_exact):
    row1 = np.empty(w, dtype=np.float64)
    row2 = np.empty(w, dtype=np.float64)
    idx1 = np.empty(w, dtype=np.int64)
    idx2 = np.empty(w, dtype=np.int64)
    for s in range(j0, j1):
        j = perm[s]
        i1 = _row(g1[j], w, coeffs, beta, use_exact, row1)
        i2 = _row(g2[j], w, coeffs, beta, use_exact, row2)
        _wrap_indices(i1, w, n1, idx1)
        _wrap_indices(i2, w, n2, idx2)
        acc = complex(0.0)
        for m2 in range(w):
            base = idx2[m2] * n1
            part = complex(0.0)
            for m1 in range(w):
                part += row1[m1] * grid[base + idx1[m1]]
            acc += row2[m2] * part
        out[j] = acc


@njit(cache=True, nogil=True)
def _interp_block_3d(g1, g2, g3, out, perm, j0, j1, grid, n1, n2, n3,
                     w, coeffs, beta, use_exact):
    row1 = np.empty(w, dtype=np.float64)
    row2 = np.empty(w, dtype=np.float64)
    row3 = np.empty(w, dtype=np.float64)
    idx1 = np.empty(w, dtype=np.int64)
    idx2 = np.empty(w, dtype=np.int64)
    idx3 = np.empty(w, dtype=np.int64)
    for s in range(j0, j1):
        j = perm[s]
        i1 = _row(g1[j], w, coeffs, beta, use_exact, row1)
        i2 = _row(g2[j], w, coeffs, beta, use_exact, row2)
        i3 = _row(g3[j], w, coeffs, beta, use_exact, row3)
        _wrap_indices(i1, w, n1, idx1)
        _wrap_indices(i2, w, n2, idx2)
        _wrap_indices(i3, w, n3, idx3)
        acc = complex(0.0)
        for m3 in range(w):
            plane = idx3[m3] * n2 * n1
            part3 = complex(0.0)
            for m2 in range(w):
                base = plane + idx2[m2] * n1
                part2 = complex(0.0)
                for m1 in range(w):
                    part2 += row1[m1] * grid[base + idx1[m1]]
                part3 += row2[m2] * part2
            acc += row3[m3] * part3
        out[j] = acc
