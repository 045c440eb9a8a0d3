"""Fine-grid geometry, centered mode indexing, coordinate folding, and the
cache-locality bin sort that orders points before spreading.

Grid conventions used throughout: dimension 1 is the fastest-varying axis of
every array (numpy shape (n_d, ..., n_1), C order), grid node l of a size-n
axis sits at phase l * 2 pi / n, and points are folded so their grid
coordinate x / h lands in [0, n).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BoundsViolationError, SizeError

# Bin-sort box shape in grid points: 16 along the fast axis, 4 along others.
BOX_FAST = 16
BOX_SLOW = 4

# Below this point-to-grid ratio the sort runs single-threaded regardless of
# the requested thread count; histogram merging overhead wins otherwise.
SPARSE_SORT_RATIO = 0.1

# Coordinates are accepted in [-3 pi, 3 pi] when bounds checking is on.
COORD_LIMIT = 3.0 * math.pi

TWO_PI = 2.0 * math.pi


def next_smooth(n: int) -> int:
    """Least 5-smooth integer (2^a 3^b 5^c) >= n.

    Exact enumeration over powers; no scanning, no tables.
    """
    n = int(n)
    if n < 1:
        raise SizeError(f"next_smooth needs n >= 1, got {n}")
    best = None
    p2 = 1
    while True:
        p23 = p2
        while True:
            v = p23
            while v < n:
                v *= 5
            if best is None or v < best:
                best = v
            if p23 >= n:
                break
            p23 *= 3
        if p2 >= n:
            break
        p2 *= 2
    return best


def centered_indices(num_modes: int) -> np.ndarray:
    """Centered mode indices for one axis, ascending.

    Even N: -N/2 .. N/2 - 1; odd N: -(N-1)/2 .. (N-1)/2.
    """
    if num_modes < 1:
        raise SizeError(f"mode count must be >= 1, got {num_modes}")
    lo = -(num_modes // 2)
    return np.arange(lo, lo + num_modes, dtype=np.int64)


@dataclass(frozen=True)
class ModeIndexSet:
    """Centered mode indices per dimension plus flattening convention.

    Arrays carrying modes have shape (N_d, ..., N_1) in C order, so dimension
    1 varies fastest in memory and in the flattened order.
    """

    num_modes: tuple[int, ...]

    def __post_init__(self):
        if not 1 <= len(self.num_modes) <= 3:
            raise SizeError(f"1..3 dimensions supported, got {len(self.num_modes)}")
        for n in self.num_modes:
            if n < 1:
                raise SizeError(f"mode counts must be >= 1, got {self.num_modes}")

    @property
    def dim(self) -> int:
        return len(self.num_modes)

    @property
    def total(self) -> int:
        return int(np.prod(self.num_modes))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(reversed(self.num_modes))

    def axis_indices(self, axis: int) -> np.ndarray:
        """Centered indices of dimension ``axis`` (1-based logical dim)."""
        return centered_indices(self.num_modes[axis - 1])

    def fft_bins(self, axis: int, n: int) -> np.ndarray:
        """Positions of this axis's centered modes inside a length-n FFT axis
        (cyclic: bin = k mod n)."""
        k = self.axis_indices(axis)
        if n < len(k):
            raise SizeError(f"fine grid size {n} smaller than mode count {len(k)}")
        return np.mod(k, n)


@dataclass
class FineGrid:
    """Oversampled working grid: per-dimension sizes and the value array."""

    sizes: tuple[int, ...]  # (n_1, ..., n_d), logical order
    values: np.ndarray = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return len(self.sizes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(reversed(self.sizes))

    @property
    def total(self) -> int:
        return int(np.prod(self.sizes))

    def spacing(self, axis: int) -> float:
        return TWO_PI / self.sizes[axis - 1]

    def allocate(self) -> "FineGrid":
        self.values = np.zeros(self.shape, dtype=np.complex128)
        return self


def fine_grid_sizes(num_modes: tuple[int, ...], sigma: float, w: int) -> tuple[int, ...]:
    """Per-dimension fine grid sizes: least 5-smooth n_i >= max(sigma N_i, 2w)."""
    sizes = []
    for nm in num_modes:
        if nm < 1:
            raise SizeError(f"mode counts must be >= 1, got {num_modes}")
        floor = max(math.ceil(sigma * nm), 2 * w)
        sizes.append(next_smooth(floor))
    return tuple(sizes)


def fold_coords(x: np.ndarray, check_bounds: bool = False) -> np.ndarray:
    """Fold coordinates into [0, 2 pi) (grid phase).

    With check_bounds, values outside [-3 pi, 3 pi] raise instead of folding
    blindly; the error names the first offending index.
    """
    x = np.asarray(x, dtype=np.float64)
    if check_bounds:
        bad = np.abs(x) > COORD_LIMIT
        if bad.any():
            i = int(np.argmax(bad))
            raise BoundsViolationError(
                f"coordinate {x[i]!r} at index {i} outside [-3 pi, 3 pi]")
    folded = np.mod(x, TWO_PI)
    # mod can return 2 pi exactly for tiny negative inputs; wrap those
    folded[folded >= TWO_PI] = 0.0
    return folded


@dataclass(frozen=True)
class BinSortPermutation:
    """Stable ordering of points by spatial box.

    perm[i] is the original index of the i-th point in sorted order; boxes is
    the per-point flattened box index (original order); box_counts gives the
    number of boxes per dimension.
    """

    perm: np.ndarray
    boxes: np.ndarray
    box_counts: tuple[int, ...]


def _box_indices(grid_coords: tuple[np.ndarray, ...],
                 sizes: tuple[int, ...]) -> tuple[np.ndarray, tuple[int, ...]]:
    dims = len(sizes)
    box_shape = [BOX_FAST] + [BOX_SLOW] * (dims - 1)
    counts = tuple(-(-sizes[d] // box_shape[d]) for d in range(dims))
    flat = None
    stride = 1
    for d in range(dims):
        b = np.floor_divide(grid_coords[d].astype(np.int64, copy=False),
                            box_shape[d])
        # grid coords live in [0, n); guard the n-epsilon edge case
        np.clip(b, 0, counts[d] - 1, out=b)
        flat = b * stride if flat is None else flat + b * stride
        stride *= counts[d]
    return flat, counts


def bin_sort(grid_coords: tuple[np.ndarray, ...], sizes: tuple[int, ...],
             threads: int = 1) -> BinSortPermutation:
    """Stable counting sort of points by spatial box index.

    grid_coords are per-dimension positions in grid units, each in [0, n_i).
    Points within a box keep their original relative order.  The threaded
    path (per-chunk histograms, merged prefix sums, per-chunk scatter)
    produces the identical permutation; it is skipped when points are sparse
    relative to the grid (M < total/10).
    """
    m = len(grid_coords[0])
    for c in grid_coords:
        if len(c) != m:
            raise SizeError("coordinate arrays must share a length")
    boxes, counts = _box_indices(grid_coords, sizes)
    total = int(np.prod(sizes))
    nboxes = int(np.prod(counts))
    use_threads = threads > 1 and m >= max(1, total // 10) and m > 1 << 16
    if not use_threads:
        perm = np.argsort(boxes, kind="stable")
        return BinSortPermutation(perm=perm, boxes=boxes, box_counts=counts)

    nchunks = min(threads * 4, max(1, m // (1 << 14)))
    edges = np.linspace(0, m, nchunks + 1, dtype=np.int64)
    chunks = [(int(edges[i]), int(edges[i + 1])) for i in range(nchunks)]

    def hist(span):
        lo, hi = span
        return np.bincount(boxes[lo:hi], minlength=nboxes)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        hists = list(pool.map(hist, chunks))
        hists = np.stack(hists)  # (nchunks, nboxes)
        # start of chunk c's block within box b, globally
        box_starts = np.zeros(nboxes, dtype=np.int64)
        np.cumsum(hists.sum(axis=0), out=box_starts)
        box_starts = np.concatenate(([0], box_starts[:-1]))
        chunk_starts = np.cumsum(hists, axis=0) - hists + box_starts
        perm = np.empty(m, dtype=np.int64)

        def scatter(ci):
            lo, hi = chunks[ci]
            local = boxes[lo:hi]
            order = np.argsort(local, kind="stable")
            sorted_boxes = local[order]
            # position within the chunk's per-box block
            local_starts = np.cumsum(hists[ci]) - hists[ci]
            pos = chunk_starts[ci][sorted_boxes] + (
                np.arange(hi - lo) - local_starts[sorted_boxes])
            perm[pos] = order + lo

        list(pool.map(scatter, range(nchunks)))
    return BinSortPermutation(perm=perm, boxes=boxes, box_counts=counts)
