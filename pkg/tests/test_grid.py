"""Grid sizing, mode indexing, folding, and the cache-locality bin sort.
Smooth sizes are checked against a brute-force divisor oracle and the sort
against an independent recomputation of per-point box indices."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from esnufft.errors import BoundsViolationError, SizeError
from esnufft.grid import (BOX_FAST, BOX_SLOW, BinSortPermutation, FineGrid,
                          ModeIndexSet, TWO_PI, bin_sort, centered_indices,
                          fine_grid_sizes, fold_coords, next_smooth)


def _is_smooth(n: int) -> bool:
    # brute-force oracle: repeatedly divide out 2, 3, 5
    for p in (2, 3, 5):
        while n % p == 0:
            n //= p
    return n == 1


def test_next_smooth_frozen():
    assert next_smooth(11) == 12
    assert next_smooth(1) == 1
    assert next_smooth(121) == 125
    assert next_smooth(100) == 100
    assert next_smooth(7) == 8


def test_next_smooth_invalid():
    with pytest.raises(SizeError):
        next_smooth(0)


@settings(deadline=None, max_examples=200)
@given(st.integers(min_value=1, max_value=100_000))
def test_next_smooth_minimal(n):
    v = next_smooth(n)
    assert v >= n
    assert _is_smooth(v)
    # minimality: nothing 5-smooth in [n, v)
    for c in range(n, v):
        assert not _is_smooth(c)
    # idempotence
    assert next_smooth(v) == v


def test_fine_grid_sizes_frozen():
    assert fine_grid_sizes((100,), 2.0, 7) == (200,)
    assert fine_grid_sizes((5,), 2.0, 7) == (15,)   # max(10, 14) -> 15
    assert fine_grid_sizes((128,), 1.25, 7) == (160,)
    assert fine_grid_sizes((100, 40, 20), 2.0, 8) == (200, 80, 40)
    with pytest.raises(SizeError):
        fine_grid_sizes((0,), 2.0, 7)


def test_centered_indices():
    np.testing.assert_array_equal(centered_indices(4), [-2, -1, 0, 1])
    np.testing.assert_array_equal(centered_indices(5), [-2, -1, 0, 1, 2])
    np.testing.assert_array_equal(centered_indices(1), [0])
    with pytest.raises(SizeError):
        centered_indices(0)


def test_mode_index_set():
    ms = ModeIndexSet((6, 4, 10))
    assert ms.dim == 3
    assert ms.total == 240
    assert ms.shape == (10, 4, 6)  # dimension 1 fastest (last axis)
    np.testing.assert_array_equal(ms.axis_indices(1), centered_indices(6))
    np.testing.assert_array_equal(ms.axis_indices(3), centered_indices(10))
    # cyclic bins: negative modes wrap to the top of the FFT axis
    np.testing.assert_array_equal(ms.fft_bins(1, 12), [9, 10, 11, 0, 1, 2])
    with pytest.raises(SizeError):
        ms.fft_bins(1, 5)
    with pytest.raises(SizeError):
        ModeIndexSet((4, 4, 4, 4))
    with pytest.raises(SizeError):
        ModeIndexSet((4, 0))


def test_fine_grid_shape_and_spacing():
    g = FineGrid(sizes=(20, 12)).allocate()
    assert g.shape == (12, 20)
    assert g.values.shape == (12, 20)
    assert g.values.dtype == np.complex128
    assert g.spacing(1) == pytest.approx(TWO_PI / 20)
    assert g.spacing(2) == pytest.approx(TWO_PI / 12)


def test_fold_coords_frozen():
    x = np.array([0.0, -1.0, TWO_PI + 0.5, -TWO_PI, 3.0 * np.pi])
    f = fold_coords(x)
    np.testing.assert_allclose(
        f, [0.0, TWO_PI - 1.0, 0.5, 0.0, np.pi], atol=1e-12)
    assert np.all(f >= 0.0) and np.all(f < TWO_PI)
    # tiny negative values must not fold to exactly 2 pi
    assert fold_coords(np.array([-1e-18]))[0] == 0.0


def test_fold_coords_bounds_check():
    x = np.array([0.0, 1.0, 10.0])
    with pytest.raises(BoundsViolationError) as e:
        fold_coords(x, check_bounds=True)
    assert "index 2" in str(e.value)
    # without the flag it folds silently
    assert fold_coords(x).shape == (3,)


@settings(deadline=None, max_examples=100)
@given(st.floats(min_value=-9.42, max_value=9.42, allow_nan=False))
def test_fold_coords_preserves_phase(x):
    f = fold_coords(np.array([x]), check_bounds=True)[0]
    assert 0.0 <= f < TWO_PI
    np.testing.assert_allclose(np.exp(1j * f), np.exp(1j * x), atol=1e-12)


def _recompute_boxes(grid_coords, sizes):
    # independent route: per-point box index from first principles
    dims = len(sizes)
    shape = [BOX_FAST] + [BOX_SLOW] * (dims - 1)
    counts = [-(-sizes[d] // shape[d]) for d in range(dims)]
    flat = np.zeros(len(grid_coords[0]), dtype=np.int64)
    stride = 1
    for d in range(dims):
        b = np.minimum((grid_coords[d] // shape[d]).astype(np.int64),
                       counts[d] - 1)
        flat += b * stride
        stride *= counts[d]
    return flat


def test_bin_sort_single_point():
    res = bin_sort((np.array([3.7]),), (64,))
    np.testing.assert_array_equal(res.perm, [0])


def test_bin_sort_is_permutation_and_ordered():
    rng = np.random.default_rng(7)
    sizes = (64, 32, 32)
    m = 5000
    coords = tuple(rng.uniform(0, s, m) for s in sizes)
    res = bin_sort(coords, sizes)
    assert isinstance(res, BinSortPermutation)
    np.testing.assert_array_equal(np.sort(res.perm), np.arange(m))
    boxes = _recompute_boxes(coords, sizes)
    np.testing.assert_array_equal(boxes, res.boxes)
    assert np.all(np.diff(boxes[res.perm]) >= 0)


def test_bin_sort_stability():
    # equal boxes keep original order: all points in one box
    coords = (np.full(100, 2.5),)
    res = bin_sort(coords, (64,))
    np.testing.assert_array_equal(res.perm, np.arange(100))


def test_bin_sort_parallel_matches_serial():
    rng = np.random.default_rng(19)
    sizes = (128, 64)
    m = 80_000
    coords = tuple(rng.uniform(0, s, m) for s in sizes)
    serial = bin_sort(coords, sizes, threads=1)
    for t in (2, 4, 8):
        par = bin_sort(coords, sizes, threads=t)
        np.testing.assert_array_equal(par.perm, serial.perm)


def test_bin_sort_sparse_falls_back_to_serial():
    # m far below total/10: must take the serial path and still be correct
    rng = np.random.default_rng(3)
    sizes = (512, 512, 128)
    m = 70_000  # > 2^16 but < total/10 = 3.3e6
    coords = tuple(rng.uniform(0, s, m) for s in sizes)
    res = bin_sort(coords, sizes, threads=4)
    assert np.all(np.diff(res.boxes[res.perm]) >= 0)
    np.testing.assert_array_equal(np.sort(res.perm), np.arange(m))


def test_bin_sort_improves_locality():
    # mean jump between consecutive flattened grid addresses shrinks
    rng = np.random.default_rng(5)
    sizes = (64, 64)
    m = 20_000
    coords = tuple(rng.uniform(0, s, m) for s in sizes)
    res = bin_sort(coords, sizes)
    flat = (coords[0].astype(np.int64)
            + sizes[0] * coords[1].astype(np.int64))
    sorted_jump = np.abs(np.diff(flat[res.perm])).mean()
    unsorted_jump = np.abs(np.diff(flat)).mean()
    assert sorted_jump < 0.25 * unsorted_jump


def test_bin_sort_length_mismatch():
    with pytest.raises(SizeError):
        bin_sort((np.zeros(3), np.zeros(4)), (16, 16))
