"""C-style status bindings for the esnufft transforms.

Nine routines mirror the core's nine transforms with array-in/array-out
semantics: the caller allocates the output array, the routine fills it in
place and returns an integer status (``0`` on success, otherwise the
core's stable error codes; see ``esnufft.errors.ErrorCode``).  Argument
misuse that is detectable without running a transform (wrong dtype,
non-contiguous or read-only storage, shape or length mismatch, bad isign
or thread count) is rejected at this layer with ``SIZE_ERROR`` before any
core machinery is invoked.  Failures inside the core (unsupported
tolerance, non-finite data, grid-size caps, ...) surface as that
exception's own code.

Marshaling policy: inputs must already be contiguous float64 (points and
target frequencies) or complex128 (strengths, mode coefficients) ndarrays
and are handed to the core without copying; the single marshaling copy is
the write of the core's result into the caller's output buffer.  The
binding adds no interpreter-level locking of its own; the core's compiled
loops and FFT backend release the GIL while they run, and its thread pool
is shared across callers.

Deliberately not provided: plan objects, operator wrappers, or any other
high-level conveniences; use the core package directly for those.
"""

from __future__ import annotations

import numpy as np

import esnufft
from esnufft.errors import ErrorCode, EsnufftError
from esnufft.transforms import (TransformOptions, exec_type1, exec_type2,
                                exec_type3)

__version__ = "0.1.0"

# The status ints are an ABI shared with the core error classes; refuse to
# sit on top of a core release series with a different table.
_CORE_SERIES = (0, 1)
_seen = tuple(int(p) for p in esnufft.__version__.split(".")[:2])
if _seen != _CORE_SERIES:
    raise ImportError(
        f"esnufftpy {__version__} binds the esnufft {_CORE_SERIES[0]}."
        f"{_CORE_SERIES[1]}.x series, found {esnufft.__version__}")

__all__ = [
    "ErrorCode",
    "nufft1d1", "nufft1d2", "nufft1d3",
    "nufft2d1", "nufft2d2", "nufft2d3",
    "nufft3d1", "nufft3d2", "nufft3d3",
]


class _Reject(Exception):
    """Binding-level argument rejection; never escapes this module."""


def _require(cond: bool, why: str) -> None:
    if not cond:
        raise _Reject(why)


def _check_real_1d(name: str, a) -> None:
    _require(isinstance(a, np.ndarray), f"{name} must be an ndarray")
    _require(a.dtype == np.float64, f"{name} must be float64")
    _require(a.ndim == 1, f"{name} must be 1-D")
    _require(a.flags.c_contiguous, f"{name} must be C-contiguous")


def _check_complex(name: str, a, shape=None, writable=False) -> None:
    _require(isinstance(a, np.ndarray), f"{name} must be an ndarray")
    _require(a.dtype == np.complex128, f"{name} must be complex128")
    _require(a.flags.c_contiguous, f"{name} must be C-contiguous")
    if shape is None:
        _require(a.ndim == 1, f"{name} must be 1-D")
    else:
        _require(a.shape == shape,
                 f"{name} has shape {a.shape}, expected {shape}")
    if writable:
        _require(a.flags.writeable, f"{name} must be writable")


def _check_points(coords) -> int:
    names = ("x", "y", "z")
    for name, a in zip(names, coords):
        _check_real_1d(name, a)
    m = coords[0].shape[0]
    _require(all(a.shape[0] == m for a in coords),
             "point component arrays must share one length")
    return m


def _check_flags(isign, threads) -> None:
    _require(isign in (1, -1), f"isign must be +1 or -1, got {isign}")
    _require(isinstance(threads, (int, np.integer)) and not isinstance(
        threads, bool) and threads >= 0, "threads must be an int >= 0")


def _mode_tuple(n_modes, dim: int) -> tuple[int, ...]:
    if isinstance(n_modes, (int, np.integer)) and not isinstance(n_modes, bool):
        nm = (int(n_modes),) * dim
    else:
        _require(isinstance(n_modes, (tuple, list)) and len(n_modes) == dim,
                 f"n_modes must be an int or a length-{dim} tuple")
        _require(all(isinstance(n, (int, np.integer)) and not isinstance(
            n, bool) for n in n_modes), "n_modes entries must be ints")
        nm = tuple(int(n) for n in n_modes)
    _require(all(n >= 1 for n in nm), "mode counts must be positive")
    return nm


def _run(call, out, isign, tol, threads) -> int:
    """Execute a validated core call, writing into the caller's buffer."""
    try:
        opts = TransformOptions(tolerance=tol, isign=isign, threads=threads)
        result = call(opts)
        np.copyto(out, result, casting="no")
    except EsnufftError as exc:
        return int(exc.code)
    except Exception:
        return int(ErrorCode.INTERNAL_ERROR)
    return int(ErrorCode.SUCCESS)


def _type1(coords, c, isign, tol, n_modes, f, threads) -> int:
    try:
        dim = len(coords)
        m = _check_points(coords)
        _check_complex("c", c, shape=(m,))
        _check_flags(isign, threads)
        nm = _mode_tuple(n_modes, dim)
        _check_complex("f", f, shape=tuple(reversed(nm)), writable=True)
    except _Reject:
        return int(ErrorCode.SIZE_ERROR)
    return _run(lambda o: exec_type1(coords, c, nm, o)[0],
                f, isign, tol, threads)


def _type2(coords, c, isign, tol, f, threads) -> int:
    try:
        dim = len(coords)
        m = _check_points(coords)
        _check_complex("c", c, shape=(m,), writable=True)
        _check_flags(isign, threads)
        _require(isinstance(f, np.ndarray) and f.dtype == np.complex128
                 and f.flags.c_contiguous and f.ndim == dim
                 and all(n >= 1 for n in f.shape),
                 f"f must be a contiguous {dim}-D complex128 mode array")
    except _Reject:
        return int(ErrorCode.SIZE_ERROR)
    return _run(lambda o: exec_type2(coords, f, o)[0],
                c, isign, tol, threads)


def _type3(coords, c, isign, tol, targets, f, threads) -> int:
    try:
        m = _check_points(coords)
        _check_complex("c", c, shape=(m,))
        _check_flags(isign, threads)
        names = ("s", "t", "u")
        for name, a in zip(names, targets):
            _check_real_1d(name, a)
        k = targets[0].shape[0]
        _require(all(a.shape[0] == k for a in targets),
                 "target component arrays must share one length")
        _check_complex("f", f, shape=(k,), writable=True)
    except _Reject:
        return int(ErrorCode.SIZE_ERROR)
    return _run(lambda o: exec_type3(coords, c, targets, o)[0],
                f, isign, tol, threads)


def nufft1d1(x, c, isign, tol, n_modes, f, threads=1) -> int:
    """f[k] = sum_j c[j] exp(isign i k x[j]); fills f of shape (N1,)."""
    return _type1((x,), c, isign, tol, n_modes, f, threads)


def nufft2d1(x, y, c, isign, tol, n_modes, f, threads=1) -> int:
    """2D type 1; n_modes is (N1, N2) or an int, f has shape (N2, N1)."""
    return _type1((x, y), c, isign, tol, n_modes, f, threads)


def nufft3d1(x, y, z, c, isign, tol, n_modes, f, threads=1) -> int:
    """3D type 1; n_modes is (N1, N2, N3) or an int, f has shape (N3, N2, N1)."""
    return _type1((x, y, z), c, isign, tol, n_modes, f, threads)


def nufft1d2(x, c, isign, tol, f, threads=1) -> int:
    """c[j] = sum_k f[k] exp(isign i k x[j]); fills c of length len(x)."""
    return _type2((x,), c, isign, tol, f, threads)


def nufft2d2(x, y, c, isign, tol, f, threads=1) -> int:
    """2D type 2 reading modes f of shape (N2, N1); fills c."""
    return _type2((x, y), c, isign, tol, f, threads)


def nufft3d2(x, y, z, c, isign, tol, f, threads=1) -> int:
    """3D type 2 reading modes f of shape (N3, N2, N1); fills c."""
    return _type2((x, y, z), c, isign, tol, f, threads)


def nufft1d3(x, c, isign, tol, s, f, threads=1) -> int:
    """f[k] = sum_j c[j] exp(isign i s[k] x[j]); fills f of length len(s)."""
    return _type3((x,), c, isign, tol, (s,), f, threads)


def nufft2d3(x, y, c, isign, tol, s, t, f, threads=1) -> int:
    """2D type 3 with target components (s[k], t[k]); fills f."""
    return _type3((x, y), c, isign, tol, (s, t), f, threads)


def nufft3d3(x, y, z, c, isign, tol, s, t, u, f, threads=1) -> int:
    """3D type 3 with target components (s[k], t[k], u[k]); fills f."""
    return _type3((x, y, z), c, isign, tol, (s, t, u), f, threads)
