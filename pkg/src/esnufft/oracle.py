"""Direct-summation references and error metrics.

Every transform here is evaluated by literal summation in O(M*N) time with a
deterministic accumulation order (ascending point index j inside each output).
Nothing in this module touches the fast path: mode index ranges are recomputed
inline, and the compiled loops below share no helpers with the spreading or
correction code.  That independence is the point: agreement between the two
routes validates both.

Cost is capped at DIRECT_COST_CAP multiply-exponentials per call so an
accidental large invocation fails loudly instead of hanging.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DataError, ResourceError, SizeError

DIRECT_COST_CAP = 100_000_000

# Unit roundoff with a little headroom; used for error floors.
ROUNDOFF = 1.1e-16


def _centered(n: int) -> np.ndarray:
    # Mode indices -n//2 .. n - n//2 - 1 (even n symmetric-truncated high end,
    # odd n symmetric), recomputed here on purpose.
    return np.arange(n, dtype=np.float64) - (n // 2)


def _as_coords(coords) -> list[np.ndarray]:
    out = [np.ascontiguousarray(np.asarray(a, dtype=np.float64)) for a in coords]
    m = len(out[0])
    for d, a in enumerate(out):
        if a.ndim != 1 or len(a) != m:
            raise SizeError(f"coordinate array {d + 1} has shape {a.shape}")
        if not np.isfinite(a).all():
            raise DataError(f"non-finite coordinate in dimension {d + 1}")
    return out


def _check_cost(m: int, n_out: int) -> None:
    if m * n_out > DIRECT_COST_CAP:
        raise ResourceError(
            f"direct summation cost {m * n_out:.3g} exceeds cap {DIRECT_COST_CAP:.3g}")


@njit(cache=True, nogil=True)
def _sum1(x1, c, s1, isign):
    nk = s1.shape[0]
    out = np.zeros(nk, dtype=np.complex128)
    for a in range(nk):
        acc = 0.0 + 0.0j
        for j in range(x1.shape[0]):
            out_phase = isign * (s1[a] * x1[j])
            acc += c[j] * (np.cos(out_phase) + 1j * np.sin(out_phase))
        out[a] = acc
    return out


@njit(cache=True, nogil=True)
def _sum2(x1, x2, c, s1, s2, isign):
    nk = s1.shape[0]
    out = np.zeros(nk, dtype=np.complex128)
    for a in range(nk):
        acc = 0.0 + 0.0j
        for j in range(x1.shape[0]):
            ph = isign * (s1[a] * x1[j] + s2[a] * x2[j])
            acc += c[j] * (np.cos(ph) + 1j * np.sin(ph))
        out[a] = acc
    return out


@njit(cache=True, nogil=True)
def _sum3(x1, x2, x3, c, s1, s2, s3, isign):
    nk = s1.shape[0]
    out = np.zeros(nk, dtype=np.complex128)
    for a in range(nk):
        acc = 0.0 + 0.0j
        for j in range(x1.shape[0]):
            ph = isign * (s1[a] * x1[j] + s2[a] * x2[j] + s3[a] * x3[j])
            acc += c[j] * (np.cos(ph) + 1j * np.sin(ph))
        out[a] = acc
    return out


def _sum_dispatch(coords, c, targets, isign) -> np.ndarray:
    i = float(isign)
    if len(coords) == 1:
        return _sum1(coords[0], c, targets[0], i)
    if len(coords) == 2:
        return _sum2(coords[0], coords[1], c, targets[0], targets[1], i)
    return _sum3(coords[0], coords[1], coords[2], c,
                 targets[0], targets[1], targets[2], i)


def direct_type3(coords, strengths, targets, isign: int = 1) -> np.ndarray:
    """f_k = sum_j c_j exp(isign * i * s_k . x_j) by literal summation."""
    coords = _as_coords(coords)
    targets = _as_coords(targets) if len(np.asarray(targets[0])) else [
        np.asarray(t, dtype=np.float64) for t in targets]
    if len(targets) != len(coords):
        raise SizeError(f"{len(targets)} target arrays for {len(coords)} dims")
    c = np.ascontiguousarray(strengths, dtype=np.complex128)
    if c.shape != (len(coords[0]),):
        raise SizeError(f"strengths shape {c.shape}")
    _check_cost(len(c), len(targets[0]))
    return _sum_dispatch(coords, c, targets, isign)


def direct_type1(coords, strengths, num_modes, isign: int = 1) -> np.ndarray:
    """Uniform-mode sums f_k for centered k; returns shape (N_d, ..., N_1)."""
    if np.isscalar(num_modes):
        num_modes = (int(num_modes),)
    num_modes = tuple(int(n) for n in num_modes)
    coords = _as_coords(coords)
    if len(num_modes) != len(coords):
        raise SizeError(f"{len(num_modes)} mode counts for {len(coords)} dims")
    axes = [_centered(n) for n in num_modes]
    mesh = np.meshgrid(*axes, indexing="ij")   # logical dim 1 first
    targets = [g.reshape(-1) for g in mesh]
    c = np.ascontiguousarray(strengths, dtype=np.complex128)
    _check_cost(len(c), len(targets[0]))
    flat = _sum_dispatch(coords, c, targets, isign)
    # flat is C-ordered over (N_1, ..., N_d); output wants dim 1 fastest
    return flat.reshape(num_modes).transpose()


def direct_type2(coords, mode_coeffs, isign: int = 1) -> np.ndarray:
    """c_j = sum over centered k of f_k exp(isign * i * k . x_j).

    mode_coeffs has shape (N_d, ..., N_1), dimension 1 on the last axis.
    """
    coords = _as_coords(coords)
    f = np.ascontiguousarray(mode_coeffs, dtype=np.complex128)
    if f.ndim != len(coords):
        raise SizeError(f"mode array rank {f.ndim} for {len(coords)} dims")
    num_modes = tuple(reversed(f.shape))
    axes = [_centered(n) for n in num_modes]
    mesh = np.meshgrid(*axes, indexing="ij")
    targets = [g.reshape(-1) for g in mesh]
    fk = f.transpose().reshape(-1)             # now dim 1 slowest, matches mesh
    _check_cost(len(fk), len(coords[0]))
    # Swap roles: sum over modes for each point, accumulating ascending mode
    # index; the kernel already does exactly that with points and targets
    # exchanged.
    return _sum_dispatch(targets, fk, coords, isign)


ALIASING_PROBE_CAP = 64


def aliasing_probe(num_modes: int, points: np.ndarray, params) -> tuple[np.ndarray, float]:
    """Empirical aliasing-error matrix of the 1D fast type-1 pipeline.

    Column j is the output error, fast minus direct, for a unit strength at
    point j; since both maps are linear in the strengths, the returned
    magnitudes bound the error for any strength vector: |f_tilde - f| <=
    |E| |c| elementwise.  Returns (|E| with shape (num_modes, M), max entry).
    """
    from .transforms import TransformOptions, exec_type1

    x = np.ascontiguousarray(np.asarray(points, dtype=np.float64))
    m = len(x)
    if num_modes > ALIASING_PROBE_CAP or m > ALIASING_PROBE_CAP:
        raise ResourceError(
            f"probe sizes capped at {ALIASING_PROBE_CAP}, got N={num_modes}, M={m}")
    opts = TransformOptions(params=params)
    mags = np.empty((num_modes, m), dtype=np.float64)
    for j in range(m):
        unit = np.zeros(m, dtype=np.complex128)
        unit[j] = 1.0
        fast, _ = exec_type1((x,), unit, (num_modes,), opts)
        exact = _sum1(x, unit, _centered(num_modes), 1.0)
        mags[:, j] = np.abs(fast - exact)
    return mags, float(mags.max())


@dataclass(frozen=True)
class ErrorReport:
    """Relative l2 error plus the roundoff floor for the comparison.

    floor estimates the best relative error representable after n_terms
    roundings; comparisons should pass when rel_l2 <= max(bound, floor).
    """

    rel_l2: float
    max_abs_diff: float
    floor: float


def rel_l2(approx, exact, n_terms: int | None = None) -> ErrorReport:
    a = np.asarray(approx, dtype=np.complex128).reshape(-1)
    e = np.asarray(exact, dtype=np.complex128).reshape(-1)
    if a.shape != e.shape:
        raise SizeError(f"shape mismatch {a.shape} vs {e.shape}")
    denom = float(np.linalg.norm(e))
    if denom == 0.0:
        raise DataError("reference vector is identically zero")
    diff = a - e
    return ErrorReport(
        rel_l2=float(np.linalg.norm(diff)) / denom,
        max_abs_diff=float(np.max(np.abs(diff))) if len(diff) else 0.0,
        floor=(n_terms or 0) * ROUNDOFF,
    )
