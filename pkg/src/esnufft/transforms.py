"""The nonuniform transforms.

Type 1 (nonuniform to uniform): f_k = sum_j c_j exp(isign i k.x_j) for all
centered integer modes k (dimension d count N_d: indices -N_d//2 .. with the
usual even/odd symmetric truncation).  Computed as spread -> FFT -> truncate
and correct, with no precomputation phase: kernel values are evaluated on the
fly and the mode correction comes from numerical quadrature.

Type 2 (uniform to nonuniform): c_j = sum_k f_k exp(isign i k.x_j).  The
exact adjoint pipeline: amplify modes, zero-pad, FFT, interpolate.

Type 3 (nonuniform to nonuniform): f_k = sum_j c_j exp(isign i s_k.x_j) for
arbitrary real targets s_k.  Points are rescaled onto a fine grid sized by
the space-bandwidth product, spread, and the result handed to an inner type 2
at rescaled targets; a final quadrature correction divides out the kernel
transform at each target.

Array conventions: coordinates are one array per dimension (dimension 1
first); uniform mode arrays have shape (N_d, ..., N_1), i.e. dimension 1 is
the last (fastest) axis; mode index k runs in ascending centered order along
each axis.  All transforms accept isign = +1 or -1; only the +1 pipelines
exist, the other sign is the conjugate of the +1 transform of the conjugate
data.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from .errors import BadToleranceError, DataError, ResourceError, SizeError
from .fft import FORWARD, FftPlanKey, fft_exec
from .grid import TWO_PI, ModeIndexSet, centered_indices, fine_grid_sizes, next_smooth
from .kernel import (MAX_TOLERANCE, MIN_TOLERANCE, KernelParams,
                     fseries_correction, kernel_ft, select_params)
from .spreadinterp import build_point_set, ensure_sorted, interp, spread

# Largest number of complex fine-grid values a single transform may allocate.
DEFAULT_GRID_CAP = 2 ** 31


@dataclass(frozen=True)
class TransformOptions:
    """Knobs shared by all transforms.

    threads = 0 means one worker per available core.  use_exact_kernel
    replaces the piecewise-polynomial kernel evaluation with direct
    exponentials (slower, for validation).  params overrides the
    tolerance-driven kernel selection.  max_grid_values caps fine-grid
    allocation; transforms that would exceed it raise ResourceError rather
    than thrash, since direct summation is the better tool there.
    """

    tolerance: float = 1e-6
    isign: int = 1
    sigma: float = 2.0
    threads: int = 0
    check_bounds: bool = False
    use_exact_kernel: bool = False
    max_grid_values: int = DEFAULT_GRID_CAP
    params: KernelParams | None = None

    def __post_init__(self):
        if self.isign not in (1, -1):
            raise SizeError(f"isign must be +1 or -1, got {self.isign}")
        if self.threads < 0:
            raise SizeError(f"threads must be >= 0, got {self.threads}")
        if self.max_grid_values < 1:
            raise SizeError("max_grid_values must be positive")
        if not (MIN_TOLERANCE <= self.tolerance <= MAX_TOLERANCE):
            raise BadToleranceError(
                f"tolerance {self.tolerance:g} outside "
                f"[{MIN_TOLERANCE:g}, {MAX_TOLERANCE:g}]")

    def kernel_params(self) -> KernelParams:
        if self.params is not None:
            return self.params
        return select_params(self.tolerance, self.sigma)


def _new_timings() -> dict[str, float]:
    return {"sort": 0.0, "spread": 0.0, "fft": 0.0, "correct": 0.0}


def _merge_timings(dst: dict[str, float], src: dict[str, float]) -> None:
    for k, v in src.items():
        dst[k] = dst.get(k, 0.0) + v


def _check_finite_complex(arr: np.ndarray, what: str) -> None:
    bad = ~(np.isfinite(arr.real) & np.isfinite(arr.imag))
    if bad.any():
        idx = tuple(int(v) for v in np.argwhere(bad)[0])
        pos = idx[0] if len(idx) == 1 else idx
        raise DataError(f"non-finite {what} at index {pos}")


def _as_mode_tuple(num_modes, dim: int) -> tuple[int, ...]:
    if np.isscalar(num_modes):
        nm = (int(num_modes),) * dim
    else:
        nm = tuple(int(n) for n in num_modes)
    if len(nm) != dim:
        raise SizeError(f"{len(nm)} mode counts for a {dim}-d transform")
    return nm


def _mode_bins(num_modes: tuple[int, ...], sizes: tuple[int, ...]) -> list[np.ndarray]:
    # FFT bin of each centered mode, per logical dimension.
    return [np.mod(centered_indices(nm), n) for nm, n in zip(num_modes, sizes)]


def _axis_corrections(params: KernelParams, num_modes: tuple[int, ...],
                      sizes: tuple[int, ...]) -> list[np.ndarray]:
    return [fseries_correction(params, n, nm) for nm, n in zip(num_modes, sizes)]


def _apply_separable(arr: np.ndarray, factors: list[np.ndarray]) -> None:
    # factors[d] runs along logical dimension d+1 = array axis dim-1-d.
    dim = arr.ndim
    for d, f in enumerate(factors):
        shape = [1] * dim
        shape[dim - 1 - d] = len(f)
        arr *= f.reshape(shape)


def _grid_cap_check(total: int, cap: int) -> None:
    if total > cap:
        raise ResourceError(
            f"fine grids need {total} complex values, over the cap of {cap}; "
            "this regime is better served by direct summation")


def exec_type1(coords, strengths, num_modes, opts: TransformOptions):
    """Nonuniform-to-uniform transform; returns (modes, stage_seconds)."""
    params = opts.kernel_params()
    dim = len(coords)
    nm = _as_mode_tuple(num_modes, dim)
    modes = ModeIndexSet(nm)
    sizes = fine_grid_sizes(nm, opts.sigma, params.w)
    _grid_cap_check(int(np.prod(sizes)), opts.max_grid_values)
    timings = _new_timings()

    c = np.ascontiguousarray(strengths, dtype=np.complex128)
    if opts.isign < 0:
        c = np.conj(c)

    t0 = time.perf_counter()
    points = build_point_set(coords, sizes, opts.check_bounds)
    points = ensure_sorted(points, opts.threads)
    timings["sort"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    grid = spread(points, c, params, opts.threads, opts.use_exact_kernel)
    timings["spread"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    key = FftPlanKey(shape=grid.shape, direction=FORWARD,
                     threads=max(1, opts.threads))
    big = fft_exec(key, grid)
    timings["fft"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    bins = _mode_bins(nm, sizes)
    out = big[np.ix_(*reversed(bins))]
    _apply_separable(out, _axis_corrections(params, nm, sizes))
    if opts.isign < 0:
        np.conj(out, out=out)
    timings["correct"] = time.perf_counter() - t0
    assert out.shape == modes.shape
    return out, timings


def exec_type2(coords, mode_coeffs, opts: TransformOptions):
    """Uniform-to-nonuniform transform; returns (strengths, stage_seconds)."""
    params = opts.kernel_params()
    dim = len(coords)
    f = np.asarray(mode_coeffs)
    if f.ndim != dim:
        raise SizeError(f"mode array rank {f.ndim} for a {dim}-d transform")
    nm = tuple(reversed(f.shape))
    ModeIndexSet(nm)
    sizes = fine_grid_sizes(nm, opts.sigma, params.w)
    _grid_cap_check(int(np.prod(sizes)), opts.max_grid_values)
    timings = _new_timings()

    f = np.ascontiguousarray(f, dtype=np.complex128)
    _check_finite_complex(f, "mode coefficient")
    if opts.isign < 0:
        f = np.conj(f)

    t0 = time.perf_counter()
    amplified = f.copy()
    _apply_separable(amplified, _axis_corrections(params, nm, sizes))
    big = np.zeros(tuple(reversed(sizes)), dtype=np.complex128)
    bins = _mode_bins(nm, sizes)
    big[np.ix_(*reversed(bins))] = amplified
    timings["correct"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    key = FftPlanKey(shape=big.shape, direction=FORWARD,
                     threads=max(1, opts.threads))
    fine = fft_exec(key, big)
    timings["fft"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    points = build_point_set(coords, sizes, opts.check_bounds)
    points = ensure_sorted(points, opts.threads)
    timings["sort"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    c = interp(points, fine, params, opts.threads, opts.use_exact_kernel)
    timings["spread"] = time.perf_counter() - t0
    if opts.isign < 0:
        np.conj(c, out=c)
    return c, timings


@dataclass(frozen=True)
class Type3Geometry:
    """Per-dimension rescaling plan for a type-3 transform."""

    x_shift: tuple[float, ...]
    s_shift: tuple[float, ...]
    x_half_width: tuple[float, ...]   # max |x - x_shift| per dimension
    s_half_width: tuple[float, ...]   # max |s - s_shift| per dimension
    sizes: tuple[int, ...]
    gamma: tuple[float, ...]


def _axis_shift(v: np.ndarray) -> float:
    # Recentring on the midpoint is only worth the extra phase work when it
    # shrinks the coordinate range substantially; require a factor > 2.
    vmin, vmax = float(v.min()), float(v.max())
    mid = 0.5 * (vmin + vmax)
    if mid == 0.0:
        return 0.0
    before = max(abs(vmin), abs(vmax))
    after = 0.5 * (vmax - vmin)
    return mid if 2.0 * after < before else 0.0


def plan_type3_geometry(coords, targets, params: KernelParams,
                        sigma: float) -> Type3Geometry:
    w = params.w
    x0, s0, xw, sw, sizes, gamma = [], [], [], [], [], []
    for x, s in zip(coords, targets):
        xs, ss = _axis_shift(x), _axis_shift(s)
        x_half = float(np.max(np.abs(x - xs))) if len(x) else 0.0
        s_half = float(np.max(np.abs(s - ss))) if len(s) else 0.0
        s_eff = s_half if s_half > 0.0 else 1.0
        n = next_smooth(max(int(np.ceil((2.0 * sigma / np.pi) * x_half * s_eff)) + w,
                            2 * w))
        x0.append(xs)
        s0.append(ss)
        xw.append(x_half)
        sw.append(s_half)
        sizes.append(n)
        gamma.append(n / (2.0 * sigma * s_eff))
    return Type3Geometry(x_shift=tuple(x0), s_shift=tuple(s0),
                         x_half_width=tuple(xw), s_half_width=tuple(sw),
                         sizes=tuple(sizes), gamma=tuple(gamma))


def exec_type3(coords, strengths, targets, opts: TransformOptions):
    """Nonuniform-to-nonuniform transform; returns (values, stage_seconds)."""
    params = opts.kernel_params()
    dim = len(coords)
    if dim not in (1, 2, 3):
        raise SizeError(f"dimension must be 1, 2, or 3, got {dim}")
    if len(targets) != dim:
        raise SizeError(f"{len(targets)} target arrays for a {dim}-d transform")
    xs = [np.ascontiguousarray(np.asarray(a, dtype=np.float64)) for a in coords]
    ss = [np.ascontiguousarray(np.asarray(a, dtype=np.float64)) for a in targets]
    m, nk = len(xs[0]), len(ss[0])
    for d in range(dim):
        if xs[d].ndim != 1 or len(xs[d]) != m:
            raise SizeError(f"coordinate array {d + 1} has shape {xs[d].shape}")
        if ss[d].ndim != 1 or len(ss[d]) != nk:
            raise SizeError(f"target array {d + 1} has shape {ss[d].shape}")
        if not np.isfinite(xs[d]).all():
            raise DataError(f"non-finite coordinate in dimension {d + 1}")
        if not np.isfinite(ss[d]).all():
            raise DataError(f"non-finite target in dimension {d + 1}")
    c = np.ascontiguousarray(strengths, dtype=np.complex128)
    if c.shape != (m,):
        raise SizeError(f"strengths shape {c.shape} does not match M={m}")
    _check_finite_complex(c, "strength")
    if nk == 0:
        return np.empty(0, dtype=np.complex128), _new_timings()
    if opts.isign < 0:
        c = np.conj(c)

    geo = plan_type3_geometry(xs, ss, params, opts.sigma)
    inner_sizes = fine_grid_sizes(geo.sizes, opts.sigma, params.w)
    _grid_cap_check(int(np.prod(geo.sizes)) + int(np.prod(inner_sizes)),
                    opts.max_grid_values)
    timings = _new_timings()

    t0 = time.perf_counter()
    x_tilde = [x - sh if sh != 0.0 else x for x, sh in zip(xs, geo.x_shift)]
    s_tilde = [s - sh if sh != 0.0 else s for s, sh in zip(ss, geo.s_shift)]
    if any(sh != 0.0 for sh in geo.s_shift):
        prephase = geo.s_shift[0] * x_tilde[0]
        for d in range(1, dim):
            if geo.s_shift[d] != 0.0:
                prephase = prephase + geo.s_shift[d] * x_tilde[d]
        c = c * np.exp(1j * prephase)
    rescaled = [xt / g for xt, g in zip(x_tilde, geo.gamma)]
    timings["correct"] += time.perf_counter() - t0

    t0 = time.perf_counter()
    points = build_point_set(rescaled, geo.sizes, check_bounds=False)
    points = ensure_sorted(points, opts.threads)
    timings["sort"] += time.perf_counter() - t0

    t0 = time.perf_counter()
    grid = spread(points, c, params, opts.threads, opts.use_exact_kernel)
    timings["spread"] += time.perf_counter() - t0

    # Grid node l of the spread output sits at angle l*h; the inner transform
    # reads it as a centered mode array, so rotate bin 0 to the center.
    t0 = time.perf_counter()
    b = np.fft.fftshift(grid)
    inner_targets = [(TWO_PI / n) * g * st
                     for n, g, st in zip(geo.sizes, geo.gamma, s_tilde)]
    timings["correct"] += time.perf_counter() - t0

    inner_opts = replace(opts, isign=1, check_bounds=False, params=params)
    out, inner_t = exec_type2(inner_targets, b, inner_opts)
    _merge_timings(timings, inner_t)

    # Divide out the kernel transform at each target: per dimension the
    # factor is h / psi_hat(gamma * s_tilde), evaluated by quadrature.
    t0 = time.perf_counter()
    for d in range(dim):
        alpha = np.pi * params.w / geo.sizes[d]
        psi_hat = kernel_ft(params, alpha, geo.gamma[d] * s_tilde[d])
        out *= (TWO_PI / geo.sizes[d]) / psi_hat
    if any(sh != 0.0 for sh in geo.x_shift):
        postphase = np.zeros(nk, dtype=np.float64)
        for d in range(dim):
            if geo.x_shift[d] != 0.0:
                postphase += geo.x_shift[d] * ss[d]
        out *= np.exp(1j * postphase)
    if opts.isign < 0:
        np.conj(out, out=out)
    timings["correct"] += time.perf_counter() - t0
    return out, timings


# ---------------------------------------------------------------------------
# public wrappers


def _opts(kw) -> TransformOptions:
    return TransformOptions(**kw)


def nufft1d1(x, c, n_modes, **kw) -> np.ndarray:
    """Type 1 in 1d: f[k] = sum_j c[j] exp(isign i k x[j]), shape (N1,)."""
    return exec_type1((x,), c, _as_mode_tuple(n_modes, 1), _opts(kw))[0]


def nufft2d1(x, y, c, n_modes, **kw) -> np.ndarray:
    """Type 1 in 2d; n_modes is (N1, N2) or a scalar, output shape (N2, N1)."""
    return exec_type1((x, y), c, _as_mode_tuple(n_modes, 2), _opts(kw))[0]


def nufft3d1(x, y, z, c, n_modes, **kw) -> np.ndarray:
    """Type 1 in 3d; n_modes is (N1, N2, N3) or a scalar, output (N3, N2, N1)."""
    return exec_type1((x, y, z), c, _as_mode_tuple(n_modes, 3), _opts(kw))[0]


def nufft1d2(x, f, **kw) -> np.ndarray:
    """Type 2 in 1d: c[j] = sum_k f[k] exp(isign i k x[j])."""
    return exec_type2((x,), f, _opts(kw))[0]


def nufft2d2(x, y, f, **kw) -> np.ndarray:
    """Type 2 in 2d; f has shape (N2, N1) with mode index ascending per axis."""
    return exec_type2((x, y), f, _opts(kw))[0]


def nufft3d2(x, y, z, f, **kw) -> np.ndarray:
    """Type 2 in 3d; f has shape (N3, N2, N1)."""
    return exec_type2((x, y, z), f, _opts(kw))[0]


def nufft1d3(x, c, s, **kw) -> np.ndarray:
    """Type 3 in 1d: f[k] = sum_j c[j] exp(isign i s[k] x[j])."""
    return exec_type3((x,), c, (s,), _opts(kw))[0]


def nufft2d3(x, y, c, s, t, **kw) -> np.ndarray:
    """Type 3 in 2d with target components (s[k], t[k])."""
    return exec_type3((x, y), c, (s, t), _opts(kw))[0]


def nufft3d3(x, y, z, c, s, t, u, **kw) -> np.ndarray:
    """Type 3 in 3d with target components (s[k], t[k], u[k])."""
    return exec_type3((x, y, z), c, (s, t, u), _opts(kw))[0]
