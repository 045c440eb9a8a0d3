"""Exponential-of-semicircle spreading kernel: parameters, evaluation, and
Fourier-domain machinery.

The kernel on its standard support is

    phi_beta(z) = exp(beta * (sqrt(1 - z^2) - 1))   for |z| <= 1,  0 outside,

even, with maximum 1 at z = 0 and value e^{-beta} at the support edge.  A
width-w instance rescaled to grid units covers w fine-grid spacings h, i.e.
psi(x) = phi(x / alpha) with alpha = w h / 2.

Everything downstream needs three things from this module: parameter
selection from a requested tolerance, fast pointwise evaluation (exact or via
a piecewise polynomial), and accurate values of the kernel's Fourier
transform on mode grids (computed by Gauss-Legendre quadrature; the kernel
has no known closed-form transform).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BadToleranceError, InternalError, SizeError

# Width bounds supported by the parameter recipe (and the poly tables).
MIN_WIDTH = 2
MAX_WIDTH = 16

# Tolerance range accepted by select_params.
MIN_TOLERANCE = 1e-15
MAX_TOLERANCE = 1e-1

SUPPORTED_SIGMAS = (2.0, 1.25)

# Safety factor applied to the asymptotic decay-rate beta; at sigma=2 this
# reproduces beta = 2.30 * w to the stated precision, and 2.30 is used
# exactly there.
GAMMA_SAFETY = 0.976

# Unit roundoff, used for floor estimates in a few checks.
EPS64 = float(np.finfo(np.float64).eps)


@dataclass(frozen=True)
class KernelParams:
    """Spreading-kernel parameters for one transform.

    w: kernel width in fine-grid points, 2..16.
    beta: shape parameter (> 0); 2.30 * w at sigma = 2.
    sigma: fine-grid oversampling factor, 2.0 or 1.25.
    gamma: safety factor beta / (pi * w * (1 - 1/(2 sigma))), in (0, 1].
    p_quad: number of positive quadrature nodes for the kernel transform,
        at least ceil(1.5 w + 2).
    """

    w: int
    beta: float
    sigma: float
    gamma: float
    p_quad: int

    def __post_init__(self):
        if not (MIN_WIDTH <= self.w <= MAX_WIDTH):
            raise BadToleranceError(
                f"kernel width {self.w} outside [{MIN_WIDTH}, {MAX_WIDTH}]")
        if not self.beta > 0:
            raise BadToleranceError(f"beta must be positive, got {self.beta}")
        if self.sigma not in SUPPORTED_SIGMAS:
            raise BadToleranceError(
                f"sigma {self.sigma} unsupported; choose one of {SUPPORTED_SIGMAS}")
        if not 0.0 < self.gamma <= 1.0:
            raise BadToleranceError(
                f"safety factor gamma {self.gamma:.6f} outside (0, 1]")
        if self.p_quad < math.ceil(1.5 * self.w + 2):
            raise BadToleranceError(
                f"p_quad {self.p_quad} below ceil(1.5 w + 2) = "
                f"{math.ceil(1.5 * self.w + 2)}")


def _rate(sigma: float) -> float:
    # Exponential decay rate per unit width at the safety factor.
    g = GAMMA_SAFETY
    return g * math.sqrt(1.0 - 1.0 / sigma - (g ** -2 - 1.0) / (4.0 * sigma ** 2))


def _beta_for_width(w: int, sigma: float) -> float:
    if sigma == 2.0:
        return 2.30 * w
    return GAMMA_SAFETY * math.pi * w * (1.0 - 1.0 / (2.0 * sigma))


def params_for_width(w: int, sigma: float = 2.0) -> KernelParams:
    """Build parameters from an explicit width (diagnostics, error probes)."""
    if sigma not in SUPPORTED_SIGMAS:
        raise BadToleranceError(
            f"sigma {sigma} unsupported; choose one of {SUPPORTED_SIGMAS}")
    w = int(w)
    beta = _beta_for_width(w, sigma)
    gamma = beta / (math.pi * w * (1.0 - 1.0 / (2.0 * sigma)))
    return KernelParams(w=w, beta=beta, sigma=sigma, gamma=gamma,
                        p_quad=math.ceil(1.5 * w + 2))


def select_params(tolerance: float, sigma: float = 2.0) -> KernelParams:
    """Pick kernel width and shape for a requested relative tolerance.

    At sigma = 2 the width is w = ceil(log10(1/tol)) + 1 (one digit per grid
    point plus one), clamped to [2, 16], with beta = 2.30 w.  At sigma = 1.25
    the digit count is scaled by the ratio of the theoretical decay rates of
    the two oversampling factors before the same +1 calibration.
    """
    tolerance = float(tolerance)
    if not (MIN_TOLERANCE <= tolerance <= MAX_TOLERANCE) or math.isnan(tolerance):
        raise BadToleranceError(
            f"tolerance {tolerance!r} outside supported range "
            f"[{MIN_TOLERANCE:g}, {MAX_TOLERANCE:g}]")
    if sigma not in SUPPORTED_SIGMAS:
        raise BadToleranceError(
            f"sigma {sigma} unsupported; choose one of {SUPPORTED_SIGMAS}")
    digits = math.log10(1.0 / tolerance)
    if sigma != 2.0:
        digits = digits / (_rate(sigma) / _rate(2.0))
    w = math.ceil(digits) + 1
    w = min(max(w, MIN_WIDTH), MAX_WIDTH)
    return params_for_width(w, sigma)


def class_tolerance(w: int, sigma: float = 2.0) -> float:
    """Tightest tolerance the width-w kernel is selected for (inverse recipe).

    At sigma = 1.25 each unit of width buys fewer digits, by the same rate
    ratio select_params divides by.
    """
    digits = int(w) - 1
    if sigma != 2.0:
        digits = digits * (_rate(sigma) / _rate(2.0))
    return 10.0 ** -digits


def es_eval(z, beta: float):
    """Evaluate phi_beta at real arguments; exactly zero outside [-1, 1].

    Total on the real line and vectorized; scalar input returns a scalar.
    """
    z = np.asarray(z, dtype=np.float64)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.zeros_like(z)
    inside = np.abs(z) <= 1.0
    zi = z[inside]
    out[inside] = np.exp(beta * (np.sqrt(1.0 - zi * zi) - 1.0))
    return float(out[0]) if scalar else out


def _es_eval_complex(z: np.ndarray, beta: float) -> np.ndarray:
    # Analytic continuation used only for polynomial fitting; principal sqrt.
    z = np.asarray(z, dtype=np.complex128)
    return np.exp(beta * (np.sqrt(1.0 - z * z) - 1.0))


@lru_cache(maxsize=64)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].

    Newton iteration on the Legendre recurrence from the Chebyshev-like
    initial guess; converges to ~1e-15 in a handful of sweeps.
    """
    if n < 1:
        raise SizeError(f"gauss_legendre needs n >= 1, got {n}")
    if n == 1:
        return np.zeros(1), np.full(1, 2.0)
    i = np.arange(n)
    x = np.cos(math.pi * (i + 0.75) / (n + 0.5))
    for _ in range(100):
        p0 = np.ones_like(x)
        p1 = x.copy()
        for k in range(2, n + 1):
            p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
        # p1 = P_n(x), p0 = P_{n-1}(x); derivative via the standard identity
        dp = n * (x * p1 - p0) / (x * x - 1.0)
        dx = p1 / dp
        x -= dx
        if np.abs(dx).max() < 1e-15:
            break
    else:  # pragma: no cover - Newton always converges for these guesses
        raise InternalError("Gauss-Legendre Newton iteration did not converge")
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    wts = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    x, wts = x[order], wts[order]
    x.setflags(write=False)
    wts.setflags(write=False)
    return x, wts


def _positive_quad(params: KernelParams) -> tuple[np.ndarray, np.ndarray]:
    # Positive half of the 2p-node rule; the integrand below is even.
    nodes, wts = gauss_legendre(2 * params.p_quad)
    half = len(nodes) // 2
    return nodes[half:], wts[half:]


def kernel_ft(params: KernelParams, alpha: float, ks) -> np.ndarray:
    """Fourier transform psi-hat(k) of the width-w kernel rescaled to
    half-support alpha, at arbitrary real frequencies ks.

    psi-hat(k) = 2 alpha * sum_j w_j phi(q_j) cos(alpha k q_j)
    over the p positive nodes (q_j, w_j) of the 2p-node Gauss-Legendre rule.
    """
    if alpha <= 0:
        raise SizeError(f"alpha must be positive, got {alpha}")
    q, wq = _positive_quad(params)
    a = wq * es_eval(q, params.beta)
    ks = np.atleast_1d(np.asarray(ks, dtype=np.float64))
    out = np.empty(ks.shape, dtype=np.float64)
    # chunk the (k, q) outer product to bound temporary memory
    step = max(1, 2_000_000 // max(len(q), 1))
    for s in range(0, len(ks), step):
        kk = ks[s:s + step]
        out[s:s + step] = np.cos(np.outer(alpha * kk, q)) @ a
    return 2.0 * alpha * out


def _winding_powers(z: np.ndarray, count: int, chunk: int = 1024) -> np.ndarray:
    """Powers z^0 .. z^{count-1} for a vector of unit-modulus z (shape (p,)),
    returned as an array (count, p), using cumulative products only.

    Chunk starting phases advance by z^chunk (built by repeated squaring), so
    no rounding chain is longer than ~chunk multiplies.
    """
    if chunk < 1 or chunk & (chunk - 1):
        raise InternalError("winding chunk must be a power of two")
    p = len(z)
    out = np.empty((count, p), dtype=np.complex128)
    zc = z.copy()
    e = chunk
    while e > 1:  # z^chunk via repeated squaring
        zc = zc * zc
        e //= 2
    ph = np.ones(p, dtype=np.complex128)
    buf = np.empty((chunk, p), dtype=np.complex128)
    for s in range(0, count, chunk):
        m = min(chunk, count - s)
        buf[0] = ph
        buf[1:m] = z
        np.cumprod(buf[:m], axis=0, out=buf[:m])
        out[s:s + m] = buf[:m]
        ph = ph * zc
    return out


def fseries_correction(params: KernelParams, n: int, num_modes: int) -> np.ndarray:
    """Per-mode correction p_k = h / psi-hat(k) for centered modes on a fine
    grid of n points (h = 2 pi / n), k = -floor(N/2) .. ceil(N/2) - 1.

    The cosines cos(alpha k q_j) over the regular k grid are generated by
    phase winding: exactly p_quad complex exponentials, then multiply-adds.
    Output is ordered by ascending k to match mode-array axes.
    """
    if num_modes < 1 or n < num_modes:
        raise SizeError(
            f"need 1 <= num_modes <= n, got num_modes={num_modes}, n={n}")
    alpha = math.pi * params.w / n
    q, wq = _positive_quad(params)
    a = 2.0 * alpha * wq * es_eval(q, params.beta)
    kmax = num_modes // 2
    z = np.exp(1j * alpha * q)  # the only complex exponentials
    powers = _winding_powers(z, kmax + 1)
    psi_hat = powers.real @ a  # psi-hat(k) for k = 0..kmax
    if np.any(psi_hat <= 0.0):
        bad = int(np.argmax(psi_hat <= 0.0))
        raise InternalError(
            f"kernel transform non-positive at mode {bad} "
            f"(w={params.w}, p_quad={params.p_quad}); quadrature underresolved")
    h = 2.0 * math.pi / n
    neg = num_modes // 2          # count of k < 0
    ks = np.abs(np.arange(num_modes) - neg)
    return h / psi_hat[ks]


def _fseries_correction_naive(params: KernelParams, n: int,
                              num_modes: int) -> np.ndarray:
    """Reference route: per-mode cosine evaluation of the same quadrature.

    Kept deliberately separate from the winding path; tests compare the two.
    """
    if num_modes < 1 or n < num_modes:
        raise SizeError(
            f"need 1 <= num_modes <= n, got num_modes={num_modes}, n={n}")
    alpha = math.pi * params.w / n
    neg = num_modes // 2
    ks = np.arange(num_modes) - neg
    psi_hat = kernel_ft(params, alpha, ks.astype(np.float64))
    if np.any(psi_hat <= 0.0):
        raise InternalError("kernel transform non-positive in band")
    return (2.0 * math.pi / n) / psi_hat


@dataclass(frozen=True)
class PiecewisePoly:
    """Piecewise-polynomial approximation of phi_beta on [-1, 1].

    w equal-width pieces, each a degree-(w+3) polynomial in the local
    coordinate t in [-1, 1] over its piece.  coeffs has shape (w, w+4) with
    the highest-degree coefficient first (Horner order).  Spreading places
    one of the w ordinates of every point in each piece, all sharing the same
    t, which is what makes the rows vectorize.
    """

    w: int
    degree: int
    coeffs: np.ndarray
    beta: float
    fit_residual: float


def _square_boundary(npts: int) -> np.ndarray:
    # npts points on the boundary of the unit square in C, corner-clustered
    # (the fit is limited near corners / the kernel endpoints), symmetric
    # about the real axis so that least-squares coefficients come out real.
    u = 2.0 * math.pi * (np.arange(npts) + 0.5) / npts
    th = u - 0.25 * np.sin(4.0 * u)
    c, s = np.cos(th), np.sin(th)
    return (c + 1j * s) / np.maximum(np.abs(c), np.abs(s))


@lru_cache(maxsize=64)
def _build_piecewise_poly_cached(w: int, beta: float, sigma: float) -> PiecewisePoly:
    degree = w + 3
    npts = 2 * (degree + 1)
    tb = _square_boundary(npts)
    vand = np.vander(tb, degree + 1, increasing=False)
    coeffs = np.empty((w, degree + 1))
    residual = 0.0
    for m in range(w):
        center = -1.0 + (2 * m + 1) / w
        zb = center + tb / w
        fb = _es_eval_complex(zb, beta)
        # Up-weight points near the kernel endpoints +-1: the sqrt branch
        # points there dominate the end-piece error otherwise.
        d = np.minimum(np.abs(zb - 1.0), np.abs(zb + 1.0))
        wt = 1.0 / np.sqrt(d + 0.5 / w)
        sol, *_ = np.linalg.lstsq(vand * wt[:, None], fb * wt, rcond=None)
        residual = max(residual, float(np.abs(vand @ sol - fb).max()))
        coeffs[m] = sol.real
    # The least-squares residual on the complex collocation square bottoms
    # out near 1e-13 for the widest kernels (conditioning of the degree-19
    # Vandermonde), well below any achievable transform accuracy, so the
    # ill-conditioning guard floors there rather than at machine epsilon.
    limit = max(class_tolerance(w, sigma), 1000.0 * EPS64)
    if residual > limit:
        raise InternalError(
            f"piecewise kernel fit failed for w={w}: collocation residual "
            f"{residual:.3e} exceeds {limit:.3e}")
    coeffs.setflags(write=False)
    return PiecewisePoly(w=w, degree=degree, coeffs=coeffs, beta=beta,
                         fit_residual=residual)


def build_piecewise_poly(params: KernelParams) -> PiecewisePoly:
    """Fit the piecewise polynomial for these parameters (cached).

    Coefficients solve a least-squares Vandermonde system collocated on the
    boundary of the square tightly enclosing each piece (side = piece width)
    in the complex plane, 2 (degree+1) points per piece.
    """
    return _build_piecewise_poly_cached(params.w, params.beta, params.sigma)


def poly_eval_row(poly: PiecewisePoly, x_frac: float) -> np.ndarray:
    """Kernel values at the w grid ordinates of a point with fractional
    offset x_frac in [0, 1) from its base grid node.

    Ordinate m lands in piece m; all pieces share one local coordinate t,
    so the row is w Horner evaluations at a single t.
    """
    if not 0.0 <= x_frac < 1.0:
        raise SizeError(f"x_frac must lie in [0, 1), got {x_frac}")
    w = poly.w
    if w % 2 == 0:
        t = 1.0 - 2.0 * x_frac
    elif x_frac < 0.5:
        t = -2.0 * x_frac
    else:
        t = 2.0 - 2.0 * x_frac
    row = poly.coeffs[:, 0].copy()
    for q in range(1, poly.degree + 1):
        row = row * t + poly.coeffs[:, q]
    return row


def exact_eval_row(params: KernelParams, x_frac: float) -> np.ndarray:
    """Same row as poly_eval_row but via direct kernel evaluation."""
    if not 0.0 <= x_frac < 1.0:
        raise SizeError(f"x_frac must lie in [0, 1), got {x_frac}")
    w = params.w
    if w % 2 == 0:
        z0 = (2.0 / w) * (1.0 - w / 2.0 - x_frac)
    elif x_frac < 0.5:
        z0 = (2.0 / w) * (-(w - 1) / 2.0 - x_frac)
    else:
        z0 = (2.0 / w) * (1.0 - (w - 1) / 2.0 - x_frac)
    z = z0 + (2.0 / w) * np.arange(w)
    return es_eval(z, params.beta)
