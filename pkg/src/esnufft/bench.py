"""Benchmark sweeps: point distributions, timing/accuracy rows, table IO.

A sweep runs one transform configuration per (tolerance, threads) pair and
emits one row each, holding the best-of-k wall time, its per-stage breakdown,
and a measured relative error.  Ground truth is direct summation whenever
M*N <= DIRECT_GUARD; beyond that the transform's own output at tolerance
1e-14 serves as the reference.

Tables are written as CSV or JSON lines.  Both formats round-trip exactly:
parsing an emitted file reproduces the in-memory rows, including float bits.
The column set is fixed and versioned through SCHEMA, which is embedded in
the file header.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, fields

import numpy as np

from .errors import EsnufftError, SizeError
from .kernel import gauss_legendre
from .oracle import direct_type1, direct_type2, direct_type3, rel_l2
from .transforms import TransformOptions, exec_type1, exec_type2, exec_type3

SCHEMA = "esnufft-bench-v1"

DISTRIBUTIONS = ("rand-uniform", "disc-quad", "sph-quad")

# Largest M*N for which the direct-summation reference is used.
DIRECT_GUARD = 100_000_000

SELF_REFERENCE_TOLERANCE = 1e-14

MIN_REPS = 3


@dataclass(frozen=True)
class BenchSpec:
    """One sweep request; expands to len(tolerances) * len(threads) rows."""

    transform_type: int = 1
    dim: int = 1
    dist: str = "rand-uniform"
    m: int = 1000
    n: int = 1000
    tolerances: tuple[float, ...] = (1e-6,)
    threads: tuple[int, ...] = (1,)
    reps: int = MIN_REPS
    seed: int = 0
    use_exact_kernel: bool = False
    check_bounds: bool = False

    def __post_init__(self):
        if self.transform_type not in (1, 2, 3):
            raise SizeError(f"transform type must be 1, 2, or 3, got {self.transform_type}")
        if self.dim not in (1, 2, 3):
            raise SizeError(f"dim must be 1, 2, or 3, got {self.dim}")
        if self.dist not in DISTRIBUTIONS:
            raise SizeError(f"unknown distribution {self.dist!r}")
        if self.reps < MIN_REPS:
            raise SizeError(f"repetitions must be >= {MIN_REPS}, got {self.reps}")
        if self.m < 1 or self.n < 1:
            raise SizeError("m and n must be positive")


@dataclass(frozen=True)
class BenchRow:
    """One measured configuration.  Field order is the file column order."""

    transform_type: int
    dim: int
    dist: str
    m: int
    n: int
    tol: float
    threads: int
    reps: int
    seed: int
    status: str
    t_total: float | None
    t_sort: float | None
    t_spread: float | None
    t_fft: float | None
    t_correct: float | None
    rel_err: float | None
    err_ref: str
    pts_per_sec: float | None


COLUMNS = tuple(f.name for f in fields(BenchRow))
_INT_COLS = {"transform_type", "dim", "m", "n", "threads", "reps", "seed"}
_STR_COLS = {"dist", "status", "err_ref"}


def gen_points(dist: str, m: int, dim: int, seed: int) -> tuple[np.ndarray, ...]:
    """Generate a benchmark point cloud; len(result[0]) is the actual count.

    rand-uniform: iid uniform over [-pi, pi]^d, any d.  disc-quad (d=2): a
    polar grid over the disc of radius pi, round(sqrt(M)) Gauss-Legendre
    radial nodes times the same number of equispaced angles.  sph-quad
    (d=3): round(sqrt(M)/2) Gauss-Legendre radial shells, each carrying an
    (n_lat x 2*n_lat) colatitude-longitude grid sized so the total is close
    to M.  Quadrature grids cluster points near shell boundaries and along
    the axis, which is what makes them the stressful spreading workload.
    """
    if dist not in DISTRIBUTIONS:
        raise SizeError(f"unknown distribution {dist!r}")
    if m < 1:
        raise SizeError("m must be positive")
    rng = np.random.default_rng(seed)
    if dist == "rand-uniform":
        return tuple(rng.uniform(-np.pi, np.pi, m) for _ in range(dim))
    if dist == "disc-quad":
        if dim != 2:
            raise SizeError("disc-quad requires dim=2")
        n_side = max(1, round(np.sqrt(m)))
        nodes, _ = gauss_legendre(n_side)
        r = (nodes + 1.0) * (np.pi / 2.0)
        theta = 2.0 * np.pi * np.arange(n_side) / n_side
        rr, tt = np.meshgrid(r, theta, indexing="ij")
        return (rr * np.cos(tt)).ravel(), (rr * np.sin(tt)).ravel()
    if dim != 3:
        raise SizeError("sph-quad requires dim=3")
    n_r = max(1, round(np.sqrt(m) / 2.0))
    n_lat = max(1, round(np.sqrt(m / (2.0 * n_r))))
    nodes, _ = gauss_legendre(n_r)
    r = (nodes + 1.0) * (np.pi / 2.0)
    colat = np.pi * (np.arange(n_lat) + 0.5) / n_lat
    lon = np.pi * np.arange(2 * n_lat) / n_lat
    rr, cc, ll = np.meshgrid(r, colat, lon, indexing="ij")
    x = rr * np.sin(cc) * np.cos(ll)
    y = rr * np.sin(cc) * np.sin(ll)
    z = rr * np.cos(cc)
    return x.ravel(), y.ravel(), z.ravel()


def _mode_counts(n: int, dim: int) -> tuple[int, ...]:
    per_dim = max(1, round(n ** (1.0 / dim)))
    return (per_dim,) * dim


def _run_one(spec: BenchSpec, tol: float, threads: int, coords, c,
             mode_input, targets) -> BenchRow:
    m_act = len(coords[0])
    nm = _mode_counts(spec.n, spec.dim)
    n_act = int(np.prod(nm)) if spec.transform_type in (1, 2) else spec.n

    def run(opts):
        if spec.transform_type == 1:
            return exec_type1(coords, c, nm, opts)
        if spec.transform_type == 2:
            return exec_type2(coords, mode_input, opts)
        return exec_type3(coords, c, targets, opts)

    def common(status, t_total=None, stages=None, rel_err=None, err_ref="none",
               pps=None):
        stages = stages or {}
        return BenchRow(transform_type=spec.transform_type, dim=spec.dim,
                        dist=spec.dist, m=m_act, n=n_act, tol=tol,
                        threads=threads, reps=spec.reps, seed=spec.seed,
                        status=status, t_total=t_total,
                        t_sort=stages.get("sort"), t_spread=stages.get("spread"),
                        t_fft=stages.get("fft"), t_correct=stages.get("correct"),
                        rel_err=rel_err, err_ref=err_ref, pts_per_sec=pps)

    try:
        # options validation (e.g. tolerance range) must land in the status
        # column like any other per-row failure
        opts = TransformOptions(tolerance=tol, threads=threads,
                                use_exact_kernel=spec.use_exact_kernel,
                                check_bounds=spec.check_bounds)
        best_t, best_stages, out = np.inf, None, None
        for _ in range(spec.reps):
            t0 = time.perf_counter()
            out, stages = run(opts)
            elapsed = time.perf_counter() - t0
            if elapsed < best_t:
                best_t, best_stages = elapsed, stages
        if m_act * n_act <= DIRECT_GUARD:
            err_ref = "direct"
            if spec.transform_type == 1:
                ref = direct_type1(coords, c, nm)
            elif spec.transform_type == 2:
                ref = direct_type2(coords, mode_input)
            else:
                ref = direct_type3(coords, c, targets)
        else:
            err_ref = "self"
            ref_opts = TransformOptions(tolerance=SELF_REFERENCE_TOLERANCE,
                                        threads=threads)
            if spec.transform_type == 1:
                ref = exec_type1(coords, c, nm, ref_opts)[0]
            elif spec.transform_type == 2:
                ref = exec_type2(coords, mode_input, ref_opts)[0]
            else:
                ref = exec_type3(coords, c, targets, ref_opts)[0]
        err = rel_l2(out, ref).rel_l2
        return common("ok", t_total=best_t, stages=best_stages, rel_err=err,
                      err_ref=err_ref, pps=m_act / best_t if best_t > 0 else None)
    except EsnufftError as exc:
        return common(f"error: {type(exc).__name__}: {exc}")


def run_sweep(spec: BenchSpec) -> list[BenchRow]:
    """Run every (tolerance, threads) cell of the given BenchSpec; never
    raises for per-row transform failures, which land in the row's status
    column."""
    coords = gen_points(spec.dist, spec.m, spec.dim, spec.seed)
    m_act = len(coords[0])
    rng = np.random.default_rng(spec.seed + 1)
    c = rng.standard_normal(m_act) + 1j * rng.standard_normal(m_act)
    nm = _mode_counts(spec.n, spec.dim)
    mode_input = None
    targets = None
    if spec.transform_type == 2:
        shape = tuple(reversed(nm))
        mode_input = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    elif spec.transform_type == 3:
        targets = tuple(rng.uniform(-0.5 * n_d, 0.5 * n_d, spec.n) for n_d in nm)
    rows = []
    for tol in spec.tolerances:
        for threads in spec.threads:
            rows.append(_run_one(spec, tol, threads, coords, c,
                                 mode_input, targets))
    return rows


# ---------------------------------------------------------------------------
# table IO


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _uncell(name: str, text: str):
    if name in _STR_COLS:
        return text
    if text == "":
        return None
    if name in _INT_COLS:
        return int(text)
    return float(text)


def write_rows(rows: list[BenchRow], stream: io.TextIOBase, fmt: str) -> None:
    if fmt == "csv":
        stream.write(f"# schema={SCHEMA}\n")
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in rows:
            writer.writerow([_cell(getattr(row, c)) for c in COLUMNS])
    elif fmt == "jsonl":
        stream.write(json.dumps({"schema": SCHEMA}) + "\n")
        for row in rows:
            stream.write(json.dumps({c: getattr(row, c) for c in COLUMNS}) + "\n")
    else:
        raise SizeError(f"unknown format {fmt!r}")


def read_rows(stream: io.TextIOBase, fmt: str) -> list[BenchRow]:
    rows: list[BenchRow] = []
    if fmt == "csv":
        header = None
        for record in csv.reader(stream):
            if not record or record[0].startswith("#"):
                continue
            if header is None:
                header = tuple(record)
                if header != COLUMNS:
                    raise SizeError(f"unexpected columns {header}")
                continue
            rows.append(BenchRow(**{c: _uncell(c, v)
                                    for c, v in zip(COLUMNS, record)}))
    elif fmt == "jsonl":
        for line in stream:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if "schema" in obj:
                if obj["schema"] != SCHEMA:
                    raise SizeError(f"unexpected schema {obj['schema']!r}")
                continue
            rows.append(BenchRow(**{c: obj[c] for c in COLUMNS}))
    else:
        raise SizeError(f"unknown format {fmt!r}")
    return rows
