"""Figure rendering for bench tables.

Reads a table produced by the bench subcommand and writes two PNG figures
next to it (or into --outdir): requested tolerance versus achieved error,
and a per-row stage-timing breakdown.  Only rows with status "ok" are drawn.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .bench import BenchRow, read_rows  # noqa: E402
from .errors import DataError, SizeError  # noqa: E402

STAGES = ("t_sort", "t_spread", "t_fft", "t_correct")
STAGE_LABELS = ("sort", "spread/interp", "fft", "correct")


def load_table(path: Path) -> list[BenchRow]:
    suffix = path.suffix.lower()
    if suffix == ".csv":
        fmt = "csv"
    elif suffix in (".jsonl", ".json"):
        fmt = "jsonl"
    else:
        raise SizeError(f"cannot infer table format from {path.name!r}")
    with open(path, encoding="utf-8") as fh:
        return read_rows(fh, fmt)


def _accuracy_figure(rows: list[BenchRow], out: Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    groups: dict[tuple, list[BenchRow]] = {}
    for r in rows:
        if r.status == "ok" and r.rel_err is not None:
            groups.setdefault((r.transform_type, r.dim, r.dist), []).append(r)
    lo, hi = 1e-16, 1e-1
    for (ttype, dim, dist), grp in sorted(groups.items()):
        grp = sorted(grp, key=lambda r: r.tol)
        tols = [r.tol for r in grp]
        errs = [max(r.rel_err, 1e-17) for r in grp]
        lo = min(lo, min(tols + errs))
        hi = max(hi, max(tols + errs))
        ax.loglog(tols, errs, "o-", label=f"type {ttype}, {dim}d, {dist}")
    guide = np.array([lo, hi])
    ax.loglog(guide, guide, "k--", linewidth=0.8, label="requested = achieved")
    ax.set_xlabel("requested tolerance")
    ax.set_ylabel("achieved relative l2 error")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)


def _timing_figure(rows: list[BenchRow], out: Path) -> None:
    ok = [r for r in rows if r.status == "ok" and r.t_total is not None]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    idx = np.arange(len(ok))
    bottom = np.zeros(len(ok))
    for stage, label in zip(STAGES, STAGE_LABELS):
        vals = np.array([getattr(r, stage) or 0.0 for r in ok])
        ax.bar(idx, vals, bottom=bottom, label=label)
        bottom += vals
    labels = [f"t{r.transform_type} {r.dim}d\ntol={r.tol:g}\nT={r.threads}"
              for r in ok]
    ax.set_xticks(idx)
    ax.set_xticklabels(labels, fontsize=7)
    ax.set_ylabel("seconds (best of reps)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)


def render_report(table: Path, outdir: Path | None = None) -> list[Path]:
    """Render accuracy and timing figures; returns the written paths."""
    rows = load_table(table)
    if not any(r.status == "ok" for r in rows):
        raise DataError(f"no successful rows in {table}")
    outdir = outdir or table.parent
    outdir.mkdir(parents=True, exist_ok=True)
    stem = table.stem
    acc = outdir / f"{stem}_accuracy.png"
    tim = outdir / f"{stem}_timing.png"
    _accuracy_figure(rows, acc)
    _timing_figure(rows, tim)
    return [acc, tim]
