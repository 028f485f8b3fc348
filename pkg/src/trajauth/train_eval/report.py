"""CSV and markdown reports shaped like the published EER and MSE tables.

EER layout: one row per (w, w_in), one column per variant, then an AVG row.
MSE layout: one row per 3D-from-2D variant, one column per (w, w_in).
"""
from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from ..config import VARIANTS
from .metrics import compute_eer
from .sweep import SweepResult

FMT = "{:.6f}"


def _fmt(v, fmt=FMT) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return fmt.format(v)


def column_means(rows: Sequence[Sequence[float | None]]) -> list[float | None]:
    """Arithmetic mean of each column over the rows that have a value."""
    if not rows:
        return []
    out = []
    for col in zip(*rows):
        vals = [v for v in col if v is not None and not math.isnan(v)]
        out.append(float(np.mean(vals)) if vals else None)
    return out


def eer_rows(values: Mapping[tuple[int, int], Sequence[float | None]]):
    """(body rows, AVG row) for an EER table keyed by (w, w_in)."""
    body = [list(v) for v in values.values()]
    return body, column_means(body)


def render_eer_csv(values: Mapping[tuple[int, int], Sequence[float | None]], variants=VARIANTS, fmt=FMT) -> str:
    body, avg = eer_rows(values)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["w", "w_in", *variants])
    for (w, w_in), row in zip(values, body):
        wr.writerow([w, w_in, *(_fmt(v, fmt) for v in row)])
    wr.writerow(["AVG", "", *(_fmt(v, fmt) for v in avg)])
    return buf.getvalue()


def render_mse_csv(values: Mapping[str, Sequence[float | None]], grid, fmt=FMT) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["variant", *(f"{w}/{w_in}" for w, w_in in grid)])
    for variant, row in values.items():
        wr.writerow([variant, *(_fmt(v, fmt) for v in row)])
    return buf.getvalue()


def _markdown(header: list[str], rows: list[list[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(r) + " |" for r in rows]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# aggregation of sweep cells


def per_user_mean(result: SweepResult, attr: str) -> dict[tuple[str, int, int], float | None]:
    acc = defaultdict(list)
    for c in result.cells:
        if c.ok:
            acc[c.key].append(getattr(c, attr))
    return {k: float(np.mean(v)) for k, v in acc.items()}


def pooled_eer(result: SweepResult) -> dict[tuple[str, int, int], float]:
    """EER over every user's scores thrown into one pool, per cell."""
    gen, imp = defaultdict(list), defaultdict(list)
    for c in result.cells:
        if c.ok:
            gen[c.key].append(c.genuine_scores)
            imp[c.key].append(c.impostor_scores)
    return {k: compute_eer(np.concatenate(gen[k]), np.concatenate(imp[k])).eer for k in gen}


def eer_grid(result: SweepResult, variants=VARIANTS) -> dict[tuple[int, int], list[float | None]]:
    means = per_user_mean(result, "eer")
    return {(w, w_in): [means.get((v, w, w_in)) for v in variants] for w, w_in in result.grid}


def mse_grid(result: SweepResult) -> dict[str, list[float | None]]:
    means = per_user_mean(result, "forecast_mse")
    return {
        v: [means.get((v, w, w_in)) for w, w_in in result.grid]
        for v in result.variants
        if v.startswith("3Dfrom2D_")
    }


def _long_table(result: SweepResult, attr: str) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["w", "w_in", "variant", "user", "value"])
    for c in result.cells:
        wr.writerow([c.w, c.w_in, c.variant, c.user, _fmt(getattr(c, attr)) if c.ok else "ERROR"])
    return buf.getvalue()


def _errors_table(result: SweepResult) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["w", "w_in", "variant", "user", "error"])
    for c in result.failed:
        wr.writerow([c.w, c.w_in, c.variant, c.user, c.error])
    return buf.getvalue()


def summary_markdown(result: SweepResult, config_digest: str, corpus_digest: str = "") -> str:
    variants = [v for v in VARIANTS if v in result.variants]
    grid_vals = eer_grid(result, variants)
    body, avg = eer_rows(grid_vals)
    three = lambda v: _fmt(v, "{:.3f}") or "-"  # noqa: E731
    eer_md = _markdown(
        ["w", "w_in", *variants],
        [[str(w), str(w_in), *map(three, row)] for (w, w_in), row in zip(grid_vals, body)]
        + [["AVG", "", *map(three, avg)]],
    )
    mse = mse_grid(result)
    mse_md = _markdown(
        ["variant", *(f"{w}/{w_in}" for w, w_in in result.grid)],
        [[v, *(_fmt(x, "{:.2f}") or "-" for x in row)] for v, row in mse.items()],
    )
    pooled = pooled_eer(result)
    pooled_md = _markdown(
        ["w", "w_in", *variants],
        [[str(w), str(w_in), *(three(pooled.get((v, w, w_in))) for v in variants)] for w, w_in in result.grid],
    )
    notes = sorted({n for c in result.cells for n in c.notes})
    parts = [
        "# Sweep report",
        "",
        f"- config digest: `{config_digest}`",
    ]
    if corpus_digest:
        parts.append(f"- corpus digest: `{corpus_digest}`")
    spec = result.base.resolved()
    parts += [
        f"- users: {len(result.users)}; preset {spec.preset}; epochs {spec.epochs}; "
        f"batch {spec.batch_size}; lr {spec.lr}; lambda {spec.lam}; stride {spec.stride}; seed {spec.seed}",
        f"- cells: {len(result.cells)} ({len(result.failed)} failed)",
        "",
        "## EER (mean of per-user EER)",
        "",
        eer_md,
        "",
        "## EER (pooled scores)",
        "",
        pooled_md,
        "",
        "## Forecast MSE (genuine test windows)",
        "",
        mse_md,
        "",
    ]
    if notes:
        parts += ["## Notes", "", *(f"- {n}" for n in notes), ""]
    if result.failed:
        parts += ["## Failed cells", "", *(f"- {c.variant} {c.w}/{c.w_in} {c.user}: {c.error}" for c in result.failed), ""]
    return "\n".join(parts)


def write_report(result: SweepResult, out_dir, config_digest: str, corpus_digest: str = "") -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    variants = [v for v in VARIANTS if v in result.variants]
    pooled = pooled_eer(result)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["w", "w_in", "variant", "value"])
    for v in variants:
        for w, w_in in result.grid:
            wr.writerow([w, w_in, v, _fmt(pooled.get((v, w, w_in)))])
    files = {
        "eer_table.csv": _long_table(result, "eer"),
        "mse_table.csv": _long_table(result, "forecast_mse"),
        "eer_pooled.csv": buf.getvalue(),
        "eer_summary.csv": render_eer_csv(eer_grid(result, variants), variants),
        "mse_summary.csv": render_mse_csv(mse_grid(result), result.grid),
        "summary.md": summary_markdown(result, config_digest, corpus_digest),
    }
    if result.failed:
        files["errors.csv"] = _errors_table(result)
    paths = {}
    for name, text in files.items():
        p = out / name
        p.write_text(text)
        paths[name] = p
    return paths
