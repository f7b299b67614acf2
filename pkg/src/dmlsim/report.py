"""Emission of study artifacts: tables, histogram figures, per-rep records.

All numeric formatting is explicit and locale-free so that re-running a
seeded study reproduces byte-identical CSV output. SVG figures are rendered
with matplotlib's Agg backend under a fixed hash salt and no embedded
timestamp, which makes them byte-stable as well.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "dmlsim"

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .errors import MissingSeries, ParseError, TooFew  # noqa: E402
from .montecarlo import (  # noqa: E402
    AggregateReport,
    FORECAST_PIPELINES,
    INFERENCE_PIPELINES,
    histogram,
)

FORECAST_LABELS = {
    "forecast_ols": "OLS",
    "forecast_post_lasso": "Post-lasso",
}

INFERENCE_LABELS = {
    "infer_naive": "Naive",
    "infer_partialling_out": "Partialling-out",
}

HISTOGRAM_SERIES = {
    "OOSRmsePostLasso": "forecast_post_lasso.oos_rmse",
    "AlphaNaive": "infer_naive.alpha_hat",
    "AlphaPartialling": "infer_partialling_out.alpha_hat",
}

FORMATS = ("text", "csv", "markdown")

_EXTENSIONS = {"text": "txt", "csv": "csv", "markdown": "md"}


@dataclass
class RunManifest:
    """Ledger of emitted files with 64-bit content checksums."""

    config_path: str
    output_directory: str
    emitted_files: list[dict] = field(default_factory=list)

    def record(self, path: Path, kind: str) -> None:
        digest = hashlib.blake2b(path.read_bytes(), digest_size=8).hexdigest()
        self.emitted_files.append(
            {"path": path.name, "kind": kind, "checksum": digest}
        )

    def write(self, path: Path) -> None:
        payload = {
            "config_path": self.config_path,
            "output_directory": self.output_directory,
            "emitted_files": self.emitted_files,
        }
        path.write_text(json.dumps(payload, indent=2) + "\n")


def _fmt(value: float, decimals: int = 4) -> str:
    if value is None or not np.isfinite(value):
        return "nan"
    return f"{value:.{decimals}f}"


def _pct(value: float) -> str:
    if value is None or not np.isfinite(value):
        return "nan"
    return f"{100.0 * value:.1f}%"


def forecast_table_cells(reports: dict[str, AggregateReport]) -> tuple[list, list]:
    """Header + rows for the forecast comparison across one or more runs."""
    header = ["Method"]
    for label in reports:
        header += [f"In-sample RMSE ({label})", f"Out-of-sample RMSE ({label})"]
    rows = []
    for method in FORECAST_PIPELINES:
        if not any(method in rep.forecast_rows for rep in reports.values()):
            continue
        row = [FORECAST_LABELS[method]]
        for rep in reports.values():
            if method in rep.forecast_rows:
                fr = rep.forecast_rows[method]
                row += [_fmt(fr.mean_in_sample_rmse, 3), _fmt(fr.mean_oos_rmse, 3)]
            else:
                row += ["", ""]
        rows.append(row)
    return header, rows


def inference_table_cells(reports: dict[str, AggregateReport]) -> tuple[list, list]:
    """Header + rows for the inference summary (statistics x methods)."""
    header = ["Statistic"]
    methods = []
    for label, rep in reports.items():
        for method in INFERENCE_PIPELINES:
            if method in rep.inference_rows:
                suffix = f" ({label})" if len(reports) > 1 else ""
                header.append(INFERENCE_LABELS[method] + suffix)
                methods.append((label, method))
    stat_rows = [
        ("Mean estimate", lambda r: _fmt(r.mean_estimate)),
        ("Std. dev.", lambda r: _fmt(r.std_dev)),
        ("t-statistic", lambda r: _fmt(r.t_stat, 3)),
        ("p-value", lambda r: _fmt(r.p_value)),
        ("Rejection rate", lambda r: _pct(r.rejection_rate)),
    ]
    rows = []
    for name, cell in stat_rows:
        row = [name]
        for label, method in methods:
            row.append(cell(reports[label].inference_rows[method]))
        rows.append(row)
    return header, rows


def _render_text(header: list, rows: list) -> str:
    widths = [
        max(len(str(cell)) for cell in column)
        for column in zip(*([header] + rows))
    ]
    def line(cells):
        return "  ".join(str(c).ljust(w) for c, w in zip(cells, widths)).rstrip()
    rule = "  ".join("-" * w for w in widths)
    return "\n".join([line(header), rule] + [line(r) for r in rows]) + "\n"


def _render_markdown(header: list, rows: list) -> str:
    def line(cells):
        return "| " + " | ".join(str(c) for c in cells) + " |"
    sep = "| " + " | ".join("---" for _ in header) + " |"
    return "\n".join([line(header), sep] + [line(r) for r in rows]) + "\n"


def _render_csv(header: list, rows: list) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def render_table(header: list, rows: list, format: str) -> str:
    if format == "text":
        return _render_text(header, rows)
    if format == "csv":
        return _render_csv(header, rows)
    if format == "markdown":
        return _render_markdown(header, rows)
    raise ValueError(f"unknown format {format!r}")


def emit_tables(
    reports: dict[str, AggregateReport],
    out_dir: Path,
    format: str = "csv",
    manifest: RunManifest | None = None,
) -> list[Path]:
    """Write the forecast and inference tables for one or more labeled runs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ext = _EXTENSIONS[format]
    written = []
    for name, cells, kind in (
        ("forecast_table", forecast_table_cells(reports), "Table1Like"),
        ("inference_table", inference_table_cells(reports), "Table2Like"),
    ):
        header, rows = cells
        if len(header) <= 1:
            continue
        path = out_dir / f"{name}.{ext}"
        path.write_text(render_table(header, rows, format))
        if manifest is not None:
            manifest.record(path, kind)
        written.append(path)
    return written


def _series(report: AggregateReport, which: str) -> np.ndarray:
    if which not in HISTOGRAM_SERIES:
        raise MissingSeries(f"unknown histogram series {which!r}")
    key = HISTOGRAM_SERIES[which]
    if key not in report.per_replication:
        raise MissingSeries(f"series {key!r} was not recorded in this run")
    values = report.per_replication[key]
    values = values[np.isfinite(values)]
    if values.size == 0:
        raise MissingSeries(f"series {key!r} has no successful replications")
    return values


def emit_histogram(
    report: AggregateReport,
    which: str,
    out_dir: Path,
    bins: int = 30,
    manifest: RunManifest | None = None,
) -> tuple[Path, Path]:
    """Write one histogram as a CSV of bins/overlay plus an SVG figure."""
    values = _series(report, which)
    hist = histogram(values, max(bins, 2))
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"hist_{which}"

    csv_path = out_dir / f"{stem}.csv"
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["bin_left", "bin_right", "count"])
    for left, right, count in zip(hist.edges[:-1], hist.edges[1:], hist.counts):
        writer.writerow([f"{left:.10g}", f"{right:.10g}", int(count)])
    writer.writerow([])
    writer.writerow(["overlay_x", "overlay_density"])
    for x, yv in zip(hist.overlay_x, hist.overlay_y):
        writer.writerow([f"{x:.10g}", f"{yv:.10g}"])
    csv_path.write_text(buffer.getvalue())

    svg_path = out_dir / f"{stem}.svg"
    widths = np.diff(hist.edges)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    try:
        ax.bar(
            hist.edges[:-1],
            hist.counts,
            width=widths,
            align="edge",
            color="#4878a8",
            edgecolor="white",
        )
        # scale the density overlay to count space
        scale = values.size * float(widths.mean())
        ax.plot(hist.overlay_x, hist.overlay_y * scale, color="red", linewidth=1.5)
        ax.set_xlabel(which)
        ax.set_ylabel("count")
        ax.set_title(f"{which} over {values.size} replications")
        fig.savefig(svg_path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)

    if manifest is not None:
        manifest.record(csv_path, "HistogramCSV")
        manifest.record(svg_path, "HistogramSVG")
    return csv_path, svg_path


def emit_per_replication(
    report: AggregateReport,
    out_dir: Path,
    manifest: RunManifest | None = None,
) -> Path:
    """Write every per-replication metric vector as one wide CSV."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "per_replication.csv"
    keys = sorted(report.per_replication)
    if not keys:
        raise TooFew("report holds no per-replication records")
    n = report.scenario.replications
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["replication"] + keys)
    for rep in range(n):
        row = [rep]
        for key in keys:
            value = report.per_replication[key][rep]
            row.append("" if not np.isfinite(value) else repr(float(value)))
        writer.writerow(row)
    path.write_text(buffer.getvalue())
    if manifest is not None:
        manifest.record(path, "PerRepCSV")
    return path


def read_per_replication(path: Path) -> dict[str, np.ndarray]:
    """Load a per_replication.csv back into metric vectors (NaN for blanks)."""
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        rows = list(reader)
    keys = header[1:]
    out = {key: np.full(len(rows), np.nan) for key in keys}
    for i, row in enumerate(rows):
        for key, cell in zip(keys, row[1:]):
            if cell:
                try:
                    out[key][i] = float(cell)
                except ValueError:
                    raise ParseError(
                        f"{key}: bad numeric cell {cell!r}", i + 2
                    ) from None
    return out
