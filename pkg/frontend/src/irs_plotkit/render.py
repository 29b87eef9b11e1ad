"""CSV-to-figure rendering.

The input contract is the irs-opsim result schema, enforced bit-exactly:
header ``sweep,comparator,mean_rate,stderr,n_trials,seed``.  Schema drift,
empty tables and unknown series fail loudly before any file is written.
Monte Carlo series get error bars at +-2 stderr; closed-form series
(n_trials = 0) are drawn dashed, and on pilot-count sweeps their maximum
is marked.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

EXPECTED_HEADER = ["sweep", "comparator", "mean_rate", "stderr",
                   "n_trials", "seed"]

# sweep axes that read better on a log x scale
LOG_X_AXES = {"K"}


class SchemaError(ValueError):
    """The CSV does not match the experiment result schema."""


@dataclass
class ResultData:
    path: str
    series: dict            # label -> (x, y, err, n_trials) arrays as lists
    sweep_axis: str = "sweep"
    scenario: str = ""

    def labels(self):
        return list(self.series)


@dataclass
class PlotSpec:
    csv_path: str
    output: str
    x_axis: str | None = None            # axis label; manifest default
    series: list = field(default_factory=list)  # comparators; default all
    scale: str | None = None             # "linear" | "log-x"; axis default
    title: str | None = None


def load_results(csv_path: str) -> ResultData:
    """Parse one result table, validating the schema exactly."""
    with open(csv_path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{csv_path}: empty file, no header") from None
        if header != EXPECTED_HEADER:
            raise SchemaError(
                f"{csv_path}: header {header!r} does not match the "
                f"experiment schema {EXPECTED_HEADER!r}")
        series: dict = {}
        for row in reader:
            if not row:
                continue
            if len(row) != len(EXPECTED_HEADER):
                raise SchemaError(f"{csv_path}: malformed row {row!r}")
            sweep, comp, mean, err, n_trials, _seed = row
            entry = series.setdefault(comp, ([], [], [], []))
            entry[0].append(float(sweep))
            entry[1].append(float(mean))
            entry[2].append(float(err))
            entry[3].append(int(n_trials))
    if not series:
        raise SchemaError(f"{csv_path}: no data rows")

    data = ResultData(path=csv_path, series=series)
    manifest_path = os.path.splitext(csv_path)[0] + ".manifest.json"
    if os.path.exists(manifest_path):
        with open(manifest_path, "r", encoding="utf-8") as f:
            manifest = json.load(f)
        data.sweep_axis = manifest.get("sweep_axis", "sweep")
        data.scenario = manifest.get("scenario", "")
    return data


def build_figure(spec: PlotSpec):
    """Build the matplotlib figure for a spec (render saves and closes it)."""
    data = load_results(spec.csv_path)
    labels = spec.series or data.labels()
    missing = [s for s in labels if s not in data.series]
    if missing:
        raise SchemaError(
            f"{spec.csv_path}: unknown series {', '.join(missing)} "
            f"(available: {', '.join(data.labels())})")

    axis = spec.x_axis or data.sweep_axis
    log_x = (spec.scale == "log-x" or
             (spec.scale is None and axis in LOG_X_AXES))

    fig, ax = plt.subplots(figsize=(6.4, 4.2), dpi=120)
    handles = []
    for label in labels:
        x, y, err, n_trials = data.series[label]
        if any(n > 0 for n in n_trials):
            handles.append(ax.errorbar(x, y, yerr=[2 * e for e in err],
                                       marker="o", capsize=3, label=label))
        else:
            line, = ax.plot(x, y, linestyle="--", marker="s", label=label)
            handles.append(line)
            if axis == "Q" and len(y) > 1:
                best = max(range(len(y)), key=y.__getitem__)
                ax.plot([x[best]], [y[best]], marker="*", markersize=14,
                        linestyle="none", color=line.get_color())
    if log_x:
        ax.set_xscale("log", base=2 if axis == "N" else 10)
    ax.set_xlabel(axis)
    ax.set_ylabel("mean rate (bits/s/Hz)")
    ax.set_title(spec.title or data.scenario or
                 os.path.basename(spec.csv_path))
    ax.grid(True, alpha=0.3)
    ax.legend(handles=handles, fontsize=8)  # legend in CSV series order
    fig.tight_layout()
    return fig


def render(spec: PlotSpec) -> str:
    """Render one table to one image; returns the image path."""
    fig = build_figure(spec)
    fig.savefig(spec.output, metadata={"Software": "irs-plotkit"})
    plt.close(fig)
    return spec.output


def render_csv(csv_path: str, output: str) -> str:
    """Convenience wrapper: all series, default style."""
    return render(PlotSpec(csv_path=csv_path, output=output))
