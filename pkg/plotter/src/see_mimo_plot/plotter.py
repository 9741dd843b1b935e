"""CSV-to-image rendering for secure-EE sweep results.

This package never recomputes statistics: it maps the sweep CSV produced by
the simulation toolkit straight onto a line chart, one series per
(algorithm, scheme) pair.  Rendering is deterministic; no timestamps are
embedded in the output.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

EXPECTED_HEADER = [
    "x_variable",
    "x_value",
    "algorithm",
    "scheme",
    "mean_ee_sec_bps_hz_per_w",
    "std_ee_sec",
    "convergence_rate",
    "mean_iters",
    "mean_m_active",
]

X_LABELS = {
    "antenna_count": "Number of BS antennas",
    "max_power": "Maximum transmission power [W]",
}
Y_LABEL = "Secure energy efficiency [bits/s/Hz per W]"

CROSSOVER_PAIR = ("alg2", "alg3")


class SchemaMismatch(ValueError):
    """The CSV header does not match the sweep-output schema."""


class EmptyData(ValueError):
    """The CSV holds no data rows."""


@dataclass(frozen=True)
class PlotSpec:
    csv_path: str
    out_path: str
    x_label: str = ""           # derived from the x_variable column when empty
    y_label: str = Y_LABEL
    annotate_crossover: bool = False
    title: str = ""

    def __post_init__(self) -> None:
        if not self.csv_path or not self.out_path:
            raise ValueError("csv_path and out_path are required")


@dataclass(frozen=True)
class RenderInfo:
    out_path: str
    series: tuple            # legend labels, one per (algorithm, scheme)
    x_variable: str
    x_label: str
    y_label: str
    crossovers: tuple = field(default=())  # (scheme, x) vertical markers drawn


def read_sweep_csv(path: str):
    """Parse a sweep CSV into per-series points, validating the schema."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatch(f"{path}: empty file") from None
        if header != EXPECTED_HEADER:
            raise SchemaMismatch(
                f"{path}: header {header!r} does not match the sweep schema"
            )
        rows = [row for row in reader if row]
    if not rows:
        raise EmptyData(f"{path}: no data rows")

    x_variable = rows[0][0]
    series: dict = {}
    for row in rows:
        key = (row[2], row[3])  # (algorithm, scheme)
        series.setdefault(key, []).append((float(row[1]), float(row[4])))
    for pts in series.values():
        pts.sort(key=lambda t: t[0])
    return x_variable, series


def crossover_points(series: dict):
    """Sign-flip locations of the cell-division/selection difference.

    For every scheme carrying both series, adjacent x points where the
    difference changes sign yield one marker at the linear interpolation of
    the zero crossing.
    """
    a, b = CROSSOVER_PAIR
    out = []
    schemes = {s for (_, s) in series}
    for scheme in sorted(schemes):
        if (a, scheme) not in series or (b, scheme) not in series:
            continue
        pa = dict(series[(a, scheme)])
        pb = dict(series[(b, scheme)])
        xs = sorted(set(pa) & set(pb))
        diffs = [pa[x] - pb[x] for x in xs]
        for i in range(len(xs) - 1):
            d0, d1 = diffs[i], diffs[i + 1]
            if d0 == 0.0:
                continue
            if d0 * d1 < 0.0:
                x0, x1 = xs[i], xs[i + 1]
                x_cross = x0 + (x1 - x0) * d0 / (d0 - d1)
                out.append((scheme, x_cross))
            elif d1 == 0.0 and (i + 2 >= len(xs) or diffs[i + 2] * d0 < 0.0):
                out.append((scheme, xs[i + 1]))
    return out


def render(spec: PlotSpec) -> RenderInfo:
    """Draw the sweep as one line per (algorithm, scheme) and save it."""
    x_variable, series = read_sweep_csv(spec.csv_path)
    x_label = spec.x_label or X_LABELS.get(x_variable, x_variable)

    fig, ax = plt.subplots(figsize=(7.2, 4.8))
    labels = []
    for (algorithm, scheme) in sorted(series):
        pts = series[(algorithm, scheme)]
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        label = f"{algorithm} ({scheme})"
        ax.plot(xs, ys, marker="o", markersize=3.5, linewidth=1.4, label=label)
        labels.append(label)

    crossings = ()
    if spec.annotate_crossover:
        crossings = tuple(crossover_points(series))
        for scheme, x in crossings:
            ax.axvline(x, color="0.4", linestyle="--", linewidth=1.0)
            ax.annotate(
                f"{CROSSOVER_PAIR[0]}/{CROSSOVER_PAIR[1]} ({scheme})",
                xy=(x, ax.get_ylim()[0]),
                xytext=(2, 4),
                textcoords="offset points",
                rotation=90,
                fontsize=7,
                color="0.3",
            )

    ax.set_xlabel(x_label)
    ax.set_ylabel(spec.y_label)
    if spec.title:
        ax.set_title(spec.title)
    ax.grid(True, alpha=0.35)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(spec.out_path, dpi=130, metadata={"Software": "see-mimo-plot"})
    plt.close(fig)

    return RenderInfo(
        out_path=spec.out_path,
        series=tuple(labels),
        x_variable=x_variable,
        x_label=x_label,
        y_label=spec.y_label,
        crossovers=crossings,
    )
