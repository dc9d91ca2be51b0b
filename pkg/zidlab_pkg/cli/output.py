# -*- coding: utf-8 -*-
"""
ZidLab — Output module.

CSV, JSON and SVG writers. Every file carries the configuration that
produced it: `# config:` header lines in CSV, a `config` member in JSON
and the SVG description metadata. `read_provenance` recovers it.
"""

import csv
import io
import json
import re
from html import unescape
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from ..errors import ValidationError  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "zidlab"
matplotlib.rcParams["svg.fonttype"] = "none"

CONFIG_PREFIX = "# config: "
VERSION_PREFIX = "# version: "


def _dump_config(config):
    return json.dumps(config, sort_keys=True, separators=(",", ":"))


class OutputWriter:
    """Writes result files under one directory, stamping each with provenance."""

    def __init__(self, out_dir, config, version):
        self.out_dir = Path(out_dir)
        self.config = config
        self.version = version
        self.written = []

    def path(self, name):
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir / name

    def _record(self, path):
        self.written.append(path)
        return path

    def write_csv(self, name, rows, columns):
        buf = io.StringIO()
        buf.write(CONFIG_PREFIX + _dump_config(self.config) + "\n")
        buf.write(VERSION_PREFIX + self.version + "\n")
        writer = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore",
                                lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
        path = self.path(name)
        path.write_text(buf.getvalue(), encoding="utf-8")
        return self._record(path)

    def write_json(self, name, data):
        record = {"config": self.config, "version": self.version, "result": data}
        path = self.path(name)
        path.write_text(json.dumps(record, indent=1, sort_keys=True) + "\n", encoding="utf-8")
        return self._record(path)

    def write_svg(self, name, figure):
        path = self.path(name)
        figure.savefig(path, format="svg", metadata={
            "Date": None,
            "Description": _dump_config(self.config),
            "Creator": f"zidlab {self.version}",
        })
        plt.close(figure)
        return self._record(path)


# ============================================================
# PROVENANCE
# ============================================================


def read_provenance(path):
    """Return the config dict that produced a CSV, JSON or SVG result file."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".csv":
        for line in text.splitlines():
            if line.startswith(CONFIG_PREFIX):
                return json.loads(line[len(CONFIG_PREFIX):])
    elif path.suffix == ".json":
        return json.loads(text)["config"]
    elif path.suffix == ".svg":
        m = re.search(r"<dc:description>(.*?)</dc:description>", text, re.S)
        if m:
            return json.loads(unescape(m.group(1)))
    raise ValidationError(f"{path} carries no provenance")


def read_csv_rows(path):
    """Data rows of a result CSV (provenance lines skipped)."""
    lines = [line for line in Path(path).read_text(encoding="utf-8").splitlines()
             if not line.startswith("# ")]
    return list(csv.DictReader(lines))


def csv_body(path):
    return "\n".join(line for line in Path(path).read_text(encoding="utf-8").splitlines()
                     if not line.startswith("# "))


# ============================================================
# CHARTS
# ============================================================


def line_chart(series, xlabel, ylabel, title="", bands=None):
    """series: {label: (xs, ys)}; bands: {label: (lows, highs)}."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, (xs, ys) in series.items():
        ax.plot(xs, ys, marker="o", label=str(label))
        if bands and label in bands:
            lo, hi = bands[label]
            ax.fill_between(xs, lo, hi, alpha=0.2)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    return fig


def heatmap(grid, title=""):
    """grid indexed [x, y]; drawn with y growing downward like the map."""
    fig, ax = plt.subplots(figsize=(6, 4))
    image = ax.imshow(grid.T, cmap="viridis", origin="upper")
    fig.colorbar(image, ax=ax)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return fig


def box_plot(groups, xlabel, ylabel, title=""):
    """groups: {label: values}."""
    fig, ax = plt.subplots(figsize=(6, 4))
    labels = list(groups)
    ax.boxplot([groups[k] for k in labels])
    ax.set_xticks(range(1, len(labels) + 1), [str(k) for k in labels])
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return fig
