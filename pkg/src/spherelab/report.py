"""Report documents: structured results, delimited output, and figures.

A ReportDocument bundles the config echo, measured grids, exponent fits and
empirical constants of one study run.  It serializes to JSON field-for-field
(round-trips to an equal value) and to a fixed-schema CSV; the figure path
renders a deterministic SVG via matplotlib.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from .experiments import ExperimentGrid, FitResult, RatioSample  # noqa: E402

__all__ = ["ReportDocument", "emit_report", "parse_report", "plot_svg",
           "stable_payload", "CSV_COLUMNS"]

CSV_COLUMNS = ("study", "d", "family_f", "family_g", "family_h", "p", "q", "k",
               "lebesgue_r", "ratio", "bound", "ratio_over_bound")

# identical documents must render to identical bytes
plt.rcParams["svg.hashsalt"] = "spherelab"


@dataclass
class ReportDocument:
    """Everything one study run produced."""

    study: str
    config: dict
    grids: list
    fits: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)


def _sample_to_dict(s):
    return {
        "dimension": s.dimension, "family_f": s.family_f, "family_g": s.family_g,
        "family_h": s.family_h, "p": s.p, "q": s.q, "k": s.k,
        "lebesgue_r": None if s.lebesgue_r == math.inf else s.lebesgue_r,
        "ratio": s.ratio, "bound": s.bound, "quad_degree": s.quad_degree,
    }


def _sample_from_dict(d):
    return RatioSample(
        dimension=d["dimension"], family_f=d["family_f"], family_g=d["family_g"],
        family_h=d["family_h"], p=d["p"], q=d["q"], k=d["k"],
        lebesgue_r=math.inf if d["lebesgue_r"] is None else d["lebesgue_r"],
        ratio=d["ratio"], bound=d["bound"], quad_degree=d["quad_degree"],
    )


def _grid_to_dict(g):
    return {
        "samples": [_sample_to_dict(s) for s in g.samples],
        "seed": g.seed,
        "quad_exact_degree": g.quad_exact_degree,
        "timestamp": g.timestamp,
    }


def _grid_from_dict(d):
    return ExperimentGrid(
        samples=[_sample_from_dict(s) for s in d["samples"]],
        seed=d["seed"],
        quad_exact_degree=d["quad_exact_degree"],
        timestamp=d["timestamp"],
    )


def _fit_to_dict(f):
    return {
        "exponent": f.exponent, "intercept": f.intercept, "r_squared": f.r_squared,
        "residual_max": f.residual_max, "loglog_coefficient": f.loglog_coefficient,
    }


def document_to_dict(doc):
    return {
        "study": doc.study,
        "config": doc.config,
        "grids": [_grid_to_dict(g) for g in doc.grids],
        "fits": {k: _fit_to_dict(f) for k, f in doc.fits.items()},
        "constants": doc.constants,
        "meta": doc.meta,
    }


def document_from_dict(d):
    return ReportDocument(
        study=d["study"],
        config=d["config"],
        grids=[_grid_from_dict(g) for g in d["grids"]],
        fits={k: FitResult(**f) for k, f in d["fits"].items()},
        constants=d["constants"],
        meta=d["meta"],
    )


def emit_report(doc, format="json"):
    """Serialize a ReportDocument to bytes: 'json' mirrors the document
    field-for-field; 'csv' emits the fixed sample schema with 12 significant
    digits, empty third-factor columns on bilinear rows."""
    if format == "json":
        return json.dumps(document_to_dict(doc), sort_keys=True, indent=1).encode()
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for grid in doc.grids:
            for s in grid.samples:
                writer.writerow([
                    doc.study, s.dimension, s.family_f, s.family_g,
                    s.family_h or "", s.p, s.q, "" if s.k is None else s.k,
                    "inf" if s.lebesgue_r == math.inf else f"{s.lebesgue_r:.12g}",
                    f"{s.ratio:.12g}", f"{s.bound:.12g}",
                    f"{s.ratio / s.bound:.12g}",
                ])
        return buf.getvalue().encode()
    raise ValueError(f"unknown format '{format}'; expected csv or json")


def parse_report(data, format="json"):
    """Inverse of emit_report for the structured format; CSV parses back to
    the list of row dicts (the delimited schema is lossy by design)."""
    if format == "json":
        return document_from_dict(json.loads(data.decode()))
    if format == "csv":
        reader = csv.DictReader(io.StringIO(data.decode()))
        return list(reader)
    raise ValueError(f"unknown format '{format}'")


_VOLATILE_META = ("timestamp", "runtime_seconds")


def stable_payload(doc):
    """JSON bytes with volatile run metadata blanked; byte-identical across
    reruns of the same config and seed."""
    d = document_to_dict(doc)
    d["meta"] = {k: v for k, v in d["meta"].items() if k not in _VOLATILE_META}
    for g in d["grids"]:
        g["timestamp"] = None
    return json.dumps(d, sort_keys=True, indent=1).encode()


def _doc_samples(doc):
    return [s for grid in doc.grids for s in grid.samples]


def plot_svg(doc):
    """Log-log scatter of ratio against the smaller degree, with the fitted
    line and the bound-slope reference; deterministic bytes for a given doc."""
    samples = _doc_samples(doc)
    if len(samples) < 2:
        raise ValueError(f"need at least 2 samples to plot, have {len(samples)}")
    xs = [max(min(s.p, s.q), 1) for s in samples]
    ys = [s.ratio for s in samples]
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.scatter(xs, ys, s=14, color="#205080", zorder=3, label="measured ratio")
    fit = next(iter(doc.fits.values()), None)
    x_lo, x_hi = min(xs), max(xs)
    if x_lo == x_hi:
        x_hi = x_lo * 2
    grid_x = [x_lo * (x_hi / x_lo) ** (i / 63.0) for i in range(64)]
    if fit is not None:
        line = [math.exp(fit.intercept) * x ** fit.exponent for x in grid_x]
        ax.plot(grid_x, line, color="#b03030",
                label=f"fit slope {fit.exponent:.4f}")
    bexp = doc.constants.get("bound_exponent")
    if bexp is not None:
        anchor = ys[0] / xs[0] ** bexp
        ref = [anchor * x ** bexp for x in grid_x]
        ax.plot(grid_x, ref, color="#707070", linestyle="--",
                label=f"bound slope {bexp:g}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("min degree")
    ax.set_ylabel("ratio")
    ax.set_title(doc.study)
    ax.legend(fontsize=8)
    fig.tight_layout()
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()
