"""Figure rendering: drift heatmaps and iteration error curves.

Layouts mirror the reconstruction figures: a single panel, a row of three,
or a 2x3 grid.  Panels in one figure share a color range by default so they
compare visually; per-panel scaling is opt-in.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (Agg must be set first)

from .fields import ConvergenceData, CsvFormatError, FieldData, read_convergence, read_field

DPI = 150

# layout name -> (rows, cols, figsize inches)
LAYOUTS = {
    "single": (1, 1, (5.2, 4.4)),
    "row-of-3": (1, 3, (14.0, 4.2)),
    "2x3": (2, 3, (14.0, 8.2)),
}

# pinned style: identical inputs must render pixel-identical images
_STYLE = {
    "figure.dpi": DPI,
    "savefig.dpi": DPI,
    "font.size": 10,
    "image.cmap": "viridis",
    "svg.hashsalt": "driftplot",
}


@dataclass(frozen=True)
class PlotJob:
    """One heatmap figure: input fields, layout, color policy, destination."""

    inputs: tuple
    out: str
    layout: str = "single"
    shared_range: bool = True
    title: str | None = None


@dataclass(frozen=True)
class RenderResult:
    out: Path
    panels: int
    size_px: tuple


def _manifest_title(first_input) -> str | None:
    manifest = Path(first_input).parent / "manifest.json"
    if not manifest.exists():
        return None
    try:
        with open(manifest, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError):
        return None
    parts = [doc.get("experiment"), doc.get("run")] if "experiment" in doc else [doc.get("command")]
    parts = [p for p in parts if p]
    return " / ".join(parts) if parts else None


def _save(fig, out) -> Path:
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    # strip the software tag so rerenders are byte-identical
    fig.savefig(out, dpi=DPI, metadata={"Software": None})
    plt.close(fig)
    return out


def render_heatmap(job: PlotJob) -> RenderResult:
    """Render one or more field CSVs as heatmap panels on [0,1]^2."""
    if job.layout not in LAYOUTS:
        known = ", ".join(sorted(LAYOUTS))
        raise ValueError(f"unknown layout {job.layout!r} (expected one of {known})")
    rows, cols, figsize = LAYOUTS[job.layout]
    n_panels = rows * cols
    if len(job.inputs) != n_panels:
        raise ValueError(
            f"layout {job.layout} needs {n_panels} input files, got {len(job.inputs)}"
        )
    fields = [read_field(p) for p in job.inputs]
    if job.shared_range:
        first = fields[0]
        for path, f in zip(job.inputs[1:], fields[1:]):
            if (f.nx, f.ny) != (first.nx, first.ny):
                raise ValueError(
                    f"{path}: grid {f.nx}x{f.ny} differs from {first.nx}x{first.ny}; "
                    "shared color range needs matching grids"
                )
        vmin = min(f.values.min() for f in fields)
        vmax = max(f.values.max() for f in fields)
        if vmin == vmax:
            # constant figure: widen so the colorbar stays drawable
            vmin, vmax = vmin - 0.5, vmax + 0.5

    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(rows, cols, figsize=figsize, squeeze=False)
        for ax, path, data in zip(axes.ravel(), job.inputs, fields):
            if not job.shared_range:
                vmin, vmax = data.values.min(), data.values.max()
                if vmin == vmax:
                    vmin, vmax = vmin - 0.5, vmax + 0.5
            im = ax.imshow(
                data.values,
                origin="lower",
                extent=data.extent,
                vmin=vmin,
                vmax=vmax,
                interpolation="nearest",
                aspect="auto",
            )
            ax.set_xlabel("x")
            ax.set_ylabel("y")
            ax.set_title(Path(path).stem)
            fig.colorbar(im, ax=ax, shrink=0.9)
        title = job.title if job.title is not None else _manifest_title(job.inputs[0])
        if title:
            fig.suptitle(title)
        out = _save(fig, job.out)
    w, h = figsize
    return RenderResult(out=out, panels=n_panels, size_px=(round(w * DPI), round(h * DPI)))


def render_error_curve(convergence_csv, out, *, title=None) -> RenderResult:
    """Semilog plot of the relative error and the iterate increment against k."""
    data: ConvergenceData = read_convergence(convergence_csv)
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=LAYOUTS["single"][2])
        drew = False
        for series, label, marker in (
            (data.rel_err, "relative error", "o"),
            (data.increment, "increment", "s"),
        ):
            keep = ~np.isnan(series) & (series > 0)
            if keep.any():
                ax.semilogy(data.k[keep], series[keep], marker=marker, label=label)
                drew = True
        if not drew:
            raise CsvFormatError(convergence_csv, 1, "no plottable series (all cells empty or zero)")
        ax.set_xlabel("iteration k")
        ax.legend()
        if title is None:
            title = _manifest_title(convergence_csv)
        if title:
            ax.set_title(title)
        out = _save(fig, out)
    w, h = LAYOUTS["single"][2]
    return RenderResult(out=out, panels=1, size_px=(round(w * DPI), round(h * DPI)))
