"""Figure rendering: one image per spec, nothing computed beyond the file.

Every number shown is a row of the input CSV (the argmin marker is row
selection, not statistics).  matplotlib runs on the Agg backend so the
renderers work in batch with no display.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .readers import SchemaMismatch, Table, read_table, surface_plane_rates, sweep_minimum

KINDS = ("threshold_sweep", "blockage_surface", "maxweight_compare")


@dataclass
class FigureSpec:
    kind: str
    inputs: tuple[str, ...]
    out: str

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise SchemaMismatch(f"unknown figure kind {self.kind!r}, expected one of {KINDS}")
        if not self.inputs:
            raise SchemaMismatch("at least one input CSV is required")


@dataclass
class RenderResult:
    """What was drawn, for callers that want to check the figure's claims."""

    kind: str
    out: str
    # threshold_sweep: one argmin row per curve (plus its label);
    # blockage_surface: plane rates and grid shape; maxweight_compare: rows
    annotations: list[dict] = field(default_factory=list)


def _curve_label(path: str) -> str:
    return Path(path).stem


def render_threshold_sweep(spec: FigureSpec) -> RenderResult:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    notes = []
    for src in spec.inputs:
        tab = read_table(src, "threshold_sweep")
        label = _curve_label(src)
        m, delay, ci = tab.column("m"), tab.column("avg_delay"), tab.column("ci")
        ax.errorbar(m, delay, yerr=ci, marker=".", capsize=2, label=label)
        best = sweep_minimum(tab)
        ax.plot(best["m"], best["avg_delay"], "k*", markersize=12, zorder=5)
        ax.annotate(
            f"min at m={best['m']:g}\n{best['avg_delay']:.4g} ± {best['ci']:.2g}",
            xy=(best["m"], best["avg_delay"]),
            xytext=(8, 14), textcoords="offset points", fontsize=8,
        )
        notes.append({"label": label, **best})
    ax.set_xlabel("fast-path admission threshold m")
    ax.set_ylabel("average delay")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(spec.out, dpi=150)
    plt.close(fig)
    return RenderResult(spec.kind, spec.out, notes)


def render_blockage_surface(spec: FigureSpec) -> RenderResult:
    if len(spec.inputs) != 1:
        raise SchemaMismatch("blockage_surface takes exactly one CSV")
    tab = read_table(spec.inputs[0], "blockage_surface")
    mu_mm, mu_sub6 = surface_plane_rates(tab)

    lams = sorted(set(tab.column("lambda")))
    pnas = sorted(set(tab.column("p_na")))
    z = np.full((len(pnas), len(lams)), np.nan)
    flagged = []
    for lam, p_na, w, flag in tab.rows:
        z[pnas.index(p_na), lams.index(lam)] = w
        if flag == 1:
            flagged.append((p_na, lam, w))

    fig = plt.figure(figsize=(7.5, 5.5))
    ax = fig.add_subplot(projection="3d")
    px, ly = np.meshgrid(pnas, lams, indexing="ij")
    masked = np.ma.masked_invalid(z)
    ax.plot_surface(px, ly, masked, cmap="viridis", edgecolor="k",
                    linewidth=0.3, alpha=0.9)
    if flagged:
        fx, fy, fz = zip(*flagged)
        ax.scatter(fx, fy, fz, color="red", s=25, label="baseline arm censored")
        ax.legend(loc="upper left")

    # stability border: arrivals equal the no-blockage service capacity
    zmax = float(np.nanmax(z)) if np.isfinite(z).any() else 1.0
    pn = np.linspace(min(pnas), max(pnas), 40)
    border = mu_sub6 + (1.0 - pn) * mu_mm
    lam_top = max(lams) * 1.05
    keep = border <= lam_top
    if keep.any():
        pb, zb = np.meshgrid(pn[keep], [0.0, zmax * 1.05], indexing="ij")
        lb = np.broadcast_to((mu_sub6 + (1.0 - pn[keep]) * mu_mm)[:, None], pb.shape)
        ax.plot_surface(pb, lb, zb, color="tab:red", alpha=0.25)
    ax.set_xlabel("p_na (beam-blockage probability)")
    ax.set_ylabel("arrival rate")
    ax.set_zlabel("relative delay reduction")
    ax.set_ylim(min(lams), lam_top)
    fig.tight_layout()
    fig.savefig(spec.out, dpi=150)
    plt.close(fig)
    return RenderResult(spec.kind, spec.out, [{
        "mu_mm": mu_mm, "mu_sub6": mu_sub6,
        "grid": (len(pnas), len(lams)),
        "holes": int(np.isnan(z).sum()),
    }])


def render_maxweight_compare(spec: FigureSpec) -> RenderResult:
    if len(spec.inputs) != 1:
        raise SchemaMismatch("maxweight_compare takes exactly one CSV")
    tab = read_table(spec.inputs[0], "maxweight_compare")
    rows = sorted(tab.rows, key=lambda r: r[0])
    col = tab.header.index
    lam = [r[col("lambda")] for r in rows]

    fig, (ax_d, ax_t) = plt.subplots(1, 2, figsize=(9.5, 4.2), sharex=True)
    ax_d.errorbar(lam, [r[col("delay_threshold")] for r in rows],
                  yerr=[r[col("ci_delay_threshold")] for r in rows],
                  marker="o", capsize=3, label="threshold policy")
    ax_d.errorbar(lam, [r[col("delay_maxweight")] for r in rows],
                  yerr=[r[col("ci_delay_maxweight")] for r in rows],
                  marker="s", capsize=3, label="backpressure baseline")
    for r in rows:
        ax_d.annotate(f"m={r[col('m')]:g}",
                      xy=(r[col("lambda")], r[col("delay_threshold")]),
                      xytext=(4, -12), textcoords="offset points", fontsize=8)
    ax_d.set_xlabel("arrival rate")
    ax_d.set_ylabel("average delay")
    ax_d.legend()
    ax_d.grid(True, alpha=0.3)

    ax_t.errorbar(lam, [r[col("tput_threshold")] for r in rows],
                  yerr=[r[col("ci_tput_threshold")] for r in rows],
                  marker="o", capsize=3, label="threshold policy")
    ax_t.errorbar(lam, [r[col("tput_maxweight")] for r in rows],
                  yerr=[r[col("ci_tput_maxweight")] for r in rows],
                  marker="s", capsize=3, label="backpressure baseline")
    ax_t.set_xlabel("arrival rate")
    ax_t.set_ylabel("throughput")
    ax_t.legend()
    ax_t.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(spec.out, dpi=150)
    plt.close(fig)
    return RenderResult(spec.kind, spec.out,
                        [dict(zip(tab.header, r)) for r in rows])


_RENDERERS = {
    "threshold_sweep": render_threshold_sweep,
    "blockage_surface": render_blockage_surface,
    "maxweight_compare": render_maxweight_compare,
}


def render(spec: FigureSpec) -> RenderResult:
    """Validate inputs, draw, write one raster image; no output on failure."""
    return _RENDERERS[spec.kind](spec)
