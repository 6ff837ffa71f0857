"""Render the four figure kinds and the `render` console entry point."""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.patches import Rectangle

from figure_kit.csv_io import SCHEMAS, EmptyDataError, SchemaError, read_table

# pinned so identical inputs give byte-identical files
_RC = {
    "figure.figsize": (6.4, 4.8),
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "font.family": "DejaVu Sans",
    "font.size": 10,
    "svg.hashsalt": "figure_kit",
}

_SAVE_METADATA = {
    ".png": {"Software": "figure_kit"},
    ".svg": {"Date": None},
    ".pdf": {"CreationDate": None},
}


@dataclass(frozen=True)
class FigureSpec:
    """One rendering request: what to draw, from which files, to which image."""

    kind: str
    in_path: str
    out_path: str
    in2_path: str | None = None
    phi: float | None = None


def _save(fig, out_path: str) -> None:
    suffix = "." + out_path.rsplit(".", 1)[-1].lower() if "." in out_path else ""
    if suffix not in _SAVE_METADATA:
        raise ValueError(f"unsupported image format {suffix!r}, use one of: png, svg, pdf")
    fig.savefig(out_path, metadata=_SAVE_METADATA[suffix])
    plt.close(fig)


def _render_empty(spec: FigureSpec) -> None:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        ax.set_title(f"{spec.kind}: no samples")
        ax.text(0.5, 0.5, "no samples", ha="center", va="center", transform=ax.transAxes)
        ax.set_xticks([])
        ax.set_yticks([])
        _save(fig, spec.out_path)


def _draw_spectrum(ax, table, table2) -> str:
    re = np.asarray(table["re"])
    im = np.asarray(table["im"])
    ax.scatter(re, im, s=14, marker="o", label="eigenvalues", color="#1f4e79", zorder=3)
    if table2 is not None:
        ax.scatter(table2["re"], table2["im"], s=26, marker="x", label="comparison", color="#a33", zorder=2)
    angles = [math.atan2(abs(y), abs(x)) for x, y in zip(re, im) if abs(x) >= 1e-12]
    theta = max(angles) if angles else 0.0
    radius = float(np.max(np.hypot(re, im)))
    if theta > 0.0 and radius > 0.0:
        for sign in (1.0, -1.0):
            ax.plot(
                [0.0, -radius * math.cos(theta)],
                [0.0, sign * radius * math.sin(theta)],
                linestyle="--", linewidth=0.9, color="#777",
                label="sector boundary" if sign > 0 else None,
            )
    ax.axvline(0.0, linewidth=0.8, color="#999")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_title("spectrum")
    ax.legend(loc="upper left")
    return f"points={len(re)} sector_half_angle={theta:.4f}"


def _fit_top_decades(lam: np.ndarray, norm: np.ndarray) -> tuple[float, float, float, float] | None:
    lo, hi = float(lam.max()) / 100.0, float(lam.max())
    mask = (lam >= lo * (1 - 1e-12)) & (lam <= hi * (1 + 1e-12)) & (norm > 0)
    if mask.sum() < 3 or lam[mask].min() == lam[mask].max():
        return None
    x, y = np.log(lam[mask]), np.log(norm[mask])
    slope, intercept = np.polyfit(x, y, 1)
    predicted = slope * x + intercept
    ss_res = float(np.sum((y - predicted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), lo, hi


def _draw_resolvent(ax, table, table2, phi: float | None) -> str:
    lam = np.asarray(table["lambda"], dtype=float)
    norm = np.asarray(table["norm"], dtype=float)
    order = np.argsort(lam)
    lam, norm = lam[order], norm[order]
    ax.loglog(lam, norm, marker=".", linewidth=1.0, color="#1f4e79", label="measured")
    if table2 is not None:
        ax.loglog(table2["lambda"], table2["norm"], marker=".", linewidth=1.0,
                  color="#a33", label="comparison")
    summary = "slope=nan"
    fit = _fit_top_decades(lam, norm)
    if fit is not None:
        slope, intercept, lo, hi = fit
        xs = np.array([lo, hi])
        ax.loglog(xs, np.exp(intercept) * xs**slope, linestyle="-", linewidth=1.6,
                  color="#e69f00", label=f"fit slope {slope:.2f}")
        summary = f"slope={slope:.2f} window=[{lo:g},{hi:g}]"
    if phi is not None and fit is not None:
        _, intercept, lo, hi = fit
        xs = np.array([lo, hi])
        anchor = np.exp(intercept) * lo ** fit[0]
        ax.loglog(xs, anchor * (xs / lo) ** (-phi), linestyle="--", linewidth=1.2,
                  color="#555", label=f"reference slope {-phi:.2f}")
    ax.set_xlabel("lambda")
    ax.set_ylabel("resolvent norm")
    ax.set_title("resolvent decay")
    ax.legend(loc="lower left")
    return summary


def _draw_energy(ax, table, table2) -> str:
    t = np.asarray(table["t"], dtype=float)
    energy = np.asarray(table["energy"], dtype=float)
    ax.semilogy(t, energy, linewidth=1.2, color="#1f4e79", label="energy")
    if table2 is not None:
        ax.semilogy(table2["t"], table2["energy"], linewidth=1.2, color="#a33", label="comparison")
    ax.set_xlabel("t")
    ax.set_ylabel("energy")
    ax.set_title("energy decay")
    ax.legend(loc="upper right")
    ratio = energy[-1] / energy[0] if energy[0] != 0.0 else math.nan
    return f"points={len(t)} final_over_initial={ratio:.3e}"


def _cell_edges(centers: np.ndarray) -> np.ndarray:
    if len(centers) == 1:
        half = 0.125
        return np.array([centers[0] - half, centers[0] + half])
    mids = (centers[:-1] + centers[1:]) / 2.0
    first = centers[0] - (mids[0] - centers[0])
    last = centers[-1] + (centers[-1] - mids[-1])
    return np.concatenate([[first], mids, [last]])


def _draw_regionmap(ax, table) -> str:
    taus = np.asarray(table["tau"], dtype=float)
    sigmas = np.asarray(table["sigma"], dtype=float)
    phi_hat = np.asarray(table["phi_hat"], dtype=float)
    passed = table["pass"]
    tau_values = np.unique(taus)
    sigma_values = np.unique(sigmas)
    if len(taus) != len(tau_values) * len(sigma_values):
        raise SchemaError(
            f"incomplete grid: {len(taus)} rows for {len(tau_values)} tau x {len(sigma_values)} sigma values"
        )
    grid = np.full((len(sigma_values), len(tau_values)), np.nan)
    seen = set()
    for tau, sigma, value in zip(taus, sigmas, phi_hat):
        key = (float(tau), float(sigma))
        if key in seen:
            raise SchemaError(f"duplicate grid cell tau={tau:g} sigma={sigma:g}")
        seen.add(key)
        i = int(np.searchsorted(sigma_values, sigma))
        j = int(np.searchsorted(tau_values, tau))
        grid[i, j] = value
    mesh = ax.pcolormesh(
        _cell_edges(tau_values), _cell_edges(sigma_values), grid,
        cmap="viridis", shading="flat",
    )
    ax.figure.colorbar(mesh, ax=ax, label="phi_hat")
    for tau, sigma, value, ok in zip(taus, sigmas, phi_hat, passed):
        ax.text(tau, sigma, f"{value:.2f}", ha="center", va="center",
                fontsize=8, color="white" if ok else "#ff6666")
    ax.add_patch(Rectangle((0.5, 0.5), 0.5, 0.5, fill=False, edgecolor="#e69f00",
                           linewidth=2.0, label="analytic region"))
    ax.set_xlabel("tau")
    ax.set_ylabel("sigma")
    ax.set_title("measured decay exponent")
    ax.legend(loc="lower left")
    failed = sum(1 for ok in passed if not ok)
    return f"cells={len(taus)} failed={failed}"


def render(spec: FigureSpec) -> str:
    """Render one figure; returns a one-line text summary.

    When the input is schema-valid but empty, an annotated empty-axes image
    is still written before EmptyDataError propagates, so callers can report
    a nonzero status while leaving evidence of the run.
    """
    if spec.kind not in SCHEMAS:
        raise ValueError(f"unknown figure kind {spec.kind!r}, use one of: {', '.join(sorted(SCHEMAS))}")
    if spec.kind == "regionmap" and spec.in2_path is not None:
        raise ValueError("regionmap takes a single input file")
    try:
        table = read_table(spec.kind, spec.in_path)
    except EmptyDataError:
        _render_empty(spec)
        raise
    table2 = read_table(spec.kind, spec.in2_path) if spec.in2_path else None
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        if spec.kind == "spectrum":
            summary = _draw_spectrum(ax, table, table2)
        elif spec.kind == "resolvent":
            summary = _draw_resolvent(ax, table, table2, spec.phi)
        elif spec.kind == "energy":
            summary = _draw_energy(ax, table, table2)
        else:
            summary = _draw_regionmap(ax, table)
        fig.tight_layout()
        _save(fig, spec.out_path)
    return summary


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="render",
        description="Render a figure from a fracbeam CSV file.",
    )
    parser.add_argument("--kind", required=True, choices=sorted(SCHEMAS))
    parser.add_argument("--in", dest="in_path", required=True, help="input CSV")
    parser.add_argument("--in2", dest="in2_path", help="second CSV overlaid as a comparison series")
    parser.add_argument("--out", required=True, help="output image (png, svg, or pdf)")
    parser.add_argument("--phi", type=float, help="draw a dashed reference line with slope -phi (resolvent only)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        kind=args.kind,
        in_path=args.in_path,
        out_path=args.out,
        in2_path=args.in2_path,
        phi=args.phi,
    )
    try:
        summary = render(spec)
    except EmptyDataError as exc:
        print(f"no samples: {exc}", file=sys.stderr)
        return 1
    except (SchemaError, OSError, ValueError) as exc:
        print(f"render error: {exc}", file=sys.stderr)
        return 2
    print(summary)
    return 0


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
