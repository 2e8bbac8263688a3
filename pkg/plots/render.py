#!/usr/bin/env python3
"""Render publication-style figures from the hybrid-radiance CSV output.

Pure post-processing: the script reads the documented CSV schemas (plus
the metadata sidecar for geometry context) and never recomputes physics.

    python plots/render.py --figure <id> --data <dir> --out <dir>

Figure ids and the data files they expect in --data:

    fig2b   two_atom_d0.csv, two_atom_dminus.csv, two_atom_dplus.csv
    fig2c   find_d0.csv
    fig3ab  band.csv (+ band.meta.json for the light-line position)
    fig3cd  spectrum_scan.csv
    fig3e   entropy_scan.csv
"""

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

FIGURE_INPUTS = {
    "fig2b": ["two_atom_d0.csv", "two_atom_dminus.csv", "two_atom_dplus.csv"],
    "fig2c": ["find_d0.csv"],
    "fig3ab": ["band.csv"],
    "fig3cd": ["spectrum_scan.csv"],
    "fig3e": ["entropy_scan.csv"],
}

REQUIRED_COLUMNS = {
    "fig2b": {"eta0", "parity", "n_total", "n_antisym", "rate", "shift", "rate_ratio"},
    "fig2c": {"phi", "kappa0", "d0_over_lambda"},
    "fig3ab": {"q_d_over_pi", "re_e", "im_e", "rate", "rate_eta0_zero", "delta_rate",
               "tail_estimate"},
    "fig3cd": {"eta0", "m", "re_e", "im_e", "rate", "shift", "entropy", "separable"},
    "fig3e": {"n_atoms", "ln_n", "max_entropy", "d_over_lambda"},
}

SEPARABLE_COLOR = "crimson"


class SchemaError(ValueError):
    pass


@dataclass
class FigureSpec:
    figure: str
    data_dir: Path
    out_dir: Path
    inputs: list = field(init=False)
    output: Path = field(init=False)

    def __post_init__(self):
        if self.figure not in FIGURE_INPUTS:
            raise SchemaError(f"unknown figure id {self.figure!r}")
        self.inputs = [self.data_dir / name for name in FIGURE_INPUTS[self.figure]]
        self.output = self.out_dir / f"{self.figure}.png"


def _read_table(path: Path, figure: str) -> list[dict]:
    if not path.exists():
        raise SchemaError(f"{figure}: missing input file {path}")
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        header = set(reader.fieldnames or [])
        missing = REQUIRED_COLUMNS[figure] - header
        if missing:
            raise SchemaError(
                f"{figure}: {path.name} lacks required columns {sorted(missing)}"
            )
        rows = []
        for raw in reader:
            row = {}
            for key, value in raw.items():
                try:
                    row[key] = float(value)
                except (TypeError, ValueError):
                    row[key] = value
            rows.append(row)
    return rows


def _render_fig2b(spec: FigureSpec) -> dict:
    labels = ["$d = d_0$", "$d = 0.85\\,d_0$", "$d = 1.15\\,d_0$"]
    fig, axes = plt.subplots(1, 3, figsize=(9.6, 3.2), sharey=True)
    max_flatness = 0.0
    for ax, path, label in zip(axes, spec.inputs, labels):
        rows = [r for r in _read_table(path, spec.figure) if r["parity"] == "a"]
        branches = sorted({int(r["n_antisym"]) for r in rows})
        for n_a in branches:
            pts = sorted((r["eta0"], r["rate_ratio"]) for r in rows if r["n_antisym"] == n_a)
            ax.plot([p[0] for p in pts], [p[1] for p in pts],
                    label=f"$n_a = {n_a}$")
        if path.name == "two_atom_d0.csv":
            max_flatness = max(abs(r["rate_ratio"] - 1.0) for r in rows)
        ax.set_xlabel("$\\eta_0$")
        ax.set_title(label)
    axes[0].set_ylabel("$\\gamma_a^{n,n_a} / \\gamma_a$")
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(spec.output, dpi=160)
    plt.close(fig)
    return {"d0_max_ratio_deviation": max_flatness}


def _render_fig2c(spec: FigureSpec) -> dict:
    rows = _read_table(spec.inputs[0], spec.figure)
    rows.sort(key=lambda r: r["phi"])
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    ax.plot([r["phi"] / math.pi for r in rows], [r["d0_over_lambda"] for r in rows],
            marker="o", ms=3)
    ax.set_xlabel("$\\varphi / \\pi$")
    ax.set_ylabel("$d_0 / \\lambda_0$")
    fig.tight_layout()
    fig.savefig(spec.output, dpi=160)
    plt.close(fig)
    return {"points": len(rows)}


def _light_line_position(spec: FigureSpec) -> float | None:
    # band.csv -> band.meta.json; |q| = 2 pi / lambda means |q d / pi| = 2 spacing
    sidecar = spec.inputs[0].parent / (spec.inputs[0].stem + ".meta.json")
    if not sidecar.exists():
        return None
    meta = json.loads(sidecar.read_text())
    spacing = meta.get("config", {}).get("geometry", {}).get("spacing")
    return None if spacing is None else 2.0 * float(spacing)


def _render_fig3ab(spec: FigureSpec) -> dict:
    rows = _read_table(spec.inputs[0], spec.figure)
    rows.sort(key=lambda r: r["q_d_over_pi"])
    q = [r["q_d_over_pi"] for r in rows]
    window_edge = _light_line_position(spec)
    fig, (top, bottom) = plt.subplots(
        2, 1, figsize=(5.4, 4.8), sharex=True, height_ratios=[2, 1]
    )
    top.plot(q, [r["rate_eta0_zero"] for r in rows], label="$\\eta_0 = 0$")
    top.plot(q, [r["rate"] for r in rows], "--", label="separable branch, $\\eta_0 > 0$")
    top.set_ylabel("$\\tilde\\Gamma_q / \\gamma$")
    top.legend(fontsize=8)
    bottom.plot(q, [r["delta_rate"] for r in rows], color="k")
    bottom.set_ylabel("$\\Delta\\tilde\\Gamma_q / \\gamma$")
    bottom.set_xlabel("$q d / \\pi$")
    if window_edge is not None:
        for ax in (top, bottom):
            ax.axvspan(window_edge, max(q), alpha=0.15, color="tab:blue", lw=0)
            ax.axvspan(min(q), -window_edge, alpha=0.15, color="tab:blue", lw=0)
    fig.tight_layout()
    fig.savefig(spec.output, dpi=160)
    plt.close(fig)
    return {"points": len(rows), "window_edge": window_edge}


def _render_fig3cd(spec: FigureSpec) -> dict:
    rows = _read_table(spec.inputs[0], spec.figure)
    eta_values = sorted({r["eta0"] for r in rows})
    by_mode: dict[int, list] = {}
    for r in rows:
        by_mode.setdefault(int(r["m"]), []).append(r)
    separable_counts = {
        eta: sum(1 for r in rows if r["eta0"] == eta and r["separable"] == 1)
        for eta in eta_values
    }
    fig, (left, right) = plt.subplots(1, 2, figsize=(8.8, 3.4))
    highlighted = set()
    for m, mode_rows in sorted(by_mode.items()):
        mode_rows.sort(key=lambda r: r["eta0"])
        separable = any(r["separable"] == 1 for r in mode_rows)
        color = SEPARABLE_COLOR if separable else "0.65"
        z = 3 if separable else 1
        if separable:
            highlighted.add(m)
        left.plot([r["eta0"] for r in mode_rows], [r["rate"] for r in mode_rows],
                  color=color, lw=1.0, zorder=z)
        right.plot([r["eta0"] for r in mode_rows], [r["entropy"] for r in mode_rows],
                   color=color, lw=1.0, zorder=z)
    left.set_xlabel("$\\eta_0$")
    left.set_ylabel("$\\gamma_m / \\gamma$")
    right.set_xlabel("$\\eta_0$")
    right.set_ylabel("$S_m$")
    fig.tight_layout()
    fig.savefig(spec.output, dpi=160)
    plt.close(fig)
    return {
        "separable_per_eta0": separable_counts,
        "separable_branches": max(separable_counts.values()) if separable_counts else 0,
    }


def _render_fig3e(spec: FigureSpec) -> dict:
    rows = _read_table(spec.inputs[0], spec.figure)
    groups: dict[float, list] = {}
    for r in rows:
        groups.setdefault(r["d_over_lambda"], []).append(r)
    fig, ax = plt.subplots(figsize=(4.6, 3.4))
    all_n = sorted({int(r["n_atoms"]) for r in rows})
    ax.plot(all_n, [math.log(n) for n in all_n], "k--", label="$\\ln N$")
    for spacing in sorted(groups):
        pts = sorted((int(r["n_atoms"]), r["max_entropy"]) for r in groups[spacing])
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", ms=3,
                label=f"$d/\\lambda_0 = {spacing:g}$")
    ax.set_xlabel("$N$")
    ax.set_ylabel("$\\max_m S_m$")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(spec.output, dpi=160)
    plt.close(fig)
    return {"distances": sorted(groups), "includes_ln_n_reference": True}


_RENDERERS = {
    "fig2b": _render_fig2b,
    "fig2c": _render_fig2c,
    "fig3ab": _render_fig3ab,
    "fig3cd": _render_fig3cd,
    "fig3e": _render_fig3e,
}


def render(spec: FigureSpec) -> dict:
    """Render one figure; returns details for regression checks."""
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    details = _RENDERERS[spec.figure](spec)
    details["output"] = str(spec.output)
    return details


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--figure", required=True, choices=sorted(FIGURE_INPUTS))
    parser.add_argument("--data", required=True, help="directory with the CSV inputs")
    parser.add_argument("--out", required=True, help="directory for the rendered image")
    args = parser.parse_args(argv)
    try:
        details = render(FigureSpec(args.figure, Path(args.data), Path(args.out)))
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(details))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
