"""Benchmark report rendering: JSON, plain-text tables, CSV, figures."""

from __future__ import annotations

import csv
import json
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .evaluation import AED_PERCENTS, APPROACHES, BenchmarkReport

SET_TITLES = {
    "users_with_la_friends": "Users with LA-friends",
    "overall_users": "Overall users",
}


def report_json(report: BenchmarkReport) -> str:
    return json.dumps(report.to_dict(), sort_keys=True, indent=2)


def render_text(report: BenchmarkReport) -> str:
    lines = [
        f"Benchmark (seed {report.seed}): {report.n_train} train / {report.n_eval} eval users, "
        f"{report.n_locations} locations, cluster cut {report.threshold_km:g} km",
        "",
    ]
    acc_cols = [k for k in (20, 100) if k in report.k_grid] or list(report.k_grid[:2])
    for set_name, table in report.user_sets.items():
        lines.append(SET_TITLES.get(set_name, set_name))
        header = (
            f"  {'approach':<15}"
            + "".join(f"{f'AED@{p}%':>10}" for p in AED_PERCENTS)
            + "".join(f"{f'ACC@{k}':>9}" for k in acc_cols)
            + f"{'coverage':>10}"
        )
        lines.append(header)
        for a in APPROACHES:
            r = table[a]
            cells = "".join(
                f"{r.aed[p]:>10.1f}" if r.aed[p] is not None else f"{'-':>10}"
                for p in AED_PERCENTS
            )
            accs = "".join(f"{r.acc[k]:>9.3f}" for k in acc_cols)
            lines.append(f"  {a:<15}{cells}{accs}{r.coverage:>10.2f}")
        lines.append("")
    return "\n".join(lines)


def write_acc_csv(report: BenchmarkReport, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_set", "approach", "k_km", "acc"])
        for set_name, table in report.user_sets.items():
            for a in APPROACHES:
                for k in report.k_grid:
                    writer.writerow([set_name, a, k, repr(table[a].acc[k])])


def plot_acc_curves(report: BenchmarkReport, outdir: str) -> list[str]:
    paths = []
    for set_name, table in report.user_sets.items():
        fig, ax = plt.subplots(figsize=(7, 5))
        for a in APPROACHES:
            ks = list(report.k_grid)
            ax.plot(ks, [table[a].acc[k] for k in ks], marker="o", markersize=3, label=a)
        ax.set_xscale("log")
        ax.set_xlabel("error distance K (km)")
        ax.set_ylabel("ACC@K")
        ax.set_ylim(0, 1)
        ax.set_title(f"ACC@K — {SET_TITLES.get(set_name, set_name)}")
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=8)
        path = os.path.join(outdir, f"acc_{set_name}.png")
        fig.savefig(path, dpi=120, bbox_inches="tight")
        plt.close(fig)
        paths.append(path)
    return paths


def plot_aed_bars(report: BenchmarkReport, outdir: str) -> str:
    fig, axes = plt.subplots(1, len(report.user_sets), figsize=(11, 4.5), sharey=True)
    if len(report.user_sets) == 1:
        axes = [axes]
    for ax, (set_name, table) in zip(axes, report.user_sets.items()):
        names = [a for a in APPROACHES if table[a].aed[100] is not None]
        vals = [table[a].aed[100] for a in names]
        ax.bar(range(len(names)), vals)
        ax.set_xticks(range(len(names)))
        ax.set_xticklabels(names, rotation=45, ha="right", fontsize=8)
        ax.set_title(SET_TITLES.get(set_name, set_name), fontsize=10)
        ax.set_ylabel("AED@100% (km)")
    fig.tight_layout()
    path = os.path.join(outdir, "aed_100.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def write_report(report: BenchmarkReport, outdir: str, figures: bool = True) -> dict[str, object]:
    """Write report.json / report.txt / acc_curves.csv (and figures) into
    ``outdir``; returns the file map."""
    os.makedirs(outdir, exist_ok=True)
    files: dict[str, object] = {}
    json_path = os.path.join(outdir, "report.json")
    with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report_json(report) + "\n")
    files["json"] = json_path
    txt_path = os.path.join(outdir, "report.txt")
    with open(txt_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_text(report))
    files["text"] = txt_path
    csv_path = os.path.join(outdir, "acc_curves.csv")
    write_acc_csv(report, csv_path)
    files["csv"] = csv_path
    if figures:
        files["figures"] = plot_acc_curves(report, outdir) + [plot_aed_bars(report, outdir)]
    return files
