"""Writing run reports: CSV, JSON, quantile data and plots."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict
from pathlib import Path

from .runner import CSV_COLUMNS, RunReport

QUANTILE_COLUMNS = ("algorithm", "n", "task", "cpu_ms")


def quantile_rows(report: RunReport, classification: str) -> list[dict]:
    """Per algorithm, correct results of one kind sorted by CPU time and numbered from 1."""
    by_alg: dict = {}
    for r in report.records:
        if r.classification == classification:
            by_alg.setdefault(r.algorithm, []).append(r)
    rows = []
    for alg in sorted(by_alg):
        ordered = sorted(by_alg[alg], key=lambda r: (r.cpu_ms, r.task))
        rows += [{"algorithm": alg, "n": i, "task": r.task, "cpu_ms": r.cpu_ms} for i, r in enumerate(ordered, 1)]
    return rows


def _write_csv(path: Path, columns, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(columns))
        w.writeheader()
        w.writerows(rows)


def plot_quantiles(rows: list[dict], title: str, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 3.5))
    for alg in sorted({r["algorithm"] for r in rows}):
        pts = [r for r in rows if r["algorithm"] == alg]
        ax.plot([r["n"] for r in pts], [r["cpu_ms"] / 1000 for r in pts], marker="o", markersize=3, label=alg)
    ax.set_xlabel("n-th fastest correct result")
    ax.set_ylabel("CPU time (s)")
    ax.set_title(title)
    if rows:
        ax.set_yscale("log")
        ax.legend(loc="upper left", fontsize="small")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_report(report: RunReport, out_dir, plots: bool = True) -> dict:
    """Write every output file into ``out_dir``; returns name -> path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "results.csv": out / "results.csv",
        "results.json": out / "results.json",
        "quantile-true.csv": out / "quantile-true.csv",
        "quantile-false.csv": out / "quantile-false.csv",
    }
    _write_csv(files["results.csv"], CSV_COLUMNS, [r.row() for r in report.records])
    payload = {"counts": report.counts, "records": [asdict(r) for r in report.records]}
    files["results.json"].write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    q_true = quantile_rows(report, "correct-true")
    q_false = quantile_rows(report, "correct-false")
    _write_csv(files["quantile-true.csv"], QUANTILE_COLUMNS, q_true)
    _write_csv(files["quantile-false.csv"], QUANTILE_COLUMNS, q_false)
    if plots:
        files["quantile-true.png"] = out / "quantile-true.png"
        files["quantile-false.png"] = out / "quantile-false.png"
        plot_quantiles(q_true, "Correct proofs", files["quantile-true.png"])
        plot_quantiles(q_false, "Correct alarms", files["quantile-false.png"])
    return files


def summary(report: RunReport) -> str:
    c = report.counts
    lines = [
        f"records: {len(report.records)}",
        f"correct proofs: {c['correct-true']}  correct alarms: {c['correct-false']}",
        f"wrong proofs: {c['wrong-proof']}  wrong alarms: {c['wrong-alarm']}",
        f"timeouts: {c['timeout']}  inconclusive: {c['inconclusive']}  unchecked: {c['unchecked']}",
    ]
    return "\n".join(lines)
