"""Render JSON artifacts into delimited tables and figures.

Scans a directory of records produced by the other commands (attack
reports, certification records, run summaries), writes one CSV per record
kind, and renders matplotlib charts next to them.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _load_records(in_dir: Path) -> dict:
    groups: dict = {}
    for path in sorted(in_dir.rglob("*.json")):
        try:
            data = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError):
            continue
        records = data if isinstance(data, list) else [data]
        for rec in records:
            if isinstance(rec, dict) and "schema" in rec:
                groups.setdefault(rec["schema"], []).append(rec)
    return groups


def _write_csv(path: Path, rows: list, columns: list):
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        writer.writeheader()
        writer.writerows(rows)


def _attack_figure(rows, path: Path):
    names = [r["script"] for r in rows]
    vals = [float(r.get("success_float", 0.0)) for r in rows]
    fig, ax = plt.subplots(figsize=(max(6, 0.9 * len(names)), 4))
    ax.bar(range(len(names)), vals, color="#30618c")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("robustness-violation probability")
    ax.set_title("attack suite, exact success probabilities")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _cert_figure(rows, path: Path):
    names = [r["primitive"] for r in rows]
    measured = []
    claimed = []
    for r in rows:
        try:
            measured.append(float(eval_frac(r["measured"])))
            claimed.append(float(eval_frac(r["claimed"])))
        except (ValueError, ZeroDivisionError):
            measured.append(0.0)
            claimed.append(0.0)
    x = range(len(names))
    fig, ax = plt.subplots(figsize=(max(6, 0.9 * len(names)), 4))
    ax.bar([i - 0.2 for i in x], measured, width=0.4, label="measured", color="#30618c")
    ax.bar([i + 0.2 for i in x], claimed, width=0.4, label="claimed", color="#c26d2b")
    ax.set_xticks(list(x))
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("statistical distance / advantage")
    ax.set_title("primitive certification, measured vs claimed")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def eval_frac(s: str) -> float:
    num, _, den = str(s).partition("/")
    return float(num) / float(den) if den else float(num)


def render_reports(in_dir, out_dir) -> list:
    """Write CSVs and PNGs for every known record kind; returns paths."""
    in_dir, out_dir = Path(in_dir), Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    groups = _load_records(in_dir)
    written = []

    attacks = groups.get("privamp.attack/1", [])
    if attacks:
        cols = ["script", "profile", "exact", "trials", "success", "success_float",
                "accept_agree", "reject_alice", "reject_bob", "schedule"]
        path = out_dir / "attacks.csv"
        _write_csv(path, attacks, cols)
        written.append(path)
        fig = out_dir / "attacks.png"
        _attack_figure(attacks, fig)
        written.append(fig)

    certs = groups.get("privamp.cert/1", [])
    if certs:
        path = out_dir / "certification.csv"
        _write_csv(path, certs, ["primitive", "ok", "claimed", "measured", "witness", "note"])
        written.append(path)
        fig = out_dir / "certification.png"
        _cert_figure(certs, fig)
        written.append(fig)

    verifies = groups.get("privamp.verify/1", [])
    if verifies:
        path = out_dir / "verification.csv"
        cols = sorted({k for r in verifies for k in r} - {"schema"})
        _write_csv(path, verifies, cols)
        written.append(path)

    runs = groups.get("privamp.runs/1", [])
    if runs:
        path = out_dir / "runs.csv"
        cols = ["profile", "protocol", "runs", "agreements", "rejects", "seed"]
        _write_csv(path, runs, cols)
        written.append(path)

    return written
