"""Report writer: report.json, timings.json, one CSV per sweep, and SVG line charts.

Everything except timings.json is byte-identical across runs with the same
config and seed.
"""

import csv
import json
from pathlib import Path

import matplotlib
matplotlib.use("Agg")  # Non-interactive backend
import matplotlib.pyplot as plt

from src.logger import Logger
from src.runner.dispatch import RunReport

LOGGER = Logger("runner.reports")

matplotlib.rcParams["svg.hashsalt"] = "halfsphere-ot"

CSV_SCHEMAS = {
    "blowup": ["epsilon", "m", "r_eps", "R_eps", "lower_bound", "lip_formula"],
    "concentration": ["r", "lhs", "rhs", "lip"],
    "sphere_concentration": ["t", "empirical", "closed_form", "bound"],
    "cap": ["radius", "lip_formula", "argmax_location", "endpoint"],
    "rigidity": ["classification", "reason", "count", "max_deviation"],
}


def _ensure_dir(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    return path


def format_value(value) -> str:
    """17 significant digits for floats, empty field for missing values."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.16e}"
    return str(value)


def _write_csv(path: Path, fieldnames: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=fieldnames, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        writer.writerows({k: format_value(row.get(k)) for k in fieldnames} for row in rows)


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _save(fig, path: Path) -> None:
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


# --- Charts ---

def _chart_blowup(rows: list[dict], path: Path) -> None:
    """Log-log lines: lower bound and Lip(T_eps) against epsilon."""
    rows = [r for r in rows if not r.get("flagged")]
    eps = [r["epsilon"] for r in rows]

    fig, ax = plt.subplots(figsize=(8, 5))
    ax.loglog(eps, [r["lower_bound"] for r in rows], marker="o", color="#2563eb", linewidth=2, label="lower bound")
    ax.loglog(eps, [r["lip_formula"] for r in rows], marker="s", color="#dc2626", linewidth=2, label="Lip(T)")
    ax.invert_xaxis()
    ax.set_title("Lipschitz blow-up as epsilon -> 0", fontsize=14, fontweight="bold")
    ax.set_xlabel("epsilon")
    ax.set_ylabel("Lipschitz constant")
    ax.legend()
    _save(fig, path)


def _chart_concentration(rows: list[dict], path: Path) -> None:
    """Lines: mass away from the boundary and the Gaussian bound against r."""
    r = [row["r"] for row in rows]

    fig, ax = plt.subplots(figsize=(8, 5))
    ax.plot(r, [row["lhs"] for row in rows], color="#2563eb", linewidth=2, label="mass away from boundary")
    ax.plot(r, [row["rhs"] for row in rows], color="#dc2626", linewidth=2, linestyle="--", label="bound")
    ax.set_title("Concentration away from the cap boundary", fontsize=14, fontweight="bold")
    ax.set_xlabel("r (rad)")
    ax.set_ylabel("probability")
    ax.legend()
    _save(fig, path)


def _chart_cap(rows: list[dict], path: Path) -> None:
    """Line: Lip(T_rho) against cap radius, with the 1-Lipschitz level."""
    radius = [row["radius"] for row in rows]

    fig, ax = plt.subplots(figsize=(8, 5))
    ax.plot(radius, [row["lip_formula"] for row in rows], marker="o", color="#7c3aed", linewidth=2)
    ax.axhline(1.0, color="#6b7280", linestyle=":")
    ax.set_title("Lipschitz constant of cap transports", fontsize=14, fontweight="bold")
    ax.set_xlabel("cap radius (rad)")
    ax.set_ylabel("Lip(T)")
    _save(fig, path)


CHARTS = {"blowup": _chart_blowup, "concentration": _chart_concentration, "cap": _chart_cap}


def write_outputs(report: RunReport, out_dir: Path | str, plots: bool = True) -> list[Path]:
    """Write every artifact of a run into out_dir and return the paths written."""
    out_dir = _ensure_dir(Path(out_dir))
    written = []

    path = out_dir / "report.json"
    _write_json(path, report.to_json_dict())
    written.append(path)

    path = out_dir / "timings.json"
    _write_json(path, {"durations": report.durations})
    written.append(path)

    for name, rows in sorted(report.records.items()):
        if name in CSV_SCHEMAS:
            path = out_dir / f"{name}.csv"
            _write_csv(path, CSV_SCHEMAS[name], rows)
            written.append(path)
        if plots and name in CHARTS and rows:
            path = out_dir / f"{name}.svg"
            CHARTS[name](rows, path)
            written.append(path)

    LOGGER.info(f"Wrote {len(written)} files to {out_dir}")
    return written
