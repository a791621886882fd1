"""Static SVG plots regenerated from a run's result files."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .experiments import RunManifest  # noqa: E402

# fixed ids and no date stamp so the same inputs give the same bytes
matplotlib.rcParams["svg.hashsalt"] = "ealab"
_SVG_META = {"Date": None}

_NEEDS = {
    "chaos": ["chaos_summary.json"],
    "stiffness": ["stiffness_summary.json"],
    "droplet": ["droplets.csv"],
}


class MissingArtifacts(FileNotFoundError):
    pass


def _read_csv(path: Path) -> list[dict]:
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def _save(fig, path: Path) -> None:
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)


def _chaos_plots(d: Path) -> list[str]:
    summary = json.loads((d / "chaos_summary.json").read_text())
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for c in summary["curves"]:
        t = np.array(c["t"])
        pos = t > 0
        ax.errorbar(t[pos], np.array(c["mean"])[pos], yerr=np.array(c["se"])[pos], marker="o", ms=3,
                    label=f"L={c['L']}")
    ax.set_xscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("mean edge overlap Q")
    ax.legend()
    _save(fig, d / "overlap_vs_t.svg")

    xi = summary["collapse"]["xi"]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for c in summary["curves"]:
        t = np.array(c["t"])
        pos = t > 0
        ax.plot(c["L"] * t[pos] ** (1 / (2 * xi)), np.array(c["mean"])[pos], "o-", ms=3, label=f"L={c['L']}")
    ax.set_xscale("log")
    ax.set_xlabel(f"L t^(1/2xi), xi={xi:.3f}")
    ax.set_ylabel("mean edge overlap Q")
    ax.legend()
    _save(fig, d / "collapse.svg")
    return ["overlap_vs_t.svg", "collapse.svg"]


def _stiffness_plot(d: Path) -> list[str]:
    s = json.loads((d / "stiffness_summary.json").read_text())
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.errorbar(s["L"], s["var"], yerr=s["var_se"], marker="o")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("L")
    ax.set_ylabel("Var(E_P - E_AP)")
    _save(fig, d / "stiffness.svg")
    return ["stiffness.svg"]


def _droplet_plot(d: Path) -> list[str]:
    rows = _read_csv(d / "droplets.csv")
    fig, ax = plt.subplots(figsize=(5, 3.5))
    by_L: dict[str, list[int]] = {}
    for row in rows:
        by_L.setdefault(row["L"], []).append(int(row["boundary_size"]))
    for L in sorted(by_L, key=lambda s: [int(x) for x in s.split("x")]):
        sizes = np.array(by_L[L])
        bins = np.arange(0.5, sizes.max() + 1.5)
        ax.hist(sizes, bins=bins, histtype="step", density=True, label=f"L={L}")
    ax.set_xlabel("|droplet boundary|")
    ax.set_ylabel("fraction of edges")
    ax.set_yscale("log")
    ax.legend()
    _save(fig, d / "droplet_sizes.svg")
    return ["droplet_sizes.svg"]


def emit_plots(manifest: RunManifest) -> list[str]:
    """Write the SVG plots available for this run; returns the file names."""
    d = Path(manifest.out_dir)
    needs = _NEEDS.get(manifest.kind)
    if needs is None:
        raise MissingArtifacts(f"no plots defined for experiment kind {manifest.kind!r}")
    missing = [n for n in needs if n not in manifest.files or not (d / n).exists()]
    if missing:
        raise MissingArtifacts("missing artifacts: " + ", ".join(missing))
    if manifest.kind == "chaos":
        return _chaos_plots(d)
    if manifest.kind == "stiffness":
        return _stiffness_plot(d)
    return _droplet_plot(d)
