"""Figure rendering for the CLI report paths.

Each function writes one PNG next to the delimited output the CLI prints.
Rendering is deterministic: fixed geometry, no timestamps, data order taken
from the inputs.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .bench import MethodComparison
from .transforms import SpaceLedger
from .valuation import VoeReport

_POS = "#2a9d4e"
_NEG = "#c03a2b"


def voe_figure(report: VoeReport, path: str) -> str:
    """Bar chart of per-outcome VOE, sign-colored, baseline at zero."""
    labels = [e.outcome for e in report.entries]
    values = [e.voe for e in report.entries]
    colors = [_POS if v >= 0 else _NEG for v in values]
    fig, ax = plt.subplots(figsize=(max(4.0, 1.2 * len(labels) + 2.0), 3.6))
    ax.bar(range(len(values)), values, color=colors)
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("value of evidence")
    ax.set_title(f"{report.node} ({report.mode}, baseline {report.baseline_ev:.6g})")
    for i, (v, e) in enumerate(zip(values, report.entries)):
        ax.annotate(
            f"{v:+.4g}\np={e.probability:.3g}",
            (i, v),
            textcoords="offset points",
            xytext=(0, 4 if v >= 0 else -18),
            ha="center",
            fontsize=7,
        )
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def ledger_figure(ledger: SpaceLedger, path: str, title: str = "reduction steps") -> str:
    """Per-step computational outcome space with the bottleneck marked."""
    spaces = [s.space for s in ledger.steps] or [1]
    fig, ax = plt.subplots(figsize=(max(4.0, 0.5 * len(spaces) + 2.0), 3.2))
    ax.step(range(len(spaces)), spaces, where="mid")
    ax.axhline(max(spaces), color=_NEG, linestyle="--", linewidth=0.8,
               label=f"max = {max(spaces)}")
    ax.set_xlabel("step")
    ax.set_ylabel("outcome space")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def methods_figure(comparison: MethodComparison, path: str) -> str:
    """Maximum outcome space of the three pipelines, side by side."""
    names = ["propagation", "lock", "standard"]
    spaces = [
        comparison.max_space_propagation,
        comparison.max_space_lock,
        comparison.max_space_standard,
    ]
    fig, ax = plt.subplots(figsize=(4.4, 3.2))
    ax.bar(names, spaces, color=["#3d6fb4", "#8a62a8", "#b08a2e"])
    for i, s in enumerate(spaces):
        ax.annotate(str(s), (i, s), textcoords="offset points", xytext=(0, 3),
                    ha="center", fontsize=8)
    ax.set_ylabel("max outcome space")
    ax.set_title(f"{comparison.node} -> {comparison.decision}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def figure_path(directory: str, stem: str) -> str:
    os.makedirs(directory, exist_ok=True)
    return os.path.join(directory, f"{stem}.png")
