"""Matplotlib figures written next to JSON reports."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

plt.rcParams["figure.autolayout"] = True
plt.rcParams["axes.spines.top"] = False
plt.rcParams["axes.spines.right"] = False
# Keep SVG/PNG output free of run-specific metadata.
_SAVE_KW = {"dpi": 120, "metadata": {"Software": None}}


def _hbar(ax, items: Sequence[tuple[str, int]], title: str, color: str):
    labels = [k for k, _ in items][::-1]
    vals = [v for _, v in items][::-1]
    ax.barh(range(len(vals)), vals, color=color)
    ax.set_yticks(range(len(vals)))
    ax.set_yticklabels(labels, fontsize=9)
    ax.set_xlabel("count")
    ax.set_title(title, fontsize=11)
    if not items:
        ax.text(0.5, 0.5, "no fake tokens", ha="center", va="center", transform=ax.transAxes)


def plot_pattern_report(report, path: str | Path) -> Path:
    """Side-by-side bar charts of the top fake words and phonemes."""
    fig, (ax_w, ax_p) = plt.subplots(1, 2, figsize=(9, 0.35 * max(report.k, 4) + 1.2))
    _hbar(ax_w, report.top_words, f"top fake words ({report.labels})", "#b2182b")
    _hbar(ax_p, report.top_phonemes, f"top fake phonemes ({report.labels})", "#2166ac")
    path = Path(path)
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def plot_word_score_hist(real_q: Sequence[float], fake_q: Sequence[float],
                         threshold: float, path: str | Path, bins: int = 40) -> Path:
    """Histogram of per-word scores split by reference label."""
    fig, ax = plt.subplots(figsize=(6, 3.6))
    edges = [i / bins for i in range(bins + 1)]
    ax.hist(real_q, bins=edges, alpha=0.6, label=f"real (n={len(real_q)})", color="#4d9221")
    ax.hist(fake_q, bins=edges, alpha=0.6, label=f"fake (n={len(fake_q)})", color="#c51b7d")
    ax.axvline(threshold, color="k", ls="--", lw=1, label=f"threshold {threshold:g}")
    ax.set_xlim(0, 1)
    ax.set_xlabel("aggregated word score q")
    ax.set_ylabel("words")
    ax.legend(frameon=False, fontsize=8)
    path = Path(path)
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path
