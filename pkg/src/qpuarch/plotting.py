"""Matplotlib figures for the CLI report paths.

Everything renders through the Agg backend straight to a file, so the CLI
stays usable on headless machines.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

GOLDEN = (math.sqrt(5) - 1.0) / 2.0

plt.rcParams.update(
    {
        "font.size": 10,
        "axes.labelsize": 10,
        "legend.fontsize": 8,
        "xtick.labelsize": 8,
        "ytick.labelsize": 8,
        "axes.spines.top": False,
        "axes.spines.right": False,
        "svg.hashsalt": "qpuarch",
    }
)


def new_figure(width=5.0, ncols=1):
    fig, ax = plt.subplots(1, ncols, figsize=(width * ncols, width * GOLDEN))
    return fig, ax


# dropping timestamps and version strings keeps repeated renders byte-identical
_METADATA = {
    ".png": {"Software": None},
    ".svg": {"Date": None, "Creator": None},
    ".pdf": {"CreationDate": None, "Creator": None, "Producer": None},
}


def save(fig, path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_METADATA.get(Path(path).suffix.lower()))
    plt.close(fig)


def degree_histogram(hist: dict[int, int], path, title="") -> None:
    fig, ax = new_figure()
    degrees = sorted(hist)
    ax.bar(degrees, [hist[d] for d in degrees], color="0.3", width=0.8)
    ax.set_xlabel("qubit degree")
    ax.set_ylabel("qubits")
    ax.set_xticks(range(0, max(degrees, default=0) + 1))
    if title:
        ax.set_title(title)
    save(fig, path)


def quantization_histograms(reports, labels, path) -> None:
    """Side-by-side error histograms, one panel per DAC spec."""
    fig, axes = new_figure(width=4.0, ncols=len(reports))
    axes = np.atleast_1d(axes)
    for ax, rep, label in zip(axes, reports, labels):
        edges = np.asarray(rep.bin_edges)
        ax.stairs(rep.counts, edges, fill=True, color="0.4")
        ax.axvline(rep.max_abs_error, color="k", ls=":", lw=0.8)
        ax.axvline(-rep.max_abs_error, color="k", ls=":", lw=0.8)
        ax.set_xlabel("quantization error")
        ax.set_title(f"{label}: max |err| = {rep.max_abs_error:.3g}", fontsize=9)
    axes[0].set_ylabel("samples")
    save(fig, path)


def schedule_crossing(sched, result, path) -> None:
    fig, ax = new_figure()
    ax.plot(sched.s, sched.A, label="A(s)", color="C0")
    ax.plot(sched.s, sched.B, label="B(s)", color="C3")
    ax.plot([result.s_star], [result.E_QCP], "ko", ms=4)
    ax.annotate(f"s*={result.s_star:.4f}", (result.s_star, result.E_QCP),
                textcoords="offset points", xytext=(6, 6), fontsize=8)
    ax.set_xlabel("s")
    ax.set_ylabel(f"energy [{sched.units}]")
    ax.legend(frameon=False)
    save(fig, path)


def gap_scans(results, path) -> None:
    fig, (ax_gap, ax_r) = new_figure(width=4.0, ncols=2)
    for res in results:
        r, gap = np.array(res.scan).T
        ax_gap.plot(r, gap, lw=1, label=f"n={res.n}")
        ax_gap.plot([res.r_star], [res.gap], "k.", ms=3)
    ax_gap.set_xlabel("b / a")
    ax_gap.set_ylabel("ground-sector gap")
    ax_gap.legend(frameon=False)
    ns = [res.n for res in results]
    ax_r.plot(ns, [res.r_star for res in results], "o-", color="0.2")
    ax_r.set_xticks(ns)
    ax_r.axhline(1.0, color="k", ls=":", lw=0.8)
    ax_r.set_xlabel("chain length n")
    ax_r.set_ylabel("r*(n)")
    save(fig, path)


def readout_timeline(events, path) -> None:
    fig, ax = new_figure()
    times = np.array([e.time_s for e in events]) * 1e6
    res = np.array([e.resonator for e in events])
    bits = np.array([e.bit for e in events])
    ax.scatter(times, res, c=bits, cmap="gray_r", s=2, vmin=-0.5, vmax=1.5)
    ax.set_xlabel("time [us]")
    ax.set_ylabel("resonator")
    save(fig, path)


def stage_counts(layouts, labels, path) -> None:
    fig, ax = new_figure()
    offset = 0
    for layout, label in zip(layouts, labels):
        counts = [t.stage_count for t in layout.tracks]
        ax.bar(np.arange(len(counts)) + offset, counts, label=f"{label} (total {sum(counts)})")
        offset += len(counts) + 1
    ax.set_xlabel("track")
    ax.set_ylabel("stages")
    ax.legend(frameon=False)
    save(fig, path)


def domain_loads(counts, path) -> None:
    fig, ax = new_figure()
    ax.step(range(len(counts)), counts, where="mid", color="0.2")
    ax.set_xlabel("power domain")
    ax.set_ylabel("DAC stages")
    ax.set_ylim(0, max(counts, default=1) * 1.1)
    save(fig, path)
