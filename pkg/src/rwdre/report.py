"""File output: delimited data and the matplotlib figures beside it.

Everything renders through the Agg backend straight to disk; nothing
here opens a window.  CSV/JSONL writers keep bytes deterministic so
reruns of the same command can be diffed directly.
"""

from __future__ import annotations

import json
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from .estimators import SurvivalTable  # noqa: E402
from .sweep import SweepResult, _AXES  # noqa: E402

_PHASE_COLORS = {"positive": "#1f77b4", "negative": "#d62728",
                 "inconclusive": "#9b9b9b"}


def sibling_figure_path(out: str) -> str:
    """The figure path rendered alongside a delimited output file."""
    return os.path.splitext(out)[0] + ".png"


def write_path_csv(rows, out: str) -> str:
    """(t, x) rows, one line per time, no header."""
    with open(out, "w") as fh:
        for t, x in rows:
            fh.write(f"{t},{x}\n")
    return out


def write_path_jsonl(rows, out: str) -> str:
    with open(out, "w") as fh:
        for t, x in rows:
            fh.write(json.dumps({"t": t, "x": x}) + "\n")
    return out


def write_survival_csv(table: SurvivalTable, out: str) -> str:
    with open(out, "w") as fh:
        fh.write("t,survival\n")
        for t, s in table.rows():
            fh.write(f"{t},{s}\n")
    return out


def path_figure(traces, out: str, title: str = "trajectory") -> str:
    """Space-time plot of one or more (label, rows) traces."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for label, rows in traces:
        ts = [t for t, _ in rows]
        xs = [x for _, x in rows]
        ax.plot(ts, xs, lw=1.0, label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("x")
    ax.set_title(title)
    if len(traces) > 1:
        ax.legend(loc="best", fontsize="small")
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out


def survival_figure(table: SurvivalTable, out: str) -> str:
    """Waiting-time survival on log-log axes; zero-mass rows are dropped."""
    ts = [t for t, s in table.rows() if s > 0]
    ss = [s for _, s in table.rows() if s > 0]
    fig, ax = plt.subplots(figsize=(5.6, 4.2))
    if ts:
        ax.loglog(ts, ss, "o-", ms=4)
    ax.set_xlabel("t")
    ax.set_ylabel("P(wait > t)")
    ax.set_title(f"regeneration waits ({table.n_complete} complete, "
                 f"{table.censored_fraction:.2%} censored)")
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out


def _varying_axes(result: SweepResult):
    cfg = result.config
    return [a for a in _AXES if len(getattr(cfg, a)) > 1]


def phase_diagram_figure(result: SweepResult, out: str) -> str:
    """Phase map of the sweep: two varying axes become a colored lattice,
    one varying axis a speed curve with its intervals, anything else a
    per-index strip."""
    rows = result.rows
    varying = _varying_axes(result)
    fig, ax = plt.subplots(figsize=(6.0, 4.6))
    if len(varying) == 2:
        xs = [getattr(r, varying[0]) for r in rows]
        ys = [getattr(r, varying[1]) for r in rows]
        for phase, color in _PHASE_COLORS.items():
            px = [x for x, r in zip(xs, rows) if r.phase == phase]
            py = [y for y, r in zip(ys, rows) if r.phase == phase]
            if px:
                ax.scatter(px, py, c=color, label=phase, s=60, marker="s")
        ax.set_xlabel(varying[0])
        ax.set_ylabel(varying[1])
        ax.legend(loc="best", fontsize="small")
    else:
        axis = varying[0] if len(varying) == 1 else None
        xs = [getattr(r, axis) for r in rows] if axis else [r.index for r in rows]
        v = [r.v_hat for r in rows]
        lo = [r.ci_lo for r in rows]
        hi = [r.ci_hi for r in rows]
        ax.fill_between(xs, lo, hi, alpha=0.25, lw=0)
        ax.plot(xs, v, "o-", ms=4)
        ax.axhline(0.0, color="k", lw=0.8, ls=":")
        ax.set_xlabel(axis or "grid index")
        ax.set_ylabel("speed")
    ax.set_title("speed phases")
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out
