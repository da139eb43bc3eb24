"""Figure rendering for foregrounding reports.

Uses matplotlib Figure objects directly rather than pyplot, so rendering
needs no interactive backend and leaves no global state behind.  The CSV
emitted next to the figure remains the canonical output; the figure is a
convenience view of the same rows.
"""

from __future__ import annotations

import os
from collections.abc import Sequence

from matplotlib.figure import Figure

from .cost import Origin
from .errors import DomainError
from .stats import StatsReport

__all__ = ["save_report_figure"]

_ORIGIN_STYLE = {Origin.OLD: "o-", Origin.NEW: "s--"}
_MATCHER_COLOR = {"hungarian": "tab:blue", "qmcmf": "tab:orange"}


def save_report_figure(
    reports: Sequence[StatsReport], path: str | os.PathLike, dpi: int = 150
) -> None:
    """Render rate-vs-threshold curves and match totals to an image file.

    One line per (matcher, origin) on the left; matched and unmatched target
    counts per matcher on the right.  The format follows the file suffix
    (png, svg, pdf).
    """
    if not reports:
        raise DomainError("nothing to plot: no reports given")
    fig = Figure(figsize=(10.0, 4.0))
    rate_ax, count_ax = fig.subplots(1, 2)

    for report in reports:
        color = _MATCHER_COLOR.get(report.matcher, "tab:gray")
        for origin in (Origin.OLD, Origin.NEW):
            rows = [r for r in report.rows if r.origin is origin]
            if not rows:
                continue
            rate_ax.plot(
                [r.iou_threshold for r in rows],
                [r.rate for r in rows],
                _ORIGIN_STYLE[origin],
                color=color,
                label=f"{report.matcher} / {origin.value}",
                markersize=4,
            )
    rate_ax.set_xlabel("IoU threshold")
    rate_ax.set_ylabel("fraction of matches below threshold")
    rate_ax.set_ylim(-0.02, 1.02)
    rate_ax.grid(True, alpha=0.3)
    rate_ax.legend(fontsize=8)
    rate_ax.set_title("foregrounding rate by origin")

    names = [r.matcher for r in reports]
    xs = range(len(names))
    matched = [r.matched_targets for r in reports]
    unmatched = [r.unmatched_targets for r in reports]
    count_ax.bar(xs, matched, 0.6, label="matched targets", color="tab:green")
    count_ax.bar(
        xs, unmatched, 0.6, bottom=matched, label="unmatched targets", color="tab:red"
    )
    count_ax.set_xticks(list(xs))
    count_ax.set_xticklabels(names)
    for x, report in zip(xs, reports):
        count_ax.annotate(
            f"loss {report.total_loss:.4g}",
            (x, report.matched_targets + report.unmatched_targets),
            ha="center",
            va="bottom",
            fontsize=8,
        )
    count_ax.set_ylabel("targets")
    count_ax.legend(fontsize=8)
    count_ax.set_title("match coverage")

    fig.tight_layout()
    fig.savefig(os.fspath(path), dpi=dpi)
