"""Run matchers over scenarios and report foregrounding-rate statistics.

The headline statistic is the fraction of matched pairs whose localization
quality falls below an IoU cutoff, split by target origin.  A matcher that
insists on full cardinality is forced to foreground poorly localized
predictions; a matcher allowed to leave targets unmatched should drive those
fractions to zero by construction.
"""

from __future__ import annotations

import json
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .cost import CostWeights, Origin, cost_matrix, total_loss
from .errors import DomainError, MalformedInputError
from .geometry import quality_matrix
from .hungarian import Matching, hungarian_match
from .qmcmf import PruneThresholds, q_mcmf_match
from .scenario import ImageRecord, Scenario

__all__ = [
    "MATCHER_NAMES",
    "DEFAULT_IOU_THRESHOLDS",
    "ImageMatchResult",
    "StatsRow",
    "StatsReport",
    "run_matcher",
    "match_scenario",
    "jsonl_record",
    "aggregate_stats",
    "foregrounding_stats",
    "stats_csv",
]

MATCHER_NAMES = ("hungarian", "qmcmf")
DEFAULT_IOU_THRESHOLDS = (0.5, 0.6, 0.7, 0.8, 0.9)


@dataclass(frozen=True)
class ImageMatchResult:
    """One matcher's output on one image, with enough context for reports."""

    image_id: str
    matcher: str
    matching: Matching
    pair_qualities: tuple[float, ...]
    pair_origins: tuple[Origin, ...]
    unmatched_target_indices: tuple[int, ...]
    loss: float


def _check_matcher(matcher: str) -> str:
    if matcher not in MATCHER_NAMES:
        raise DomainError(
            f"unknown matcher {matcher!r}, expected one of {MATCHER_NAMES}"
        )
    return matcher


def run_matcher(
    image: ImageRecord,
    matcher: str,
    weights: CostWeights | None = None,
    thresholds: PruneThresholds | None = None,
) -> ImageMatchResult:
    """Match one image and bundle the per-pair qualities and loss."""
    _check_matcher(matcher)
    costs = cost_matrix(image.predictions, image.targets, weights)
    qualities = quality_matrix(
        [p.box for p in image.predictions], [t.box for t in image.targets]
    )
    origins = [t.origin for t in image.targets]
    if matcher == "hungarian":
        matching = hungarian_match(costs)
    else:
        matching = q_mcmf_match(costs, qualities, origins, thresholds)
    return ImageMatchResult(
        image_id=image.id,
        matcher=matcher,
        matching=matching,
        pair_qualities=tuple(float(qualities[i, j]) for i, j in matching.pairs),
        pair_origins=tuple(origins[j] for _, j in matching.pairs),
        unmatched_target_indices=matching.unmatched_targets(len(image.targets)),
        loss=total_loss(image.predictions, image.targets, matching, weights),
    )


def match_scenario(
    scenario: Scenario,
    matcher: str,
    weights: CostWeights | None = None,
    thresholds: PruneThresholds | None = None,
    jobs: int = 1,
) -> list[ImageMatchResult]:
    """Match every image, preserving scenario order regardless of ``jobs``.

    Images are independent, so with ``jobs > 1`` they are dispatched to a
    thread pool; ``executor.map`` hands results back in submission order.
    """
    _check_matcher(matcher)
    if isinstance(jobs, bool) or not isinstance(jobs, int):
        raise MalformedInputError(f"jobs must be an int, got {jobs!r}")
    if jobs < 1:
        raise DomainError(f"jobs must be >= 1, got {jobs}")

    def one(image: ImageRecord) -> ImageMatchResult:
        return run_matcher(image, matcher, weights, thresholds)

    if jobs == 1 or len(scenario.images) <= 1:
        return [one(img) for img in scenario.images]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(one, scenario.images))


def jsonl_record(result: ImageMatchResult) -> str:
    """One JSON line for a match result; floats keep full precision."""
    return json.dumps(
        {
            "id": result.image_id,
            "matcher": result.matcher,
            "pairs": [list(p) for p in result.matching.pairs],
            "unmatched_targets": list(result.unmatched_target_indices),
            "pair_ious": list(result.pair_qualities),
            "total_cost": result.matching.total_cost,
        },
        separators=(",", ":"),
    )


@dataclass(frozen=True)
class StatsRow:
    """Foregrounding counts for one (matcher, origin, IoU threshold) cell.

    ``rate`` is ``below_count / match_count``, or 0.0 when nothing of that
    origin was matched at all.
    """

    matcher: str
    origin: Origin
    iou_threshold: float
    match_count: int
    below_count: int

    def __post_init__(self) -> None:
        if self.match_count < 0 or self.below_count < 0:
            raise DomainError("counts must be >= 0")
        if self.below_count > self.match_count:
            raise DomainError(
                f"below_count {self.below_count} exceeds match_count {self.match_count}"
            )

    @property
    def rate(self) -> float:
        if self.match_count == 0:
            return 0.0
        return self.below_count / self.match_count


@dataclass(frozen=True)
class StatsReport:
    """All foregrounding rows for one matcher over one scenario."""

    matcher: str
    rows: tuple[StatsRow, ...]
    matched_targets: int
    unmatched_targets: int
    total_loss: float

    def row(self, origin: Origin, iou_threshold: float) -> StatsRow:
        for r in self.rows:
            if r.origin is origin and r.iou_threshold == iou_threshold:
                return r
        raise KeyError((origin, iou_threshold))

    def rate(self, origin: Origin, iou_threshold: float) -> float:
        return self.row(origin, iou_threshold).rate


def _check_thresholds(iou_thresholds: Sequence[float]) -> tuple[float, ...]:
    ths = []
    for t in iou_thresholds:
        t = float(t)
        if not math.isfinite(t) or not 0.0 <= t <= 1.0:
            raise DomainError(f"IoU threshold {t!r} is outside [0, 1]")
        ths.append(t)
    if not ths:
        raise DomainError("at least one IoU threshold is required")
    return tuple(sorted(set(ths)))


def aggregate_stats(
    results: Sequence[ImageMatchResult],
    iou_thresholds: Sequence[float] = DEFAULT_IOU_THRESHOLDS,
    matcher: str | None = None,
) -> StatsReport:
    """Aggregate match results into per-origin, per-threshold rows.

    All results must come from the same matcher (pass ``matcher`` to name it
    when ``results`` is empty).  Rows are ordered old-then-new by ascending
    threshold.  Counts are commutative sums, so the result does not depend on
    how the matching work was scheduled; the report's total loss is the
    compensated sum of per-image losses in result order.
    """
    ths = _check_thresholds(iou_thresholds)
    names = {r.matcher for r in results}
    if len(names) > 1:
        raise DomainError(f"results mix matchers: {sorted(names)}")
    if matcher is None:
        if not names:
            raise DomainError("empty results need an explicit matcher name")
        matcher = names.pop()
    elif names and names != {matcher}:
        raise DomainError(f"results are from {names.pop()!r}, not {matcher!r}")
    _check_matcher(matcher)

    qualities: dict[Origin, list[float]] = {Origin.OLD: [], Origin.NEW: []}
    matched = 0
    unmatched = 0
    for r in results:
        matched += len(r.matching)
        unmatched += len(r.unmatched_target_indices)
        for q, o in zip(r.pair_qualities, r.pair_origins):
            qualities[o].append(q)
    rows = []
    for origin in (Origin.OLD, Origin.NEW):
        qs = qualities[origin]
        for t in ths:
            rows.append(
                StatsRow(
                    matcher=matcher,
                    origin=origin,
                    iou_threshold=t,
                    match_count=len(qs),
                    below_count=sum(1 for q in qs if q < t),
                )
            )
    return StatsReport(
        matcher=matcher,
        rows=tuple(rows),
        matched_targets=matched,
        unmatched_targets=unmatched,
        total_loss=math.fsum(r.loss for r in results),
    )


def foregrounding_stats(
    scenario: Scenario,
    matcher: str,
    iou_thresholds: Sequence[float] = DEFAULT_IOU_THRESHOLDS,
    weights: CostWeights | None = None,
    thresholds: PruneThresholds | None = None,
    jobs: int = 1,
) -> StatsReport:
    """Match a whole scenario and report its foregrounding rates.

    Convenience composition of :func:`match_scenario` and
    :func:`aggregate_stats`; keep the intermediate results if you need the
    per-image matchings as well.
    """
    results = match_scenario(scenario, matcher, weights, thresholds, jobs)
    return aggregate_stats(results, iou_thresholds, matcher=matcher)


def stats_csv(reports: Sequence[StatsReport]) -> str:
    """Render reports as delimited text, one row per (origin, threshold) cell.

    Rates and thresholds are printed with six significant digits; the JSONL
    output is the place to look for full-precision values.
    """
    lines = ["matcher,origin,iou_threshold,match_count,below_count,rate"]
    for report in reports:
        for r in report.rows:
            lines.append(
                f"{r.matcher},{r.origin.value},{r.iou_threshold:.6g},"
                f"{r.match_count},{r.below_count},{r.rate:.6g}"
            )
    return "\n".join(lines) + "\n"
