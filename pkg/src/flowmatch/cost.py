"""Pair costs and supervision-loss bookkeeping for matcher comparisons.

A pair cost combines three ingredients: a focal classification term over the
prediction's per-class scores, an element-wise L1 distance between boxes in
center format, and a generalized-IoU term.  The same ingredients, summed over
a matching plus a background penalty for unmatched predictions, give the
per-image supervision loss that the audit tools report.

All loss arithmetic here is scalar Python floats on purpose: matrix entries
must agree bit-for-bit with the scalar functions so that audits can rebuild
any entry independently.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionError,
    DomainError,
    InvalidMatchingError,
    MalformedInputError,
)
from .geometry import Box, giou
from .hungarian import Matching

__all__ = [
    "Origin",
    "Prediction",
    "Target",
    "CostWeights",
    "focal_positive",
    "focal_negative",
    "pair_cost",
    "cost_matrix",
    "matched_loss",
    "background_loss",
    "total_loss",
]

# floor inside the log keeps a confidently wrong score from producing inf
_LOG_FLOOR = 1e-8


class Origin(enum.Enum):
    """Provenance tag on a target: a previously known category or a new one."""

    OLD = "old"
    NEW = "new"


def _as_origin(value: "Origin | str") -> "Origin":
    if isinstance(value, Origin):
        return value
    try:
        return Origin(value)
    except ValueError:
        raise DomainError(
            f"origin must be 'old' or 'new', got {value!r}"
        ) from None


@dataclass(frozen=True)
class Prediction:
    """One predicted box with per-class scores in [0, 1]."""

    scores: tuple[float, ...]
    box: Box

    def __post_init__(self) -> None:
        if isinstance(self.scores, (str, bytes)):
            raise MalformedInputError("scores must be a sequence of numbers")
        try:
            coerced = tuple(float(s) for s in self.scores)
        except (TypeError, ValueError):
            raise MalformedInputError(
                f"scores must be a sequence of numbers, got {self.scores!r}"
            ) from None
        for k, s in enumerate(coerced):
            if not math.isfinite(s) or not 0.0 <= s <= 1.0:
                raise DomainError(f"scores[{k}] = {s!r} is outside [0, 1]")
        object.__setattr__(self, "scores", coerced)
        object.__setattr__(self, "box", Box.coerce(self.box))

    @property
    def num_classes(self) -> int:
        return len(self.scores)


@dataclass(frozen=True)
class Target:
    """One ground-truth box with its class index and origin tag."""

    category_id: int
    box: Box
    origin: Origin

    def __post_init__(self) -> None:
        if isinstance(self.category_id, bool) or not isinstance(self.category_id, int):
            raise MalformedInputError(
                f"category_id must be an int, got {self.category_id!r}"
            )
        if self.category_id < 0:
            raise DomainError(f"category_id must be >= 0, got {self.category_id}")
        object.__setattr__(self, "box", Box.coerce(self.box))
        object.__setattr__(self, "origin", _as_origin(self.origin))


@dataclass(frozen=True)
class CostWeights:
    """Coefficients for the pair-cost terms and the focal-loss shape.

    Defaults follow common detection-transformer training recipes; every
    value is configurable through the CLI as well.
    """

    lambda_focal: float = 2.0
    lambda_l1: float = 5.0
    lambda_giou: float = 2.0
    lambda_bg: float = 1.0
    gamma: float = 2.0
    alpha_focal: float = 0.25

    def __post_init__(self) -> None:
        for name in ("lambda_focal", "lambda_l1", "lambda_giou", "lambda_bg", "gamma"):
            v = getattr(self, name)
            try:
                v = float(v)
            except (TypeError, ValueError):
                raise MalformedInputError(f"{name} must be a number, got {v!r}") from None
            if not math.isfinite(v) or v < 0.0:
                raise DomainError(f"{name} must be finite and >= 0, got {v}")
            object.__setattr__(self, name, v)
        a = float(self.alpha_focal)
        if not math.isfinite(a) or not 0.0 < a < 1.0:
            raise DomainError(f"alpha_focal must lie strictly in (0, 1), got {a}")
        object.__setattr__(self, "alpha_focal", a)


_DEFAULT_WEIGHTS = CostWeights()


def _check_prob(p: float) -> float:
    try:
        p = float(p)
    except (TypeError, ValueError):
        raise MalformedInputError(f"probability must be a number, got {p!r}") from None
    if not math.isfinite(p) or not 0.0 <= p <= 1.0:
        raise DomainError(f"probability {p!r} is outside [0, 1]")
    return p


def focal_positive(p: float, gamma: float = 2.0, alpha_focal: float = 0.25) -> float:
    """Focal penalty for the true class: -alpha * (1 - p)^gamma * log(p).

    The log argument is floored at 1e-8 so p = 0 yields a large finite value.
    """
    p = _check_prob(p)
    return -alpha_focal * (1.0 - p) ** gamma * math.log(max(p, _LOG_FLOOR))


def focal_negative(p: float, gamma: float = 2.0, alpha_focal: float = 0.25) -> float:
    """Focal penalty for a wrong class: -(1 - alpha) * p^gamma * log(1 - p)."""
    p = _check_prob(p)
    return -(1.0 - alpha_focal) * p ** gamma * math.log(max(1.0 - p, _LOG_FLOOR))


def _classification_cost(pred: Prediction, target: Target, w: CostWeights) -> float:
    if target.category_id >= pred.num_classes:
        raise DomainError(
            f"category_id {target.category_id} is out of range for "
            f"{pred.num_classes} classes"
        )
    # positive term first, then negatives in class order: keeps the
    # accumulation order fixed so matrix entries reproduce exactly
    acc = focal_positive(pred.scores[target.category_id], w.gamma, w.alpha_focal)
    for k, s in enumerate(pred.scores):
        if k != target.category_id:
            acc += focal_negative(s, w.gamma, w.alpha_focal)
    return acc


def _box_l1(a: Box, b: Box) -> float:
    pa = a.as_tuple()
    pb = b.as_tuple()
    acc = 0.0
    for u, v in zip(pa, pb):
        acc += abs(u - v)
    return acc


def pair_cost(pred: Prediction, target: Target, weights: CostWeights | None = None) -> float:
    """Cost of supervising ``pred`` with ``target``.

    lambda_focal * classification + lambda_l1 * L1(boxes) + lambda_giou * (1 - giou).
    A perfect prediction (score 1 on the right class, 0 elsewhere, identical
    box) costs exactly 0.
    """
    w = weights if weights is not None else _DEFAULT_WEIGHTS
    cls_term = _classification_cost(pred, target, w)
    l1_term = _box_l1(pred.box, target.box)
    giou_term = 1.0 - giou(pred.box, target.box)
    return w.lambda_focal * cls_term + w.lambda_l1 * l1_term + w.lambda_giou * giou_term


def _check_score_widths(predictions: Sequence[Prediction]) -> None:
    widths = {p.num_classes for p in predictions}
    if len(widths) > 1:
        raise DimensionError(
            f"predictions disagree on the number of classes: {sorted(widths)}"
        )


def cost_matrix(
    predictions: Sequence[Prediction],
    targets: Sequence[Target],
    weights: CostWeights | None = None,
) -> np.ndarray:
    """Dense (N_p, N_q) matrix of pair costs.

    Entry (i, j) equals ``pair_cost(predictions[i], targets[j], weights)``
    exactly; the matrix is filled by calling that function, not by a separate
    vectorized path.
    """
    _check_score_widths(predictions)
    out = np.zeros((len(predictions), len(targets)), dtype=np.float64)
    for i, p in enumerate(predictions):
        for j, q in enumerate(targets):
            try:
                out[i, j] = pair_cost(p, q, weights)
            except (DomainError, DimensionError) as exc:
                raise type(exc)(f"(pred {i}, target {j}): {exc}") from None
    return out


def _pairs_of(matching: "Matching | Iterable[tuple[int, int]]") -> list[tuple[int, int]]:
    if isinstance(matching, Matching):
        return list(matching.pairs)
    pairs = [(int(i), int(j)) for i, j in matching]
    if len({i for i, _ in pairs}) != len(pairs) or len({j for _, j in pairs}) != len(pairs):
        raise InvalidMatchingError(f"an index repeats in {pairs!r}")
    return sorted(pairs)


def matched_loss(
    predictions: Sequence[Prediction],
    targets: Sequence[Target],
    matching: "Matching | Iterable[tuple[int, int]]",
    weights: CostWeights | None = None,
) -> float:
    """Sum of pair costs over the matched pairs (compensated summation)."""
    pairs = _pairs_of(matching)
    for i, j in pairs:
        if not 0 <= i < len(predictions) or not 0 <= j < len(targets):
            raise InvalidMatchingError(
                f"pair ({i}, {j}) is out of range for {len(predictions)} predictions "
                f"and {len(targets)} targets"
            )
    return math.fsum(pair_cost(predictions[i], targets[j], weights) for i, j in pairs)


def background_loss(
    predictions: Sequence[Prediction],
    matching: "Matching | Iterable[tuple[int, int]]",
    weights: CostWeights | None = None,
) -> float:
    """Focal penalty for every class score of every unmatched prediction.

    An unmatched prediction should predict nothing, so each of its scores is
    charged the negative-class focal term.
    """
    w = weights if weights is not None else _DEFAULT_WEIGHTS
    matched = {i for i, _ in _pairs_of(matching)}
    for i in matched:
        if not 0 <= i < len(predictions):
            raise InvalidMatchingError(
                f"prediction index {i} is out of range for {len(predictions)} predictions"
            )
    terms = []
    for i, p in enumerate(predictions):
        if i in matched:
            continue
        for s in p.scores:
            terms.append(focal_negative(s, w.gamma, w.alpha_focal))
    return math.fsum(terms)


def total_loss(
    predictions: Sequence[Prediction],
    targets: Sequence[Target],
    matching: "Matching | Iterable[tuple[int, int]]",
    weights: CostWeights | None = None,
) -> float:
    """matched_loss + lambda_bg * background_loss, by construction.

    Computed by calling the two component functions, so the decomposition
    identity holds exactly rather than up to rounding.
    """
    w = weights if weights is not None else _DEFAULT_WEIGHTS
    return matched_loss(predictions, targets, matching, w) + w.lambda_bg * background_loss(
        predictions, matching, w
    )
