"""Exhaustive minimum-cost one-to-one assignment (the classical baseline matcher).

Solves the rectangular linear sum assignment problem: every row or column of
the smaller side is matched, no vertex is used twice, and the summed cost is
globally minimal.  The mandatory cardinality ``min(N_p, N_q)`` is the defining
property here; the flow matcher in :mod:`flowmatch.qmcmf` deliberately relaxes
it.
"""

from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DimensionError, InvalidMatchingError, MalformedInputError

__all__ = ["Matching", "hungarian_match"]

_TOTAL_TOL = 1e-9


@dataclass(frozen=True)
class Matching:
    """A one-to-one set of (prediction index, target index) pairs.

    Pairs are kept sorted by prediction index, each with the cost of its edge;
    ``total_cost`` is their exact (compensated) sum.  Construct through
    :meth:`from_pairs` unless you already hold canonical data.
    """

    pairs: tuple[tuple[int, int], ...] = ()
    pair_costs: tuple[float, ...] = ()
    total_cost: float = 0.0

    def __post_init__(self) -> None:
        if len(self.pairs) != len(self.pair_costs):
            raise InvalidMatchingError(
                f"{len(self.pairs)} pairs but {len(self.pair_costs)} per-pair costs"
            )
        preds = [i for i, _ in self.pairs]
        targets = [j for _, j in self.pairs]
        if any(i < 0 for i in preds) or any(j < 0 for j in targets):
            raise InvalidMatchingError(f"negative index in pairs {self.pairs!r}")
        if len(set(preds)) != len(preds):
            raise InvalidMatchingError(f"a prediction index repeats in {self.pairs!r}")
        if len(set(targets)) != len(targets):
            raise InvalidMatchingError(f"a target index repeats in {self.pairs!r}")
        if abs(self.total_cost - math.fsum(self.pair_costs)) > _TOTAL_TOL:
            raise InvalidMatchingError(
                f"total_cost {self.total_cost} is not the sum of pair costs"
            )

    @classmethod
    def from_pairs(cls, pairs_with_costs: Iterable[tuple[int, int, float]]) -> "Matching":
        """Build a canonical matching from ``(pred_index, target_index, cost)`` triples."""
        items = sorted((int(i), int(j), float(c)) for i, j, c in pairs_with_costs)
        pairs = tuple((i, j) for i, j, _ in items)
        costs = tuple(c for _, _, c in items)
        return cls(pairs=pairs, pair_costs=costs, total_cost=math.fsum(costs))

    def __len__(self) -> int:
        return len(self.pairs)

    def matched_predictions(self) -> frozenset[int]:
        return frozenset(i for i, _ in self.pairs)

    def matched_targets(self) -> frozenset[int]:
        return frozenset(j for _, j in self.pairs)

    def unmatched_predictions(self, n_preds: int) -> tuple[int, ...]:
        used = self.matched_predictions()
        return tuple(i for i in range(n_preds) if i not in used)

    def unmatched_targets(self, n_targets: int) -> tuple[int, ...]:
        used = self.matched_targets()
        return tuple(j for j in range(n_targets) if j not in used)


def hungarian_match(cost: np.ndarray) -> Matching:
    """Minimum-cost assignment of cardinality ``min(N_p, N_q)``.

    Accepts any finite rectangular matrix (negative entries included) and
    returns a globally optimal matching.  Uses the shortest-augmenting-path
    solver from scipy, which handles rectangular instances directly.

    Raises:
        DimensionError: if ``cost`` is not two-dimensional.
        MalformedInputError: if any entry is NaN or infinite.
    """
    c = np.asarray(cost, dtype=np.float64)
    if c.ndim != 2:
        raise DimensionError(f"cost matrix must be 2-D, got shape {c.shape}")
    if c.size and not np.isfinite(c).all():
        raise MalformedInputError("cost matrix contains non-finite entries")
    if c.shape[0] == 0 or c.shape[1] == 0:
        return Matching()
    rows, cols = linear_sum_assignment(c)
    return Matching.from_pairs(
        (int(i), int(j), float(c[i, j])) for i, j in zip(rows, cols)
    )
