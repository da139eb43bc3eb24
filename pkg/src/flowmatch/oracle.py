"""Brute-force reference solvers.

Everything in this module is exponential on purpose: each function enumerates
its search space outright so the fast solvers can be checked against an
implementation too simple to share their bugs.  Instances are capped at a
minimum side of 8, beyond that the enumeration stops being instant and an
:class:`~flowmatch.errors.OracleSizeError` is raised instead.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import DimensionError, MalformedInputError, OracleSizeError
from .hungarian import Matching

__all__ = [
    "MAX_ORACLE_SIDE",
    "brute_min_cost_assignment",
    "brute_max_matching",
    "brute_min_cost_max_matching",
]

MAX_ORACLE_SIDE = 8


def _as_cost(cost: np.ndarray) -> np.ndarray:
    c = np.asarray(cost, dtype=np.float64)
    if c.ndim != 2:
        raise DimensionError(f"cost matrix must be 2-D, got shape {c.shape}")
    if c.size and not np.isfinite(c).all():
        raise MalformedInputError("cost matrix contains non-finite entries")
    return c


def _check_side(n: int) -> None:
    if n > MAX_ORACLE_SIDE:
        raise OracleSizeError(
            f"minimum side {n} exceeds the brute-force cap of {MAX_ORACLE_SIDE}"
        )


def brute_min_cost_assignment(cost: np.ndarray) -> tuple[Matching, float]:
    """Optimal full-cardinality assignment by enumerating every permutation.

    Ties are broken toward the lexicographically first permutation, which
    makes the result deterministic.  Returns the matching and its total.
    """
    c = _as_cost(cost)
    n_p, n_q = c.shape
    k = min(n_p, n_q)
    _check_side(k)
    if k == 0:
        return Matching(), 0.0
    if n_p <= n_q:
        perms = np.array(list(itertools.permutations(range(n_q), n_p)), dtype=np.intp)
        totals = c[np.arange(n_p)[None, :], perms].sum(axis=1)
        best = perms[int(np.argmin(totals))]
        pairs = [(i, int(best[i])) for i in range(n_p)]
    else:
        perms = np.array(list(itertools.permutations(range(n_p), n_q)), dtype=np.intp)
        totals = c[perms, np.arange(n_q)[None, :]].sum(axis=1)
        best = perms[int(np.argmin(totals))]
        pairs = [(int(best[j]), j) for j in range(n_q)]
    m = Matching.from_pairs((i, j, float(c[i, j])) for i, j in pairs)
    return m, m.total_cost


def _as_adjacency(adjacency: np.ndarray) -> np.ndarray:
    a = np.asarray(adjacency)
    if a.ndim != 2:
        raise DimensionError(f"adjacency must be 2-D, got shape {a.shape}")
    return a.astype(bool)


def brute_max_matching(adjacency: np.ndarray) -> int:
    """Maximum bipartite matching size by enumerating reachable column sets.

    Walks the rows once, tracking every achievable set of used columns as a
    bitmask; the answer is the largest popcount seen.  The smaller side is
    used for the mask, so the cap applies to min(rows, cols).
    """
    a = _as_adjacency(adjacency)
    if min(a.shape) == 0:
        return 0
    _check_side(min(a.shape))
    if a.shape[1] > a.shape[0]:
        a = a.T
    masks = {0}
    for row in a:
        cols = [j for j in range(a.shape[1]) if row[j]]
        extended = set(masks)
        for m in masks:
            for j in cols:
                if not (m >> j) & 1:
                    extended.add(m | (1 << j))
        masks = extended
    return max(int(m).bit_count() for m in masks)


def brute_min_cost_max_matching(
    cost: np.ndarray, adjacency: np.ndarray
) -> tuple[Matching, float]:
    """Cheapest matching among those of maximum size, by exhaustive DP.

    State is the bitmask of used vertices on the smaller side; for each mask
    the cheapest pair set reaching it is kept.  Among all masks of maximum
    popcount the cheapest wins, with ties broken by mask-then-insertion order
    so repeated runs agree.
    """
    c = _as_cost(cost)
    a = _as_adjacency(adjacency)
    if c.shape != a.shape:
        raise DimensionError(
            f"cost shape {c.shape} and adjacency shape {a.shape} differ"
        )
    if min(c.shape) == 0:
        return Matching(), 0.0
    _check_side(min(c.shape))

    transposed = c.shape[1] > c.shape[0]
    cw = c.T if transposed else c
    aw = a.T if transposed else a
    n_cols = cw.shape[1]

    # mask of used columns -> (cost, pairs in row order)
    dp: dict[int, tuple[float, tuple[tuple[int, int], ...]]] = {0: (0.0, ())}
    for r in range(cw.shape[0]):
        cols = [j for j in range(n_cols) if aw[r, j]]
        ndp = dict(dp)
        for m, (acc, prs) in dp.items():
            for j in cols:
                if (m >> j) & 1:
                    continue
                nm = m | (1 << j)
                nc = acc + float(cw[r, j])
                if nm not in ndp or nc < ndp[nm][0]:
                    ndp[nm] = (nc, prs + ((r, j),))
        dp = ndp

    best_mask = None
    best_size = -1
    best_cost = 0.0
    for m in sorted(dp):
        size = int(m).bit_count()
        acc = dp[m][0]
        if size > best_size or (size == best_size and acc < best_cost):
            best_mask, best_size, best_cost = m, size, acc
    assert best_mask is not None
    pairs = dp[best_mask][1]
    if transposed:
        pairs = tuple((j, r) for r, j in pairs)
    m = Matching.from_pairs((i, j, float(c[i, j])) for i, j in pairs)
    return m, m.total_cost
