"""Minimum-cost one-to-one assignment used by association and matching."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

# Cost used to encode a forbidden pairing; assignments at or above this
# value are treated as "no match" by callers.
FORBIDDEN_COST = 1e9


def hungarian_assign(cost: np.ndarray) -> list[tuple[int, int]]:
    """Optimal assignment of min(n, m) pairs minimizing total cost.

    Costs must be finite; encode disallowed pairs with a large sentinel
    such as FORBIDDEN_COST and drop them from the returned pairing.
    """
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2:
        raise ValueError("cost must be a 2D matrix")
    if cost.size == 0:
        return []
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost matrix must be finite")
    rows, cols = linear_sum_assignment(cost)
    return sorted(zip(rows.tolist(), cols.tolist()))
