"""Rank and linear correlation coefficients.

The headline statistic is AP rank correlation, a top-weighted analogue of
Kendall's tau: with the candidate ranking iterated top to bottom,

    tau_ap = 2/(N-1) * sum_{i=2..N} C(i)/(i-1) - 1

where C(i) counts the items placed above position i in the candidate that
the reference also places above the item at position i. Agreement near the
top of the candidate therefore counts for more than agreement near the
bottom, and the statistic is not symmetric in its arguments.
"""

from __future__ import annotations

from collections.abc import Hashable, Sequence

import numpy as np

__all__ = ["kendall_tau", "pearson", "tau_ap"]


def _reference_positions(
    reference: Sequence[Hashable], candidate: Sequence[Hashable]
) -> np.ndarray:
    """Positions in `reference` of the candidate's items, candidate order.

    Both rankings must be permutations of the same set of at least two
    distinct items.
    """
    n = len(candidate)
    if n < 2 or len(reference) != n:
        raise ValueError(
            f"rankings must share at least 2 items, got {len(reference)} and {n}"
        )
    ref_pos = {item: i for i, item in enumerate(reference)}
    if len(ref_pos) != n:
        raise ValueError("reference ranking repeats an item")
    try:
        r = np.fromiter((ref_pos[item] for item in candidate), dtype=np.int64, count=n)
    except KeyError as exc:
        raise ValueError(f"candidate item {exc.args[0]!r} is not in the reference") from None
    if len(set(candidate)) != n:
        raise ValueError("candidate ranking repeats an item")
    return r


def tau_ap(
    reference: Sequence[Hashable],
    candidate: Sequence[Hashable],
    symmetric: bool = False,
) -> float:
    """AP rank correlation of `candidate` against `reference`.

    Returns 1.0 for identical rankings and -1.0 for exact reversal. With
    symmetric=True, the mean of both directions is returned instead of the
    candidate-iterated value.
    """
    if symmetric:
        return 0.5 * (tau_ap(reference, candidate) + tau_ap(candidate, reference))
    r = _reference_positions(reference, candidate)
    n = len(r)
    # above[i, j] = True when candidate position j (< i) holds an item the
    # reference places above the item at candidate position i.
    above = r[None, :] < r[:, None]
    counts = np.tril(above, -1).sum(axis=1)[1:]
    return float(2.0 / (n - 1) * np.sum(counts / np.arange(1, n)) - 1.0)


def kendall_tau(reference: Sequence[Hashable], candidate: Sequence[Hashable]) -> float:
    """Kendall's tau between two permutations of the same items: pair
    concordance with uniform weight, symmetric in its arguments."""
    r = _reference_positions(reference, candidate)
    n = len(r)
    concordant = int(np.triu(r[:, None] < r[None, :], 1).sum())
    total = n * (n - 1) // 2
    return float((2 * concordant - total) / total)


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pearson linear correlation, computed in float64 and clamped to
    [-1, 1]. Raises ValueError for fewer than two points, mismatched
    lengths, or a zero-variance side."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
        raise ValueError(f"mismatched sample shapes {x.shape} and {y.shape}")
    if x.size < 2:
        raise ValueError("correlation requires at least two points")
    xc = x - x.mean()
    yc = y - y.mean()
    ssx = float(xc @ xc)
    ssy = float(yc @ yc)
    if ssx == 0.0 or ssy == 0.0:
        raise ValueError("zero variance sample")
    r = float(xc @ yc) / np.sqrt(ssx * ssy)
    return float(min(1.0, max(-1.0, r)))
