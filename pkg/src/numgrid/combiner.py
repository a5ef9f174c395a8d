"""Parallel majority-vote combiners.

Inputs are positional: slot 2 always carries the quadratic classifier,
which wins whenever no two inputs agree.
"""
from __future__ import annotations

from typing import Sequence

# (linear, quadratic, mahalanobis)
MAJORITY3_ORDER = ("linear", "quadratic", "mahalanobis")
# (linear, quadratic, diaglinear, diagquadratic, mahalanobis)
MAJORITY5_ORDER = ("linear", "quadratic", "diaglinear", "diagquadratic", "mahalanobis")


def majority3(i1: int, i2: int, i3: int) -> int:
    if i1 == i2:
        return i1
    if i1 == i3:
        return i1
    if i2 == i3:
        return i2
    return i2


def majority5(i1: int, i2: int, i3: int, i4: int, i5: int) -> int:
    """Three-of-five tests first, then pairs, in fixed order; else i2."""
    if (i1 == i2 == i3 or i1 == i2 == i4 or i1 == i2 == i5
            or i1 == i3 == i4 or i1 == i3 == i5 or i1 == i4 == i5):
        return i1
    if i2 == i3 == i4 or i2 == i3 == i5 or i2 == i4 == i5:
        return i2
    if i3 == i4 == i5:
        return i3
    if i1 == i2 or i1 == i3 or i1 == i4 or i1 == i5:
        return i1
    if i2 == i3 or i2 == i4 or i2 == i5:
        return i2
    if i3 == i4 or i3 == i5:
        return i3
    if i4 == i5:
        return i4
    return i2


def combine(labels: Sequence[int]) -> int:
    """Dispatch on the number of votes (3 or 5)."""
    if len(labels) == 3:
        return majority3(*labels)
    if len(labels) == 5:
        return majority5(*labels)
    raise ValueError(f"majority combiner takes 3 or 5 votes, got {len(labels)}")
