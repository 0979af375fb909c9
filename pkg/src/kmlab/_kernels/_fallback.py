"""Pure-Python versions of the integer kernels.

These define the reference behaviour; the compiled module must agree with
them exactly (the test-suite runs both when the extension is available).
"""

from itertools import product
from typing import List, Sequence


def inversion_parity(seq: Sequence[int]) -> int:
    """Parity (0 or 1) of the number of inversions of ``seq``."""
    seq = list(seq)
    n = len(seq)
    count = 0
    for i in range(n):
        si = seq[i]
        for j in range(i + 1, n):
            if seq[j] < si:
                count += 1
    return count & 1


def _quad(A: Sequence[Sequence[int]], y: Sequence[int]) -> int:
    n = len(y)
    total = 0
    for i in range(n):
        yi = y[i]
        if not yi:
            continue
        row = A[i]
        s = 0
        for j in range(n):
            s += row[j] * y[j]
        total += yi * s
    return total


def box_norm_counts(A: Sequence[Sequence[int]], bounds: Sequence[int], max_norm: int) -> List[int]:
    """Histogram of ``y^T A y`` over the integer box ``|y_i| <= bounds[i]``.

    Entry ``k`` of the result counts the box points with value exactly ``k``
    for ``0 <= k <= max_norm``; larger values are ignored.
    """
    counts = [0] * (max_norm + 1)
    ranges = [range(-b, b + 1) for b in bounds]
    for y in product(*ranges):
        v = _quad(A, y)
        if 0 <= v <= max_norm:
            counts[v] += 1
    return counts


def box_enumerate(A: Sequence[Sequence[int]], bounds: Sequence[int], target: int) -> List[tuple]:
    """All box points with ``y^T A y == target``, in lexicographic order."""
    ranges = [range(-b, b + 1) for b in bounds]
    return [tuple(y) for y in product(*ranges) if _quad(A, y) == target]
