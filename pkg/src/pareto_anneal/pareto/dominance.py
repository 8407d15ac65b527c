"""Pareto dominance (maximization) and non-dominated filtering.

Comparisons are exact; there is deliberately no tolerance, since a tolerant
dominance relation is not transitive.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right

import numpy as np

from ..errors import DimensionMismatchError


def dominates(a, b) -> bool:
    """True iff ``a >= b`` componentwise with at least one strict inequality."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"cannot compare vectors of shapes {a.shape} and {b.shape}")
    return bool(np.all(a >= b) and np.any(a > b))


def as_points(points, num_objectives: int | None = None) -> np.ndarray:
    p = np.asarray(points, dtype=np.float64)
    if p.size == 0:
        return p.reshape(0, num_objectives or (p.shape[-1] if p.ndim == 2 else 0))
    if p.ndim != 2:
        raise DimensionMismatchError(f"expected an (n, M) array of points, got shape {p.shape}")
    if num_objectives is not None and p.shape[1] != num_objectives:
        raise DimensionMismatchError(f"points have {p.shape[1]} objectives, expected {num_objectives}")
    return p + 0.0  # -0.0 -> 0.0 so duplicates are bitwise identical


def unique_first(points: np.ndarray) -> np.ndarray:
    """Indices of the first occurrence of every distinct row, ascending."""
    if points.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    _, first = np.unique(points, axis=0, return_index=True)
    return np.sort(first)


def _sweep_2d(pts: list[list[float]]) -> list[int]:
    order = sorted(range(len(pts)), key=lambda i: (-pts[i][0], -pts[i][1]))
    keep = []
    best_y = -np.inf
    for i in order:
        y = pts[i][1]
        if y > best_y:
            keep.append(i)
            best_y = y
    return keep


def _sweep_3d(pts: list[list[float]]) -> list[int]:
    # Visit points by decreasing x; the (y, z) staircase of visited survivors
    # is kept with y ascending and z descending.
    order = sorted(range(len(pts)), key=lambda i: (-pts[i][0], -pts[i][1], -pts[i][2]))
    ys: list[float] = []
    zs: list[float] = []
    keep = []
    for i in order:
        _, y, z = pts[i]
        pos = bisect_left(ys, y)
        if pos < len(ys) and zs[pos] >= z:
            continue
        keep.append(i)
        hi = bisect_right(ys, y)
        lo = hi
        while lo > 0 and zs[lo - 1] <= z:
            lo -= 1
        ys[lo:hi] = [y]
        zs[lo:hi] = [z]
    return keep


def _scan_quadratic(points: np.ndarray) -> list[int]:
    # a dominator always has a strictly larger coordinate sum, so checking
    # each point against earlier survivors in sum-descending order suffices
    sums = points.sum(axis=1)
    order = np.lexsort(tuple(-points[:, k] for k in range(points.shape[1] - 1, -1, -1)) + (-sums,))
    survivors = np.empty_like(points)
    count = 0
    keep = []
    for i in order:
        p = points[i]
        if count and np.any(np.all(survivors[:count] >= p, axis=1)):
            continue
        survivors[count] = p
        count += 1
        keep.append(int(i))
    return keep


def nondominated_filter(points) -> np.ndarray:
    """Indices of the non-dominated points, ascending.

    Identical vectors are first collapsed onto their first occurrence, so a
    set of duplicates yields exactly one survivor. M <= 3 uses sort-and-sweep;
    larger M a presorted quadratic scan.
    """
    p = as_points(points)
    n = p.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    uniq = unique_first(p)
    q = p[uniq]
    m = p.shape[1]
    if m == 1:
        keep = [int(np.argmax(q[:, 0]))]
    elif m == 2:
        keep = _sweep_2d(q.tolist())
    elif m == 3:
        keep = _sweep_3d(q.tolist())
    else:
        keep = _scan_quadratic(q)
    return np.sort(uniq[np.asarray(keep, dtype=np.int64)])


def mutual_nondomination_violations(points) -> list[str]:
    """Pairs that violate uniqueness or mutual non-domination (quadratic check)."""
    p = as_points(points)
    problems = []
    for i in range(p.shape[0]):
        ge = np.all(p >= p[i], axis=1)
        ge[i] = False
        for j in np.nonzero(ge)[0]:
            if np.array_equal(p[j], p[i]):
                if j > i:
                    problems.append(f"duplicate objective vector at {i} and {int(j)}")
            else:
                problems.append(f"point {int(j)} dominates point {i}")
    return problems
