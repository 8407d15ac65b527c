"""Hypervolume of a point set (maximization) above a reference point.

The hypervolume is the Lebesgue measure of the union of boxes ``[r, p]``.
Points are clipped to ``r`` first, so a point below the reference in some
coordinate contributes nothing.

* M = 2: sort by the first coordinate and sum strips.
* M = 3: sweep the third coordinate downward while maintaining the area of
  the 2-D staircase incrementally, O(n log n) comparisons.
* M >= 4: slice along the last coordinate and recurse.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right

import numba
import numpy as np

from ..errors import DimensionMismatchError, InconsistentReferenceError
from .dominance import as_points, nondominated_filter

FOM_RELATIVE_EPS = 1e-9


def reference_point(front) -> np.ndarray:
    """Componentwise minimum of the front; every front point weakly dominates it."""
    p = as_points(front)
    if p.shape[0] == 0:
        raise ValueError("reference point of an empty front is undefined")
    return p.min(axis=0)


def _prepare(points, r) -> tuple[np.ndarray, np.ndarray]:
    r = np.asarray(r, dtype=np.float64).reshape(-1)
    p = as_points(points, r.size if np.asarray(points).size == 0 else None)
    if p.shape[0] and p.shape[1] != r.size:
        raise DimensionMismatchError(f"points have {p.shape[1]} objectives, reference has {r.size}")
    p = np.maximum(p, r)
    p = p[np.all(p > r, axis=1)]
    if p.shape[0] > 1:
        p = p[nondominated_filter(p)]
    return p, r


def _hv2(p: np.ndarray, r: np.ndarray) -> float:
    order = np.argsort(-p[:, 0], kind="stable")
    xs = p[order, 0] - r[0]
    ys = p[order, 1] - r[1]
    # after filtering, y increases as x decreases
    heights = np.diff(np.concatenate([[0.0], ys]))
    return float(np.sum(xs * heights))


def _hv3(p: np.ndarray, r: np.ndarray) -> float:
    order = np.argsort(-p[:, 2], kind="stable")
    pts = (p[order] - r).tolist()
    xs: list[float] = []   # staircase, x ascending
    ys: list[float] = []   # y descending
    area = 0.0
    volume = 0.0
    n = len(pts)
    for idx in range(n):
        x, y, z = pts[idx]
        pos = bisect_left(xs, x)
        if not (pos < len(xs) and ys[pos] >= y):
            hi = bisect_right(xs, x)
            lo = hi
            while lo > 0 and ys[lo - 1] <= y:
                lo -= 1
            # area newly covered over (prev_x, x]: the strip heights of the
            # staircase points being replaced, then the tail up to x
            gain = 0.0
            prev = xs[lo - 1] if lo > 0 else 0.0
            for m in range(lo, hi):
                gain += (xs[m] - prev) * (y - ys[m])
                prev = xs[m]
            below = ys[hi] if hi < len(xs) else 0.0
            gain += (x - prev) * (y - below)
            area += gain
            xs[lo:hi] = [x]
            ys[lo:hi] = [y]
        z_next = pts[idx + 1][2] if idx + 1 < n else 0.0
        volume += area * (z - z_next)
    return volume


def _hv_slices(p: np.ndarray, r: np.ndarray) -> float:
    m = p.shape[1]
    if m == 3:
        return _hv3(p, r)
    if m == 2:
        return _hv2(p, r)
    if m == 1:
        return float(p[:, 0].max() - r[0]) if p.shape[0] else 0.0
    order = np.argsort(-p[:, -1], kind="stable")
    q = p[order]
    total = 0.0
    for i in range(q.shape[0]):
        depth = q[i, -1] - (q[i + 1, -1] if i + 1 < q.shape[0] else r[-1])
        if depth > 0:
            sub = q[: i + 1, :-1]
            if sub.shape[0] > 1:
                sub = sub[nondominated_filter(sub)]
            total += _hv_slices(sub, r[:-1]) * depth
    return total


def hypervolume(points, r) -> float:
    """Exact hypervolume of ``points`` above reference ``r``."""
    p, r = _prepare(points, r)
    if p.shape[0] == 0:
        return 0.0
    if p.shape[0] == 1:
        return float(np.prod(p[0] - r))
    return _hv_slices(p, r)


@numba.njit(cache=True, nogil=True)
def _count_hits(samples, points):
    hits = 0
    for i in range(samples.shape[0]):
        for j in range(points.shape[0]):
            inside = True
            for k in range(points.shape[1]):
                if samples[i, k] > points[j, k]:
                    inside = False
                    break
            if inside:
                hits += 1
                break
    return hits


def hv_monte_carlo(points, r, bound_box, num_samples: int, seed: int,
                   chunk: int = 1 << 16) -> tuple[float, float]:
    """Monte-Carlo hypervolume estimate and its standard error.

    Samples uniformly in ``bound_box = (lower, upper)``; a sample counts when
    it lies in some box ``[r, p]``.
    """
    lo, hi = (np.asarray(b, dtype=np.float64).reshape(-1) for b in bound_box)
    r = np.asarray(r, dtype=np.float64).reshape(-1)
    volume = float(np.prod(hi - lo))
    p = as_points(points, r.size) if np.asarray(points).size else np.zeros((0, r.size))
    if p.shape[0] == 0 or volume <= 0.0 or num_samples <= 0:
        return 0.0, 0.0
    # samples outside [r, inf) never hit; fold the reference in by clipping
    # the points' boxes: u in [r, p]  <=>  u >= r and u <= p
    rng = np.random.Generator(np.random.PCG64(seed))
    hits = 0
    done = 0
    p = np.ascontiguousarray(p[np.all(p >= r, axis=1)])
    while done < num_samples:
        m = min(chunk, num_samples - done)
        u = lo + (hi - lo) * rng.random((m, r.size))
        ok = np.all(u >= r, axis=1)
        hits += int(_count_hits(np.ascontiguousarray(u[ok]), p)) if p.shape[0] else 0
        done += m
    frac = hits / num_samples
    return volume * frac, volume * float(np.sqrt(frac * (1.0 - frac) / num_samples))


def figure_of_merit(hv: float, hv_max: float, rel_eps: float = FOM_RELATIVE_EPS) -> float:
    """``hv_max - hv + 1``, floored at 1 for round-off overshoot.

    Raises:
        InconsistentReferenceError: ``hv`` exceeds ``hv_max`` by more than
            ``rel_eps * hv_max``, i.e. the "optimal" front was beaten.
    """
    eps = rel_eps * abs(hv_max)
    if hv > hv_max + eps:
        raise InconsistentReferenceError(
            f"hypervolume {hv!r} exceeds reference maximum {hv_max!r}; reference front improved")
    return max(1.0, hv_max - hv + 1.0)
