"""Slow, obviously-correct reference implementations used only by tests."""

from __future__ import annotations

import itertools

import numpy as np


def objective_by_edges(edges, weights, state) -> np.ndarray:
    """Objective vector accumulated one edge at a time in plain Python."""
    m = len(weights[0]) if len(weights) else 0
    out = [0.0] * m
    for e, (u, v) in enumerate(edges):
        for k in range(m):
            out[k] -= int(state[u]) * int(state[v]) * float(weights[e][k])
    return np.array(out)


def energy_by_edges(edges, couplings, state) -> float:
    return float(sum(float(j) * int(state[u]) * int(state[v]) for (u, v), j in zip(edges, couplings)))


def every_state(n: int) -> np.ndarray:
    return np.array(list(itertools.product((-1, 1), repeat=n)), dtype=np.int8).reshape(-1, n)


def brute_ground(edges, couplings, n) -> tuple[float, set[tuple[int, ...]]]:
    """Minimum energy and every minimizing state, by enumerating all 2^n states."""
    best, arg = np.inf, set()
    for s in itertools.product((-1, 1), repeat=n):
        e = energy_by_edges(edges, couplings, s)
        if e < best - 1e-12:
            best, arg = e, {s}
        elif abs(e - best) <= 1e-12:
            arg.add(s)
    return best, arg


def quadratic_front(points) -> set[tuple[float, ...]]:
    """Distinct vectors not dominated by any other vector (maximization)."""
    pts = {tuple(float(x) for x in p) for p in points}
    out = set()
    for p in pts:
        dominated = False
        for q in pts:
            if q != p and all(a >= b for a, b in zip(q, p)):
                dominated = True
                break
        if not dominated:
            out.add(p)
    return out


def hv_inclusion_exclusion(points, r) -> float:
    """Union of boxes [r, p] by inclusion-exclusion over all non-empty subsets."""
    pts = [np.maximum(np.asarray(p, float), r) for p in points]
    r = np.asarray(r, float)
    total = 0.0
    for size in range(1, len(pts) + 1):
        sign = 1.0 if size % 2 else -1.0
        for combo in itertools.combinations(pts, size):
            corner = np.min(combo, axis=0)
            total += sign * float(np.prod(np.maximum(corner - r, 0.0)))
    return total


def objectives_edge_order(edges, weights, states) -> np.ndarray:
    """All objective vectors, accumulated edge by edge with plain numpy."""
    states = np.asarray(states)
    acc = np.zeros((states.shape[0], np.asarray(weights).shape[1]))
    for e, (u, v) in enumerate(edges):
        acc += (states[:, u].astype(float) * states[:, v])[:, None] * weights[e]
    return -acc + 0.0


def scan_front(points) -> set[tuple[float, ...]]:
    """Pareto front by one pass in decreasing lexicographic order.

    A point that is lexicographically larger can never be dominated by a
    smaller one, so checking each candidate only against the survivors so
    far is sufficient.
    """
    pts = np.unique(np.asarray(points, dtype=float), axis=0)[::-1]
    front = np.zeros((0, pts.shape[1]))
    for p in pts:
        if front.shape[0] and np.any(np.all(front >= p, axis=1)):
            continue
        front = np.vstack([front, p])
    return {tuple(float(x) for x in p) for p in front}
