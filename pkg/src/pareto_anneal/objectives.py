"""Objective evaluation, scalarization and coupling auto-scaling.

Each objective is ``F_k(s) = -sum_{(u,v) in E} s_u s_v J[e, k]`` and is to be
maximized. Samplers minimize the Ising energy ``E(s) = sum_e J_e s_u s_v``;
with scalarized couplings ``J_e = sum_k c_k J[e, k]`` this energy equals
``-sum_k c_k F_k(s)``, so a low-energy sample is a good compromise for the
weight vector ``c``.

Sums are accumulated edge by edge in a fixed order rather than by a BLAS
matrix product: the result for a given state is then bitwise independent of
how many states are evaluated together, which the exact (tolerance-free)
dominance tests downstream rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .errors import DimensionMismatchError
from .instance import Graph, MultiObjectiveInstance

SIMPLEX_TOLERANCE = 1e-12


def as_spin_array(states, num_nodes: int) -> np.ndarray:
    """Validate ±1 states and return them as an int8 array (1-D or 2-D)."""
    s = np.asarray(states)
    if s.ndim not in (1, 2) or s.shape[-1] != num_nodes:
        raise DimensionMismatchError(f"state shape {s.shape} does not match N={num_nodes}")
    if s.size and not np.all((s == 1) | (s == -1)):
        raise ValueError("spin states must contain only -1 and +1")
    return s.astype(np.int8, copy=False)


@numba.njit(cache=True, nogil=True)
def _edge_sum(states, edges, weights):
    """``sum_e s_u s_v * weights[e, :]`` per state, accumulated in edge order."""
    out = np.zeros((states.shape[0], weights.shape[1]))
    for i in range(states.shape[0]):
        for e in range(edges.shape[0]):
            prod = states[i, edges[e, 0]] * states[i, edges[e, 1]]
            for k in range(weights.shape[1]):
                out[i, k] += prod * weights[e, k]
    return out


def ising_energy(graph: Graph, couplings: np.ndarray, states) -> np.ndarray | float:
    """``sum_e J_e s_u s_v`` for one state (returns float) or a stack of states."""
    s = as_spin_array(states, graph.num_nodes)
    single = s.ndim == 1
    s2 = s.reshape(1, -1) if single else s
    j = np.ascontiguousarray(couplings, dtype=np.float64).reshape(-1, 1)
    energies = _edge_sum(np.ascontiguousarray(s2), graph.edge_array, j)[:, 0]
    return float(energies[0]) if single else energies


def evaluate_all(instance: MultiObjectiveInstance, states) -> np.ndarray:
    """Objective vector(s): shape ``(M,)`` for one state, ``(S, M)`` for a stack."""
    s = as_spin_array(states, instance.num_nodes)
    single = s.ndim == 1
    s2 = s.reshape(1, -1) if single else s
    # -x is exact, so negating the accumulated sum keeps per-state bitwise stability
    values = -_edge_sum(np.ascontiguousarray(s2), instance.graph.edge_array, instance.weights)
    values += 0.0  # fold -0.0 into 0.0 so equal vectors compare and hash alike
    return values[0] if single else values


def evaluate_objective(instance: MultiObjectiveInstance, k: int, state) -> float:
    if not 0 <= k < instance.num_objectives:
        raise DimensionMismatchError(f"objective index {k} outside [0, {instance.num_objectives})")
    s = as_spin_array(state, instance.num_nodes)
    if s.ndim != 1:
        raise DimensionMismatchError("evaluate_objective takes a single state")
    return float(evaluate_all(instance, s)[k])


def check_weight_vector(c, num_objectives: int | None = None) -> np.ndarray:
    c = np.asarray(c, dtype=np.float64)
    if c.ndim != 1 or (num_objectives is not None and c.size != num_objectives):
        raise DimensionMismatchError(f"weight vector of shape {c.shape} does not match M={num_objectives}")
    if np.any(c < 0) or not np.all(np.isfinite(c)):
        raise ValueError(f"weight vector entries must be finite and non-negative: {c}")
    if abs(c.sum() - 1.0) > SIMPLEX_TOLERANCE:
        raise ValueError(f"weight vector must sum to 1 (got {c.sum()!r})")
    return c


def sample_weight_vector(num_objectives: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw from the probability simplex (flat Dirichlet).

    Normalized i.i.d. unit-rate exponentials; consumes ``num_objectives``
    exponential variates from ``rng``.
    """
    if num_objectives < 2:
        raise ValueError(f"need at least two objectives, got {num_objectives}")
    e = rng.standard_exponential(num_objectives)
    return e / e.sum()


def sample_weight_vectors(num_objectives: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` simplex draws; row ``i`` equals the i-th sequential single draw."""
    if num_objectives < 2:
        raise ValueError(f"need at least two objectives, got {num_objectives}")
    e = rng.standard_exponential((count, num_objectives))
    return e / e.sum(axis=1, keepdims=True)


@dataclass(frozen=True, eq=False)
class ScalarIsing:
    """Single-objective, field-free Ising problem on ``graph``.

    ``couplings[e]`` multiplies ``s_u s_v`` for edge ``e``; ``scale_factor``
    is the positive multiplier applied by :func:`autoscale` (1 before).
    """

    graph: Graph
    couplings: np.ndarray
    scale_factor: float = 1.0
    source_weights: np.ndarray | None = None

    def __post_init__(self):
        j = np.array(self.couplings, dtype=np.float64).reshape(-1)
        if j.size != self.graph.num_edges:
            raise DimensionMismatchError(f"{j.size} couplings for {self.graph.num_edges} edges")
        j.setflags(write=False)
        object.__setattr__(self, "couplings", j)

    @property
    def num_nodes(self) -> int:
        return self.graph.num_nodes

    def energy(self, states) -> np.ndarray | float:
        return ising_energy(self.graph, self.couplings, states)


def scalarize(instance: MultiObjectiveInstance, c) -> ScalarIsing:
    """Collapse the objectives with weights ``c``: ``J_e = sum_k c_k J[e, k]``."""
    c = check_weight_vector(c, instance.num_objectives)
    couplings = np.zeros(instance.graph.num_edges, dtype=np.float64)
    for k in range(instance.num_objectives):
        couplings += c[k] * instance.weights[:, k]
    return ScalarIsing(instance.graph, couplings, 1.0, c)


def autoscale(problem: ScalarIsing, lo: float = -2.0, hi: float = 1.0) -> ScalarIsing:
    """Multiply couplings by the largest ``alpha > 0`` keeping them in ``[lo, hi]``.

    Positive couplings are bounded by ``hi``, negative ones by ``lo``; a sign
    that does not occur imposes no bound. The coupling that sets ``alpha``
    is snapped onto its bound exactly. All-zero problems pass through with
    ``alpha = 1``.
    """
    if not lo < 0 < hi:
        raise ValueError(f"need lo < 0 < hi, got [{lo}, {hi}]")
    j = problem.couplings
    pos_max = j.max(initial=0.0)
    neg_min = j.min(initial=0.0)
    candidates = []
    if pos_max > 0:
        candidates.append((hi / pos_max, int(np.argmax(j)), hi))
    if neg_min < 0:
        candidates.append((lo / neg_min, int(np.argmin(j)), lo))
    if not candidates:
        return ScalarIsing(problem.graph, j, problem.scale_factor, problem.source_weights)
    alpha, edge, bound = min(candidates, key=lambda t: t[0])
    scaled = np.clip(alpha * j, lo, hi)
    scaled[edge] = bound
    return ScalarIsing(problem.graph, scaled, problem.scale_factor * alpha, problem.source_weights)


def in_range(problem: ScalarIsing, lo: float = -2.0, hi: float = 1.0) -> bool:
    j = problem.couplings
    return bool(np.all((j >= lo) & (j <= hi)))
