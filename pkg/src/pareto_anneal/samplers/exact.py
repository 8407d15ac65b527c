"""Exact ground states: full enumeration and conditioned tree dynamic programming.

Both exploit the global spin-flip symmetry of field-free problems by fixing
spin 0 to +1 during the search.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numba
import numpy as np

from ..errors import CapacityError
from ..instance import Graph
from ..objectives import ScalarIsing
from .base import COST_PRESETS, CostModel, SampleSet, aggregate_reads, check_num_reads

EXHAUSTIVE_MAX_NODES = 30
EXHAUSTIVE_SAMPLER_MAX_NODES = 20
DP_MAX_CYCLOMATIC = 12


def _csr(graph: Graph, couplings: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    adj = graph.adjacency()
    indptr = np.zeros(graph.num_nodes + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(a) for a in adj])
    nbr = np.array([v for a in adj for v, _ in a], dtype=np.int64)
    cpl = np.array([couplings[e] for a in adj for _, e in a], dtype=np.float64)
    return indptr, nbr, cpl


@numba.njit(cache=True, nogil=True)
def _gray_scan(indptr, nbr, cpl, n, tol):
    """Walk all states with s0 = +1 in Gray-code order.

    Returns the running minimum and the codes of every state whose
    incrementally tracked energy came within ``tol`` of it.
    """
    s = -np.ones(n, dtype=np.float64)
    s[0] = 1.0
    energy = 0.0
    for i in range(n):
        for p in range(indptr[i], indptr[i + 1]):
            if nbr[p] > i:
                energy += cpl[p] * s[i] * s[nbr[p]]
    best = energy
    cap = 64
    codes = np.empty(cap, dtype=np.int64)
    codes[0] = 0
    count = 1
    code = 0
    total = np.int64(1) << (n - 1)
    for step in range(1, total):
        bit = 0
        t = step
        while (t & 1) == 0:
            t >>= 1
            bit += 1
        j = bit + 1
        h = 0.0
        for p in range(indptr[j], indptr[j + 1]):
            h += cpl[p] * s[nbr[p]]
        energy -= 2.0 * s[j] * h
        s[j] = -s[j]
        code ^= np.int64(1) << bit
        if energy < best - tol:
            best = energy
            count = 0
        if energy <= best + tol:
            if energy < best:
                best = energy
            if count == cap:
                grown = np.empty(cap * 2, dtype=np.int64)
                grown[:cap] = codes
                codes = grown
                cap *= 2
            codes[count] = code
            count += 1
    return best, codes[:count]


def _decode(codes: np.ndarray, n: int) -> np.ndarray:
    bits = (codes[:, None] >> np.arange(n - 1, dtype=np.int64)[None, :]) & 1
    states = np.empty((codes.size, n), dtype=np.int8)
    states[:, 0] = 1
    states[:, 1:] = 2 * bits - 1
    return states


def exhaustive_optimum(problem: ScalarIsing, max_nodes: int = EXHAUSTIVE_MAX_NODES) -> tuple[float, np.ndarray]:
    """Global minimum energy and *all* minimizing states by full enumeration.

    States come back sorted lexicographically (-1 before +1), both members
    of each spin-flip pair included.
    """
    n = problem.num_nodes
    if n > max_nodes:
        raise CapacityError(f"exhaustive enumeration capped at N={max_nodes}, got N={n}")
    j = problem.couplings
    scale = max(1.0, float(np.abs(j).sum()))
    indptr, nbr, cpl = _csr(problem.graph, j)
    _, codes = _gray_scan(indptr, nbr, cpl, n, 1e-9 * scale)
    cand = _decode(codes, n)
    energies = np.asarray(problem.energy(cand)).reshape(-1)
    best = float(energies.min())
    keep = cand[energies <= best + 1e-12 * scale]
    states = np.unique(np.concatenate([keep, -keep]), axis=0)
    return best, states


def all_states(n: int) -> np.ndarray:
    """Every state of ``n`` spins, ``(2**n, n)`` int8; spin j is +1 iff bit j of the row index."""
    idx = np.arange(1 << n, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n, dtype=np.int64)[None, :]) & 1
    return (2 * bits - 1).astype(np.int8)


@dataclass(frozen=True)
class ConditioningPlan:
    """Spanning forest plus the spins conditioned to break every remaining cycle."""

    order: tuple[int, ...]          # BFS order over all components
    parent: tuple[int, ...]         # -1 for roots
    parent_edge: tuple[int, ...]    # -1 for roots
    roots: tuple[int, ...]
    feedback_edges: tuple[int, ...]
    conditioned: tuple[int, ...]

    @property
    def num_assignments(self) -> int:
        return 1 << len(self.conditioned)


def conditioning_plan(graph: Graph) -> ConditioningPlan:
    n = graph.num_nodes
    adj = graph.adjacency()
    parent = [-1] * n
    parent_edge = [-1] * n
    seen = [False] * n
    order, roots = [], []
    tree = set()
    for root in range(n):
        if seen[root]:
            continue
        roots.append(root)
        seen[root] = True
        queue = deque([root])
        while queue:
            u = queue.popleft()
            order.append(u)
            for v, e in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    parent[v], parent_edge[v] = u, e
                    tree.add(e)
                    queue.append(v)
    feedback = [e for e in range(graph.num_edges) if e not in tree]
    conditioned: list[int] = []
    for e in feedback:
        u, v = graph.edges[e]
        if u in conditioned or v in conditioned:
            continue
        conditioned.append(v)
    return ConditioningPlan(tuple(order), tuple(parent), tuple(parent_edge), tuple(roots),
                            tuple(feedback), tuple(conditioned))


_SPIN = np.array([-1.0, 1.0])


def _conditioned_minimum(problem: ScalarIsing, plan: ConditioningPlan, clamp: np.ndarray) -> float:
    """Minimum energy over states agreeing with ``clamp`` (0 = free, ±1 = fixed).

    One leaf-to-root pass, vectorized over all assignments of the
    conditioned spins.
    """
    n = problem.num_nodes
    j = problem.couplings
    edges = problem.graph.edges
    cond = list(plan.conditioned)
    a = plan.num_assignments
    assign = ((np.arange(a)[:, None] >> np.arange(len(cond))[None, :]) & 1) * 2.0 - 1.0
    col = {v: q for q, v in enumerate(cond)}
    cost = np.zeros((a, n, 2))
    for v, q in col.items():
        cost[:, v, :][assign[:, q][:, None] != _SPIN[None, :]] = np.inf
    for v in np.nonzero(clamp)[0]:
        cost[:, v, _SPIN != clamp[v]] = np.inf
    for e in plan.feedback_edges:
        u, w = edges[e]
        if w not in col:
            u, w = w, u
        cost[:, u, :] += j[e] * assign[:, col[w]][:, None] * _SPIN[None, :]
    for v in reversed(plan.order):
        p = plan.parent[v]
        if p < 0:
            continue
        jv = j[plan.parent_edge[v]]
        # msg[:, t] = min_s (J * s * t + cost_v[s])
        c = cost[:, v, :]
        msg0 = np.minimum(c[:, 0] + jv, c[:, 1] - jv)   # parent spin -1
        msg1 = np.minimum(c[:, 0] - jv, c[:, 1] + jv)   # parent spin +1
        cost[:, p, 0] += msg0
        cost[:, p, 1] += msg1
    total = np.zeros(a)
    for r in plan.roots:
        total += cost[:, r, :].min(axis=1)
    return float(total.min())


def exact_ground_state(problem: ScalarIsing, max_cyclomatic: int = DP_MAX_CYCLOMATIC,
                       plan: ConditioningPlan | None = None) -> tuple[float, np.ndarray]:
    """Exact minimum energy and one minimizing state for sparse graphs.

    Conditions one endpoint of every non-forest edge, solves each conditioned
    forest by leaf elimination, and returns the lexicographically smallest
    minimizer with spin 0 = +1 (fixed greedily, one spin at a time).

    Raises:
        CapacityError: if the cyclomatic number exceeds ``max_cyclomatic``.
    """
    graph = problem.graph
    f = graph.cyclomatic_number()
    if f > max_cyclomatic:
        raise CapacityError(f"cyclomatic number {f} exceeds cap {max_cyclomatic}")
    plan = plan or conditioning_plan(graph)
    n = graph.num_nodes
    tol = 1e-9 * max(1.0, float(np.abs(problem.couplings).sum()))
    clamp = np.zeros(n)
    if n:
        clamp[0] = 1.0
    best = _conditioned_minimum(problem, plan, clamp)
    for i in range(1, n):
        clamp[i] = -1.0
        if _conditioned_minimum(problem, plan, clamp) > best + tol:
            clamp[i] = 1.0
    state = clamp.astype(np.int8)
    return float(problem.energy(state)), state


def ground_energy(problem: ScalarIsing, max_cyclomatic: int = DP_MAX_CYCLOMATIC) -> float:
    """Minimum energy only (single DP pass, no tie-breaking)."""
    f = problem.graph.cyclomatic_number()
    if f > max_cyclomatic:
        raise CapacityError(f"cyclomatic number {f} exceeds cap {max_cyclomatic}")
    return _conditioned_minimum(problem, conditioning_plan(problem.graph), np.zeros(problem.num_nodes))


class ExhaustiveSampler:
    """Returns the ``num_reads`` lowest-energy states by enumeration.

    With ``num_reads == 2**N`` every state is returned exactly once; above
    that the enumeration wraps around, extra reads going to the lowest
    energies first. Ties are broken lexicographically, so the seed is unused.
    """

    def __init__(self, max_nodes: int = EXHAUSTIVE_SAMPLER_MAX_NODES, cost: CostModel | None = None):
        self.max_nodes = max_nodes
        self.cost = cost or COST_PRESETS["advantage2"]
        self._cache: dict[int, np.ndarray] = {}

    def _states(self, n: int) -> np.ndarray:
        if n not in self._cache:
            states = all_states(n)
            # lexicographic row order with -1 < +1
            self._cache[n] = states[np.lexsort(states.T[::-1])]
        return self._cache[n]

    def sample(self, problem: ScalarIsing, num_reads: int, seed: int = 0) -> SampleSet:
        num_reads = check_num_reads(num_reads)
        n = problem.num_nodes
        if n > self.max_nodes:
            raise CapacityError(f"exhaustive sampler capped at N={self.max_nodes}, got N={n}")
        states = self._states(n)
        energies = np.asarray(problem.energy(states)).reshape(-1)
        order = np.argsort(energies, kind="stable")
        total = states.shape[0]
        base, extra = divmod(num_reads, total)
        if base == 0:
            chosen = order[:num_reads]
            counts = np.ones(num_reads, dtype=np.int64)
        else:
            chosen = order
            counts = np.full(total, base, dtype=np.int64)
            counts[:extra] += 1
        return SampleSet(states[chosen], energies[chosen], counts, self.cost.call_time(num_reads))


class ExactDPSampler:
    """Every read is the deterministic exact ground state."""

    def __init__(self, max_cyclomatic: int = DP_MAX_CYCLOMATIC, cost: CostModel | None = None):
        self.max_cyclomatic = max_cyclomatic
        self.cost = cost or COST_PRESETS["advantage2"]
        self._plans: dict[tuple, ConditioningPlan] = {}

    def sample(self, problem: ScalarIsing, num_reads: int, seed: int = 0) -> SampleSet:
        num_reads = check_num_reads(num_reads)
        key = (problem.num_nodes, problem.graph.edges)
        if key not in self._plans:
            self._plans[key] = conditioning_plan(problem.graph)
        _, state = exact_ground_state(problem, self.max_cyclomatic, self._plans[key])
        return aggregate_reads(problem, state.reshape(1, -1), self.cost.call_time(num_reads),
                               counts=np.array([num_reads]))
