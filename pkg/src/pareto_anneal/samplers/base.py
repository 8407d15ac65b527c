"""Sample sets, the modeled cost of a sampler call, and batch tiling."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Protocol, Sequence

import numpy as np

from ..errors import MixedGraphError
from ..objectives import ScalarIsing
from ..seeds import derive_seed

ENERGY_RTOL = 1e-9
DEFAULT_NUM_READS = 1000


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Distinct states returned by one sampler call.

    ``states`` is ``(S, N)`` int8, ``energies`` and ``occurrences`` are
    length ``S``; ``occurrences`` sums to the number of reads requested.
    ``timing`` is modeled seconds for the call, never wall clock.
    """

    states: np.ndarray
    energies: np.ndarray
    occurrences: np.ndarray
    timing: float = 0.0

    def __len__(self) -> int:
        return int(self.states.shape[0])

    @property
    def num_reads(self) -> int:
        return int(self.occurrences.sum())

    def lowest(self) -> tuple[float, np.ndarray]:
        i = int(np.argmin(self.energies))
        return float(self.energies[i]), self.states[i]

    def with_timing(self, timing: float) -> SampleSet:
        return replace(self, timing=float(timing))


def _unique_rows(reads: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Distinct rows in lexicographic order (-1 before +1) with their counts."""
    n = reads.shape[1]
    if 0 < n <= 62:
        # spin 0 is the most significant bit, so code order is row order
        weights = np.left_shift(np.int64(1), np.arange(n - 1, -1, -1, dtype=np.int64))
        codes = (reads > 0).astype(np.int64) @ weights
        _, first, occ = np.unique(codes, return_index=True, return_counts=True)
        return reads[first], occ.astype(np.int64)
    states, inverse = np.unique(reads, axis=0, return_inverse=True)
    return states, np.bincount(inverse.reshape(-1), minlength=states.shape[0]).astype(np.int64)


def aggregate_reads(problem: ScalarIsing, reads: np.ndarray, timing: float = 0.0,
                    counts: np.ndarray | None = None) -> SampleSet:
    """Collapse raw reads into distinct states sorted by (energy, state).

    Energies are recomputed from scratch so the stored values always pass
    re-evaluation.
    """
    reads = np.asarray(reads, dtype=np.int8).reshape(-1, problem.num_nodes)
    if counts is None:
        states, occ = _unique_rows(reads)
    else:
        states, occ = reads, np.asarray(counts, dtype=np.int64)
    energies = np.asarray(problem.energy(states), dtype=np.float64).reshape(-1)
    # np.unique already sorted rows; a stable sort on energy keeps that order for ties
    order = np.argsort(energies, kind="stable")
    return SampleSet(states[order], energies[order], occ[order], float(timing))


def check_sample_set(problem: ScalarIsing, ss: SampleSet, num_reads: int | None = None,
                     rtol: float = ENERGY_RTOL) -> list[str]:
    """Invariant violations of ``ss`` against ``problem`` (empty when sound)."""
    problems = []
    n = len(ss)
    if ss.energies.shape != (n,) or ss.occurrences.shape != (n,):
        problems.append("states, energies and occurrences differ in length")
        return problems
    if ss.states.ndim != 2 or ss.states.shape[1] != problem.num_nodes:
        problems.append(f"state width {ss.states.shape} does not match N={problem.num_nodes}")
        return problems
    if np.any(ss.occurrences < 1):
        problems.append("occurrence counts must be positive")
    if num_reads is not None and ss.num_reads != num_reads:
        problems.append(f"occurrences sum to {ss.num_reads}, expected {num_reads}")
    if n:
        recomputed = np.asarray(problem.energy(ss.states)).reshape(-1)
        err = np.abs(recomputed - ss.energies)
        bad = err > rtol * np.maximum(1.0, np.abs(recomputed))
        if np.any(bad):
            problems.append(f"{int(bad.sum())} energies fail re-evaluation (max error {err.max():.3g})")
    return problems


@dataclass(frozen=True)
class CostModel:
    """Modeled duration of one sampler call: programming + reads x (anneal + readout)."""

    programming_time: float
    anneal_time: float
    readout_time: float

    def __post_init__(self):
        for name in ("programming_time", "anneal_time", "readout_time"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def per_sample_time(self) -> float:
        return self.anneal_time + self.readout_time

    def call_time(self, num_reads: int) -> float:
        return self.programming_time + num_reads * self.per_sample_time

    def to_dict(self) -> dict:
        return {"programming_s": self.programming_time, "anneal_s": self.anneal_time,
                "readout_s": self.readout_time}


# The per-call programming overhead is an estimate: it is chosen so that a
# 1000-read call lands near 0.2 s on the faster preset.
COST_PRESETS = {
    "advantage2": CostModel(programming_time=0.1, anneal_time=1e-6, readout_time=98e-6),
    "advantage": CostModel(programming_time=0.1, anneal_time=1e-6, readout_time=235e-6),
}
# disjoint copies of the 42-node instance that fit on each processor
TILING_PRESETS = {"advantage2": 96, "advantage": 114}


def cost_preset(name: str) -> CostModel:
    try:
        return COST_PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown cost preset {name!r}; choose from {sorted(COST_PRESETS)}") from None


@dataclass(frozen=True)
class TilingPlan:
    """``copies`` problems share one sampler call."""

    copies: int = 1

    def __post_init__(self):
        if self.copies < 1:
            raise ValueError(f"tiling needs at least one copy, got {self.copies}")

    def num_calls(self, num_problems: int) -> int:
        return math.ceil(num_problems / self.copies)

    def groups(self, num_problems: int) -> list[range]:
        k = self.copies
        return [range(i, min(i + k, num_problems)) for i in range(0, num_problems, k)]


class Sampler(Protocol):
    def sample(self, problem: ScalarIsing, num_reads: int, seed: int) -> SampleSet: ...


def check_num_reads(num_reads: int) -> int:
    if int(num_reads) < 1:
        raise ValueError(f"num_reads must be >= 1, got {num_reads}")
    return int(num_reads)


def batch_sample(problems: Sequence[ScalarIsing], num_reads: int, seed: int, plan: TilingPlan,
                 cost: CostModel, sampler: Sampler, workers: int = 1,
                 index_offset: int = 0) -> list[SampleSet]:
    """Sample every problem, ``plan.copies`` per modeled call.

    Problem ``i`` uses the substream ``(seed, index_offset + i)``, so results
    are independent of ``workers``. Every set in one group carries the same
    timing, the cost of that single call.
    """
    check_num_reads(num_reads)
    if problems:
        g0 = problems[0].graph
        for p in problems[1:]:
            if p.graph is not g0 and not p.graph.same_as(g0):
                raise MixedGraphError("all problems in a batch must share one graph")
    call_time = cost.call_time(num_reads)
    seeds = [derive_seed(seed, index_offset + i) for i in range(len(problems))]

    def run(i: int) -> SampleSet:
        return sampler.sample(problems[i], num_reads, seeds[i]).with_timing(call_time)

    if workers <= 1 or len(problems) <= 1:
        return [run(i) for i in range(len(problems))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, range(len(problems))))
