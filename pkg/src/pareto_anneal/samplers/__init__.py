"""Interchangeable sampling backends for scalarized Ising problems."""

from __future__ import annotations

from .anneal import AnnealSchedule, SimulatedAnnealingSampler, anneal_reads, sa_sample
from .base import (
    COST_PRESETS,
    DEFAULT_NUM_READS,
    TILING_PRESETS,
    CostModel,
    SampleSet,
    Sampler,
    TilingPlan,
    aggregate_reads,
    batch_sample,
    check_sample_set,
    cost_preset,
)
from .exact import (
    ConditioningPlan,
    ExactDPSampler,
    ExhaustiveSampler,
    all_states,
    conditioning_plan,
    exact_ground_state,
    exhaustive_optimum,
    ground_energy,
)
from .remote import RemoteSampler, remote_sample, start_server

BACKENDS = ("exhaustive", "exact-dp", "sa", "remote:<url>")


def make_sampler(backend: str, params: dict | None = None, cost: CostModel | None = None) -> Sampler:
    """Build a backend from its selector string.

    ``exhaustive``, ``exact-dp``, ``sa`` or ``remote:<url>``; ``params`` are
    backend keyword arguments (``sweeps``, ``beta_start``, ... for ``sa``).
    """
    params = dict(params or {})
    try:
        if backend == "exhaustive":
            return ExhaustiveSampler(cost=cost, **params)
        if backend == "exact-dp":
            return ExactDPSampler(cost=cost, **params)
        if backend == "sa":
            return SimulatedAnnealingSampler(AnnealSchedule(**params), cost=cost)
        if backend.startswith("remote:"):
            url = backend[len("remote:"):]
            if not url:
                raise ValueError("remote backend needs a URL: remote:<url>")
            return RemoteSampler(url, **params)
    except TypeError as exc:
        raise ValueError(f"invalid parameters for backend {backend!r}: {exc}") from None
    raise ValueError(f"unknown backend {backend!r}; choose from {', '.join(BACKENDS)}")

__all__ = [
    "AnnealSchedule",
    "BACKENDS",
    "COST_PRESETS",
    "ConditioningPlan",
    "CostModel",
    "DEFAULT_NUM_READS",
    "ExactDPSampler",
    "ExhaustiveSampler",
    "RemoteSampler",
    "SampleSet",
    "Sampler",
    "SimulatedAnnealingSampler",
    "TILING_PRESETS",
    "TilingPlan",
    "aggregate_reads",
    "all_states",
    "anneal_reads",
    "batch_sample",
    "check_sample_set",
    "conditioning_plan",
    "cost_preset",
    "exact_ground_state",
    "exhaustive_optimum",
    "ground_energy",
    "make_sampler",
    "remote_sample",
    "sa_sample",
    "start_server",
]
