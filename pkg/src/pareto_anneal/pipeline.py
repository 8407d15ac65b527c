"""Weight-vector sweeps, reference fronts, time series and run records.

A sweep pre-draws all weight vectors, scalarizes and auto-scales each one,
samples them ``tiling_k`` at a time, and after every modeled sampler call
offers all returned states to a history-tracking archive. Hypervolumes are
scored afterwards against a reference front that is fixed for the whole
experiment, so curves from different strategies are comparable.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InconsistentReferenceError, ReferenceFrontImproved
from .instance import MultiObjectiveInstance, dumps_instance
from .objectives import autoscale, evaluate_all, sample_weight_vectors, scalarize
from .pareto import FrontArchive, figure_of_merit, front_records, hypervolume, reference_point
from .pareto.dominance import nondominated_filter
from .samplers import COST_PRESETS, CostModel, Sampler, TilingPlan, batch_sample, make_sampler
from .samplers.exact import EXHAUSTIVE_MAX_NODES
from .seeds import derive_seed, substream

RECORD_FORMAT_VERSION = 1
DEFAULT_VECTORS = {3: 5000, 4: 20000}
FALLBACK_VECTORS = 5000


@dataclass(frozen=True)
class RunConfig:
    """One sampling strategy. Execution knobs such as worker count are not part of it."""

    label: str = "sa"
    backend: str = "sa"
    backend_params: dict = field(default_factory=dict)
    num_weight_vectors: int | None = None
    num_reads: int = 1000
    tiling_k: int = 96
    cost_preset: str | None = "advantage2"
    cost: CostModel | None = None
    seed: int = 0
    repetitions: int = 5
    coupling_range: tuple[float, float] = (-2.0, 1.0)

    def __post_init__(self):
        for name in ("num_reads", "tiling_k", "repetitions"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.num_weight_vectors is not None and self.num_weight_vectors < 1:
            raise ValueError(f"num_weight_vectors must be positive, got {self.num_weight_vectors}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")
        if self.cost is None and self.cost_preset is None:
            raise ValueError("give either a cost model or a cost preset")

    def vectors_for(self, num_objectives: int) -> int:
        if self.num_weight_vectors is not None:
            return self.num_weight_vectors
        return DEFAULT_VECTORS.get(num_objectives, FALLBACK_VECTORS)

    def cost_model(self) -> CostModel:
        if self.cost is not None:
            return self.cost
        try:
            return COST_PRESETS[self.cost_preset]
        except KeyError:
            raise ValueError(f"unknown cost preset {self.cost_preset!r}") from None

    def plan(self) -> TilingPlan:
        return TilingPlan(self.tiling_k)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["cost"] = self.cost_model().to_dict()
        d["coupling_range"] = list(self.coupling_range)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> RunConfig:
        d = dict(d)
        cost = d.pop("cost", None)
        if isinstance(cost, dict):
            d["cost"] = CostModel(cost["programming_s"], cost["anneal_s"], cost["readout_s"])
        elif isinstance(cost, CostModel):
            d["cost"] = cost
        if "coupling_range" in d:
            d["coupling_range"] = tuple(d["coupling_range"])
        return cls(**d)


@dataclass(frozen=True, eq=False)
class Reference:
    """Fixed reference front: its componentwise minimum and its hypervolume."""

    front: np.ndarray
    point: np.ndarray
    hv_max: float
    front_id: str

    @classmethod
    def from_front(cls, front) -> Reference:
        front = np.asarray(front, dtype=np.float64)
        front = front[nondominated_filter(front)]
        r = reference_point(front)
        return cls(front, r, hypervolume(front, r), front_id(front))


def front_id(front) -> str:
    """Content hash of a front, independent of point order."""
    text = json.dumps([rec["objectives"] for rec in front_records(front)])
    return "sha256:" + hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """One event per sampler call: cumulative modeled time, front size, HV, figure of merit."""

    times: np.ndarray
    sizes: np.ndarray
    hypervolumes: np.ndarray
    foms: np.ndarray
    hv_max: float

    def __len__(self) -> int:
        return int(self.times.size)

    def violations(self) -> list[str]:
        problems = []
        if np.any(np.diff(self.times) <= 0):
            problems.append("cumulative time is not strictly increasing")
        if np.any(np.diff(self.hypervolumes) < 0):
            problems.append("hypervolume decreases")
        if np.any(np.diff(self.foms) > 0):
            problems.append("figure of merit increases")
        return problems


@dataclass(eq=False)
class SweepResult:
    archive: FrontArchive
    times: np.ndarray
    sizes: np.ndarray
    weight_vectors: np.ndarray
    states_offered: int
    wall_seconds: float
    series: TimeSeries | None = None

    @property
    def num_calls(self) -> int:
        return int(self.times.size)

    def score(self, reference: Reference) -> TimeSeries:
        """Hypervolume and figure of merit after every call against ``reference``.

        Raises:
            ReferenceFrontImproved: the run beat the reference front.
        """
        hvs = np.array([hypervolume(self.archive.front_at(t), reference.point) for t in range(self.num_calls)])
        foms = []
        for hv in hvs:
            try:
                foms.append(figure_of_merit(hv, reference.hv_max))
            except InconsistentReferenceError as exc:
                improved = np.concatenate([reference.front, self.archive.objectives])
                improved = improved[nondominated_filter(improved)]
                raise ReferenceFrontImproved(str(exc), improved, float(hv)) from exc
        self.series = TimeSeries(self.times.copy(), self.sizes.copy(), hvs, np.array(foms), reference.hv_max)
        return self.series


def draw_weight_vectors(config: RunConfig, num_objectives: int, repetition: int) -> np.ndarray:
    return sample_weight_vectors(num_objectives, config.vectors_for(num_objectives),
                                 substream(config.seed, repetition, 0))


def run_sweep(instance: MultiObjectiveInstance, config: RunConfig, repetition: int = 0,
              reference: Reference | None = None, workers: int = 1,
              sampler: Sampler | None = None) -> SweepResult:
    """One repetition of the weight-vector sweep.

    Weight vectors and sampler seeds come from substreams of
    ``(config.seed, repetition)``. Without ``reference`` the run is scored
    against its own final front.
    """
    wall0 = time.perf_counter()
    m = instance.num_objectives
    cost = config.cost_model()
    sampler = sampler or make_sampler(config.backend, config.backend_params, cost)
    weights = draw_weight_vectors(config, m, repetition)
    sample_seed = derive_seed(config.seed, repetition, 1)
    plan = config.plan()
    lo, hi = config.coupling_range
    archive = FrontArchive(m, instance.num_nodes, track_history=True)
    times, sizes = [], []
    elapsed = 0.0
    for call, group in enumerate(plan.groups(len(weights))):
        problems = [autoscale(scalarize(instance, weights[i]), lo, hi) for i in group]
        sets = batch_sample(problems, config.num_reads, sample_seed, TilingPlan(len(problems)), cost,
                            sampler, workers=workers, index_offset=group.start)
        elapsed += sets[0].timing
        states = np.concatenate([ss.states for ss in sets])
        counts = np.concatenate([ss.occurrences for ss in sets])
        archive.tick = call
        archive.insert_batch(evaluate_all(instance, states), states, counts)
        times.append(elapsed)
        sizes.append(len(archive))
    result = SweepResult(archive, np.array(times), np.array(sizes), weights, archive.insert_count,
                         time.perf_counter() - wall0)
    result.score(reference or Reference.from_front(archive.objectives))
    return result


def _all_states_chunk(n: int, start: int, stop: int) -> np.ndarray:
    codes = np.arange(start, stop, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(n - 1, dtype=np.int64)[None, :]) & 1
    states = np.ones((codes.size, n), dtype=np.int8)
    states[:, 1:] = 2 * bits - 1
    return states


def true_pareto_front(instance: MultiObjectiveInstance, max_nodes: int = EXHAUSTIVE_MAX_NODES,
                      chunk_bits: int = 16) -> FrontArchive:
    """Exact Pareto front by enumerating every state with spin 0 = +1.

    The objectives are invariant under a global flip, so half the states
    suffice. Cost grows as ``2**N``; practical up to N of about 22.
    """
    n = instance.num_nodes
    if n > max_nodes:
        from .errors import CapacityError

        raise CapacityError(f"exhaustive front capped at N={max_nodes}, got N={n}")
    archive = FrontArchive(instance.num_objectives, n)
    total = 1 << max(n - 1, 0)
    step = 1 << chunk_bits
    for start in range(0, total, step):
        states = _all_states_chunk(n, start, min(total, start + step))
        archive.insert_batch(evaluate_all(instance, states), states)
    return archive


def build_reference_front(instance: MultiObjectiveInstance, strategies: list[RunConfig] | None = None,
                          results: list[SweepResult] | None = None,
                          exhaustive_max_nodes: int = EXHAUSTIVE_MAX_NODES,
                          workers: int = 1) -> FrontArchive:
    """Union of final fronts across strategies and repetitions, re-filtered.

    Runs the strategies unless their ``results`` are supplied. For
    ``N <= exhaustive_max_nodes`` the exact front is merged in as well.
    """
    if results is None:
        if not strategies:
            raise ValueError("need at least one strategy or result")
        results = [run_sweep(instance, cfg, rep, workers=workers)
                   for cfg in strategies for rep in range(cfg.repetitions)]
    ref = FrontArchive(instance.num_objectives, instance.num_nodes)
    for res in results:
        ref.insert_batch(res.archive.objectives, res.archive.states)
    if instance.num_nodes <= exhaustive_max_nodes:
        exact = true_pareto_front(instance, exhaustive_max_nodes)
        ref.insert_batch(exact.objectives, exact.states)
    return ref


@dataclass(frozen=True, eq=False)
class Band:
    times: np.ndarray
    mean: np.ndarray
    lo: np.ndarray
    hi: np.ndarray


def step_values(series: TimeSeries, grid: np.ndarray) -> np.ndarray:
    """Figure of merit carried forward onto ``grid``; before the first call the
    archive is empty, so the value is ``hv_max + 1``."""
    idx = np.searchsorted(series.times, grid, side="right") - 1
    vals = np.where(idx >= 0, series.foms[np.clip(idx, 0, None)], series.hv_max + 1.0)
    return vals


def aggregate(series: list[TimeSeries]) -> Band:
    """Mean and pointwise min/max of the figure of merit on the union of event times."""
    if not series:
        raise ValueError("aggregate needs at least one time series")
    grid = np.unique(np.concatenate([s.times for s in series]))
    values = np.stack([step_values(s, grid) for s in series])
    return Band(grid, values.mean(axis=0), values.min(axis=0), values.max(axis=0))


def band_csv(band: Band, label: str | None = None) -> str:
    lines = []
    if label is not None:
        lines.append(f"# label={label}")
    lines.append("time_s,mean_fom,min_fom,max_fom")
    for t, a, b, c in zip(band.times, band.mean, band.lo, band.hi):
        lines.append(f"{float(t)!r},{float(a)!r},{float(b)!r},{float(c)!r}")
    return "\n".join(lines) + "\n"


def instance_digest(instance: MultiObjectiveInstance) -> str:
    return "sha256:" + hashlib.sha256(dumps_instance(instance).encode()).hexdigest()[:16]


def record_lines(instance: MultiObjectiveInstance, config: RunConfig, results: dict[int, SweepResult],
                 reference: Reference, diagnostics: bool = False) -> list[str]:
    """A run record as JSON lines: header, then events, then final fronts.

    Everything except the optional ``diagnostics`` field is a pure function
    of the inputs.
    """
    reps = sorted(results)
    header = {
        "type": "header",
        "format_version": RECORD_FORMAT_VERSION,
        "label": config.label,
        "instance": {"label": instance.label, "digest": instance_digest(instance),
                     "num_nodes": instance.num_nodes, "num_edges": instance.graph.num_edges,
                     "num_objectives": instance.num_objectives},
        "config": config.to_dict(),
        "repetitions": reps,
        "reference": {"front_id": reference.front_id, "num_points": int(reference.front.shape[0]),
                      "reference_point": [float(x) for x in reference.point],
                      "hv_max": float(reference.hv_max)},
        "summary": [{"rep": rep, "num_calls": results[rep].num_calls,
                     "states_offered": int(results[rep].states_offered),
                     "final_front_size": len(results[rep].archive)} for rep in reps],
        "diagnostics": ({"wall_seconds": {str(rep): results[rep].wall_seconds for rep in reps}}
                        if diagnostics else None),
    }
    lines = [json.dumps(header)]
    for rep in reps:
        s = results[rep].series
        for i in range(len(s)):
            lines.append(json.dumps({"type": "event", "rep": rep, "call": i, "time_s": float(s.times[i]),
                                     "archive_size": int(s.sizes[i]), "hypervolume": float(s.hypervolumes[i]),
                                     "fom": float(s.foms[i])}))
    for rep in reps:
        arch = results[rep].archive
        lines.append(json.dumps({"type": "front", "rep": rep,
                                 "points": front_records(arch.objectives, arch.states)}))
    return lines


def record_text(*args, **kwargs) -> str:
    return "\n".join(record_lines(*args, **kwargs)) + "\n"


def read_record(text: str) -> tuple[dict, list[dict], list[dict]]:
    """Split a record into (header, events, fronts)."""
    docs = [json.loads(line) for line in text.splitlines() if line.strip()]
    if not docs or docs[0].get("type") != "header":
        raise ValueError("run record must start with a header line")
    return (docs[0], [d for d in docs if d.get("type") == "event"],
            [d for d in docs if d.get("type") == "front"])


def series_from_events(events: list[dict], rep: int, hv_max: float) -> TimeSeries:
    ev = [e for e in events if e["rep"] == rep]
    return TimeSeries(np.array([e["time_s"] for e in ev]), np.array([e["archive_size"] for e in ev]),
                      np.array([e["hypervolume"] for e in ev]), np.array([e["fom"] for e in ev]), hv_max)
