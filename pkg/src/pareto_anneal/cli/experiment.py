"""Run every strategy of an experiment and persist the artifacts.

Output layout under the experiment's output directory::

    config.json               resolved experiment snapshot
    instance.json             the instance actually used
    reference_front.json      front fixing r and HV_max
    records/<label>.jsonl     run record per strategy
    aggregate/<label>.csv     mean/min/max figure-of-merit band
    hv_report.json            final hypervolumes per strategy and repetition
    plot.svg                  figure of merit against modeled time

If a run beats a supplied reference front, ``reference_front.improved.json``
is written, all runs are re-scored against it and the outcome is flagged.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import BackendError, ReferenceFrontImproved
from ..fileio import atomic_write_json, atomic_write_text
from ..instance import dumps_instance
from ..pareto import load_front, save_front
from ..pareto.dominance import nondominated_filter
from ..pipeline import Reference, SweepResult, aggregate, band_csv, build_reference_front, record_text, run_sweep
from .config import ExperimentConfig

log = logging.getLogger(__name__)


@dataclass
class ExperimentOutcome:
    output_dir: Path
    results: dict[str, dict[int, SweepResult]]
    reference: Reference | None
    reference_improved: bool = False
    backend_error: BackendError | None = None
    files: list[Path] = field(default_factory=list)


def _write_records(cfg: ExperimentConfig, instance, results, reference: Reference, out: Path,
                   diagnostics: bool, files: list[Path]) -> None:
    for strat in cfg.strategies:
        runs = results.get(strat.label)
        if not runs:
            continue
        path = out / "records" / f"{strat.label}.jsonl"
        atomic_write_text(path, record_text(instance, strat, runs, reference, diagnostics=diagnostics))
        files.append(path)


def _score_all(results, reference: Reference) -> None:
    for runs in results.values():
        for res in runs.values():
            res.score(reference)


def run_experiment(cfg: ExperimentConfig, workers: int = 1, diagnostics: bool = True,
                   output_dir: Path | None = None) -> ExperimentOutcome:
    """Execute all strategies and repetitions and write every artifact.

    Backend failures stop the experiment; the repetitions finished so far
    are still written (scored against the union of their fronts) and the
    error is returned in the outcome rather than raised.
    """
    out = Path(output_dir) if output_dir is not None else cfg.output_path()
    instance = cfg.load_instance()
    outcome = ExperimentOutcome(out, {}, None)
    files = outcome.files
    atomic_write_json(out / "config.json", cfg.to_dict(), indent=2)
    atomic_write_text(out / "instance.json", dumps_instance(instance))
    files += [out / "config.json", out / "instance.json"]

    results = outcome.results
    try:
        for strat in cfg.strategies:
            results[strat.label] = {}
            for rep in range(strat.repetitions):
                log.info("strategy %s repetition %d", strat.label, rep)
                results[strat.label][rep] = run_sweep(instance, strat, rep, workers=workers)
    except BackendError as exc:
        outcome.backend_error = exc
        finished = [r for runs in results.values() for r in runs.values()]
        if finished:
            ref = Reference.from_front(build_reference_front(instance, results=finished, exhaustive_max_nodes=-1)
                                       .objectives)
            _score_all(results, ref)
            outcome.reference = ref
            _write_records(cfg, instance, results, ref, out, diagnostics, files)
        return outcome

    finished = [r for runs in results.values() for r in runs.values()]
    if cfg.reference_front is not None:
        front, _ = load_front(cfg.resolve(cfg.reference_front))
        reference = Reference.from_front(front)
        try:
            _score_all(results, reference)
        except ReferenceFrontImproved:
            merged = np.concatenate([reference.front] + [r.archive.objectives for r in finished])
            merged = merged[nondominated_filter(merged)]
            improved_path = out / "reference_front.improved.json"
            save_front(improved_path, merged)
            files.append(improved_path)
            outcome.reference_improved = True
            reference = Reference.from_front(merged)
            _score_all(results, reference)
        ref_states = None
    else:
        ref_archive = build_reference_front(instance, results=finished,
                                            exhaustive_max_nodes=cfg.exhaustive_front_max_nodes)
        reference = Reference.from_front(ref_archive.objectives)
        ref_states = ref_archive.states
        _score_all(results, reference)
    outcome.reference = reference

    ref_path = out / "reference_front.json"
    if ref_states is not None:
        save_front(ref_path, ref_archive.objectives, ref_states)
    else:
        save_front(ref_path, reference.front)
    files.append(ref_path)
    _write_records(cfg, instance, results, reference, out, diagnostics, files)

    report = {"reference_front_id": reference.front_id, "reference_point": [float(x) for x in reference.point],
              "hv_max": float(reference.hv_max), "reference_improved": outcome.reference_improved,
              "strategies": {}}
    csv_paths = []
    for strat in cfg.strategies:
        runs = results[strat.label]
        series = [runs[rep].series for rep in sorted(runs)]
        path = out / "aggregate" / f"{strat.label}.csv"
        atomic_write_text(path, band_csv(aggregate(series), strat.label))
        files.append(path)
        csv_paths.append(path)
        report["strategies"][strat.label] = {
            "final_hypervolume": [float(s.hypervolumes[-1]) for s in series],
            "final_figure_of_merit": [float(s.foms[-1]) for s in series],
            "final_front_size": [len(runs[rep].archive) for rep in sorted(runs)],
            "total_model_time_s": [float(s.times[-1]) for s in series],
        }
    atomic_write_json(out / "hv_report.json", report, indent=2)
    files.append(out / "hv_report.json")

    if cfg.plot.get("enabled", True):
        from .plotting import plot_bands, read_band_csv

        svg = out / "plot.svg"
        plot_bands([read_band_csv(p) for p in csv_paths], svg, title=cfg.plot.get("title", ""))
        files.append(svg)
    return outcome
