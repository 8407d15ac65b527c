import dataclasses

import numpy as np
import pytest
from conftest import random_instance
from hypothesis import given
from hypothesis import strategies as st
from oracles import every_state, quadratic_front

from pareto_anneal.errors import ReferenceFrontImproved
from pareto_anneal.instance import MultiObjectiveInstance, generate_gaussian_weights, generate_heavy_hex
from pareto_anneal.objectives import evaluate_all
from pareto_anneal.pareto import hypervolume
from pareto_anneal.pipeline import (
    Reference,
    RunConfig,
    TimeSeries,
    aggregate,
    band_csv,
    build_reference_front,
    draw_weight_vectors,
    read_record,
    record_text,
    run_sweep,
    series_from_events,
    step_values,
    true_pareto_front,
)
from pareto_anneal.samplers import SampleSet


def as_set(points):
    return {tuple(float(x) for x in p) for p in np.asarray(points)}


def brute_front(inst):
    return quadratic_front(evaluate_all(inst, every_state(inst.num_nodes)))


class OneStateSampler:
    """Returns the all-up state for every read; enough to count calls."""

    def sample(self, problem, num_reads, seed):
        s = np.ones((1, problem.num_nodes), dtype=np.int8)
        return SampleSet(s, np.asarray([problem.energy(s[0])]), np.array([num_reads]), 0.0)


SMALL = RunConfig(label="t", backend="sa", backend_params={"sweeps": 10}, num_weight_vectors=60,
                  num_reads=50, tiling_k=16, repetitions=2, seed=3)


def test_exhaustive_sweep_recovers_true_front():
    inst = generate_gaussian_weights(generate_heavy_hex(1, 1), 3, 5)
    cfg = RunConfig(backend="exhaustive", num_weight_vectors=4, num_reads=2 ** 12, tiling_k=2)
    res = run_sweep(inst, cfg, 0)
    want = brute_front(inst)
    assert as_set(res.archive.objectives) == want
    ref = Reference.from_front(build_reference_front(inst, results=[res]).objectives)
    series = res.score(ref)
    assert series.foms[-1] == 1.0
    assert as_set(true_pareto_front(inst).objectives) == want


def test_call_count_and_model_time():
    inst = generate_gaussian_weights(generate_heavy_hex(2, 3), 3, 0)
    cfg = RunConfig(num_weight_vectors=5000, num_reads=1000, tiling_k=96, cost_preset="advantage2")
    res = run_sweep(inst, cfg, 0, sampler=OneStateSampler())
    assert res.num_calls == 53
    assert res.times[-1] == pytest.approx(53 * 0.199, rel=1e-12)
    assert np.all(np.diff(res.times) > 0)
    assert res.states_offered == 5000 * 1000


def test_zero_weight_instance_single_point():
    g = generate_heavy_hex(1, 1)
    inst = MultiObjectiveInstance(g, np.zeros((g.num_edges, 3)))
    res = run_sweep(inst, SMALL, 0)
    assert len(res.archive) == 1
    assert res.series.hv_max == 0.0
    assert np.all(res.series.foms == 1.0)


@given(st.integers(min_value=0, max_value=1000))
def test_sweep_invariants(seed):
    inst = random_instance(np.random.default_rng(seed), 10, 3, extra=3)
    res = run_sweep(inst, RunConfig(backend_params={"sweeps": 5}, num_weight_vectors=30, num_reads=20,
                                    tiling_k=7, seed=seed), 0)
    s = res.series
    assert s.violations() == []
    assert len(s) == 5
    assert res.states_offered == 30 * 20
    assert res.archive.check_invariants() == []
    # each witness state reproduces its objective vector
    np.testing.assert_array_equal(evaluate_all(inst, res.archive.states), res.archive.objectives)


def test_sweep_deterministic_and_worker_independent():
    inst = generate_gaussian_weights(generate_heavy_hex(1, 2), 3, 1)
    a = run_sweep(inst, SMALL, 1, workers=1)
    b = run_sweep(inst, SMALL, 1, workers=4)
    ref = Reference.from_front(a.archive.objectives)
    ta = record_text(inst, SMALL, {1: a}, ref)
    tb = record_text(inst, SMALL, {1: b}, Reference.from_front(b.archive.objectives))
    assert ta == tb
    assert record_text(inst, SMALL, {1: a}, ref, diagnostics=True) != ta


def test_weight_vectors_predrawn_and_per_repetition():
    a = draw_weight_vectors(SMALL, 3, 0)
    b = draw_weight_vectors(dataclasses.replace(SMALL, tiling_k=5), 3, 0)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, draw_weight_vectors(SMALL, 3, 1))
    assert a.shape == (60, 3)


def test_default_vector_counts():
    cfg = RunConfig()
    assert cfg.vectors_for(3) == 5000 and cfg.vectors_for(4) == 20000
    assert (cfg.num_reads, cfg.repetitions) == (1000, 5)


@pytest.mark.parametrize("kwargs", [{"num_reads": 0}, {"repetitions": 0}, {"tiling_k": 0},
                                    {"num_weight_vectors": 0}, {"seed": -1}, {"cost_preset": None}])
def test_run_config_validation(kwargs):
    with pytest.raises(ValueError):
        RunConfig(**kwargs)


def test_run_config_round_trip():
    d = SMALL.to_dict()
    assert RunConfig.from_dict(d).to_dict() == d
    with pytest.raises(ValueError):
        RunConfig(cost_preset="bogus").cost_model()


def test_reference_front_exact_for_small_instances():
    inst = generate_gaussian_weights(generate_heavy_hex(1, 1), 2, 9)
    ref = build_reference_front(inst, [dataclasses.replace(SMALL, repetitions=1)])
    assert as_set(ref.objectives) == brute_front(inst)


def test_reference_front_single_run_and_monotone():
    inst = generate_gaussian_weights(generate_heavy_hex(1, 2), 3, 2)
    r0 = run_sweep(inst, SMALL, 0)
    r1 = run_sweep(inst, dataclasses.replace(SMALL, label="u", seed=9), 0)
    one = build_reference_front(inst, results=[r0], exhaustive_max_nodes=0)
    assert as_set(one.objectives) == as_set(r0.archive.objectives)
    two = build_reference_front(inst, results=[r0, r1], exhaustive_max_nodes=0)
    ref1, ref2 = Reference.from_front(one.objectives), Reference.from_front(two.objectives)
    assert hypervolume(two.objectives, ref1.point) >= ref1.hv_max
    assert two.check_invariants() == []
    assert len(ref2.front) == len(two)
    with pytest.raises(ValueError):
        build_reference_front(inst, [])


def test_reference_improved_is_raised_with_front():
    inst = generate_gaussian_weights(generate_heavy_hex(1, 2), 3, 2)
    res = run_sweep(inst, SMALL, 0)
    weak = Reference.from_front(res.archive.objectives[:2] - 5.0)
    with pytest.raises(ReferenceFrontImproved) as info:
        res.score(weak)
    improved = info.value.improved_front
    assert improved is not None and as_set(res.archive.objectives) <= as_set(improved)


def ts(times, foms, hv_max=10.0):
    t = np.asarray(times, float)
    f = np.asarray(foms, float)
    return TimeSeries(t, np.ones_like(t, dtype=int), hv_max + 1 - f, f, hv_max)


def test_aggregate_examples():
    one = ts([1, 2, 3], [5, 3, 1])
    band = aggregate([one])
    assert np.array_equal(band.mean, one.foms) and np.array_equal(band.lo, band.hi)
    b = aggregate([ts([1, 2], [2, 2]), ts([1, 2], [4, 4])])
    assert b.mean.tolist() == [3, 3] and b.lo.tolist() == [2, 2] and b.hi.tolist() == [4, 4]
    with pytest.raises(ValueError):
        aggregate([])


def test_aggregate_step_interpolation():
    a, b = ts([1, 3], [5, 2]), ts([2, 4], [6, 1])
    band = aggregate([a, b])
    assert band.times.tolist() == [1, 2, 3, 4]
    assert step_values(b, band.times).tolist() == [11, 6, 6, 1]
    assert band.hi.tolist() == [11, 6, 6, 2]


def test_aggregate_band_contains_runs():
    inst = generate_gaussian_weights(generate_heavy_hex(1, 2), 3, 4)
    runs = [run_sweep(inst, dataclasses.replace(SMALL, repetitions=5), rep) for rep in range(5)]
    ref = Reference.from_front(build_reference_front(inst, results=runs, exhaustive_max_nodes=0).objectives)
    series = [r.score(ref) for r in runs]
    band = aggregate(series)
    for s in series:
        v = step_values(s, band.times)
        assert np.all(band.lo <= v) and np.all(v <= band.hi)
    assert np.all(np.diff(band.mean) <= 1e-12)
    csv = band_csv(band, "sa").splitlines()
    assert csv[0] == "# label=sa" and csv[1] == "time_s,mean_fom,min_fom,max_fom"
    assert len(csv) == 2 + band.times.size


def test_record_round_trip():
    inst = generate_gaussian_weights(generate_heavy_hex(1, 2), 3, 4)
    runs = {rep: run_sweep(inst, SMALL, rep) for rep in range(2)}
    ref = Reference.from_front(build_reference_front(inst, results=list(runs.values()),
                                                     exhaustive_max_nodes=0).objectives)
    for r in runs.values():
        r.score(ref)
    header, events, fronts = read_record(record_text(inst, SMALL, runs, ref))
    assert header["diagnostics"] is None
    assert header["reference"]["front_id"] == ref.front_id
    assert header["config"] == SMALL.to_dict()
    assert len(events) == 2 * runs[0].num_calls and len(fronts) == 2
    s = series_from_events(events, 1, ref.hv_max)
    assert s.foms.tolist() == runs[1].series.foms.tolist()
    assert s.times.tolist() == runs[1].series.times.tolist()
    with pytest.raises(ValueError):
        read_record('{"type": "event"}\n')
