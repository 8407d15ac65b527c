"""``pareto-anneal`` command-line entry point.

Exit codes: 0 success, 2 invalid flags/config/input, 3 I/O failure,
4 reference front improved (improved front written), 5 backend failure
(finished records kept).
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from pathlib import Path

import numpy as np

from ..errors import BackendError, InconsistentReferenceError, ParetoAnnealError
from ..fileio import atomic_write_json
from ..instance import dumps_instance, load_instance
from ..objectives import evaluate_all
from ..pareto import figure_of_merit, hypervolume, parse_front, reference_point, save_front
from ..pareto.dominance import nondominated_filter
from ..pipeline import RunConfig
from ..samplers import CostModel
from .config import ConfigError, ExperimentConfig, check_generate_args, generate_instance, load_experiment
from .plotting import CsvFormatError, plot_bands, read_band_csv

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_REFERENCE_IMPROVED = 4
EXIT_BACKEND = 5

log = logging.getLogger("pareto_anneal")


class UsageError(ValueError):
    pass


def _instance_flags(p: argparse.ArgumentParser, seed_flag: str) -> None:
    p.add_argument("--preset", choices=["paper"], help="paper-sized heavy-hex graph (N=42, 46 edges)")
    p.add_argument("--rows", type=int, help="heavy-hex rows")
    p.add_argument("--cols", type=int, help="heavy-hex columns")
    p.add_argument("--objectives", type=int, default=3, help="number of objectives M (default 3)")
    p.add_argument(seed_flag, type=int, default=0, dest="instance_seed", help="weight-generation seed")
    p.add_argument("--label", dest="instance_label", help="instance label")


def _strategy_flags(p: argparse.ArgumentParser, multi_backend: bool) -> None:
    if multi_backend:
        p.add_argument("--backend", action="append", required=True,
                       help="backend to compare (repeatable): exhaustive, exact-dp, sa or remote:<url>")
    else:
        p.add_argument("--backend", help="backend: exhaustive, exact-dp, sa or remote:<url>")
    p.add_argument("--backend-param", action="append", default=[], metavar="KEY=VALUE",
                   help="backend parameter, VALUE parsed as JSON; prefix KEY with LABEL. to target "
                        "one strategy (repeatable)")
    p.add_argument("--seed", type=int, help="master seed of the sweep")
    p.add_argument("--reads", type=int, help="reads per weight vector")
    p.add_argument("--vectors", type=int, help="weight vectors per repetition")
    p.add_argument("--reps", type=int, help="repetitions")
    p.add_argument("--tiling-k", type=int, help="weight vectors sampled per call")
    p.add_argument("--cost-preset", choices=["advantage2", "advantage", "custom"])
    p.add_argument("--programming-time", type=float, help="custom cost: seconds per call")
    p.add_argument("--anneal-time", type=float, help="custom cost: seconds per read")
    p.add_argument("--readout-time", type=float, help="custom cost: seconds per read")
    p.add_argument("--workers", type=int, default=1, help="sampler threads within a call")
    p.add_argument("--no-diagnostics", action="store_true", help="omit wall-clock fields from records")
    p.add_argument("--reference-front", help="fixed reference front file")
    p.add_argument("--exhaustive-front-max-nodes", type=int,
                   help="merge the enumerated true front into the reference up to this N")
    p.add_argument("-o", "--output-dir", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pareto-anneal", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random multi-objective heavy-hex instance")
    _instance_flags(g, "--seed")
    g.add_argument("-o", "--output", help="instance file (default: stdout)")

    r = sub.add_parser("run", help="run an experiment from a config file or flags")
    r.add_argument("config", nargs="?", help="experiment config JSON")
    r.add_argument("--instance", help="instance file (when no config is given)")
    _instance_flags(r, "--instance-seed")
    _strategy_flags(r, multi_backend=False)
    r.add_argument("--no-plot", action="store_true")

    c = sub.add_parser("compare", help="run several backends on one instance and plot them together")
    c.add_argument("--instance", help="instance file")
    _instance_flags(c, "--instance-seed")
    _strategy_flags(c, multi_backend=True)
    c.add_argument("--title", default="")

    f = sub.add_parser("front", help="non-dominated filter of a samples file")
    f.add_argument("samples", help="JSON samples or front file")
    f.add_argument("--instance", help="instance used to evaluate state-only samples")
    f.add_argument("-o", "--output", help="front file (default: stdout)")

    h = sub.add_parser("hv", help="hypervolume of a front against a reference front")
    h.add_argument("front")
    h.add_argument("--reference", required=True, help="reference front file")
    h.add_argument("-o", "--output", help="report file (default: stdout)")

    p = sub.add_parser("plot", help="plot aggregate CSV files as SVG")
    p.add_argument("csv", nargs="+")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--title", default="")
    return parser


def _generate_spec(args) -> dict:
    gen = {"objectives": args.objectives, "seed": args.instance_seed}
    if args.preset:
        gen["preset"] = args.preset
    if args.rows is not None:
        gen["rows"] = args.rows
    if args.cols is not None:
        gen["cols"] = args.cols
    if args.instance_label is not None:
        gen["label"] = args.instance_label
    try:
        check_generate_args(gen)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    return gen


def _parse_params(items: list[str], label: str) -> dict:
    """Parameters for strategy ``label``; ``LABEL.KEY=VALUE`` targets one strategy."""
    params = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"--backend-param expects KEY=VALUE, got {item!r}")
        scope, dot, name = key.rpartition(".")
        if dot:
            if scope != label:
                continue
            key = name
        try:
            params[key] = json.loads(value)
        except json.JSONDecodeError:
            params[key] = value
    return params


def _label_for(backend: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "-", backend.split(":", 1)[0])


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    d = cfg.to_dict()
    d.pop("cost")
    for attr, key in (("seed", "seed"), ("reads", "num_reads"), ("vectors", "num_weight_vectors"),
                      ("reps", "repetitions"), ("tiling_k", "tiling_k")):
        if getattr(args, attr) is not None:
            d[key] = getattr(args, attr)
    if args.backend_param:
        d["backend_params"] = {**d["backend_params"], **_parse_params(args.backend_param, cfg.label)}
    custom = (args.programming_time, args.anneal_time, args.readout_time)
    preset = args.cost_preset
    if preset == "custom" or (preset is None and any(x is not None for x in custom)):
        if any(x is None for x in custom):
            raise UsageError("--cost-preset custom needs --programming-time, --anneal-time and --readout-time")
        d["cost_preset"] = "custom"
        d["cost"] = CostModel(*custom)
    elif preset is not None:
        d["cost_preset"] = preset
        d["cost"] = None
    elif cfg.cost is not None:
        d["cost"] = cfg.cost
    try:
        return RunConfig.from_dict(d)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _experiment_from_flags(args, backends: list[str]) -> ExperimentConfig:
    if args.instance and (args.preset or args.rows is not None or args.cols is not None):
        raise UsageError("--instance cannot be combined with generation flags")
    if args.instance:
        instance = {"path": str(Path(args.instance).resolve())}
    else:
        instance = {"generate": _generate_spec(args)}
    labels = [_label_for(b) for b in backends]
    if len(set(labels)) != len(labels):
        labels = [f"{lab}-{i}" for i, lab in enumerate(labels)]
    strategies = [_apply_overrides(RunConfig(label=lab, backend=b), args) for lab, b in zip(labels, backends)]
    return ExperimentConfig(instance=instance, strategies=strategies,
                            output_dir=args.output_dir or "results", base_dir=Path.cwd())


def _finish_experiment(cfg: ExperimentConfig, args) -> int:
    from .experiment import run_experiment

    if args.reference_front:
        cfg.reference_front = str(Path(args.reference_front).resolve())
    if args.exhaustive_front_max_nodes is not None:
        cfg.exhaustive_front_max_nodes = args.exhaustive_front_max_nodes
    out = Path(args.output_dir) if args.output_dir else None
    outcome = run_experiment(cfg, workers=args.workers, diagnostics=not args.no_diagnostics, output_dir=out)
    if outcome.backend_error is not None:
        print(f"backend failure: {outcome.backend_error}", file=sys.stderr)
        print(f"partial records kept in {outcome.output_dir}", file=sys.stderr)
        return EXIT_BACKEND
    ref = outcome.reference
    print(f"reference front: {ref.front.shape[0]} points, hv_max={ref.hv_max!r}")
    for label, runs in outcome.results.items():
        foms = [float(runs[r].series.foms[-1]) for r in sorted(runs)]
        print(f"{label}: {len(runs)} repetitions, final figure of merit "
              f"mean={float(np.mean(foms))!r} min={min(foms)!r} max={max(foms)!r}")
    print(f"artifacts written to {outcome.output_dir}")
    if outcome.reference_improved:
        print("reference front improved; see reference_front.improved.json", file=sys.stderr)
        return EXIT_REFERENCE_IMPROVED
    return EXIT_OK


def cmd_generate(args) -> int:
    inst = generate_instance(**_generate_spec(args))
    text = dumps_instance(inst)
    if args.output:
        from ..fileio import atomic_write_text

        atomic_write_text(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_run(args) -> int:
    if args.config:
        if args.instance or args.preset or args.rows is not None or args.cols is not None:
            raise UsageError("instance flags cannot be combined with a config file")
        cfg = load_experiment(args.config)
        if args.backend:
            cfg.strategies = [RunConfig.from_dict({**s.to_dict(), "backend": args.backend,
                                                   "cost": s.cost}) for s in cfg.strategies]
        cfg.strategies = [_apply_overrides(s, args) for s in cfg.strategies]
    else:
        cfg = _experiment_from_flags(args, [args.backend or "sa"])
    if args.no_plot:
        cfg.plot = {**cfg.plot, "enabled": False}
    return _finish_experiment(cfg, args)


def cmd_compare(args) -> int:
    cfg = _experiment_from_flags(args, args.backend)
    cfg.plot = {"enabled": True, "title": args.title}
    return _finish_experiment(cfg, args)


def _read_json(path: str):
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: not valid JSON ({exc})") from None


def read_samples(path: str, instance_path: str | None = None) -> tuple[np.ndarray, np.ndarray | None]:
    """Objective vectors (and states if known) from a samples file.

    Accepts a front file (list of ``{"objectives", "state"}`` records) or an
    object ``{"states": [...], "objectives": [...]}`` where either key may be
    missing; state-only samples are evaluated on ``instance_path``.
    """
    doc = _read_json(path)
    if isinstance(doc, list):
        if doc and all(isinstance(r, dict) and "objectives" not in r and "state" in r for r in doc):
            doc = {"states": [r["state"] for r in doc]}
        else:
            return parse_front(doc)
    if not isinstance(doc, dict):
        raise UsageError(f"{path}: expected a JSON array or object")
    states = doc.get("states")
    objs = doc.get("objectives")
    if objs is None:
        if states is None:
            raise UsageError(f"{path}: samples need 'objectives' or 'states'")
        if instance_path is None:
            raise UsageError("state-only samples need --instance to evaluate objectives")
        inst = load_instance(instance_path)
        try:
            st = np.asarray(states, dtype=np.int64)
        except (TypeError, ValueError):
            raise UsageError(f"{path}: states are not numeric") from None
        return evaluate_all(inst, st.reshape(-1, inst.num_nodes) if st.size else st.reshape(0, inst.num_nodes)), \
            st.astype(np.int8)
    records = [{"objectives": o} if states is None else {"objectives": o, "state": s}
               for o, s in zip(objs, states if states is not None else objs)]
    if states is not None and len(states) != len(objs):
        raise UsageError(f"{path}: {len(objs)} objective vectors but {len(states)} states")
    return parse_front(records)


def cmd_front(args) -> int:
    objs, states = read_samples(args.samples, args.instance)
    if objs.shape[0]:
        keep = nondominated_filter(objs)
        objs = objs[keep]
        states = states[keep] if states is not None else None
    if args.output:
        save_front(args.output, objs, states)
    else:
        from ..pareto import dumps_front

        sys.stdout.write(dumps_front(objs, states))
    log.info("%d non-dominated points", objs.shape[0])
    return EXIT_OK


def hv_report(front: np.ndarray, ref_front: np.ndarray) -> dict:
    """Hypervolume of ``front`` scored against ``ref_front``."""
    if ref_front.shape[0] == 0:
        raise UsageError("reference front is empty")
    if front.shape[0] and front.shape[1] != ref_front.shape[1]:
        raise UsageError(f"front has {front.shape[1]} objectives, reference has {ref_front.shape[1]}")
    r = reference_point(ref_front)
    hv_max = hypervolume(ref_front, r)
    hv = hypervolume(front, r) if front.shape[0] else 0.0
    report = {"num_points": int(front.shape[0]), "num_reference_points": int(ref_front.shape[0]),
              "reference_point": [float(x) for x in r], "hypervolume": hv, "hv_max": hv_max,
              "degenerate_reference": bool(hv_max == 0.0), "reference_improved": False}
    try:
        report["figure_of_merit"] = figure_of_merit(hv, hv_max)
    except InconsistentReferenceError:
        report["figure_of_merit"] = None
        report["reference_improved"] = True
    return report


def cmd_hv(args) -> int:
    front, _ = read_samples(args.front)
    ref, _ = read_samples(args.reference)
    report = hv_report(front, ref)
    if args.output:
        atomic_write_json(args.output, report, indent=2)
    else:
        print(json.dumps(report, indent=2))
    return EXIT_REFERENCE_IMPROVED if report["reference_improved"] else EXIT_OK


def cmd_plot(args) -> int:
    plot_bands([read_band_csv(p) for p in args.csv], args.output, title=args.title)
    return EXIT_OK


COMMANDS = {"generate": cmd_generate, "run": cmd_run, "compare": cmd_compare, "front": cmd_front,
            "hv": cmd_hv, "plot": cmd_plot}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except BackendError as exc:
        print(f"error: backend failure: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except (UsageError, ConfigError, CsvFormatError, ParetoAnnealError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
