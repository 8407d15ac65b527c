"""Experiment configuration documents and their JSON schema."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from ..instance import (
    MultiObjectiveInstance,
    generate_gaussian_weights,
    generate_heavy_hex,
    load_instance,
    paper_shape_graph,
)
from ..pipeline import RunConfig
from ..samplers.exact import EXHAUSTIVE_MAX_NODES

SCHEMA_VERSION = 1

_COST = {
    "type": "object",
    "properties": {
        "programming_s": {"type": "number", "minimum": 0},
        "anneal_s": {"type": "number", "minimum": 0},
        "readout_s": {"type": "number", "minimum": 0},
    },
    "required": ["programming_s", "anneal_s", "readout_s"],
    "additionalProperties": False,
}

_STRATEGY = {
    "type": "object",
    "properties": {
        "label": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
        "backend": {"type": "string", "minLength": 1},
        "backend_params": {"type": "object"},
        "num_weight_vectors": {"type": ["integer", "null"], "minimum": 1},
        "num_reads": {"type": "integer", "minimum": 1},
        "tiling_k": {"type": "integer", "minimum": 1},
        "cost_preset": {"enum": ["advantage2", "advantage", "custom", None]},
        "cost": _COST,
        "seed": {"type": "integer", "minimum": 0},
        "repetitions": {"type": "integer", "minimum": 1},
        "coupling_range": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    },
    "required": ["label", "backend"],
    "additionalProperties": False,
}

_GENERATE = {
    "type": "object",
    "properties": {
        "preset": {"enum": ["paper"]},
        "rows": {"type": "integer", "minimum": 1},
        "cols": {"type": "integer", "minimum": 1},
        "objectives": {"type": "integer", "minimum": 2},
        "seed": {"type": "integer", "minimum": 0},
        "label": {"type": "string"},
    },
    "required": ["objectives", "seed"],
    "additionalProperties": False,
}

EXPERIMENT_SCHEMA = {
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "instance": {
            "type": "object",
            "properties": {"path": {"type": "string"}, "generate": _GENERATE},
            "minProperties": 1,
            "maxProperties": 1,
            "additionalProperties": False,
        },
        "strategies": {"type": "array", "items": _STRATEGY, "minItems": 1},
        "output_dir": {"type": "string"},
        "reference_front": {"type": ["string", "null"]},
        "exhaustive_front_max_nodes": {"type": "integer", "minimum": 0, "maximum": EXHAUSTIVE_MAX_NODES},
        "plot": {
            "type": "object",
            "properties": {"enabled": {"type": "boolean"}, "title": {"type": "string"}},
            "additionalProperties": False,
        },
    },
    "required": ["schema_version", "instance", "strategies"],
    "additionalProperties": False,
}


class ConfigError(ValueError):
    """The experiment document violates the schema or is inconsistent."""


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce an experiment.

    Relative paths are resolved against ``base_dir`` (the config file's
    directory when loaded from disk).
    """

    instance: dict
    strategies: list[RunConfig]
    output_dir: str = "results"
    reference_front: str | None = None
    exhaustive_front_max_nodes: int = 22
    plot: dict = field(default_factory=lambda: {"enabled": True, "title": ""})
    base_dir: Path = Path(".")

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p

    def output_path(self) -> Path:
        return self.resolve(self.output_dir)

    def load_instance(self) -> MultiObjectiveInstance:
        if "path" in self.instance:
            return load_instance(self.resolve(self.instance["path"]))
        return generate_instance(**self.instance["generate"])

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "instance": self.instance,
            "strategies": [_strategy_doc(cfg) for cfg in self.strategies],
            "output_dir": self.output_dir,
            "reference_front": self.reference_front,
            "exhaustive_front_max_nodes": self.exhaustive_front_max_nodes,
            "plot": self.plot,
        }

    @classmethod
    def from_dict(cls, doc: dict, base_dir: Path | str = ".") -> ExperimentConfig:
        try:
            jsonschema.validate(doc, EXPERIMENT_SCHEMA)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"config invalid at {where}: {exc.message}") from None
        labels = [s["label"] for s in doc["strategies"]]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"strategy labels must be unique: {labels}")
        gen = doc["instance"].get("generate")
        if gen is not None:
            check_generate_args(gen)
        strategies = []
        for s in doc["strategies"]:
            s = dict(s)
            if s.get("cost_preset") == "custom":
                if "cost" not in s:
                    raise ConfigError(f"strategy {s['label']!r}: custom cost preset needs a 'cost' object")
            elif "cost" in s and s.get("cost_preset", "advantage2") is not None:
                s.pop("cost")  # a named preset wins over a stale snapshot
            try:
                strategies.append(RunConfig.from_dict(s))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"strategy {s['label']!r}: {exc}") from None
        return cls(
            instance=doc["instance"],
            strategies=strategies,
            output_dir=doc.get("output_dir", "results"),
            reference_front=doc.get("reference_front"),
            exhaustive_front_max_nodes=doc.get("exhaustive_front_max_nodes", 22),
            plot={"enabled": True, "title": "", **doc.get("plot", {})},
            base_dir=Path(base_dir),
        )


def _strategy_doc(cfg: RunConfig) -> dict:
    d = cfg.to_dict()
    if cfg.cost is not None:
        d["cost_preset"] = "custom"
    return d


def check_generate_args(gen: dict) -> None:
    has_shape = "rows" in gen or "cols" in gen
    if gen.get("preset") == "paper" and has_shape:
        raise ConfigError("--preset paper fixes the graph; do not combine it with rows/cols")
    if gen.get("preset") is None and not ("rows" in gen and "cols" in gen):
        raise ConfigError("give either --preset paper or both --rows and --cols")


def generate_instance(objectives: int, seed: int, preset: str | None = None, rows: int | None = None,
                      cols: int | None = None, label: str | None = None) -> MultiObjectiveInstance:
    if preset == "paper":
        graph = paper_shape_graph()
        default_label = f"paper-M{objectives}-s{seed}"
    else:
        graph = generate_heavy_hex(rows, cols)
        default_label = f"heavyhex-{rows}x{cols}-M{objectives}-s{seed}"
    return generate_gaussian_weights(graph, objectives, seed, label if label is not None else default_label)


def load_experiment(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    return ExperimentConfig.from_dict(doc, path.parent)


__all__ = ["ConfigError", "EXPERIMENT_SCHEMA", "ExperimentConfig", "SCHEMA_VERSION",
           "check_generate_args", "generate_instance", "load_experiment"]
