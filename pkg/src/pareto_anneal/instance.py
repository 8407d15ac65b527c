"""Multi-objective weighted max-cut instances.

An instance is a sparse graph plus an ``|E| x M`` matrix of edge weights, one
column per objective. Heavy-hex lattices are built from rows of hexagonal
cells in which every cell edge is subdivided by a degree-2 node.

Instances serialize to a small JSON document; weights are written with
Python's shortest round-trip float repr so save -> load -> save is
byte-identical.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import InstanceFormatError

FORMAT_VERSION = 1
# Weights are drawn with numpy's PCG64 bit generator and its ziggurat
# standard-normal sampler, row-major over (edge, objective).
PRNG_ID = "numpy-pcg64-standard_normal-v1"

# (rows, cols) giving N=42 nodes and 46 edges; found by find_heavy_hex_shape.
PAPER_PRESET = (2, 3)
PAPER_NUM_NODES = 42
PAPER_NUM_EDGES = 46


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph on nodes ``0..num_nodes-1``.

    Edges are oriented ``u < v`` and sorted lexicographically on
    construction. Nothing else is enforced here so that malformed data can
    still be represented and reported by :func:`validate_graph`.
    """

    num_nodes: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        canon = tuple(sorted((min(int(u), int(v)), max(int(u), int(v))) for u, v in self.edges))
        object.__setattr__(self, "num_nodes", int(self.num_nodes))
        object.__setattr__(self, "edges", canon)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_array(self) -> np.ndarray:
        """Edges as an ``(|E|, 2)`` int64 array."""
        arr = np.array(self.edges, dtype=np.int64).reshape(-1, 2)
        arr.setflags(write=False)
        return arr

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.num_nodes, dtype=np.int64)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def adjacency(self) -> list[list[tuple[int, int]]]:
        """Per-node list of ``(neighbour, edge_index)`` pairs."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.num_nodes)]
        for e, (u, v) in enumerate(self.edges):
            adj[u].append((v, e))
            adj[v].append((u, e))
        return adj

    def components(self) -> list[list[int]]:
        """Connected components, each sorted, ordered by smallest node."""
        adj = self.adjacency()
        seen = [False] * self.num_nodes
        comps = []
        for root in range(self.num_nodes):
            if seen[root]:
                continue
            seen[root] = True
            comp = [root]
            queue = deque([root])
            while queue:
                u = queue.popleft()
                for v, _ in adj[u]:
                    if not seen[v]:
                        seen[v] = True
                        comp.append(v)
                        queue.append(v)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return self.num_nodes > 0 and len(self.components()) == 1

    def cyclomatic_number(self) -> int:
        """``|E| - N + (number of components)``: size of a feedback edge set."""
        return self.num_edges - self.num_nodes + len(self.components())

    def same_as(self, other: Graph) -> bool:
        return self.num_nodes == other.num_nodes and self.edges == other.edges


@dataclass(frozen=True, eq=False)
class MultiObjectiveInstance:
    """Graph plus per-edge, per-objective weights (row ``e``, column ``k``)."""

    graph: Graph
    weights: np.ndarray
    seed: int = 0
    label: str = ""
    prng_id: str = PRNG_ID

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        if w.ndim == 1 and self.graph.num_edges == 0:
            w = w.reshape(0, -1)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def num_nodes(self) -> int:
        return self.graph.num_nodes

    @property
    def num_objectives(self) -> int:
        return int(self.weights.shape[1]) if self.weights.ndim == 2 else 0


def _cell_vertices(cx: int, cy: int) -> list[tuple[int, int]]:
    # pointy-top hexagon on an integer grid; adjacent cells share exact keys
    return [(cx, cy + 2), (cx + 1, cy + 1), (cx + 1, cy - 1),
            (cx, cy - 2), (cx - 1, cy - 1), (cx - 1, cy + 1)]


def heavy_hex_cells(rows: int, cols: int) -> list[tuple[int, int]]:
    """Cell centres: even rows hold ``cols`` cells, odd rows ``max(cols-1, 1)``
    cells nested between them (shifted half a cell to the right)."""
    cells = []
    for r in range(rows):
        count = cols if r % 2 == 0 else max(cols - 1, 1)
        for j in range(count):
            cells.append((2 * j + (r % 2), -3 * r))
    return cells


def generate_heavy_hex(rows: int, cols: int) -> Graph:
    """Heavy-hexagonal lattice with ``rows`` rows of hexagonal cells.

    Every edge of the underlying hexagonal lattice is subdivided by a
    degree-2 node, so degree-3 nodes only occur where three cell edges meet.
    Nodes are numbered row-major from the top-left corner.

    Args:
        rows: number of cell rows, >= 1.
        cols: cells in even rows, >= 1; odd rows hold ``max(cols - 1, 1)``.

    Returns:
        A connected simple graph with maximum degree 3 whose cyclomatic
        number equals the number of cells.
    """
    if rows < 1 or cols < 1:
        raise ValueError(f"rows and cols must be >= 1, got ({rows}, {cols})")
    hex_edges: set[tuple[tuple[int, int], tuple[int, int]]] = set()
    for cx, cy in heavy_hex_cells(rows, cols):
        ring = _cell_vertices(cx, cy)
        for a in range(6):
            p, q = ring[a], ring[(a + 1) % 6]
            hex_edges.add((min(p, q), max(p, q)))

    # doubled coordinates so that edge midpoints are integral too
    keys: set[tuple[int, int]] = set()
    sub_edges = []
    for p, q in hex_edges:
        pp, qq = (2 * p[0], 2 * p[1]), (2 * q[0], 2 * q[1])
        mid = (p[0] + q[0], p[1] + q[1])
        keys.update((pp, qq, mid))
        sub_edges.append((pp, mid))
        sub_edges.append((mid, qq))
    order = sorted(keys, key=lambda k: (-k[1], k[0]))
    index = {k: i for i, k in enumerate(order)}
    edges = [(index[a], index[b]) for a, b in sub_edges]
    return Graph(len(order), tuple(edges))


def find_heavy_hex_shape(num_nodes: int, num_edges: int, max_extent: int = 6) -> tuple[int, int] | None:
    """First ``(rows, cols)`` in ``[1, max_extent]^2`` matching the counts."""
    for rows in range(1, max_extent + 1):
        for cols in range(1, max_extent + 1):
            g = generate_heavy_hex(rows, cols)
            if g.num_nodes == num_nodes and g.num_edges == num_edges:
                return rows, cols
    return None


def paper_shape_graph() -> Graph:
    return generate_heavy_hex(*PAPER_PRESET)


def generate_gaussian_weights(graph: Graph, num_objectives: int, seed: int, label: str = "") -> MultiObjectiveInstance:
    """Attach i.i.d. standard-normal weights to every (edge, objective) pair.

    The draw is a pure function of ``(graph, num_objectives, seed)``.
    """
    if num_objectives < 2:
        raise ValueError(f"need at least two objectives, got {num_objectives}")
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    rng = np.random.Generator(np.random.PCG64(seed))
    weights = rng.standard_normal((graph.num_edges, num_objectives))
    return MultiObjectiveInstance(graph, weights, seed=int(seed), label=label)


def validate_graph(graph: Graph) -> list[str]:
    problems = []
    if graph.num_nodes < 1:
        problems.append(f"num_nodes: must be positive, got {graph.num_nodes}")
    seen = set()
    for e, (u, v) in enumerate(graph.edges):
        if u == v:
            problems.append(f"self-loop: edge {e} ({u}, {v})")
        if u < 0 or v >= graph.num_nodes:
            problems.append(f"endpoint out of range: edge {e} ({u}, {v}) with N={graph.num_nodes}")
        if (u, v) in seen:
            problems.append(f"duplicate edge: ({u}, {v}) at edge {e}")
        seen.add((u, v))
    return problems


def validate_instance(instance: MultiObjectiveInstance) -> list[str]:
    """Describe every violated invariant; an empty list means well formed."""
    problems = validate_graph(instance.graph)
    w = instance.weights
    if instance.num_objectives < 2:
        problems.append(f"num_objectives: must be >= 2, got {instance.num_objectives}")
    if w.ndim != 2 or w.shape[0] != instance.graph.num_edges:
        problems.append(f"weights shape: expected ({instance.graph.num_edges}, M), got {w.shape}")
        return problems
    for e, k in zip(*np.nonzero(~np.isfinite(w))):
        problems.append(f"non-finite weight: edge {int(e)}, objective {int(k)} ({w[e, k]!r})")
    return problems


def instance_to_dict(instance: MultiObjectiveInstance) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "label": instance.label,
        "num_nodes": instance.num_nodes,
        "edges": [list(e) for e in instance.graph.edges],
        "num_objectives": instance.num_objectives,
        "weights": [[float(x) for x in row] for row in instance.weights],
        "seed": int(instance.seed),
        "prng_id": instance.prng_id,
    }


def instance_from_dict(doc: dict, validate: bool = True) -> MultiObjectiveInstance:
    try:
        if doc["format_version"] != FORMAT_VERSION:
            raise InstanceFormatError(f"unsupported format_version {doc['format_version']!r}")
        graph = Graph(int(doc["num_nodes"]), tuple(tuple(e) for e in doc["edges"]))
        m = int(doc["num_objectives"])
        weights = np.array(doc["weights"], dtype=np.float64).reshape(len(doc["edges"]), m)
        inst = MultiObjectiveInstance(graph, weights, seed=int(doc.get("seed", 0)),
                                      label=str(doc.get("label", "")),
                                      prng_id=str(doc.get("prng_id", PRNG_ID)))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InstanceFormatError):
            raise
        raise InstanceFormatError(f"malformed instance document: {exc}") from exc
    if validate:
        problems = validate_instance(inst)
        if problems:
            raise InstanceFormatError("; ".join(problems))
    return inst


def dumps_instance(instance: MultiObjectiveInstance) -> str:
    # allow_nan=False keeps the output strict JSON
    return json.dumps(instance_to_dict(instance), allow_nan=False) + "\n"


def save_instance(instance: MultiObjectiveInstance, path: str | Path) -> None:
    from .fileio import atomic_write_text

    atomic_write_text(path, dumps_instance(instance))


def load_instance(path: str | Path, validate: bool = True) -> MultiObjectiveInstance:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: not valid JSON ({exc})") from exc
    return instance_from_dict(doc, validate=validate)


__all__ = [
    "FORMAT_VERSION",
    "PRNG_ID",
    "PAPER_PRESET",
    "Graph",
    "MultiObjectiveInstance",
    "generate_heavy_hex",
    "find_heavy_hex_shape",
    "paper_shape_graph",
    "generate_gaussian_weights",
    "validate_graph",
    "validate_instance",
    "instance_to_dict",
    "instance_from_dict",
    "dumps_instance",
    "save_instance",
    "load_instance",
]
