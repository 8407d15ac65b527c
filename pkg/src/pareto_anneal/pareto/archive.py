"""Online non-dominated archive.

Besides the current front, the archive remembers when every point entered
and (if evicted) left, measured in caller-defined ticks. That is enough to
reconstruct the front after any tick, so hypervolume time series can be
recomputed later against a reference chosen after the run.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DimensionMismatchError, InstanceFormatError
from ..fileio import atomic_write_text
from .dominance import as_points, mutual_nondomination_violations, nondominated_filter


class InsertResult(enum.Enum):
    ACCEPTED = "accepted"
    DOMINATED = "dominated"
    DUPLICATE = "duplicate"


@dataclass(frozen=True, eq=False)
class FrontPoint:
    objectives: np.ndarray
    state: np.ndarray | None = None


class FrontArchive:
    """Mutually non-dominated, deduplicated objective vectors with witness states.

    Args:
        num_objectives: M.
        num_nodes: width of witness states; inferred from the first insert if
            omitted. States are optional (``None`` rows are stored as zeros).
        track_history: keep evicted points and their lifetimes.
    """

    def __init__(self, num_objectives: int, num_nodes: int | None = None, track_history: bool = False):
        self.num_objectives = int(num_objectives)
        self.num_nodes = num_nodes
        self.track_history = track_history
        self.insert_count = 0
        self.tick = 0
        self._objs = np.zeros((0, self.num_objectives))
        self._states = np.zeros((0, num_nodes or 0), dtype=np.int8)
        self._born = np.zeros(0, dtype=np.int64)
        self._dead_objs: list[np.ndarray] = []
        self._dead_born: list[np.ndarray] = []
        self._dead_died: list[np.ndarray] = []

    def __len__(self) -> int:
        return int(self._objs.shape[0])

    @property
    def objectives(self) -> np.ndarray:
        return self._objs.copy()

    @property
    def states(self) -> np.ndarray:
        return self._states.copy()

    def points(self) -> list[FrontPoint]:
        return [FrontPoint(o.copy(), s.copy()) for o, s in zip(self._objs, self._states)]

    def _coerce_states(self, states, count: int) -> np.ndarray:
        if states is None:
            return np.zeros((count, self.num_nodes or 0), dtype=np.int8)
        s = np.asarray(states, dtype=np.int8).reshape(count, -1)
        if self.num_nodes is None:
            self.num_nodes = s.shape[1]
            self._states = np.zeros((len(self), self.num_nodes), dtype=np.int8)
        elif s.shape[1] != self.num_nodes:
            raise DimensionMismatchError(f"state width {s.shape[1]} does not match {self.num_nodes}")
        return s

    def _bury(self, mask: np.ndarray) -> None:
        if self.track_history and mask.any():
            self._dead_objs.append(self._objs[mask])
            self._dead_born.append(self._born[mask])
            self._dead_died.append(np.full(int(mask.sum()), self.tick, dtype=np.int64))

    def insert(self, objectives, state=None, count: int = 1) -> InsertResult:
        """Offer one point; evicts everything it dominates if accepted."""
        c = as_points(np.reshape(objectives, (1, -1)), self.num_objectives)[0]
        s = self._coerce_states(None if state is None else np.reshape(state, (1, -1)), 1)
        self.insert_count += int(count)
        if len(self):
            ge = np.all(self._objs >= c, axis=1)
            if ge.any():
                if np.any(np.all(self._objs[ge] == c, axis=1)):
                    return InsertResult.DUPLICATE
                return InsertResult.DOMINATED
            evict = np.all(self._objs <= c, axis=1)
            if evict.any():
                self._bury(evict)
                keep = ~evict
                self._objs, self._states, self._born = self._objs[keep], self._states[keep], self._born[keep]
        self._objs = np.concatenate([self._objs, c[None, :]])
        self._states = np.concatenate([self._states, s])
        self._born = np.append(self._born, self.tick)
        return InsertResult.ACCEPTED

    def insert_batch(self, objectives, states=None, counts=None) -> int:
        """Offer many points at once; same final front as inserting them in order.

        Returns the number of newly accepted points.
        """
        c = as_points(objectives, self.num_objectives)
        n = c.shape[0]
        s = self._coerce_states(states, n)
        self.insert_count += int(n if counts is None else np.sum(counts))
        if n == 0:
            return 0
        old = len(self)
        merged = np.concatenate([self._objs, c])
        keep = nondominated_filter(merged)
        old_keep = keep[keep < old]
        new_keep = keep[keep >= old] - old
        if self.track_history and old_keep.size < old:
            dead = np.ones(old, dtype=bool)
            dead[old_keep] = False
            self._bury(dead)
        self._objs = np.concatenate([self._objs[old_keep], c[new_keep]])
        self._states = np.concatenate([self._states[old_keep], s[new_keep]])
        self._born = np.concatenate([self._born[old_keep], np.full(new_keep.size, self.tick, dtype=np.int64)])
        return int(new_keep.size)

    def front_at(self, tick: int) -> np.ndarray:
        """Objective vectors that were in the archive right after ``tick``."""
        if not self.track_history:
            raise RuntimeError("archive was built without track_history")
        parts = [self._objs[self._born <= tick]]
        for objs, born, died in zip(self._dead_objs, self._dead_born, self._dead_died):
            alive = (born <= tick) & (died > tick)
            if alive.any():
                parts.append(objs[alive])
        return np.concatenate(parts) if parts else np.zeros((0, self.num_objectives))

    def check_invariants(self) -> list[str]:
        return mutual_nondomination_violations(self._objs)

    def sorted_order(self) -> np.ndarray:
        """Row order sorting the front lexicographically by objective vector."""
        return np.lexsort(self._objs.T[::-1]) if len(self) else np.zeros(0, dtype=np.int64)

    @classmethod
    def from_points(cls, objectives, states=None, track_history: bool = False) -> FrontArchive:
        c = as_points(objectives)
        arch = cls(c.shape[1], None if states is None else np.asarray(states).reshape(c.shape[0], -1).shape[1],
                   track_history=track_history)
        arch.insert_batch(c, states)
        return arch


def front_records(objectives, states=None) -> list[dict]:
    """Front file entries sorted lexicographically by objective vector."""
    objs = as_points(objectives)
    order = np.lexsort(objs.T[::-1]) if objs.shape[0] else []
    recs = []
    for i in order:
        rec = {"objectives": [float(x) for x in objs[i]]}
        if states is not None:
            rec["state"] = [int(x) for x in states[i]]
        recs.append(rec)
    return recs


def dumps_front(objectives, states=None) -> str:
    return json.dumps(front_records(objectives, states), allow_nan=False) + "\n"


def save_front(path: str | Path, objectives, states=None) -> None:
    atomic_write_text(path, dumps_front(objectives, states))


def parse_front(doc) -> tuple[np.ndarray, np.ndarray | None]:
    """Objective vectors and (if every entry has one) witness states."""
    if not isinstance(doc, list):
        raise InstanceFormatError("front file must hold a JSON array")
    if not doc:
        return np.zeros((0, 0)), None
    objs, states = [], []
    for i, rec in enumerate(doc):
        if not isinstance(rec, dict) or "objectives" not in rec:
            raise InstanceFormatError(f"entry {i}: expected an object with 'objectives'")
        objs.append(rec["objectives"])
        states.append(rec.get("state"))
    try:
        arr = np.array(objs, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise InstanceFormatError(f"objective vectors are not numeric: {exc}") from exc
    if arr.size and (arr.ndim != 2 or not np.all(np.isfinite(arr))):
        raise InstanceFormatError("objective vectors must be finite and of equal length")
    if any(s is None for s in states):
        return arr, None
    try:
        st = np.array(states, dtype=np.int64)
    except (TypeError, ValueError) as exc:
        raise InstanceFormatError(f"states are not numeric: {exc}") from exc
    if st.ndim != 2 or not np.all((st == 1) | (st == -1)):
        raise InstanceFormatError("states must be equal-length lists of -1/+1")
    return arr, st.astype(np.int8)


def load_front(path: str | Path) -> tuple[np.ndarray, np.ndarray | None]:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: not valid JSON ({exc})") from exc
    return parse_front(doc)
