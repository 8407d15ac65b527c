"""JSON-over-HTTP client for an external sampling service, plus a small server.

Request body::

    {"format_version": 1, "num_nodes": N, "edges": [[u, v], ...],
     "couplings": [...], "num_reads": R, "seed": S}

Response body::

    {"states": [[±1, ...], ...], "energies": [...], "occurrences": [...],
     "timing": {"programming_s": ..., "per_sample_s": ...}}

Responses are never trusted: shapes are checked and every energy is
re-evaluated locally.
"""

from __future__ import annotations

import json
import os
import threading
import urllib.error
import urllib.request
from http import HTTPStatus
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from ..errors import EnergyValidationError, MalformedResponseError, TransportError
from ..instance import Graph
from ..objectives import ScalarIsing
from .base import COST_PRESETS, SampleSet, Sampler, check_num_reads

WIRE_FORMAT_VERSION = 1
TOKEN_ENV = "PARETO_ANNEAL_REMOTE_TOKEN"
REMOTE_ENERGY_RTOL = 1e-6


def encode_request(problem: ScalarIsing, num_reads: int, seed: int) -> dict:
    return {
        "format_version": WIRE_FORMAT_VERSION,
        "num_nodes": problem.num_nodes,
        "edges": [list(e) for e in problem.graph.edges],
        "couplings": [float(x) for x in problem.couplings],
        "num_reads": int(num_reads),
        "seed": int(seed),
    }


def decode_request(doc: dict) -> tuple[ScalarIsing, int, int]:
    if doc.get("format_version") != WIRE_FORMAT_VERSION:
        raise ValueError(f"unsupported format_version {doc.get('format_version')!r}")
    graph = Graph(int(doc["num_nodes"]), tuple(tuple(e) for e in doc["edges"]))
    return ScalarIsing(graph, np.asarray(doc["couplings"], dtype=np.float64)), int(doc["num_reads"]), int(doc["seed"])


def encode_response(ss: SampleSet, programming_s: float, per_sample_s: float) -> dict:
    return {
        "states": ss.states.astype(int).tolist(),
        "energies": [float(x) for x in ss.energies],
        "occurrences": [int(x) for x in ss.occurrences],
        "timing": {"programming_s": float(programming_s), "per_sample_s": float(per_sample_s)},
    }


def decode_response(problem: ScalarIsing, doc, num_reads: int) -> SampleSet:
    """Validate a response document and turn it into a :class:`SampleSet`.

    Raises:
        MalformedResponseError: missing keys, ragged arrays, bad spins or counts.
        EnergyValidationError: a reported energy is off by more than 1e-6 relative.
    """
    if not isinstance(doc, dict):
        raise MalformedResponseError("response is not a JSON object")
    try:
        raw_states, raw_energies, raw_occ = doc["states"], doc["energies"], doc["occurrences"]
        timing = doc["timing"]
        programming_s = float(timing["programming_s"])
        per_sample_s = float(timing["per_sample_s"])
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedResponseError(f"missing or invalid field: {exc}") from exc
    if not (isinstance(raw_states, list) and isinstance(raw_energies, list) and isinstance(raw_occ, list)):
        raise MalformedResponseError("states, energies and occurrences must be arrays")
    if not len(raw_states) == len(raw_energies) == len(raw_occ):
        raise MalformedResponseError(
            f"array lengths differ: {len(raw_states)} states, {len(raw_energies)} energies, "
            f"{len(raw_occ)} occurrences")
    n = problem.num_nodes
    if any(not isinstance(row, list) or len(row) != n for row in raw_states):
        raise MalformedResponseError(f"every state must be a list of {n} spins")
    try:
        states = np.array(raw_states, dtype=np.int64).reshape(len(raw_states), n)
        energies = np.array(raw_energies, dtype=np.float64)
        occ = np.array(raw_occ, dtype=np.int64)
    except (TypeError, ValueError) as exc:
        raise MalformedResponseError(f"non-numeric entries: {exc}") from exc
    if states.size and not np.all((states == 1) | (states == -1)):
        raise MalformedResponseError("states must contain only -1 and +1")
    if np.any(occ < 1):
        raise MalformedResponseError("occurrences must be positive")
    if int(occ.sum()) != num_reads:
        raise MalformedResponseError(f"occurrences sum to {int(occ.sum())}, requested {num_reads}")
    states = states.astype(np.int8)
    recomputed = np.asarray(problem.energy(states)).reshape(-1)
    err = np.abs(recomputed - energies)
    bad = ~(err <= REMOTE_ENERGY_RTOL * np.maximum(1.0, np.abs(recomputed)))
    if np.any(bad):
        i = int(np.argmax(np.where(bad, err, -1.0)))
        raise EnergyValidationError(
            f"{int(bad.sum())} reported energies disagree with local evaluation "
            f"(state {i}: reported {energies[i]!r}, recomputed {recomputed[i]!r})")
    return SampleSet(states, recomputed, occ, programming_s + num_reads * per_sample_s)


def _token(auth: str | None) -> str | None:
    return auth if auth is not None else os.environ.get(TOKEN_ENV)


def remote_sample(endpoint: str, problem: ScalarIsing, num_reads: int, seed: int = 0,
                  auth: str | None = None, timeout: float = 60.0) -> SampleSet:
    """POST one problem to ``endpoint`` and return the validated samples.

    ``auth`` defaults to the ``PARETO_ANNEAL_REMOTE_TOKEN`` environment
    variable and is sent as a bearer token.
    """
    num_reads = check_num_reads(num_reads)
    body = json.dumps(encode_request(problem, num_reads, seed)).encode()
    headers = {"Content-Type": "application/json"}
    token = _token(auth)
    if token:
        headers["Authorization"] = f"Bearer {token}"
    req = urllib.request.Request(endpoint, data=body, headers=headers, method="POST")
    try:
        with urllib.request.urlopen(req, timeout=timeout) as resp:
            payload = resp.read()
    except urllib.error.HTTPError as exc:
        raise TransportError(f"{endpoint}: HTTP {exc.code} {exc.reason}") from exc
    except (urllib.error.URLError, OSError) as exc:
        reason = getattr(exc, "reason", exc)
        raise TransportError(f"{endpoint}: {reason}") from exc
    try:
        doc = json.loads(payload)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedResponseError(f"{endpoint}: response is not JSON ({exc})") from exc
    return decode_response(problem, doc, num_reads)


class RemoteSampler:
    def __init__(self, endpoint: str, auth: str | None = None, timeout: float = 60.0):
        self.endpoint = endpoint
        self.auth = auth
        self.timeout = timeout

    def sample(self, problem: ScalarIsing, num_reads: int, seed: int) -> SampleSet:
        return remote_sample(self.endpoint, problem, num_reads, seed, self.auth, self.timeout)


def make_handler(sampler: Sampler, token: str | None = None, programming_s: float | None = None,
                 per_sample_s: float | None = None) -> type[BaseHTTPRequestHandler]:
    """Request handler serving ``sampler`` over the wire protocol.

    Timing metadata defaults to the sampler's own cost model when it has one.
    """
    cost = getattr(sampler, "cost", None) or COST_PRESETS["advantage2"]
    prog = cost.programming_time if programming_s is None else programming_s
    per = cost.per_sample_time if per_sample_s is None else per_sample_s

    class Handler(BaseHTTPRequestHandler):
        def log_message(self, format, *args):  # silence default stderr logging
            pass

        def _reply(self, status: int, doc: dict) -> None:
            data = json.dumps(doc).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def do_POST(self):
            if token and self.headers.get("Authorization") != f"Bearer {token}":
                self._reply(HTTPStatus.UNAUTHORIZED, {"error": "unauthorized"})
                return
            length = int(self.headers.get("Content-Length", 0))
            try:
                problem, num_reads, seed = decode_request(json.loads(self.rfile.read(length)))
            except (ValueError, KeyError, TypeError) as exc:
                self._reply(HTTPStatus.BAD_REQUEST, {"error": str(exc)})
                return
            ss = sampler.sample(problem, num_reads, seed)
            self._reply(HTTPStatus.OK, encode_response(ss, prog, per))

    return Handler


def start_server(sampler: Sampler, host: str = "127.0.0.1", port: int = 0,
                 token: str | None = None) -> tuple[ThreadingHTTPServer, str]:
    """Serve ``sampler`` on a background thread; returns the server and its URL."""
    server = ThreadingHTTPServer((host, port), make_handler(sampler, token))
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    url = f"http://{server.server_address[0]}:{server.server_address[1]}/sample"
    return server, url
