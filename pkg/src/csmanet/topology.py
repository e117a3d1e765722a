"""Network topology types and the topology document format.

A network is a set of links (transmitter-receiver pairs) indexed densely
from 0, an undirected sensing graph, a directed interference graph, a
per-link access probability q, a packet duration tau in slots, and an
access mode. Documents use user-chosen string ids, mapped to indices in
declaration order.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import TopologyError

MODES = ("basic", "rts_cts")


def q_from_window(window: int) -> float:
    """Access probability equivalent to a uniform {0..W} backoff window,
    q = 2/(W+1), capped at 1 (W=0 maps to 1, not 2)."""
    if window < 0:
        raise TopologyError(f"backoff window must be >= 0, got {window}")
    return min(1.0, 2.0 / (window + 1))


@dataclass(frozen=True)
class SensingGraph:
    """Undirected graph over links; an edge means the two transmitters
    can detect each other's transmissions."""

    link_count: int
    edges: frozenset[tuple[int, int]]  # pairs stored as (min, max)

    def __post_init__(self):
        for a, b in self.edges:
            if a == b:
                raise TopologyError(f"sensing self-loop at link {a}")
            if not (0 <= a < b < self.link_count):
                raise TopologyError(f"sensing edge ({a},{b}) out of range")

    @classmethod
    def from_pairs(cls, link_count: int, pairs: Iterable[tuple[int, int]]) -> "SensingGraph":
        return cls(link_count, frozenset((min(a, b), max(a, b)) for a, b in pairs))

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges

    def neighbors(self, i: int) -> frozenset[int]:
        return frozenset(b if a == i else a for a, b in self.edges if i in (a, b))


@dataclass(frozen=True)
class InterferenceGraph:
    """Directed graph over links; edge (i, j) means link i's transmission
    can corrupt reception at link j. Generally asymmetric."""

    link_count: int
    edges: frozenset[tuple[int, int]]  # (source, target)

    def __post_init__(self):
        for a, b in self.edges:
            if a == b:
                raise TopologyError(f"interference self-loop at link {a}")
            if not (0 <= a < self.link_count and 0 <= b < self.link_count):
                raise TopologyError(f"interference edge ({a},{b}) out of range")

    def interferers(self, i: int) -> frozenset[int]:
        """Links whose transmissions can corrupt link i's reception."""
        return frozenset(a for a, b in self.edges if b == i)

    def targets(self, i: int) -> frozenset[int]:
        return frozenset(b for a, b in self.edges if a == i)


@dataclass(frozen=True)
class NetworkSpec:
    """Immutable, validated network description."""

    sensing: SensingGraph
    interference: InterferenceGraph
    q: tuple[float, ...]
    tau: int
    mode: str = "basic"
    link_ids: tuple[str, ...] = ()
    windows: tuple[int | None, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not self.link_ids:
            object.__setattr__(self, "link_ids",
                               tuple(f"L{i + 1}" for i in range(self.sensing.link_count)))
        if not self.windows:
            object.__setattr__(self, "windows", (None,) * self.sensing.link_count)

    @property
    def link_count(self) -> int:
        return self.sensing.link_count

    def sensing_neighbors(self, i: int) -> frozenset[int]:
        """H_i: links that can sense link i."""
        self._check_link(i)
        return self.sensing.neighbors(i)

    def interferers(self, i: int) -> frozenset[int]:
        """R_i: links whose transmissions can corrupt link i's reception."""
        self._check_link(i)
        return self.interference.interferers(i)

    def _check_link(self, i: int) -> None:
        if not (0 <= i < self.link_count):
            raise TopologyError(f"link index {i} out of range [0, {self.link_count})")

    def spec_hash(self) -> str:
        doc = json.dumps(network_to_document(self), sort_keys=True)
        return hashlib.sha256(doc.encode()).hexdigest()[:16]


def build_network(
    link_count: int,
    q: Sequence[float] | float,
    tau: int,
    sensing: Iterable[tuple[int, int]] = (),
    interference: Iterable[tuple[int, int]] = (),
    mode: str = "basic",
    link_ids: Sequence[str] | None = None,
    windows: Sequence[int | None] | None = None,
) -> NetworkSpec:
    """Construct a NetworkSpec from index-based edge lists and validate it."""
    if isinstance(q, (int, float)):
        q = (float(q),) * link_count
    spec = NetworkSpec(
        sensing=SensingGraph.from_pairs(link_count, sensing),
        interference=InterferenceGraph(link_count, frozenset(interference)),
        q=tuple(float(v) for v in q),
        tau=int(tau),
        mode=mode,
        link_ids=tuple(link_ids) if link_ids else (),
        windows=tuple(windows) if windows else (),
    )
    problems = validate(spec)
    if problems:
        raise TopologyError("; ".join(problems))
    return spec


def validate(spec: NetworkSpec) -> list[str]:
    """Check all NetworkSpec invariants; return violations as data
    (empty list means valid)."""
    problems = []
    k = spec.link_count
    if len(spec.q) != k:
        problems.append(f"expected {k} access probabilities, got {len(spec.q)}")
    for i, v in enumerate(spec.q):
        if not (0.0 <= v <= 1.0):
            problems.append(f"probability out of range at link {i}: q={v}")
    if spec.tau < 1:
        problems.append(f"tau < 1 (got {spec.tau})")
    if spec.mode not in MODES:
        problems.append(f"unknown mode {spec.mode!r}")
    if len(spec.link_ids) != k:
        problems.append(f"expected {k} link ids, got {len(spec.link_ids)}")
    elif len(set(spec.link_ids)) != k:
        problems.append("duplicate link ids")
    if spec.mode == "rts_cts":
        for a, b in sorted(spec.interference.edges):
            if not spec.sensing.has_edge(a, b):
                problems.append(
                    f"G_I not a subgraph of G_S at ({spec.link_ids[a]},{spec.link_ids[b]})")
    return problems


def interference_within_sensing(spec: NetworkSpec) -> bool:
    """True iff every interference edge is also a sensing edge."""
    return all(spec.sensing.has_edge(a, b) for a, b in spec.interference.edges)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise TopologyError(msg)


def network_from_document(doc: dict) -> NetworkSpec:
    """Build a validated NetworkSpec from a parsed topology document."""
    _require(isinstance(doc, dict), "topology document must be an object")
    _require("links" in doc, "missing 'links'")
    links = doc["links"]
    _require(isinstance(links, list) and links, "'links' must be a non-empty list")

    ids: list[str] = []
    qs: list[float] = []
    windows: list[int | None] = []
    for entry in links:
        _require(isinstance(entry, dict) and "id" in entry, "each link needs an 'id'")
        lid = str(entry["id"])
        _require(lid not in ids, f"duplicate link id {lid!r}")
        ids.append(lid)
        if "W" in entry:
            _require("q" not in entry, f"link {lid!r}: give 'q' or 'W', not both")
            w = entry["W"]
            _require(isinstance(w, int) and w >= 0,
                     f"link {lid!r}: W must be a non-negative integer")
            windows.append(w)
            qs.append(q_from_window(w))
        else:
            _require("q" in entry, f"link {lid!r}: missing 'q' (or 'W')")
            qs.append(float(entry["q"]))
            windows.append(None)
    index = {lid: i for i, lid in enumerate(ids)}

    def resolve(pair, kind):
        _require(isinstance(pair, list) and len(pair) == 2,
                 f"{kind} entries must be pairs, got {pair!r}")
        for lid in pair:
            _require(lid in index, f"unknown link reference {lid!r} in {kind}")
        a, b = index[pair[0]], index[pair[1]]
        _require(a != b, f"{kind} self-loop at {pair[0]!r}")
        return a, b

    sensing = [resolve(p, "sensing") for p in doc.get("sensing", [])]
    interference = [resolve(p, "interference") for p in doc.get("interference", [])]

    _require("tau" in doc, "missing 'tau'")
    tau = doc["tau"]
    _require(isinstance(tau, int), "'tau' must be an integer")
    mode = doc.get("mode", "basic")

    return build_network(
        link_count=len(ids),
        q=qs,
        tau=tau,
        sensing=sensing,
        interference=interference,
        mode=mode,
        link_ids=ids,
        windows=windows,
    )


def parse_network_spec(text: str) -> NetworkSpec:
    """Parse a topology document (JSON text) into a validated NetworkSpec.

    Syntax errors report line and column; semantic errors name the
    offending link or edge.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise TopologyError(f"syntax error at line {e.lineno}, column {e.colno}: {e.msg}") from e
    return network_from_document(doc)


def network_to_document(spec: NetworkSpec) -> dict:
    """Canonical document form of a spec. parse(serialize(s)) == s for the
    canonical form (windows are preserved when present, else q is emitted)."""
    links = []
    for i, lid in enumerate(spec.link_ids):
        if spec.windows[i] is not None:
            links.append({"id": lid, "W": spec.windows[i]})
        else:
            links.append({"id": lid, "q": spec.q[i]})
    names = spec.link_ids
    return {
        "links": links,
        "tau": spec.tau,
        "mode": spec.mode,
        "sensing": [[names[a], names[b]] for a, b in sorted(spec.sensing.edges)],
        "interference": [[names[a], names[b]] for a, b in sorted(spec.interference.edges)],
    }


def load_network(path: str) -> NetworkSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_network_spec(fh.read())
