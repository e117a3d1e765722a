"""Multi-BSS uplink networks under universal frequency reuse.

Stations are grouped by (associated BSS, set of APs that hear them); each
group becomes one aggregated link whose access probability is that of any
member attempting. Sensing between groups goes through AP feedback, so
two groups contend iff some AP hears both, and a group interferes with
another iff the latter's own AP hears it. The expanded interference graph
is always contained in the sensing graph, so the initiation-only
throughput path applies.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import TopologyError
from .topology import NetworkSpec, build_network, q_from_window


@dataclass(frozen=True)
class PhyParams:
    """Air-time constants used to convert a payload size into a packet
    duration in slots."""

    payload_bits: float
    mac_header_bits: float
    data_rate: float  # bits/s
    sifs_s: float
    ack_bits: float
    basic_rate: float  # bits/s
    difs_s: float
    phy_preamble_s: float
    slot_s: float

    def __post_init__(self):
        for name, v in self.__dict__.items():
            if v <= 0:
                raise TopologyError(f"PhyParams.{name} must be positive, got {v}")


# Reference profile documented in the README: an 18432-bit payload lands
# at 26.49 slots and rounds up to tau = 27.
DEFAULT_PHY = PhyParams(
    payload_bits=18432,
    mac_header_bits=288,
    data_rate=125e6,
    sifs_s=16e-6,
    ack_bits=112,
    basic_rate=6e6,
    difs_s=34e-6,
    phy_preamble_s=20e-6,
    slot_s=9e-6,
)


def tau_from_phy(p: PhyParams) -> int:
    """Packet duration in slots: on-air time of payload, MAC header, SIFS,
    ACK, DIFS and preamble, divided by the slot length, rounded up."""
    on_air = (
        (p.payload_bits + p.mac_header_bits) / p.data_rate
        + p.sifs_s
        + p.ack_bits / p.basic_rate
        + p.difs_s
        + p.phy_preamble_s
    )
    return math.ceil(on_air / p.slot_s)


@dataclass(frozen=True)
class BssGroup:
    """Stations of one BSS heard by one specific AP set."""

    bss: int
    heard_by: frozenset[int]
    n: int
    q: float
    window: int | None = None

    def __post_init__(self):
        if self.bss not in self.heard_by:
            raise TopologyError(
                f"group ({self.bss},{sorted(self.heard_by)}): own AP must hear the group")
        if self.n < 1:
            raise TopologyError(f"group ({self.bss},{sorted(self.heard_by)}): n must be >= 1")
        if not (0.0 <= self.q <= 1.0):
            raise TopologyError(f"group ({self.bss},{sorted(self.heard_by)}): q out of [0,1]")

    def label(self) -> str:
        return f"G{self.bss}_{{{','.join(map(str, sorted(self.heard_by)))}}}"


@dataclass(frozen=True)
class MultiBssSpec:
    bss_count: int
    groups: tuple[BssGroup, ...]
    tau: int
    mode: str = "rts_cts"

    def __post_init__(self):
        keys = [(g.bss, g.heard_by) for g in self.groups]
        if len(set(keys)) != len(keys):
            raise TopologyError("duplicate (bss, heard_by) group keys")
        for g in self.groups:
            if not (1 <= g.bss <= self.bss_count):
                raise TopologyError(f"group BSS id {g.bss} out of range")
            if not g.heard_by <= set(range(1, self.bss_count + 1)):
                raise TopologyError(
                    f"group ({g.bss},{sorted(g.heard_by)}): unknown AP id")
        if self.tau < 1:
            raise TopologyError(f"tau < 1 (got {self.tau})")


def parse_multibss(text: str) -> MultiBssSpec:
    """Parse a multi-BSS document: bss_count, tau or phy constants, and
    groups with per-group station count and W or q."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise TopologyError(f"syntax error at line {e.lineno}, column {e.colno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise TopologyError("multi-BSS document must be an object")
    if "bss_count" not in doc or "groups" not in doc:
        raise TopologyError("missing 'bss_count' or 'groups'")
    if "tau" in doc:
        tau = doc["tau"]
        if not isinstance(tau, int):
            raise TopologyError("'tau' must be an integer")
    elif "phy" in doc:
        tau = tau_from_phy(PhyParams(**doc["phy"]))
    else:
        raise TopologyError("give 'tau' or 'phy'")
    groups = []
    for entry in doc["groups"]:
        if "W" in entry:
            q = q_from_window(entry["W"])
            window = entry["W"]
        elif "q" in entry:
            q = float(entry["q"])
            window = None
        else:
            raise TopologyError(f"group {entry}: missing 'q' or 'W'")
        groups.append(BssGroup(
            bss=entry["bss"],
            heard_by=frozenset(entry["heard_by"]),
            n=entry["n"],
            q=q,
            window=window,
        ))
    return MultiBssSpec(
        bss_count=doc["bss_count"],
        groups=tuple(groups),
        tau=tau,
        mode=doc.get("mode", "rts_cts"),
    )


def load_multibss(path: str) -> MultiBssSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_multibss(fh.read())


def aggregated_q(q: float, n: int) -> float:
    """Probability that at least one of n stations attempts."""
    return 1.0 - (1.0 - q) ** n


def expand_groups(m: MultiBssSpec) -> NetworkSpec:
    """One aggregated link per group. Sensing between groups whose AP sets
    intersect; interference from a group into every group whose own AP
    hears it. The result always satisfies G_I within G_S."""
    sensing = []
    interference = []
    for a, ga in enumerate(m.groups):
        for b, gb in enumerate(m.groups):
            if a == b:
                continue
            if a < b and ga.heard_by & gb.heard_by:
                sensing.append((a, b))
            if ga.bss in gb.heard_by:
                interference.append((b, a))  # gb can corrupt reception at AP of ga
    spec = build_network(
        link_count=len(m.groups),
        q=[aggregated_q(g.q, g.n) for g in m.groups],
        tau=m.tau,
        sensing=sensing,
        interference=interference,
        mode=m.mode,
        link_ids=[g.label() for g in m.groups],
    )
    for a, b in spec.interference.edges:
        assert spec.sensing.has_edge(a, b), "AP feedback must imply sensing"
    return spec


def node_level_network(m: MultiBssSpec) -> tuple[NetworkSpec, tuple[int, ...]]:
    """Expand to one link per station (for simulation). Returns the
    network and a station -> group-index map."""
    owner: list[int] = []
    for gi, g in enumerate(m.groups):
        owner.extend([gi] * g.n)
    k = len(owner)
    sensing = []
    interference = []
    for u in range(k):
        gu = m.groups[owner[u]]
        for v in range(u + 1, k):
            gv = m.groups[owner[v]]
            if gu.heard_by & gv.heard_by:
                sensing.append((u, v))
        for v in range(k):
            if v != u and m.groups[owner[v]].bss in gu.heard_by:
                interference.append((u, v))  # u is heard at v's AP
    ids = []
    counters: dict[int, int] = {}
    for u in range(k):
        gi = owner[u]
        counters[gi] = counters.get(gi, 0) + 1
        ids.append(f"{m.groups[gi].label()}#{counters[gi]}")
    spec = build_network(
        link_count=k,
        q=[m.groups[gi].q for gi in owner],
        tau=m.tau,
        sensing=sensing,
        interference=interference,
        mode=m.mode,
        link_ids=ids,
        windows=[m.groups[gi].window for gi in owner],
    )
    return spec, tuple(owner)


def per_node_throughput(group: BssGroup, lambda_aggregate: float) -> float:
    """Split an aggregated link's throughput across the group's stations:
    conditioned on a successful aggregated transmission, exactly one
    station transmitted."""
    if group.n == 1:
        return lambda_aggregate
    q, n = group.q, group.n
    prefactor = q * (1.0 - q) ** (n - 1) / (1.0 - (1.0 - q) ** n)
    return prefactor * lambda_aggregate


def total_throughput(m: MultiBssSpec, per_node: list[float] | tuple[float, ...]) -> float:
    """Network-wide sum of station throughputs."""
    return sum(g.n * v for g, v in zip(m.groups, per_node))


@dataclass(frozen=True)
class MultiBssReport:
    per_group_aggregate: tuple[float, ...]
    per_node: tuple[float, ...]
    total: float
    method: str


def analyze_multibss(m: MultiBssSpec) -> MultiBssReport:
    """Aggregated-link analysis through the initiation-only path, split
    back into per-station and total throughput."""
    from .throughput import throughput_rtscts

    spec = expand_groups(m)
    report = throughput_rtscts(spec)
    per_node = tuple(
        per_node_throughput(g, lam) for g, lam in zip(m.groups, report.per_link)
    )
    return MultiBssReport(
        per_group_aggregate=report.per_link,
        per_node=per_node,
        total=total_throughput(m, per_node),
        method="rts_cts",
    )
