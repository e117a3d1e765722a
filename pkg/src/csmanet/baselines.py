"""Back-of-the-envelope throughput baseline from maximum independent sets
of the contention graph (here: the sensing graph)."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import GuardRailError
from .topology import NetworkSpec, SensingGraph

MAX_LINKS = 20


@dataclass(frozen=True)
class BoeReport:
    """Normalized per-link throughput n_i / n over maximum independent sets."""

    per_link: tuple[float, ...]
    mis_count: int
    membership_counts: tuple[int, ...]


def maximum_independent_sets(g: SensingGraph) -> tuple[tuple[int, ...], ...]:
    """All independent sets of maximum cardinality, brute force over
    subsets, in canonical (sorted) order."""
    k = g.link_count
    if k > MAX_LINKS:
        raise GuardRailError(f"BOE guard rail: needs K <= {MAX_LINKS}, got {k}")
    edge_masks = [0] * k
    for a, b in g.edges:
        edge_masks[a] |= 1 << b
        edge_masks[b] |= 1 << a

    best_size = 0
    best: list[int] = []
    for mask in range(1 << k):
        ok = True
        m = mask
        while m:
            v = (m & -m).bit_length() - 1
            if edge_masks[v] & mask:
                ok = False
                break
            m &= m - 1
        if not ok:
            continue
        size = mask.bit_count()
        if size > best_size:
            best_size = size
            best = [mask]
        elif size == best_size:
            best.append(mask)

    sets = sorted(
        tuple(v for v in range(k) if mask >> v & 1) for mask in best
    )
    return tuple(sets)


def boe_throughput(spec: NetworkSpec) -> BoeReport:
    """Per-link value = fraction of maximum independent sets containing
    the link."""
    sets = maximum_independent_sets(spec.sensing)
    counts = [0] * spec.link_count
    for s in sets:
        for v in s:
            counts[v] += 1
    total = len(sets)
    return BoeReport(
        per_link=tuple(c / total for c in counts),
        mis_count=total,
        membership_counts=tuple(counts),
    )
