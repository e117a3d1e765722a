"""Maximal cliques of the sensing graph and the logical-channel layout.

Each maximal clique acts as one logical channel; a link occupies every
channel it belongs to while transmitting, and may start only when all of
them are idle.
"""

from __future__ import annotations

from dataclasses import dataclass

from .topology import NetworkSpec, SensingGraph


def maximal_cliques(g: SensingGraph) -> tuple[tuple[int, ...], ...]:
    """All maximal cliques of the sensing graph, each sorted internally,
    the sequence sorted lexicographically. Isolated vertices yield
    singleton cliques. Bron-Kerbosch with a max-degree pivot, which keeps
    dense graphs (large cliques) tractable without changing the output."""
    adj = [set() for _ in range(g.link_count)]
    for a, b in g.edges:
        adj[a].add(b)
        adj[b].add(a)

    found: list[tuple[int, ...]] = []

    def expand(r: set[int], p: set[int], x: set[int]) -> None:
        if not p and not x:
            found.append(tuple(sorted(r)))
            return
        pivot = max(p | x, key=lambda u: len(p & adj[u]))
        for v in sorted(p - adj[pivot]):
            expand(r | {v}, p & adj[v], x & adj[v])
            p = p - {v}
            x = x | {v}

    expand(set(), set(range(g.link_count)), set())
    return tuple(sorted(found))


@dataclass(frozen=True)
class ChannelLayout:
    """Logical channels (one per maximal clique) and per-link channel sets."""

    channels: tuple[tuple[int, ...], ...]
    membership: tuple[frozenset[int], ...]  # U_i: channels containing link i

    @property
    def n_channels(self) -> int:
        return len(self.channels)

    @property
    def link_count(self) -> int:
        return len(self.membership)


def build_layout(spec: NetworkSpec) -> ChannelLayout:
    """Layout with N = number of maximal cliques, canonical channel order."""
    channels = maximal_cliques(spec.sensing)
    membership = tuple(
        frozenset(c for c, links in enumerate(channels) if i in links)
        for i in range(spec.link_count)
    )
    return ChannelLayout(channels=channels, membership=membership)
