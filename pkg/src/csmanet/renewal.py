"""Markov renewal process over the equivalent multi-channel network.

The internal state ("rich state") maps each transmitting link to its
remaining slots, measured from the current epoch. This resolves which
link occupies a busy channel, which the channel-level state tuple leaves
ambiguous. The channel-level state (busy/idle flags plus start-time
offsets) is recovered by projection.

Epochs are the instants at which some channel changes state. A state
with at least one idle channel holds for exactly one slot (idle periods
last one slot); an all-busy state holds until the earliest transmission
ends. Links eligible in the state at one epoch attempt, independently
with probability q_i, at the next epoch: sensing takes one slot.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .cliques import ChannelLayout, build_layout
from .errors import StateSpaceCapError
from .topology import NetworkSpec

RichState = tuple[tuple[int, int], ...]  # sorted ((link, remaining), ...)

STATE_CAP_ENV = "CSMANET_STATE_CAP"
DEFAULT_STATE_CAP = 200_000

IDLE_STATE: RichState = ()


def state_cap() -> int:
    raw = os.environ.get(STATE_CAP_ENV)
    return int(raw) if raw else DEFAULT_STATE_CAP


def _freeze(active: dict[int, int]) -> RichState:
    return tuple(sorted(active.items()))


def covered_channels(layout: ChannelLayout, state: RichState) -> frozenset[int]:
    busy: set[int] = set()
    for link, _ in state:
        busy |= layout.membership[link]
    return frozenset(busy)


def eligible_links(layout: ChannelLayout, state: RichState) -> tuple[int, ...]:
    """K^mu: links whose channels are all uncovered in the state."""
    busy = covered_channels(layout, state)
    return tuple(
        i for i in range(layout.link_count)
        if not (layout.membership[i] & busy)
    )


def holding_slots(layout: ChannelLayout, state: RichState) -> int:
    """Slots until the next epoch: 1 if any channel is idle, else the
    minimum remaining among active links."""
    if not state:
        return 1
    if len(covered_channels(layout, state)) < layout.n_channels:
        return 1
    return min(r for _, r in state)


def successors(
    layout: ChannelLayout, spec: NetworkSpec, state: RichState
) -> Iterator[tuple[RichState, float]]:
    """One-step transitions: advance by the holding time, drop finished
    links, and branch over attempt subsets of the eligible links.
    Zero-probability branches are skipped, so reachability equals the
    support of the chain."""
    h = holding_slots(layout, state)
    base = {link: r - h for link, r in state if r - h > 0}
    attempters = [i for i in eligible_links(layout, state) if spec.q[i] > 0.0]
    certain = [i for i in attempters if spec.q[i] >= 1.0]
    optional = [i for i in attempters if spec.q[i] < 1.0]
    for k in range(len(optional) + 1):
        for subset in combinations(optional, k):
            p = 1.0
            for i in optional:
                p *= spec.q[i] if i in subset else 1.0 - spec.q[i]
            nxt = dict(base)
            for i in subset:
                nxt[i] = spec.tau
            for i in certain:
                nxt[i] = spec.tau
            yield _freeze(nxt), p


def enumerate_states(
    layout: ChannelLayout, spec: NetworkSpec, cap: int | None = None
) -> tuple[RichState, ...]:
    """Breadth-first closure from the all-idle state; deterministic order
    with all-idle at index 0."""
    cap = cap if cap is not None else state_cap()
    order: list[RichState] = [IDLE_STATE]
    seen = {IDLE_STATE}
    head = 0
    while head < len(order):
        current = order[head]
        head += 1
        for nxt, _ in successors(layout, spec, current):
            if nxt not in seen:
                seen.add(nxt)
                order.append(nxt)
                if len(order) > cap:
                    bound = (2 ** layout.n_channels) * spec.tau ** (2 * (layout.n_channels - 1))
                    raise StateSpaceCapError(
                        f"state enumeration exceeded cap {cap} "
                        f"(theoretical bound 2^N*tau^(2(N-1)) = {bound}); "
                        f"set {STATE_CAP_ENV} to raise the cap or use the "
                        f"lower-bound method"
                    )
    return tuple(order)


def transition_matrix(
    layout: ChannelLayout, spec: NetworkSpec, states: tuple[RichState, ...]
) -> sp.csr_matrix:
    """Row-stochastic embedded-chain transition matrix over the states."""
    index = {s: k for k, s in enumerate(states)}
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for k, s in enumerate(states):
        for nxt, p in successors(layout, spec, s):
            rows.append(k)
            cols.append(index[nxt])
            vals.append(p)
    n = len(states)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def embedded_steady_state(
    matrix: sp.spmatrix,
) -> tuple[np.ndarray, float, tuple[int, ...]]:
    """Solve pi^T = pi^T P with sum(pi) = 1.

    When some q_i is 0 or 1 the chain restricted to the reachable set can
    be reducible; the solve is then done on the recurrent class and the
    dropped (transient) state indices are reported. Returns
    (pi, residual, dropped_indices) with pi zero on dropped states.
    """
    n = matrix.shape[0]
    if n == 1:
        return np.ones(1), 0.0, ()

    ncomp, labels = connected_components(matrix, directed=True, connection="strong")
    keep = np.arange(n)
    dropped: tuple[int, ...] = ()
    if ncomp > 1:
        # a closed SCC has no transitions leaving it
        closed = []
        for comp in range(ncomp):
            members = np.flatnonzero(labels == comp)
            sub = matrix[members, :].tocsc()
            outside = np.setdiff1d(np.arange(n), members, assume_unique=False)
            if sub[:, outside].nnz == 0:
                closed.append(comp)
        if len(closed) != 1:
            raise ValueError(
                f"chain has {len(closed)} closed recurrent classes; "
                f"steady state is not unique"
            )
        keep = np.flatnonzero(labels == closed[0])
        dropped = tuple(int(i) for i in np.flatnonzero(labels != closed[0]))

    sub = matrix[keep, :][:, keep]
    m = sub.shape[0]
    a = (sub.T - sp.identity(m, format="csr")).tolil()
    a[m - 1, :] = 1.0
    b = np.zeros(m)
    b[m - 1] = 1.0
    if m <= 2000:
        pi_sub = np.linalg.solve(a.toarray(), b)
    else:
        pi_sub = sp.linalg.spsolve(a.tocsc(), b)

    pi = np.zeros(n)
    pi[keep] = pi_sub
    residual = float(np.max(np.abs(matrix.T @ pi - pi)))
    return pi, residual, dropped


def limiting_distribution(pi: np.ndarray, holdings: np.ndarray) -> np.ndarray:
    """Time-stationary probabilities: weight embedded probabilities by
    holding times and renormalize."""
    weighted = pi * holdings
    return weighted / weighted.sum()


@dataclass(frozen=True)
class PaperState:
    """Channel-level state: busy/idle per channel plus start-time offsets
    of channels 2..N relative to channel 1."""

    channel_states: tuple[str, ...]  # 'B' or 'I'
    offsets: tuple[int, ...]  # length N-1

    def label(self) -> str:
        parts = list(self.channel_states) + [str(d) for d in self.offsets]
        return "(" + ",".join(parts) + ")"


def holding_time(p: PaperState, tau: int) -> int:
    """Holding time of a channel-level state: earliest end minus latest
    start, with busy duration tau and idle duration 1. A result below 1
    marks an unreachable state."""
    starts = (0,) + p.offsets
    durations = [tau if x == "B" else 1 for x in p.channel_states]
    ends = [s + d for s, d in zip(starts, durations)]
    return min(ends) - max(starts)


def project_state(state: RichState, layout: ChannelLayout, tau: int) -> PaperState:
    """Project a rich state onto the channel-level state. Busy channels
    start at epoch - (tau - remaining); idle channels start at the epoch."""
    active = dict(state)
    xs: list[str] = []
    starts: list[int] = []
    for links in layout.channels:
        rems = {active[i] for i in links if i in active}
        if rems:
            if len(rems) != 1:
                raise ValueError(f"misaligned occupancy on channel {links}: {rems}")
            xs.append("B")
            starts.append(-(tau - rems.pop()))
        else:
            xs.append("I")
            starts.append(0)
    offsets = tuple(starts[c] - starts[0] for c in range(1, len(starts)))
    return PaperState(tuple(xs), offsets)


Signature = tuple[frozenset[int], frozenset[frozenset[int]]]


def state_signature(p: PaperState) -> Signature:
    """(idle channel set, partition of busy channels by equal start time).
    Among states with at least one idle channel, equal signatures imply
    equal limiting probabilities."""
    starts = (0,) + p.offsets
    idle = frozenset(c for c, x in enumerate(p.channel_states) if x == "I")
    groups: dict[int, list[int]] = {}
    for c, x in enumerate(p.channel_states):
        if x == "B":
            groups.setdefault(starts[c], []).append(c)
    busy = frozenset(frozenset(v) for v in groups.values())
    return idle, busy


@dataclass(frozen=True)
class SolvedChain:
    """A fully solved renewal model for one network."""

    spec: NetworkSpec
    layout: ChannelLayout
    states: tuple[RichState, ...]
    matrix: sp.csr_matrix
    holdings: np.ndarray
    pi: np.ndarray  # embedded chain
    pi_tilde: np.ndarray  # limiting (time-stationary)
    residual: float
    dropped: tuple[int, ...]

    @property
    def state_count(self) -> int:
        return len(self.states)

    def index_of(self, state: RichState) -> int:
        return self.states.index(state)

    def projection(self, k: int) -> PaperState:
        return project_state(self.states[k], self.layout, self.spec.tau)

    def paper_probability(self, p: PaperState) -> float:
        """Limiting probability mass of all rich states projecting onto p."""
        return float(sum(
            self.pi_tilde[k] for k in range(self.state_count)
            if self.projection(k) == p
        ))


def solve_network(spec: NetworkSpec, cap: int | None = None) -> SolvedChain:
    """Enumerate, build transitions, and solve the embedded and limiting
    distributions for one network."""
    layout = build_layout(spec)
    states = enumerate_states(layout, spec, cap)
    matrix = transition_matrix(layout, spec, states)
    holdings = np.array([holding_slots(layout, s) for s in states], dtype=float)
    pi, residual, dropped = embedded_steady_state(matrix)
    pi_tilde = limiting_distribution(pi, holdings)
    return SolvedChain(
        spec=spec,
        layout=layout,
        states=states,
        matrix=matrix,
        holdings=holdings,
        pi=pi,
        pi_tilde=pi_tilde,
        residual=residual,
        dropped=dropped,
    )


def chain_document(chain: SolvedChain) -> dict:
    """Structured dump of the solved chain (states, projections,
    signatures, holding times, pi, pi~) for debugging and fixtures."""
    states = []
    for k, s in enumerate(chain.states):
        p = chain.projection(k)
        idle, busy = state_signature(p)
        states.append({
            "index": k,
            "active": {chain.spec.link_ids[link]: r for link, r in s},
            "projection": p.label(),
            "signature": {
                "idle": sorted(idle),
                "busy_groups": sorted(sorted(g) for g in busy),
            },
            "holding": int(chain.holdings[k]),
            "pi": float(chain.pi[k]),
            "pi_tilde": float(chain.pi_tilde[k]),
        })
    return {
        "channels": [
            [chain.spec.link_ids[i] for i in links] for links in chain.layout.channels
        ],
        "state_count": chain.state_count,
        "residual": chain.residual,
        "dropped_states": list(chain.dropped),
        "states": states,
    }
