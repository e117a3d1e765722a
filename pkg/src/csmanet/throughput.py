"""Per-link throughput from the solved renewal model.

Three routes:

* exact: depth-first expansion of every interference-free evolution over
  the tagged transmission's tau slots;
* lower bound: per-interferer abstention over a window bounded by its
  earliest possible attempt, no recursion;
* initiation-only fast path for interference graphs contained in the
  sensing graph (the RTS/CTS regime), where a transmission can only be
  hit at its first slot.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cliques import ChannelLayout
from .errors import SubgraphConditionError
from .renewal import (
    RichState,
    SolvedChain,
    covered_channels,
    eligible_links,
    holding_slots,
    solve_network,
)
from .topology import NetworkSpec, interference_within_sensing

METHODS = ("exact", "lower_bound", "rts_cts", "simulated", "boe", "oracle")


@dataclass(frozen=True)
class ThroughputReport:
    """Per-link throughput values (fraction of time carrying successfully
    delivered payload) with method metadata."""

    per_link: tuple[float, ...]
    method: str
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for v in self.per_link:
            if not (-1e-12 <= v <= 1.0 + 1e-12):
                raise ValueError(f"throughput out of range: {v}")


def eligible_states(chain: SolvedChain, i: int) -> tuple[int, ...]:
    """Y_i: indices of states in which every channel of link i is idle."""
    u_i = chain.layout.membership[i]
    return tuple(
        k for k, s in enumerate(chain.states)
        if not (u_i & covered_channels(chain.layout, s))
    )


def _blocked_at_start(state: RichState, interferers: frozenset[int]) -> bool:
    """True when some interferer's current transmission extends into the
    tagged window (remaining >= 2; a transmission ending exactly at the
    tagged start does not overlap)."""
    return any(link in interferers and r >= 2 for link, r in state)


def interruption_free_exact(
    layout: ChannelLayout,
    spec: NetworkSpec,
    state: RichState,
    i: int,
    memo: dict[RichState, float] | None = None,
) -> float:
    """phi_i(mu): probability that no interferer of link i transmits during
    any slot of the transmission link i starts one slot after state mu.

    Branches over attempt subsets of non-interfering eligible links at
    each epoch, weights interferer abstention, and evolves the rich state
    (link i's own occupancy blocks same-clique interferers) until the
    tagged transmission completes. Memoized on the evolved rich state.
    """
    interferers = spec.interferers(i)
    if _blocked_at_start(state, interferers):
        return 0.0
    if memo is None:
        memo = {}

    tau = spec.tau
    qs = spec.q

    def expand(s: RichState) -> float:
        # s is the state at an epoch strictly inside the tagged window;
        # link i is active in s.
        got = memo.get(s)
        if got is not None:
            return got
        remaining_i = dict(s)[i]
        h = holding_slots(layout, s)
        if h >= remaining_i:
            # next epoch is at or after the tagged completion; attempts
            # there can no longer overlap the window
            memo[s] = 1.0
            return 1.0
        elig = eligible_links(layout, s)
        silent = 1.0
        for j in elig:
            if j in interferers:
                silent *= 1.0 - qs[j]
        others = [j for j in elig if j not in interferers and qs[j] > 0.0]
        total = _branch(s, h, others, silent, expand)
        memo[s] = total
        return total

    def _branch(s, h, others, weight, cont):
        base = {link: r - h for link, r in s if r - h > 0}
        certain = [j for j in others if qs[j] >= 1.0]
        optional = [j for j in others if qs[j] < 1.0]
        total = 0.0
        for mask in range(1 << len(optional)):
            p = weight
            nxt = dict(base)
            for bit, j in enumerate(optional):
                if mask >> bit & 1:
                    p *= qs[j]
                    nxt[j] = tau
                else:
                    p *= 1.0 - qs[j]
            for j in certain:
                nxt[j] = tau
            total += p * cont(tuple(sorted(nxt.items())))
        return total

    # initiation epoch: link i attempts together with any other eligible
    # links; eligible interferers must abstain already at this slot
    elig = eligible_links(layout, state)
    silent = 1.0
    for j in elig:
        if j in interferers:
            silent *= 1.0 - qs[j]
    others = [j for j in elig if j not in interferers and j != i and qs[j] > 0.0]

    def start_cont(partial: RichState) -> float:
        nxt = dict(partial)
        nxt[i] = tau
        frozen = tuple(sorted(nxt.items()))
        if tau == 1:
            return 1.0  # single-slot transmission ends before the next epoch
        return expand(frozen)

    return _branch(state, holding_slots(layout, state), others, silent, start_cont)


def _base_metadata(chain: SolvedChain) -> dict:
    return {
        "spec_hash": chain.spec.spec_hash(),
        "solver_residual": chain.residual,
        "state_count": chain.state_count,
    }


def throughput_exact(spec: NetworkSpec, chain: SolvedChain | None = None) -> ThroughputReport:
    """lambda_i = tau * sum over eligible states of q_i * phi_i * pi~."""
    chain = chain or solve_network(spec)
    values = []
    for i in range(spec.link_count):
        memo: dict[RichState, float] = {}
        acc = 0.0
        if spec.q[i] > 0.0:
            for k in eligible_states(chain, i):
                phi = interruption_free_exact(chain.layout, spec, chain.states[k], i, memo)
                acc += spec.q[i] * phi * chain.pi_tilde[k]
        values.append(float(spec.tau * acc))
    return ThroughputReport(tuple(values), "exact", _base_metadata(chain))


def earliest_attempt_gap(
    layout: ChannelLayout, state: RichState, j: int, tagged: int, tau: int
) -> int:
    """g_j: slots after the tagged link's start before link j can first
    attempt, assuming current busy periods run out.

    Zero when all of j's channels are idle in the state (j may attempt in
    the same slot the tagged link starts). Otherwise the largest remaining
    occupancy over j's busy channels, plus: if j shares a channel with the
    tagged link, that channel is held for the whole tagged window, so j
    never gets an attempt (gap tau + 1).
    """
    u_j = layout.membership[j]
    busy: dict[int, int] = {}
    for link, r in state:
        for c in layout.membership[link] & u_j:
            busy[c] = r
    if not busy:
        return 0
    g = max(busy.values())
    if u_j & layout.membership[tagged]:
        g = max(g, tau + 1)
    return g


def throughput_lower_bound(
    spec: NetworkSpec, chain: SolvedChain | None = None
) -> ThroughputReport:
    """Lower bound: each interferer abstains over its whole reachable
    window, ignoring blocking by links other than those already active."""
    chain = chain or solve_network(spec)
    tau = spec.tau
    values = []
    for i in range(spec.link_count):
        interferers = spec.interferers(i)
        acc = 0.0
        if spec.q[i] > 0.0:
            for k in eligible_states(chain, i):
                state = chain.states[k]
                if _blocked_at_start(state, interferers):
                    continue
                prod = 1.0
                for j in sorted(interferers):
                    g = earliest_attempt_gap(chain.layout, state, j, i, tau)
                    prod *= (1.0 - spec.q[j]) ** max(0, tau - g)
                acc += spec.q[i] * prod * chain.pi_tilde[k]
        values.append(float(tau * acc))
    return ThroughputReport(tuple(values), "lower_bound", _base_metadata(chain))


def throughput_rtscts(
    spec: NetworkSpec, chain: SolvedChain | None = None
) -> ThroughputReport:
    """Initiation-only evaluation, valid when every interferer is also a
    sensing neighbor: once the tagged link holds its channels, no
    interferer can start mid-transmission."""
    if not interference_within_sensing(spec):
        bad = sorted(
            (a, b) for a, b in spec.interference.edges
            if not spec.sensing.has_edge(a, b)
        )
        pairs = ", ".join(
            f"{spec.link_ids[a]}->{spec.link_ids[b]}" for a, b in bad
        )
        raise SubgraphConditionError(
            f"G_I is not a subgraph of G_S (offending edges: {pairs}); "
            f"the initiation-only path does not apply"
        )
    chain = chain or solve_network(spec)
    values = []
    for i in range(spec.link_count):
        interferers = spec.interferers(i)
        acc = 0.0
        if spec.q[i] > 0.0:
            for k in eligible_states(chain, i):
                elig = eligible_links(chain.layout, chain.states[k])
                prod = 1.0
                for j in elig:
                    if j in interferers:
                        prod *= 1.0 - spec.q[j]
                acc += spec.q[i] * prod * chain.pi_tilde[k]
        values.append(float(spec.tau * acc))
    return ThroughputReport(tuple(values), "rts_cts", _base_metadata(chain))
