"""Brute-force slot-level chain: the ground-truth throughput oracle.

Deliberately independent of the clique/renewal machinery: eligibility is
decided from sensing neighbors alone, the chain steps one slot at a time
(no holding-time jumps), and success probabilities are accumulated by
exhaustively expanding every attempt combination over the transmission
window and filtering states in which an interferer is active. Usable only
on small instances.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .errors import GuardRailError
from .throughput import ThroughputReport
from .topology import NetworkSpec

MAX_LINKS = 6
MAX_TAU = 5

SlotState = tuple[tuple[int, int], ...]  # sorted ((link, remaining slots), ...)


def _eligible(spec: NetworkSpec, active: dict[int, int]) -> list[int]:
    # a link may attempt in the next slot iff in the current slot it is
    # silent and hears no sensing neighbor
    out = []
    for i in range(spec.link_count):
        if i in active:
            continue
        if any(j in active for j in spec.sensing_neighbors(i)):
            continue
        out.append(i)
    return out


def _attempt_combos(spec: NetworkSpec, eligible: list[int]):
    attempters = [i for i in eligible if spec.q[i] > 0.0]
    certain = tuple(i for i in attempters if spec.q[i] >= 1.0)
    optional = [i for i in attempters if spec.q[i] < 1.0]
    for k in range(len(optional) + 1):
        for subset in combinations(optional, k):
            p = 1.0
            for i in optional:
                p *= spec.q[i] if i in subset else 1.0 - spec.q[i]
            yield subset + certain, p


def _successors(spec: NetworkSpec, state: SlotState):
    active = dict(state)
    advanced = {i: r - 1 for i, r in active.items() if r > 1}
    for starters, p in _attempt_combos(spec, _eligible(spec, active)):
        nxt = dict(advanced)
        for i in starters:
            nxt[i] = spec.tau
        yield tuple(sorted(nxt.items())), p


def slot_chain_throughput(spec: NetworkSpec) -> ThroughputReport:
    """Exact per-link throughput from the one-slot-sampled chain."""
    if spec.link_count > MAX_LINKS or spec.tau > MAX_TAU:
        raise GuardRailError(
            f"oracle guard rail: needs K <= {MAX_LINKS} and tau <= {MAX_TAU}, "
            f"got K={spec.link_count}, tau={spec.tau}"
        )

    idle: SlotState = ()
    states = [idle]
    index = {idle: 0}
    head = 0
    while head < len(states):
        for nxt, _ in _successors(spec, states[head]):
            if nxt not in index:
                index[nxt] = len(states)
                states.append(nxt)
        head += 1

    n = len(states)
    p_mat = np.zeros((n, n))
    for k, s in enumerate(states):
        for nxt, p in _successors(spec, s):
            p_mat[k, index[nxt]] += p

    a = (p_mat - np.eye(n)).T
    a[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        stat = np.linalg.solve(a, b)
    except np.linalg.LinAlgError:
        stat, *_ = np.linalg.lstsq(a, b, rcond=None)

    values = []
    for i in range(spec.link_count):
        interferers = spec.interferers(i)
        memo: dict[tuple[SlotState, int], float] = {}

        def window_clean(state: SlotState, slots_left: int) -> float:
            # probability that no interferer is active during this slot
            # nor the following slots_left - 1 slots of the window
            if any(link in interferers for link, _ in state):
                return 0.0
            if slots_left == 1:
                return 1.0
            key = (state, slots_left)
            got = memo.get(key)
            if got is not None:
                return got
            total = 0.0
            for nxt, p in _successors(spec, state):
                total += p * window_clean(nxt, slots_left - 1)
            memo[key] = total
            return total

        rate = 0.0
        if spec.q[i] > 0.0:
            for k, s in enumerate(states):
                if stat[k] <= 0.0:
                    continue
                active = dict(s)
                if i not in _eligible(spec, active):
                    continue
                advanced = {j: r - 1 for j, r in active.items() if r > 1}
                clean = 0.0
                rest = [j for j in _eligible(spec, active) if j != i]
                for starters, p in _attempt_combos(spec, rest):
                    first = dict(advanced)
                    first[i] = spec.tau
                    for j in starters:
                        first[j] = spec.tau
                    clean += p * window_clean(tuple(sorted(first.items())), spec.tau)
                rate += stat[k] * spec.q[i] * clean
        values.append(float(spec.tau * rate))

    return ThroughputReport(
        tuple(values),
        "oracle",
        {
            "spec_hash": spec.spec_hash(),
            "state_count": n,
            "stationary_sum": float(stat.sum()),
        },
    )
