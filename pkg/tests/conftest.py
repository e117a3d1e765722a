from __future__ import annotations

import itertools
import random

import pytest

from csmanet import NetworkSpec, build_network


def fig2_network(q=(0.5, 0.5, 0.5), tau=3, mode="basic") -> NetworkSpec:
    """Flow-in-the-middle triple with a hidden terminal: link 0 senses
    links 1 and 2; reception on link 1 is corrupted by links 0 and 2."""
    return build_network(
        3, q, tau,
        sensing=[(0, 1), (0, 2)],
        interference=[(0, 1), (2, 1)],
        mode=mode,
    )


def fig2_rtscts_network(q=(0.5, 0.5, 0.5), tau=3) -> NetworkSpec:
    """Same sensing topology with interference confined to sensing edges
    (both directions), as handshake-protected operation produces."""
    return build_network(
        3, q, tau,
        sensing=[(0, 1), (0, 2)],
        interference=[(0, 1), (1, 0), (0, 2), (2, 0)],
        mode="rts_cts",
    )


def path3_network(q=0.35, tau=3) -> NetworkSpec:
    """Three links in a line: the middle link senses both outer ones.
    Interference mirrors sensing in both directions."""
    return build_network(
        3, q, tau,
        sensing=[(0, 1), (1, 2)],
        interference=[(0, 1), (1, 0), (1, 2), (2, 1)],
    )


def random_network(
    rng: random.Random,
    k_max: int = 4,
    tau_max: int = 4,
    q_lo: float = 0.05,
    q_hi: float = 0.9,
    edge_prob: float = 0.5,
    subgraph_interference: bool = False,
) -> NetworkSpec:
    """Random instance; interference is a random directed relation, or a
    random subset of sensing edges (both directions) when subgraph
    interference is requested."""
    k = rng.randint(1, k_max)
    tau = rng.randint(1, tau_max)
    sensing = [e for e in itertools.combinations(range(k), 2)
               if rng.random() < edge_prob]
    if subgraph_interference:
        interference = []
        for a, b in sensing:
            if rng.random() < 0.8:
                interference.append((a, b))
            if rng.random() < 0.8:
                interference.append((b, a))
        mode = "rts_cts"
    else:
        interference = [(a, b) for a in range(k) for b in range(k)
                        if a != b and rng.random() < edge_prob]
        mode = "basic"
    q = [round(rng.uniform(q_lo, q_hi), 6) for _ in range(k)]
    return build_network(k, q, tau, sensing, interference, mode=mode)


@pytest.fixture
def fig2():
    return fig2_network()


@pytest.fixture
def fig2_rtscts():
    return fig2_rtscts_network()
