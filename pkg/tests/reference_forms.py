"""Hand-derived closed forms for the 3-link flow-in-the-middle topology.

Link 0 senses links 1 and 2; links 1 and 2 cannot sense each other. The
sensing cliques are {0,1} (channel 0) and {0,2} (channel 1). Collapsing
the offset states of the embedded chain (all one-busy-channel states
share the holding time 1 and equal embedded mass) gives a 3-variable
linear system whose solution is reproduced here. Derived independently
on paper and cross-checked against a slot-level chain; used as frozen
oracles by the tests.
"""

from __future__ import annotations


def denominator(q1: float, q2: float, q3: float, tau: int) -> float:
    return 1.0 + (1 - q1) * q2 * q3 * tau ** 2 + (1 + (q2 + q3 - 1) * (1 - q1)) * tau


def limiting_probabilities(q1: float, q2: float, q3: float, tau: int) -> dict[str, float]:
    """Limiting probabilities of the idle-containing channel states.

    Keys are channel-state labels: '(I,I,0)', '(I,B,k)' for
    k = 0..1-tau (link 2 transmitting alone), '(B,I,k)' for
    k = 0..tau-1 (link 1 transmitting alone).
    """
    d = denominator(q1, q2, q3, tau)
    out = {"(I,I,0)": 1.0 / d}
    for k in range(0, -tau, -1):
        out[f"(I,B,{k})"] = (1 - q1) * q3 / d
    for k in range(tau):
        out[f"(B,I,{k})"] = (1 - q1) * q2 / d
    return out


def link2_throughput_exact(q1: float, q2: float, q3: float, tau: int) -> float:
    """Exact throughput of the hidden-terminal victim (paper-numbered
    link 2): tau*q2*(1-q1)*(1-q3)^(tau-1) / D. The two contributing
    states are the all-idle one, phi = (1-q1)(1-q3)^tau, and the one
    where link 3's transmission ends at the attempt slot,
    phi = (1-q3)^(tau-1)."""
    d = denominator(q1, q2, q3, tau)
    return tau * q2 * (1 - q1) * (1 - q3) ** (tau - 1) / d


def link2_throughput_rtscts(q1: float, q2: float, q3: float, tau: int) -> float:
    """Initiation-only throughput of link 2 when interference is confined
    to sensing edges: tau*q2*(1-q1)*(1+tau*q3) / D."""
    d = denominator(q1, q2, q3, tau)
    return tau * q2 * (1 - q1) * (1 + tau * q3) / d


def link2_throughput_lower_bound(q1: float, q2: float, q3: float, tau: int) -> float:
    """Displayed lower bound for link 2: the all-idle state charges full
    abstention windows to both interferers; the state where link 3 ends
    at the attempt slot charges (1-q3)^(tau-1) and nothing for link 1,
    whose shared channel is held by link 2 itself for the whole window."""
    d = denominator(q1, q2, q3, tau)
    pi_idle = 1.0 / d
    pi_ib_last = (1 - q1) * q3 / d
    return tau * q2 * (
        (1 - q1) ** tau * (1 - q3) ** tau * pi_idle
        + (1 - q3) ** (tau - 1) * pi_ib_last
    )
