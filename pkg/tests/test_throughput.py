from __future__ import annotations

import random

import pytest

from csmanet import (
    SubgraphConditionError,
    build_layout,
    build_network,
    earliest_attempt_gap,
    eligible_states,
    interruption_free_exact,
    slot_chain_throughput,
    solve_network,
    throughput_exact,
    throughput_lower_bound,
    throughput_rtscts,
)
from conftest import fig2_network, fig2_rtscts_network, path3_network, random_network
from reference_forms import (
    link2_throughput_exact,
    link2_throughput_lower_bound,
    link2_throughput_rtscts,
)


def _state_by_label(chain, label):
    for k in range(chain.state_count):
        if chain.projection(k).label() == label:
            return chain.states[k]
    raise KeyError(label)


def test_eligible_states_fig2(fig2):
    chain = solve_network(fig2)
    labels = {chain.projection(k).label() for k in eligible_states(chain, 1)}
    assert labels == {"(I,I,0)", "(I,B,0)", "(I,B,-1)", "(I,B,-2)"}
    # the middle link needs both channels idle
    labels0 = {chain.projection(k).label() for k in eligible_states(chain, 0)}
    assert labels0 == {"(I,I,0)"}


def test_eligible_states_single_link():
    spec = build_network(1, 0.5, 3)
    chain = solve_network(spec)
    indices = eligible_states(chain, 0)
    assert len(indices) == 1
    assert chain.states[indices[0]] == ()
    assert chain.projection(indices[0]).label() == "(I)"


@pytest.mark.parametrize("q", [
    (0.5, 0.5, 0.5), (0.3, 0.6, 0.2), (0.85, 0.15, 0.45),
])
def test_interruption_free_values(q):
    spec = fig2_network(q)
    chain = solve_network(spec)
    layout = chain.layout
    q1, _, q3 = q
    phi_idle = interruption_free_exact(layout, spec, _state_by_label(chain, "(I,I,0)"), 1)
    assert phi_idle == pytest.approx((1 - q1) * (1 - q3) ** 3, abs=1e-12)
    for lbl in ("(I,B,0)", "(I,B,-1)"):
        assert interruption_free_exact(layout, spec, _state_by_label(chain, lbl), 1) == 0.0
    phi_last = interruption_free_exact(layout, spec, _state_by_label(chain, "(I,B,-2)"), 1)
    assert phi_last == pytest.approx((1 - q3) ** 2, abs=1e-12)


def test_exact_spot_value(fig2):
    report = throughput_exact(fig2)
    assert report.per_link[1] == pytest.approx(0.1875 / 5.125, abs=1e-10)
    assert report.method == "exact"
    assert report.metadata["state_count"] == 16


@pytest.mark.parametrize("q", [(0.3, 0.6, 0.2), (0.7, 0.4, 0.9), (0.15, 0.85, 0.55)])
@pytest.mark.parametrize("tau", [2, 3, 4])
def test_exact_matches_closed_form(q, tau):
    report = throughput_exact(fig2_network(q, tau))
    assert report.per_link[1] == pytest.approx(
        link2_throughput_exact(*q, tau), abs=1e-10)


def test_exact_zero_q_link():
    spec = fig2_network(q=(0.5, 0.0, 0.5))
    assert throughput_exact(spec).per_link[1] == 0.0


def test_single_link_formula():
    for q in (0.2, 0.5, 0.9):
        for tau in (1, 3, 5):
            spec = build_network(1, q, tau)
            assert throughput_exact(spec).per_link[0] == pytest.approx(
                q * tau / (1 + q * tau), abs=1e-12)


def test_isolated_link_monotone_in_q():
    vals = [throughput_exact(build_network(1, q, 3)).per_link[0]
            for q in (0.1, 0.3, 0.5, 0.7, 0.9, 1.0)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_decomposition_fixture(fig2):
    # recompute the victim's throughput from its interruption-free values
    # and the limiting masses of its two contributing states
    chain = solve_network(fig2)
    layout = chain.layout
    q2 = fig2.q[1]
    phi_idle = interruption_free_exact(layout, fig2, _state_by_label(chain, "(I,I,0)"), 1)
    phi_last = interruption_free_exact(layout, fig2, _state_by_label(chain, "(I,B,-2)"), 1)
    mass = {}
    for k in range(chain.state_count):
        lbl = chain.projection(k).label()
        mass[lbl] = mass.get(lbl, 0.0) + chain.pi_tilde[k]
    manual = 3 * q2 * (phi_idle * mass["(I,I,0)"] + phi_last * mass["(I,B,-2)"])
    assert manual == pytest.approx(throughput_exact(fig2).per_link[1], abs=1e-10)


def test_gap_values(fig2):
    chain = solve_network(fig2)
    layout = chain.layout
    idle = _state_by_label(chain, "(I,I,0)")
    last = _state_by_label(chain, "(I,B,-2)")
    # the hidden terminal (link 2) relative to a transmission of link 1
    assert earliest_attempt_gap(layout, idle, 2, 1, 3) == 0
    assert earliest_attempt_gap(layout, last, 2, 1, 3) == 1
    # link 0 shares channel 0 with the tagged link: no attempt in-window
    assert earliest_attempt_gap(layout, last, 0, 1, 3) > 3
    assert earliest_attempt_gap(layout, idle, 0, 1, 3) == 0


@pytest.mark.parametrize("q", [(0.5, 0.5, 0.5), (0.3, 0.6, 0.2), (0.8, 0.25, 0.4)])
@pytest.mark.parametrize("tau", [2, 3, 5])
def test_lower_bound_matches_reference(q, tau):
    report = throughput_lower_bound(fig2_network(q, tau))
    assert report.per_link[1] == pytest.approx(
        link2_throughput_lower_bound(*q, tau), abs=1e-10)
    assert report.method == "lower_bound"


def test_lower_bound_equals_exact_without_interference():
    spec = build_network(3, 0.4, 3, sensing=[(0, 1), (1, 2)])
    lb = throughput_lower_bound(spec)
    ex = throughput_exact(spec)
    for a, b in zip(lb.per_link, ex.per_link):
        assert a == pytest.approx(b, abs=1e-12)


def test_lower_bound_dominated_random():
    rng = random.Random(99)
    for _ in range(30):
        spec = random_network(rng, k_max=4, tau_max=4)
        chain = solve_network(spec)
        lb = throughput_lower_bound(spec, chain)
        ex = throughput_exact(spec, chain)
        for a, b in zip(lb.per_link, ex.per_link):
            assert a <= b + 1e-12


@pytest.mark.parametrize("q", [(0.5, 0.5, 0.5), (0.25, 0.55, 0.4), (0.7, 0.2, 0.9)])
@pytest.mark.parametrize("tau", [2, 3, 5])
def test_rtscts_matches_reference(q, tau):
    report = throughput_rtscts(fig2_rtscts_network(q, tau))
    assert report.per_link[1] == pytest.approx(
        link2_throughput_rtscts(*q, tau), abs=1e-10)


def test_rtscts_spot_value(fig2_rtscts):
    assert throughput_rtscts(fig2_rtscts).per_link[1] == pytest.approx(
        1.875 / 5.125, abs=1e-10)


def test_rtscts_refuses_hidden_interference(fig2):
    with pytest.raises(SubgraphConditionError, match="L3->L2"):
        throughput_rtscts(fig2)


def test_rtscts_collapse_random():
    rng = random.Random(123)
    for _ in range(10):
        spec = random_network(rng, k_max=4, tau_max=4, subgraph_interference=True)
        chain = solve_network(spec)
        fast = throughput_rtscts(spec, chain)
        full = throughput_exact(spec, chain)
        for a, b in zip(fast.per_link, full.per_link):
            assert a == pytest.approx(b, abs=1e-10)


def test_report_total_bounded_by_channels():
    rng = random.Random(3)
    for _ in range(10):
        spec = random_network(rng, k_max=4, tau_max=4)
        chain = solve_network(spec)
        report = throughput_exact(spec, chain)
        assert sum(report.per_link) <= chain.layout.n_channels + 1e-9
        assert all(0.0 <= v <= 1.0 for v in report.per_link)


def test_permutation_equivariance_of_reports():
    rng = random.Random(17)
    for _ in range(6):
        spec = random_network(rng, k_max=4, tau_max=3, q_lo=0.1, q_hi=0.8)
        k = spec.link_count
        perm = list(range(k))
        rng.shuffle(perm)
        permuted = build_network(
            k,
            [spec.q[perm.index(v)] for v in range(k)],
            spec.tau,
            [(perm[a], perm[b]) for a, b in spec.sensing.edges],
            [(perm[a], perm[b]) for a, b in spec.interference.edges],
        )
        base = throughput_exact(spec).per_link
        moved = throughput_exact(permuted).per_link
        for i in range(k):
            assert moved[perm[i]] == pytest.approx(base[i], abs=1e-12)


def test_flow_in_the_middle_ordering():
    spec = path3_network(q=0.35, tau=3)
    report = throughput_exact(spec)
    assert report.per_link[1] < report.per_link[0]
    assert report.per_link[1] < report.per_link[2]


def test_oracle_and_exact_agree_spot(fig2):
    ex = throughput_exact(fig2)
    orc = slot_chain_throughput(fig2)
    for a, b in zip(ex.per_link, orc.per_link):
        assert a == pytest.approx(b, abs=1e-9)
