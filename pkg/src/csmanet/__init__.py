"""Saturation throughput of slotted CSMA networks with arbitrary sensing
and interference topologies: clique-channel renewal model, exact and
lower-bound throughput, RTS/CTS fast path, slot-level oracle, BOE
baseline, and an event-driven simulator."""

from .baselines import BoeReport, boe_throughput, maximum_independent_sets
from .cliques import ChannelLayout, build_layout, maximal_cliques
from .errors import (
    CsmanetError,
    GuardRailError,
    StateSpaceCapError,
    SubgraphConditionError,
    TopologyError,
)
from .multibss import (
    BssGroup,
    MultiBssSpec,
    PhyParams,
    DEFAULT_PHY,
    analyze_multibss,
    expand_groups,
    load_multibss,
    node_level_network,
    parse_multibss,
    per_node_throughput,
    tau_from_phy,
    total_throughput,
)
from .oracle import slot_chain_throughput
from .renewal import (
    PaperState,
    SolvedChain,
    eligible_links,
    enumerate_states,
    holding_time,
    limiting_distribution,
    project_state,
    solve_network,
    state_signature,
    transition_matrix,
)
from .simulator import SimConfig, SimResult, run_simulation, simulate_multibss
from .throughput import (
    ThroughputReport,
    earliest_attempt_gap,
    eligible_states,
    interruption_free_exact,
    throughput_exact,
    throughput_lower_bound,
    throughput_rtscts,
)
from .topology import (
    InterferenceGraph,
    NetworkSpec,
    SensingGraph,
    build_network,
    load_network,
    network_from_document,
    network_to_document,
    parse_network_spec,
    q_from_window,
    validate,
)

__version__ = "0.1.0"
