"""Event-driven slotted CSMA simulator.

Per slot, every idle link whose sensed channels were quiet in the previous
slot either decrements its backoff counter (window mode) or attempts with
probability q (Bernoulli mode). Counters are redrawn after each
transmission, uniformly over the W values {0..W-1}, the draw that makes a
lone link's mean attempt spacing exactly (W+1)/2 slots and so matches
q = 2/(W+1); W = 0 degenerates to an always-zero counter. A transmission occupies tau slots and is received
successfully iff no interferer is active during any of them; a
transmission ending exactly where another starts does not overlap.

Randomness comes from per-link SplitMix64 streams derived from the master
seed, so a run is fully determined by (network, config).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .cliques import build_layout
from .topology import NetworkSpec

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@dataclass(frozen=True)
class SimConfig:
    total_slots: int
    seed: int = 1
    warmup_slots: int = 0
    backoff: str = "auto"  # auto | window | bernoulli
    batches: int = 20

    def __post_init__(self):
        if self.total_slots < 1:
            raise ValueError("total_slots must be >= 1")
        if not (0 <= self.seed < 2 ** 64):
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.backoff not in ("auto", "window", "bernoulli"):
            raise ValueError(f"unknown backoff mode {self.backoff!r}")


@dataclass(frozen=True)
class SimResult:
    link_ids: tuple[str, ...]
    attempts: tuple[int, ...]
    successes: tuple[int, ...]
    collisions: tuple[int, ...]
    throughput: tuple[float, ...]
    stderr: tuple[float, ...]
    channel_busy_slots: tuple[int, ...]
    slots: int
    warmup: int
    seed: int
    window_mode: bool


@njit(cache=True)
def _mix64(z):
    z = np.uint64(z)
    z = np.uint64((z ^ (z >> np.uint64(30))) * _MIX1)
    z = np.uint64((z ^ (z >> np.uint64(27))) * _MIX2)
    return np.uint64(z ^ (z >> np.uint64(31)))


@njit(cache=True)
def _next_u01(state, i):
    state[i] = np.uint64(state[i] + _GOLDEN)
    z = _mix64(state[i])
    return (z >> np.uint64(11)) * (2.0 ** -53)


@njit(cache=True)
def _kernel(
    k, tau, slots, warmup, seed, window_mode, qs, ws, batches,
    s_ptr, s_idx, o_ptr, o_idx, c_ptr, c_idx, n_channels,
):
    remaining = np.zeros(k, dtype=np.int64)
    counter = np.zeros(k, dtype=np.int64)
    sense_cnt = np.zeros(k, dtype=np.int64)
    intf_cnt = np.zeros(k, dtype=np.int64)
    dirty = np.zeros(k, dtype=np.bool_)
    start_slot = np.zeros(k, dtype=np.int64)
    starting = np.zeros(k, dtype=np.bool_)

    rng = np.zeros(k, dtype=np.uint64)
    for i in range(k):
        rng[i] = _mix64(np.uint64(seed) ^ np.uint64((i + 1)) * _GOLDEN)

    attempts = np.zeros(k, dtype=np.int64)
    successes = np.zeros(k, dtype=np.int64)
    collisions = np.zeros(k, dtype=np.int64)
    succ_batch = np.zeros((k, batches), dtype=np.int64)
    channel_busy = np.zeros(n_channels, dtype=np.int64)

    if window_mode:
        for i in range(k):
            span = ws[i] if ws[i] > 0 else 1
            counter[i] = np.int64(_next_u01(rng, i) * span)
            if counter[i] >= span:
                counter[i] = span - 1

    total = warmup + slots
    for t in range(total):
        # attempt decisions from the previous slot's occupancy
        for i in range(k):
            starting[i] = False
            if remaining[i] == 0 and sense_cnt[i] == 0:
                if window_mode:
                    if counter[i] == 0:
                        starting[i] = True
                    else:
                        counter[i] -= 1
                else:
                    if _next_u01(rng, i) < qs[i]:
                        starting[i] = True

        # transmissions that covered the previous slot advance; finished
        # ones release their channels before this slot's starters claim them
        for i in range(k):
            if remaining[i] > 0:
                remaining[i] -= 1
                if remaining[i] == 0:
                    for p in range(s_ptr[i], s_ptr[i + 1]):
                        sense_cnt[s_idx[p]] -= 1
                    for p in range(o_ptr[i], o_ptr[i + 1]):
                        intf_cnt[o_idx[p]] -= 1
                    if start_slot[i] >= warmup:
                        if dirty[i]:
                            collisions[i] += 1
                        else:
                            successes[i] += 1
                            b = (start_slot[i] - warmup) * batches // slots
                            succ_batch[i, b] += 1
                    if window_mode:
                        span = ws[i] if ws[i] > 0 else 1
                        counter[i] = np.int64(_next_u01(rng, i) * span)
                        if counter[i] >= span:
                            counter[i] = span - 1

        for i in range(k):
            if starting[i]:
                remaining[i] = tau
                dirty[i] = False
                start_slot[i] = t
                if t >= warmup:
                    attempts[i] += 1
                for p in range(s_ptr[i], s_ptr[i + 1]):
                    sense_cnt[s_idx[p]] += 1
                for p in range(o_ptr[i], o_ptr[i + 1]):
                    intf_cnt[o_idx[p]] += 1

        # any transmitter sharing this slot with an active interferer is hit
        for i in range(k):
            if remaining[i] > 0 and intf_cnt[i] > 0:
                dirty[i] = True

        if t >= warmup:
            for c in range(n_channels):
                for p in range(c_ptr[c], c_ptr[c + 1]):
                    if remaining[c_idx[p]] > 0:
                        channel_busy[c] += 1
                        break

    return attempts, successes, collisions, succ_batch, channel_busy


def _csr(lists: list[list[int]]) -> tuple[np.ndarray, np.ndarray]:
    ptr = np.zeros(len(lists) + 1, dtype=np.int64)
    for i, row in enumerate(lists):
        ptr[i + 1] = ptr[i] + len(row)
    idx = np.zeros(int(ptr[-1]), dtype=np.int64)
    pos = 0
    for row in lists:
        for v in sorted(row):
            idx[pos] = v
            pos += 1
    return ptr, idx


def derive_seed(master: int, index: int) -> int:
    """Stable per-run seed stream for sweeps."""
    mask = (1 << 64) - 1
    z = (master + (index + 1) * 0x9E3779B97F4A7C15) & mask
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    return (z ^ (z >> 31)) & mask


def run_simulation(spec: NetworkSpec, cfg: SimConfig) -> SimResult:
    """Simulate one network. Window dynamics are used when the spec
    carries backoff windows for every link (or cfg forces them);
    otherwise per-slot Bernoulli attempts with the spec's q."""
    k = spec.link_count
    if cfg.backoff == "window":
        window_mode = True
    elif cfg.backoff == "bernoulli":
        window_mode = False
    else:
        window_mode = all(w is not None for w in spec.windows)
    if window_mode and any(w is None for w in spec.windows):
        raise ValueError("window backoff requested but some links carry no W")

    sense = [[j for j in sorted(spec.sensing_neighbors(i))] for i in range(k)]
    out_intf = [[] for _ in range(k)]
    for a, b in sorted(spec.interference.edges):
        out_intf[a].append(b)
    layout = build_layout(spec)
    channels = [list(c) for c in layout.channels]

    s_ptr, s_idx = _csr(sense)
    o_ptr, o_idx = _csr(out_intf)
    c_ptr, c_idx = _csr(channels)
    qs = np.array(spec.q, dtype=np.float64)
    ws = np.array([w if w is not None else 0 for w in spec.windows], dtype=np.int64)

    batches = max(1, min(cfg.batches, cfg.total_slots))
    attempts, successes, collisions, succ_batch, channel_busy = _kernel(
        k, spec.tau, cfg.total_slots, cfg.warmup_slots, cfg.seed,
        window_mode, qs, ws, batches,
        s_ptr, s_idx, o_ptr, o_idx, c_ptr, c_idx, layout.n_channels,
    )

    throughput = tuple(spec.tau * int(s) / cfg.total_slots for s in successes)
    batch_slots = cfg.total_slots / batches
    stderr = []
    for i in range(k):
        if batches < 2:
            stderr.append(0.0)
            continue
        vals = spec.tau * succ_batch[i] / batch_slots
        stderr.append(float(np.std(vals, ddof=1) / np.sqrt(batches)))

    return SimResult(
        link_ids=spec.link_ids,
        attempts=tuple(int(v) for v in attempts),
        successes=tuple(int(v) for v in successes),
        collisions=tuple(int(v) for v in collisions),
        throughput=throughput,
        stderr=tuple(stderr),
        channel_busy_slots=tuple(int(v) for v in channel_busy),
        slots=cfg.total_slots,
        warmup=cfg.warmup_slots,
        seed=cfg.seed,
        window_mode=window_mode,
    )


def simulate_multibss(m, cfg: SimConfig):
    """Station-level simulation of a multi-BSS network. Returns the raw
    node-level result, the station -> group map, per-group mean station
    throughput (with stderr), and the network total."""
    from .multibss import MultiBssSpec, node_level_network

    assert isinstance(m, MultiBssSpec)
    spec, owner = node_level_network(m)
    res = run_simulation(spec, cfg)
    per_group: list[float] = []
    per_group_err: list[float] = []
    for gi, g in enumerate(m.groups):
        members = [u for u, o in enumerate(owner) if o == gi]
        per_group.append(sum(res.throughput[u] for u in members) / g.n)
        per_group_err.append(
            float(np.sqrt(sum(res.stderr[u] ** 2 for u in members))) / g.n
        )
    total = sum(res.throughput)
    return res, owner, (tuple(per_group), tuple(per_group_err)), total
