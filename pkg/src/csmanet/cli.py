"""Command-line front end.

Subcommands: cliques, analyze, simulate, sweep, compare, and multibss
with analyze/simulate/sweep. Exit codes: 0 success, 1 violated dominance
assertion in compare, 2 validation failure, 3 guard-rail or state-space
limit. The state-enumeration cap is configurable through the
CSMANET_STATE_CAP environment variable.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from . import __version__
from .baselines import boe_throughput
from .cliques import build_layout
from .errors import GuardRailError, SubgraphConditionError, TopologyError
from .multibss import (
    MultiBssSpec,
    analyze_multibss,
    load_multibss,
    per_node_throughput,
    total_throughput,
)
from .oracle import slot_chain_throughput
from .renewal import chain_document, solve_network
from .simulator import SimConfig, derive_seed, run_simulation, simulate_multibss
from .throughput import (
    ThroughputReport,
    throughput_exact,
    throughput_lower_bound,
    throughput_rtscts,
)
from .topology import NetworkSpec, build_network, load_network, q_from_window

SCHEMA_VERSION = "csmanet.v1"

ANALYTIC_METHODS = ("exact", "approx", "rtscts", "oracle", "boe")
SWEEP_METHODS = ANALYTIC_METHODS + ("simulate",)
DOMINANCE_TOL = 1e-12


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _json_text(payload: dict) -> str:
    payload = {"schema": SCHEMA_VERSION, **payload}
    return json.dumps(payload, indent=2, sort_keys=False) + "\n"


def _run_method(spec: NetworkSpec, method: str, slots: int, seed: int) -> ThroughputReport:
    if method == "exact":
        return throughput_exact(spec)
    if method == "approx":
        return throughput_lower_bound(spec)
    if method == "rtscts":
        return throughput_rtscts(spec)
    if method == "oracle":
        return slot_chain_throughput(spec)
    if method == "boe":
        boe = boe_throughput(spec)
        return ThroughputReport(boe.per_link, "boe", {"mis_count": boe.mis_count})
    if method == "simulate":
        res = run_simulation(spec, SimConfig(total_slots=slots, seed=seed))
        return ThroughputReport(
            res.throughput, "simulated",
            {"stderr": list(res.stderr), "slots": slots, "seed": seed},
        )
    raise TopologyError(f"unknown method {method!r}")


def cmd_cliques(args) -> int:
    spec = load_network(args.spec)
    layout = build_layout(spec)
    rows = [
        [c, " ".join(spec.link_ids[i] for i in links)]
        for c, links in enumerate(layout.channels)
    ]
    membership = {
        spec.link_ids[i]: sorted(layout.membership[i])
        for i in range(spec.link_count)
    }
    if args.format == "json-doc":
        _emit(_json_text({
            "channels": [[spec.link_ids[i] for i in links] for links in layout.channels],
            "membership": membership,
        }), args.out)
    elif args.format == "csv":
        _emit(_csv_text(["channel", "links"], rows), args.out)
    else:
        lines = ["channel  links"]
        lines += [f"{c:>7}  {names}" for c, names in rows]
        lines.append("")
        lines.append("link  channels")
        lines += [f"{lid:>4}  {membership[lid]}" for lid in spec.link_ids]
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_analyze(args) -> int:
    spec = load_network(args.spec)
    report = _run_method(spec, args.method, args.slots, args.seed)
    rows = [
        [spec.link_ids[i], f"{report.per_link[i]:.12g}", report.method]
        for i in range(spec.link_count)
    ]
    if args.dump_states or args.format == "json-doc":
        payload = {
            "spec_hash": spec.spec_hash(),
            "method": report.method,
            "throughput": {
                spec.link_ids[i]: report.per_link[i] for i in range(spec.link_count)
            },
            "metadata": report.metadata,
        }
        if args.dump_states:
            payload["chain"] = chain_document(solve_network(spec))
        _emit(_json_text(payload), args.out)
    else:
        _emit(_csv_text(["link_id", "throughput", "method"], rows), args.out)
    return 0


def cmd_simulate(args) -> int:
    spec = load_network(args.spec)
    cfg = SimConfig(total_slots=args.slots, seed=args.seed, warmup_slots=args.warmup)
    res = run_simulation(spec, cfg)
    if args.format == "json-doc":
        _emit(_json_text({
            "spec_hash": spec.spec_hash(),
            "seed": res.seed,
            "slots": res.slots,
            "warmup": res.warmup,
            "window_mode": res.window_mode,
            "per_link": {
                lid: {
                    "attempts": res.attempts[i],
                    "successes": res.successes[i],
                    "collisions": res.collisions[i],
                    "throughput": res.throughput[i],
                    "stderr": res.stderr[i],
                }
                for i, lid in enumerate(res.link_ids)
            },
            "channel_busy_slots": list(res.channel_busy_slots),
        }), args.out)
    else:
        rows = [
            [res.link_ids[i], res.attempts[i], res.successes[i],
             f"{res.throughput[i]:.12g}", f"{res.stderr[i]:.6g}"]
            for i in range(len(res.link_ids))
        ]
        _emit(_csv_text(["link_id", "attempts", "successes", "throughput", "stderr"], rows),
              args.out)
    return 0


def _apply_sweep_value(spec: NetworkSpec, param: str, value: float) -> NetworkSpec:
    ids = spec.link_ids
    if param == "tau":
        tau = int(value)
        if tau != value:
            raise TopologyError("tau grid values must be integers")
        return build_network(spec.link_count, spec.q, tau,
                             sorted(spec.sensing.edges), sorted(spec.interference.edges),
                             spec.mode, ids, spec.windows)
    if param == "q_all":
        return build_network(spec.link_count, [float(value)] * spec.link_count, spec.tau,
                             sorted(spec.sensing.edges), sorted(spec.interference.edges),
                             spec.mode, ids, [None] * spec.link_count)
    if param == "W_all":
        w = int(value)
        if w != value or w < 0:
            raise TopologyError("W grid values must be non-negative integers")
        return build_network(spec.link_count, [q_from_window(w)] * spec.link_count, spec.tau,
                             sorted(spec.sensing.edges), sorted(spec.interference.edges),
                             spec.mode, ids, [w] * spec.link_count)
    if param.startswith("W:"):
        lid = param[2:]
        if lid not in ids:
            raise TopologyError(f"unknown link {lid!r} in sweep parameter")
        w = int(value)
        if w != value or w < 0:
            raise TopologyError("W grid values must be non-negative integers")
        target = ids.index(lid)
        q = list(spec.q)
        windows = list(spec.windows)
        q[target] = q_from_window(w)
        windows[target] = w
        return build_network(spec.link_count, q, spec.tau,
                             sorted(spec.sensing.edges), sorted(spec.interference.edges),
                             spec.mode, ids, windows)
    raise TopologyError(f"unknown sweep parameter {param!r}")


def cmd_sweep(args) -> int:
    spec = load_network(args.spec)
    grid = [float(v) for v in args.grid.split(",") if v != ""]
    if not grid:
        raise TopologyError("empty sweep grid")
    methods = args.methods.split(",")
    for m in methods:
        if m not in SWEEP_METHODS:
            raise TopologyError(f"unknown method {m!r}")

    rows: list[list] = []
    totals: dict[str, list[float]] = {m: [] for m in methods}
    for gi, value in enumerate(grid):
        point = _apply_sweep_value(spec, args.param, value)
        for m in methods:
            report = _run_method(point, m, args.slots, derive_seed(args.seed, gi))
            errs = report.metadata.get("stderr", [0.0] * point.link_count)
            for i in range(point.link_count):
                rows.append([args.param, f"{value:g}", point.link_ids[i], report.method,
                             f"{report.per_link[i]:.12g}", f"{errs[i]:.6g}"])
            totals[m].append(sum(report.per_link))

    argmax = {
        m: grid[max(range(len(grid)), key=lambda k: vals[k])]
        for m, vals in totals.items()
    }
    if args.format == "json-doc":
        _emit(_json_text({
            "parameter": args.param,
            "grid": grid,
            "rows": [dict(zip(
                ["parameter", "value", "link_id", "method", "throughput", "stderr"], r))
                for r in rows],
            "total_throughput": totals,
            "argmax_total": argmax,
        }), args.out)
    else:
        _emit(_csv_text(["parameter", "value", "link_id", "method", "throughput", "stderr"],
                        rows), args.out)
        for m in methods:
            sys.stderr.write(f"argmax total[{m}]: {args.param}={argmax[m]:g}\n")
    return 0


def cmd_compare(args) -> int:
    spec = load_network(args.spec)
    methods = args.methods.split(",")
    if len(methods) < 2:
        raise TopologyError("compare needs at least 2 methods")
    reports = {m: _run_method(spec, m, args.slots, args.seed) for m in methods}

    rows = []
    for i in range(spec.link_count):
        rows.append([spec.link_ids[i]] + [f"{reports[m].per_link[i]:.12g}" for m in methods])
    deviations = {}
    for a in methods:
        for b in methods:
            if a >= b:
                continue
            diffs = [abs(reports[a].per_link[i] - reports[b].per_link[i])
                     for i in range(spec.link_count)]
            scale = max(max(abs(v) for v in reports[a].per_link), 1e-300)
            deviations[f"{a}|{b}"] = {
                "max_abs": max(diffs),
                "max_rel": max(diffs) / scale,
            }

    violated = False
    if "approx" in reports and "exact" in reports:
        for i in range(spec.link_count):
            if reports["approx"].per_link[i] > reports["exact"].per_link[i] + DOMINANCE_TOL:
                violated = True

    if args.format == "json-doc":
        _emit(_json_text({
            "methods": methods,
            "throughput": {
                spec.link_ids[i]: {m: reports[m].per_link[i] for m in methods}
                for i in range(spec.link_count)
            },
            "deviations": deviations,
            "dominance_violated": violated,
        }), args.out)
    else:
        _emit(_csv_text(["link_id"] + methods, rows), args.out)
        for key, d in sorted(deviations.items()):
            sys.stderr.write(
                f"deviation {key}: max_abs={d['max_abs']:.3e} max_rel={d['max_rel']:.3e}\n")
    if violated:
        sys.stderr.write("dominance violated: approx > exact\n")
        return 1
    return 0


def _multibss_rows(m: MultiBssSpec, aggregate, per_node, errs=None):
    rows = []
    for gi, g in enumerate(m.groups):
        rows.append([
            g.label(), g.bss, " ".join(map(str, sorted(g.heard_by))), g.n,
            f"{g.q:.12g}", f"{aggregate[gi]:.12g}", f"{per_node[gi]:.12g}",
            f"{(errs[gi] if errs else 0.0):.6g}",
        ])
    return rows


def cmd_multibss(args) -> int:
    m = load_multibss(args.spec)
    if args.action == "analyze":
        rep = analyze_multibss(m)
        if args.format == "json-doc":
            _emit(_json_text({
                "method": rep.method,
                "groups": [
                    {"group": g.label(), "n": g.n, "q": g.q,
                     "aggregate": rep.per_group_aggregate[gi],
                     "per_node": rep.per_node[gi]}
                    for gi, g in enumerate(m.groups)
                ],
                "total": rep.total,
            }), args.out)
        else:
            rows = _multibss_rows(m, rep.per_group_aggregate, rep.per_node)
            rows.append(["TOTAL", "", "", "", "", "", f"{rep.total:.12g}", ""])
            _emit(_csv_text(
                ["group", "bss", "heard_by", "n", "q", "aggregate", "per_node", "stderr"],
                rows), args.out)
        return 0

    if args.action == "simulate":
        cfg = SimConfig(total_slots=args.slots, seed=args.seed, warmup_slots=args.warmup)
        _, _, (per_group, errs), total = simulate_multibss(m, cfg)
        aggregate = [per_group[gi] * g.n for gi, g in enumerate(m.groups)]
        if args.format == "json-doc":
            _emit(_json_text({
                "method": "simulated", "seed": args.seed, "slots": args.slots,
                "groups": [
                    {"group": g.label(), "n": g.n, "per_node": per_group[gi],
                     "stderr": errs[gi]}
                    for gi, g in enumerate(m.groups)
                ],
                "total": total,
            }), args.out)
        else:
            rows = _multibss_rows(m, aggregate, per_group, errs)
            rows.append(["TOTAL", "", "", "", "", "", f"{total:.12g}", ""])
            _emit(_csv_text(
                ["group", "bss", "heard_by", "n", "q", "aggregate", "per_node", "stderr"],
                rows), args.out)
        return 0

    # sweep over a common backoff window
    grid = [int(float(v)) for v in args.grid.split(",") if v != ""]
    if not grid:
        raise TopologyError("empty sweep grid")
    methods = args.methods.split(",")
    for meth in methods:
        if meth not in ("rtscts", "simulate"):
            raise TopologyError(f"multibss sweep supports rtscts|simulate, got {meth!r}")
    rows = []
    totals: dict[str, list[float]] = {meth: [] for meth in methods}
    for gi_point, w in enumerate(grid):
        groups = tuple(
            type(g)(bss=g.bss, heard_by=g.heard_by, n=g.n,
                    q=q_from_window(w), window=w)
            for g in m.groups
        )
        point = MultiBssSpec(bss_count=m.bss_count, groups=groups, tau=m.tau, mode=m.mode)
        for meth in methods:
            if meth == "rtscts":
                rep = analyze_multibss(point)
                per_node, errs, total = rep.per_node, None, rep.total
            else:
                cfg = SimConfig(total_slots=args.slots,
                                seed=derive_seed(args.seed, gi_point))
                _, _, (per_node, errs), total = simulate_multibss(point, cfg)
            for gi, g in enumerate(point.groups):
                rows.append(["W_all", w, g.label(), meth,
                             f"{per_node[gi]:.12g}",
                             f"{(errs[gi] if errs else 0.0):.6g}"])
            rows.append(["W_all", w, "TOTAL", meth, f"{total:.12g}", ""])
            totals[meth].append(total)
    argmax = {
        meth: grid[max(range(len(grid)), key=lambda k: vals[k])]
        for meth, vals in totals.items()
    }
    if args.format == "json-doc":
        _emit(_json_text({
            "parameter": "W_all", "grid": grid,
            "rows": [dict(zip(
                ["parameter", "value", "group", "method", "throughput", "stderr"], r))
                for r in rows],
            "total_throughput": totals,
            "argmax_total": argmax,
        }), args.out)
    else:
        _emit(_csv_text(["parameter", "value", "group", "method", "throughput", "stderr"],
                        rows), args.out)
        for meth in methods:
            sys.stderr.write(f"argmax total[{meth}]: W={argmax[meth]}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="csmanet",
        description="Throughput analysis of slotted CSMA networks with "
                    "arbitrary sensing and interference topologies.",
        epilog="Environment: CSMANET_STATE_CAP caps state enumeration "
               "(default 200000). Exit codes: 0 ok, 1 dominance violation, "
               "2 validation error, 3 guard rail.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, default_format="csv"):
        p.add_argument("--out", help="write output to this path instead of stdout")
        p.add_argument("--format", choices=["csv", "json-doc", "table"],
                       default=default_format)

    p = sub.add_parser("cliques", help="channel layout of the sensing graph")
    p.add_argument("spec")
    common(p, default_format="table")
    p.set_defaults(func=cmd_cliques)

    p = sub.add_parser("analyze", help="per-link throughput")
    p.add_argument("spec")
    p.add_argument("--method", choices=ANALYTIC_METHODS, default="exact")
    p.add_argument("--slots", type=int, default=10_000_000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--dump-states", action="store_true",
                   help="include the solved chain (states, projections, "
                        "signatures, holding times, pi, pi~)")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="event-driven slotted simulation")
    p.add_argument("spec")
    p.add_argument("--slots", type=int, required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--warmup", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="parameter sweep, long-format output")
    p.add_argument("spec")
    p.add_argument("--param", required=True,
                   help="W_all | q_all | tau | W:<link_id>")
    p.add_argument("--grid", required=True, help="comma-separated values")
    p.add_argument("--methods", required=True,
                   help=f"comma-separated subset of {','.join(SWEEP_METHODS)}")
    p.add_argument("--slots", type=int, default=10_000_000)
    p.add_argument("--seed", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="side-by-side method comparison")
    p.add_argument("spec")
    p.add_argument("--methods", required=True)
    p.add_argument("--slots", type=int, default=10_000_000)
    p.add_argument("--seed", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("multibss", help="grouped multi-BSS uplink networks")
    p.add_argument("action", choices=["analyze", "simulate", "sweep"])
    p.add_argument("spec")
    p.add_argument("--grid", default="", help="W values for sweep")
    p.add_argument("--methods", default="rtscts", help="rtscts,simulate")
    p.add_argument("--slots", type=int, default=10_000_000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--warmup", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_multibss)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (TopologyError, SubgraphConditionError, FileNotFoundError, IsADirectoryError) as e:
        sys.stderr.write(f"error: {e}\n")
        return 2
    except GuardRailError as e:
        sys.stderr.write(f"error: {e}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
