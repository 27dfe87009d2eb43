"""Command-line interface.

Subcommands: generate, paths, solve, simulate, compare, gadget, serve.
Exit codes: 0 on success, 2 on usage errors, 1 on runtime failures.
Outputs are deterministic for fixed arguments, inputs, and seeds.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

from .errors import PathcutterError
from .generate import (
    GeneratorConfig,
    build_reduction_gadget,
    generate_tiered_graph,
    merge_supernodes,
    preset_graph,
)
from .graph import AttackGraph, enumerate_paths, load_graph
from .mdp import QueryState, RewardSpec
from .policies import DprConfig, POLICY_KINDS, dpr_solve, make_policy, opt_solve
from .service import SessionStore, bind_address, create_app
from .simulate import compare_policies, monte_carlo, report_to_csv, stats_csv


def _add_policy_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--budget", type=int, default=10, help="round budget (default 10)")
    p.add_argument("--alpha", type=float, default=None,
                   help="exhaustion penalty (default 2*budget)")
    p.add_argument("--tau", type=int, default=16,
                   help="DPR action sample width (default 16)")
    p.add_argument("--lookahead", type=int, default=4,
                   help="DPR horizon depth (default 4)")
    p.add_argument("--frontier", default="min-cut-estimate",
                   choices=("min-cut-estimate", "alpha-pessimistic"),
                   help="DPR frontier valuation")
    p.add_argument("--samplers", default="APP,OTH1,OTH2",
                   help="DPR sampler subset, comma separated")
    p.add_argument("--hop-cap", type=int, default=None,
                   help="max path hops for enumeration (default: node count)")


def _spec_of(args) -> RewardSpec:
    alpha = args.alpha if args.alpha is not None else 2.0 * args.budget
    return RewardSpec(alpha=alpha)


def _dpr_of(args) -> DprConfig:
    return DprConfig(
        lookahead=args.lookahead,
        tau=args.tau,
        frontier=args.frontier,
        samplers=tuple(s.strip().upper() for s in args.samplers.split(",") if s.strip()),
    )


def _write_out(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _graph_doc_text(g: AttackGraph) -> str:
    return json.dumps(g.to_doc(), indent=2, sort_keys=True)


def _load(path: str) -> AttackGraph:
    return load_graph(path)


def _gname(path: str) -> str:
    return os.path.splitext(os.path.basename(path))[0]


# -- subcommand handlers -----------------------------------------------------


def _cmd_generate(args) -> int:
    if args.preset is not None:
        g = preset_graph(args.preset, seed=args.seed)
    else:
        if args.config is not None:
            with open(args.config, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
            raw.setdefault("seed", args.seed)
            if "tier_sizes" not in raw:
                raise PathcutterError("config file must define tier_sizes")
            raw["tier_sizes"] = tuple(raw["tier_sizes"])
            try:
                cfg = GeneratorConfig(**raw)
            except TypeError as exc:
                raise PathcutterError(f"bad config file: {exc}") from None
        else:
            if args.tier_sizes is None:
                raise PathcutterError(
                    "generate needs --preset, --config, or --tier-sizes"
                )
            sizes = tuple(int(s) for s in args.tier_sizes.split(","))
            cfg = GeneratorConfig(
                tier_sizes=sizes,
                intra_density=args.intra_density,
                downward_density=args.downward_density,
                defined_ratio=args.defined_ratio,
                misconfig_level=None if args.misconfigs is not None else args.level,
                misconfig_count=args.misconfigs,
                conf_model=args.conf_model,
                seed=args.seed,
            )
        g = generate_tiered_graph(cfg)
        if args.merge:
            g = merge_supernodes(g)
    _write_out(_graph_doc_text(g), args.out)
    return 0


def _cmd_paths(args) -> int:
    g = _load(args.graph)
    catalog = enumerate_paths(g, hop_cap=args.hop_cap)
    sys.stdout.write(f"{len(catalog)}\n")
    return 0


def _cmd_solve(args) -> int:
    g = _load(args.graph)
    catalog = enumerate_paths(g, hop_cap=args.hop_cap)
    spec = _spec_of(args)
    kind = args.policy.upper()
    if kind == "OPT":
        table = opt_solve(g, catalog, args.budget, spec)
        value = table.u_root
        export = table.to_json()
    elif kind == "DPR":
        value, action = dpr_solve(
            g, catalog, QueryState(), args.budget, _dpr_of(args), spec
        )
        export = json.dumps(
            {
                "budget": args.budget,
                "alpha": spec.alpha,
                "root": {"u": value, "action": action},
            }
        )
    else:
        raise PathcutterError("solve supports --policy OPT or DPR")
    if args.export is not None:
        with open(args.export, "w", encoding="utf-8") as fh:
            fh.write(export)
    sys.stdout.write(f"{value!r}\n")
    return 0


def _make(args, kind: str):
    def factory(g, catalog):
        return make_policy(
            kind, g, catalog, args.budget, spec=_spec_of(args), dpr_config=_dpr_of(args)
        )

    return factory


def _cmd_simulate(args) -> int:
    g = _load(args.graph)
    catalog = enumerate_paths(g, hop_cap=args.hop_cap)
    policy = _make(args, args.policy.upper())(g, catalog)
    transcripts = [] if args.transcripts else None

    def keep(_i, t):
        transcripts.append(
            [
                {"round": r.round, "path_index": r.path_index, "edge_chosen": r.edge_chosen}
                for r in t.rounds
            ]
        )

    stats = monte_carlo(
        policy, g, catalog, args.budget, args.trials, args.seed,
        include_failed=not args.successes_only,
        on_transcript=keep if transcripts is not None else None,
    )
    if transcripts is not None:
        with open(args.transcripts, "w", encoding="utf-8") as fh:
            json.dump(transcripts, fh)
    sys.stdout.write(
        stats_csv([(_gname(args.graph), policy.kind, stats, None)])
    )
    return 0


def _cmd_compare(args) -> int:
    graphs = []
    for path in args.graphs:
        g = _load(path)
        graphs.append((_gname(path), g, enumerate_paths(g, hop_cap=args.hop_cap)))
    kinds = [k.upper() for k in args.policies]
    policies = [(kind, _make(args, kind)) for kind in kinds]
    report = compare_policies(graphs, policies, args.budget, args.trials, args.seed)
    _write_out(report_to_csv(report), args.out)
    return 0


def _cmd_gadget(args) -> int:
    base = _load(args.base)
    g = build_reduction_gadget(base, args.budget, args.high, args.low)
    _write_out(_graph_doc_text(g), args.out)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    store = SessionStore(persist_dir=args.persist_dir)
    app = create_app(store)
    host, port = bind_address()
    uvicorn.run(app, host=host, port=port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathcutter",
        description="Plan, simulate, and serve adaptive attack-path removal.",
    )
    parser.add_argument(
        "--json-errors", action="store_true",
        help="emit runtime errors as JSON on stderr",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a tiered graph document")
    p.add_argument("--preset", default=None, help="GS or G1 (merged output)")
    p.add_argument("--config", default=None, help="GeneratorConfig as JSON file")
    p.add_argument("--tier-sizes", default=None, help="e.g. 3,15,6 (tier0 first)")
    p.add_argument("--intra-density", type=float, default=0.08)
    p.add_argument("--downward-density", type=float, default=None)
    p.add_argument("--defined-ratio", type=float, default=0.95)
    p.add_argument("--level", type=int, default=3, help="misconfiguration level 1..5")
    p.add_argument("--misconfigs", type=int, default=None,
                   help="explicit misconfiguration edge count (overrides --level)")
    p.add_argument("--conf-model", default="uniform", choices=("uniform", "two-class"))
    p.add_argument("--merge", action="store_true",
                   help="contract tier-0 and lowest-tier supernodes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("paths", help="count source-target paths")
    p.add_argument("--graph", required=True)
    p.add_argument("--hop-cap", type=int, default=None)
    p.set_defaults(func=_cmd_paths)

    p = sub.add_parser("solve", help="root value of OPT or DPR")
    p.add_argument("--graph", required=True)
    p.add_argument("--policy", default="OPT")
    p.add_argument("--export", default=None, help="write the value table as JSON")
    _add_policy_flags(p)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("simulate", help="Monte-Carlo trials for one policy")
    p.add_argument("--graph", required=True)
    p.add_argument("--policy", required=True, choices=POLICY_KINDS)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--successes-only", action="store_true",
                   help="average successful trials only")
    p.add_argument("--transcripts", default=None,
                   help="write per-trial transcripts to this JSON file")
    _add_policy_flags(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("compare", help="paired comparison across policies")
    p.add_argument("--graphs", nargs="+", required=True)
    p.add_argument("--policies", nargs="+", required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="CSV output file (default stdout)")
    _add_policy_flags(p)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("gadget", help="expand a base graph into the parallel-edge gadget")
    p.add_argument("--base", required=True)
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--high", type=float, default=1.0)
    p.add_argument("--low", type=float, default=1e-6)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_gadget)

    p = sub.add_parser("serve", help=f"run the HTTP session service (bind via $PATHCUTTER_BIND)")
    p.add_argument("--persist-dir", default=None,
                   help="append-only event log directory (default: in-memory)")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (PathcutterError, OSError, json.JSONDecodeError) as exc:
        if args.json_errors:
            sys.stderr.write(
                json.dumps(
                    {"error": type(exc).__name__, "detail": str(exc)}
                )
                + "\n"
            )
        else:
            sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
