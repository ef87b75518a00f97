"""Command-line pipeline: ingest records, build networks, propagate
metadata, run the evaluation grid, and render result tables.

Record files are JSON lines, one record per line:

    {"id": "m1", "properties": {"key": ["swarm", "algorithms"], "jour": ["tois"]}}

Relation labels: a bare property name is an occurrence relation over that
property ("cite"); a "co" prefix is a co-occurrence relation ("cokey",
"coauth").  Explicit "occ:NAME" / "co:NAME" forms disambiguate property
names that start with "co".
"""

from __future__ import annotations

import argparse
import random as _random
import sys

from . import evalharness, netbuild, records, swarm


def _err(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def _float_list(text: str):
    return tuple(float(x) for x in text.split(",") if x.strip())


def _str_list(text: str):
    return tuple(x.strip() for x in text.split(",") if x.strip())


def cmd_ingest(args) -> int:
    try:
        with open(args.input, "r", encoding="utf-8") as fh:
            repo = records.ingest(fh)
    except (OSError, records.RecordError) as exc:
        return _err(str(exc))
    records.save_repository(repo, args.output)
    print(f"{len(repo)} records, {len(repo.property_types())} property types")
    return 0


def _valid_labels(repo) -> list:
    props = repo.property_types()
    return props + ["co" + p for p in props]


def cmd_build(args) -> int:
    try:
        repo = records.load_repository(args.repo)
    except (OSError, records.RecordError) as exc:
        return _err(str(exc))
    try:
        relation = netbuild.parse_relation(args.relation)
    except netbuild.RelationError as exc:
        return _err(f"{exc}; valid labels for this repository: {', '.join(_valid_labels(repo))}")
    if relation.mu not in repo.property_types():
        return _err(
            f"no property {relation.mu!r} in repository; valid labels: "
            f"{', '.join(_valid_labels(repo))}"
        )
    if relation.kind == netbuild.COOCCURRENCE:
        net = netbuild.build_cooccurrence(repo, relation.mu, max_postings=args.postings_cap)
    else:
        net = netbuild.build_occurrence(repo, relation.mu)
        if net.edge_count == 0 and net.dangling == 0:
            return _err(
                f"occurrence relation {relation.label!r} produced no edges: "
                f"values of {relation.mu!r} do not look like resource identifiers"
            )
    if not args.no_normalize:
        net = netbuild.normalize(net)
    netbuild.save_network(net, args.output)
    print(
        f"relation={net.relation.label} nodes={len(net.nodes)} "
        f"directed_edges={net.edge_count} unordered_pairs={net.pair_count} "
        f"dangling={net.dangling} normalized={int(net.normalized)}"
    )
    return 0


def cmd_propagate(args) -> int:
    try:
        net = netbuild.load_network(args.network)
    except (OSError, netbuild.NetworkFormatError) as exc:
        return _err(str(exc))
    try:
        repo = records.load_repository(args.repo)
    except (OSError, records.RecordError) as exc:
        return _err(str(exc))
    if not net.normalized:
        if not args.normalize:
            return _err("network is not normalized; pass --normalize to normalize on load")
        net = netbuild.normalize(net)
    seed = args.seed
    if seed is None:
        seed = _random.SystemRandom().randrange(2**63)
    print(f"seed={seed}")
    cfg = swarm.PropagationConfig(
        delta=args.delta, max_steps=args.max_steps, energy_floor=args.energy_floor, seed=seed
    )
    result = swarm.propagate(net, repo, cfg)
    swarm.save_store(result.store, args.output)
    print(result.report())
    return 0


def _print_pair_tables(summaries) -> None:
    print("pair\tmax_fscore\tmean_fscore\tanomalous")
    for (mu_y, mu_x), (fmax, fmean, anomalous) in summaries.items():
        flag = " *" if anomalous else ""
        print(f"{mu_y}/{mu_x}\t{fmax:.4f}\t{fmean:.4f}\t{int(anomalous)}{flag}")


def cmd_experiment(args) -> int:
    try:
        repo = records.load_repository(args.repo)
    except (OSError, records.RecordError) as exc:
        return _err(str(exc))
    seed = args.seed
    if seed is None:
        seed = _random.SystemRandom().randrange(2**63)
    print(f"seed={seed}")
    try:
        cfg = evalharness.ExperimentConfig(
            network_relations=_str_list(args.relations),
            target_properties=_str_list(args.properties),
            densities=_float_list(args.densities),
            percentiles=_float_list(args.percentiles),
            runs=args.runs,
            propagation=swarm.PropagationConfig(
                delta=args.delta, max_steps=args.max_steps, energy_floor=args.energy_floor
            ),
            master_seed=seed,
        )
    except ValueError as exc:
        return _err(str(exc))
    result = evalharness.run_experiment(
        repo, cfg, workers=args.workers, max_postings=args.postings_cap
    )
    evalharness.save_results(result.rows, args.output)
    if args.landscape_dir:
        evalharness.write_landscapes(result.rows, args.landscape_dir)
    _print_pair_tables(evalharness.pair_summaries(result.rows))
    for e in result.errors:
        print(
            f"cell error: {e.mu_y}/{e.mu_x} density={e.density} run={e.run}: {e.message}",
            file=sys.stderr,
        )
    if result.errors:
        print(f"{len(result.errors)} cell failures recorded", file=sys.stderr)
    if not result.rows:
        return _err("all cells failed")
    return 0


def cmd_report(args) -> int:
    try:
        rows = evalharness.load_results(args.results)
    except (OSError, ValueError) as exc:
        return _err(str(exc))
    if not rows:
        return _err(f"{args.results}: results file contains no rows")
    _print_pair_tables(evalharness.pair_summaries(rows))
    for mu_y, mu_x in sorted({(r.mu_y, r.mu_x) for r in rows}):
        print(f"\nF-score landscape {mu_y}/{mu_x} (rows: density, columns: percentile)")
        print(evalharness.landscape_text(rows, mu_y, mu_x), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metaprop", description="Associative-network metadata propagation pipeline"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse a record file into a repository store")
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("build-network", help="build an associative network from a repository")
    p.add_argument("repo")
    p.add_argument("--relation", required=True, help="relation label, e.g. cite, cokey, coauth")
    p.add_argument("--output", required=True)
    p.add_argument("--no-normalize", action="store_true", help="keep raw edge weights")
    p.add_argument("--postings-cap", type=int, default=None,
                   help="skip co-occurrence values held by more than this many resources")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("propagate", help="run particle propagation over a saved network")
    p.add_argument("network")
    p.add_argument("repo")
    p.add_argument("--output", required=True, help="recommendation store dump path")
    p.add_argument("--delta", type=float, default=0.15)
    p.add_argument("--max-steps", type=int, default=50)
    p.add_argument("--energy-floor", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--normalize", action="store_true", help="normalize an unnormalized network on load")
    p.set_defaults(func=cmd_propagate)

    p = sub.add_parser("experiment", help="run the atrophy/recover evaluation grid")
    p.add_argument("repo")
    p.add_argument("--relations", required=True, help="comma-separated relation labels (mu_y)")
    p.add_argument("--properties", required=True, help="comma-separated property types (mu_x)")
    p.add_argument("--densities", default="0.01,0.21,0.41,0.61,0.81")
    p.add_argument("--percentiles", default="0.0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0")
    p.add_argument("--runs", type=int, default=20)
    p.add_argument("--delta", type=float, default=0.15)
    p.add_argument("--max-steps", type=int, default=50)
    p.add_argument("--energy-floor", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--postings-cap", type=int, default=None)
    p.add_argument("--output", required=True, help="results TSV path")
    p.add_argument("--landscape-dir", default=None, help="write per-pair F-score matrices here")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("report", help="print tables and landscapes from a results file")
    p.add_argument("results")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
