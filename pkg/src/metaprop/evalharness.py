"""Atrophy/recover evaluation: destroy a fraction of one property's values,
propagate over a chosen network, accept recommendations by per-node energy
percentile, and score precision/recall/F against the removed ground truth
over a (density x percentile) grid averaged across repeated runs.
"""

from __future__ import annotations

import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

from .netbuild import (
    COOCCURRENCE,
    AssociativeNetwork,
    build_cooccurrence,
    build_occurrence,
    normalize,
    parse_relation,
)
from .records import Repository, ResourceRecord
from .swarm import PropagationConfig, RecommendationStore, derive_seed, propagate

DEFAULT_DENSITIES = (0.01, 0.21, 0.41, 0.61, 0.81)
DEFAULT_PERCENTILES = tuple(round(i / 10, 1) for i in range(11))


@dataclass(frozen=True)
class ExperimentConfig:
    network_relations: Tuple[str, ...]  # relation labels (the mu_y axis)
    target_properties: Tuple[str, ...]  # property types to score (mu_x)
    densities: Tuple[float, ...] = DEFAULT_DENSITIES
    percentiles: Tuple[float, ...] = DEFAULT_PERCENTILES
    runs: int = 20
    propagation: PropagationConfig = field(default_factory=PropagationConfig)
    master_seed: int = 0

    def __post_init__(self):
        for d in self.densities:
            if not 0.0 < d < 1.0:
                raise ValueError(f"density must be in (0, 1), got {d}")
        for rho in self.percentiles:
            if not 0.0 <= rho <= 1.0:
                raise ValueError(f"percentile must be in [0, 1], got {rho}")
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")


@dataclass(frozen=True)
class AtrophyOutcome:
    atrophied_ids: FrozenSet[str]
    ground_truth: Mapping[Tuple[str, str], FrozenSet[str]]


@dataclass(frozen=True)
class MetricsRow:
    mu_y: str
    mu_x: str
    density: float
    percentile: float
    precision: float
    recall: float
    f_score: float
    f_score_max: float  # max single-run F for this cell
    runs_averaged: int
    nodes_scored: int
    anomalous: bool


@dataclass(frozen=True)
class CellError:
    mu_y: str
    mu_x: str
    density: float
    run: int
    message: str


@dataclass
class ExperimentResult:
    rows: List[MetricsRow]
    errors: List[CellError]


def kill_meta(
    repo: Repository, fraction: float, mu_x: str, rng: random.Random
) -> Tuple[Repository, AtrophyOutcome]:
    """Empty the ``mu_x`` value sets of floor(fraction * |repo|) resources
    chosen uniformly among those that have any; everything else untouched.
    Returns the atrophied repository and the removed ground truth."""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction must be in [0, 1], got {fraction}")
    eligible = [rid for rid in repo.ids() if repo.meta(rid, mu_x)]
    count = min(math.floor(fraction * len(repo)), len(eligible))
    chosen = set(rng.sample(eligible, count))
    truth: Dict[Tuple[str, str], FrozenSet[str]] = {}
    records = []
    for rec in repo:
        if rec.id in chosen:
            truth[(rec.id, mu_x)] = rec.properties[mu_x]
            props = {mu: v for mu, v in rec.properties.items() if mu != mu_x}
            records.append(ResourceRecord(rec.id, props))
        else:
            records.append(rec)
    return Repository(records), AtrophyOutcome(frozenset(chosen), truth)


def accept_meta(
    store: RecommendationStore, rho: float
) -> Dict[Tuple[str, str], FrozenSet[str]]:
    """Per (node, property) entry, accept every value whose energy is at or
    above the nearest-rank rho-quantile of that entry's own energies.
    rho=0 accepts everything; rho=1 accepts the max-energy tie set."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must be in [0, 1], got {rho}")
    accepted: Dict[Tuple[str, str], FrozenSet[str]] = {}
    for key, values in store.entries():
        energies = sorted(values.values())
        rank = max(1, math.ceil(rho * len(energies)))
        threshold = energies[rank - 1]
        accepted[key] = frozenset(v for v, e in values.items() if e >= threshold)
    return accepted


def precision(truth: FrozenSet[str], accepted: FrozenSet[str]) -> float:
    if not accepted:
        raise ValueError("precision undefined for an empty accepted set")
    return len(truth & accepted) / len(accepted)


def recall(truth: FrozenSet[str], accepted: FrozenSet[str]) -> float:
    if not truth:
        raise ValueError("recall undefined for an empty ground-truth set")
    return len(truth & accepted) / len(truth)


def f_score(pr: float, re: float) -> float:
    if pr + re == 0.0:
        return 0.0
    return 2.0 * pr * re / (pr + re)


def build_relation_network(
    repo: Repository, label: str, max_postings: Optional[int] = None
) -> AssociativeNetwork:
    """Build and normalize the network for a relation label."""
    relation = parse_relation(label)
    if relation.mu not in repo.property_types():
        raise ValueError(f"no property {relation.mu!r} in repository for relation {label!r}")
    if relation.kind == COOCCURRENCE:
        net = build_cooccurrence(repo, relation.mu, max_postings=max_postings)
    else:
        net = build_occurrence(repo, relation.mu)
    return normalize(net)


def _run_cell_once(
    net: AssociativeNetwork,
    repo: Repository,
    mu_x: str,
    density: float,
    percentiles: Sequence[float],
    prop_cfg: PropagationConfig,
    seed: int,
) -> Tuple[Dict[float, Tuple[float, float, float]], int]:
    """One atrophy+propagate run; returns per-rho (precision, recall, F)
    macro-averages over the atrophied nodes, plus how many were scored."""
    rng = random.Random(seed)
    atrophied_repo, outcome = kill_meta(repo, 1.0 - density, mu_x, rng)
    result = propagate(net, atrophied_repo, replace(prop_cfg, seed=seed))
    scored = sorted(outcome.atrophied_ids)
    per_rho: Dict[float, Tuple[float, float, float]] = {}
    for rho in percentiles:
        accepted_map = accept_meta(result.store, rho)
        pr_sum, pr_n, re_sum = 0.0, 0, 0.0
        for rid in scored:
            truth = outcome.ground_truth[(rid, mu_x)]
            acc = accepted_map.get((rid, mu_x), frozenset())
            if acc:
                pr_sum += precision(truth, acc)
                pr_n += 1
            re_sum += recall(truth, acc)
        pr = pr_sum / pr_n if pr_n else 0.0
        re = re_sum / len(scored) if scored else 0.0
        per_rho[rho] = (pr, re, f_score(pr, re))
    return per_rho, len(scored)


# networks and repo are shipped to workers once, at pool start, not per job
_WORKER_STATE: Dict[str, object] = {}


def _init_worker(networks, repo):
    _WORKER_STATE["networks"] = networks
    _WORKER_STATE["repo"] = repo


def _job(args):
    """Run one (mu_y, mu_x, density, run) job; failures become error markers
    so a bad cell never takes down the whole grid."""
    mu_y, mu_x, d_idx, run, density, percentiles, prop_cfg, seed = args
    net = _WORKER_STATE["networks"][mu_y]
    repo = _WORKER_STATE["repo"]
    try:
        value = _run_cell_once(net, repo, mu_x, density, percentiles, prop_cfg, seed)
    except Exception as exc:
        return (mu_y, mu_x, d_idx, run), ("err", str(exc))
    return (mu_y, mu_x, d_idx, run), ("ok", value)


def run_experiment(
    repo: Repository,
    cfg: ExperimentConfig,
    workers: int = 1,
    max_postings: Optional[int] = None,
) -> ExperimentResult:
    """Full grid: for each (mu_y, mu_x, density, run), atrophy and propagate
    once, then score every percentile.  Networks are built once per mu_y
    from the full repository.  Results are independent of ``workers``."""
    networks: Dict[str, AssociativeNetwork] = {}
    errors: List[CellError] = []
    jobs = []
    for mu_y in cfg.network_relations:
        try:
            net = build_relation_network(repo, mu_y, max_postings=max_postings)
        except Exception as exc:
            for mu_x in cfg.target_properties:
                for density in cfg.densities:
                    errors.append(CellError(mu_y, mu_x, density, -1, f"network build failed: {exc}"))
            continue
        networks[mu_y] = net
        for mu_x in cfg.target_properties:
            for d_idx, density in enumerate(cfg.densities):
                for run in range(cfg.runs):
                    seed = derive_seed(cfg.master_seed, mu_y, mu_x, d_idx, run)
                    jobs.append(
                        (mu_y, mu_x, d_idx, run, density, cfg.percentiles, cfg.propagation, seed)
                    )

    results: Dict[Tuple[str, str, int, int], Tuple[dict, int]] = {}
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=(networks, repo)
        ) as pool:
            outcomes = list(pool.map(_job, jobs, chunksize=1))
    else:
        _init_worker(networks, repo)
        outcomes = [_job(args) for args in jobs]
    for (mu_y, mu_x, d_idx, run), (status, value) in outcomes:
        if status == "ok":
            results[(mu_y, mu_x, d_idx, run)] = value
        else:
            errors.append(CellError(mu_y, mu_x, cfg.densities[d_idx], run, value))

    rows: List[MetricsRow] = []
    for mu_y in cfg.network_relations:
        if mu_y not in networks:
            continue
        source_mu = networks[mu_y].relation.mu
        for mu_x in cfg.target_properties:
            for d_idx, density in enumerate(cfg.densities):
                run_keys = [
                    (mu_y, mu_x, d_idx, run)
                    for run in range(cfg.runs)
                    if (mu_y, mu_x, d_idx, run) in results
                ]
                if not run_keys:
                    continue
                n_scored = results[run_keys[0]][1]
                for rho in cfg.percentiles:
                    prs = [results[k][0][rho][0] for k in run_keys]
                    res = [results[k][0][rho][1] for k in run_keys]
                    fs = [results[k][0][rho][2] for k in run_keys]
                    rows.append(
                        MetricsRow(
                            mu_y=mu_y,
                            mu_x=mu_x,
                            density=density,
                            percentile=rho,
                            precision=sum(prs) / len(prs),
                            recall=sum(res) / len(res),
                            f_score=sum(fs) / len(fs),
                            f_score_max=max(fs),
                            runs_averaged=len(run_keys),
                            nodes_scored=n_scored,
                            anomalous=(source_mu == mu_x),
                        )
                    )
    return ExperimentResult(rows, errors)


RESULTS_HEADER = (
    "mu_y\tmu_x\tdensity\tpercentile\tprecision\trecall\tfscore\truns\t"
    "nodes_scored\tanomalous\tfscore_max"
)


def save_results(rows: Sequence[MetricsRow], destination) -> None:
    with open(destination, "w", encoding="utf-8") as fh:
        fh.write(RESULTS_HEADER + "\n")
        for r in rows:
            fh.write(
                f"{r.mu_y}\t{r.mu_x}\t{r.density!r}\t{r.percentile!r}\t"
                f"{r.precision!r}\t{r.recall!r}\t{r.f_score!r}\t{r.runs_averaged}\t"
                f"{r.nodes_scored}\t{int(r.anomalous)}\t{r.f_score_max!r}\n"
            )


def load_results(source) -> List[MetricsRow]:
    rows: List[MetricsRow] = []
    with open(source, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != RESULTS_HEADER:
            raise ValueError(f"{source}: not a results file (bad header)")
        for line_no, line in enumerate(fh, start=2):
            stripped = line.rstrip("\n")
            if not stripped:
                continue
            parts = stripped.split("\t")
            if len(parts) != 11:
                raise ValueError(f"{source}:{line_no}: expected 11 fields, got {len(parts)}")
            rows.append(
                MetricsRow(
                    mu_y=parts[0],
                    mu_x=parts[1],
                    density=float(parts[2]),
                    percentile=float(parts[3]),
                    precision=float(parts[4]),
                    recall=float(parts[5]),
                    f_score=float(parts[6]),
                    f_score_max=float(parts[10]),
                    runs_averaged=int(parts[7]),
                    nodes_scored=int(parts[8]),
                    anomalous=bool(int(parts[9])),
                )
            )
    return rows


def pair_summaries(rows: Sequence[MetricsRow]) -> Dict[Tuple[str, str], Tuple[float, float, bool]]:
    """(mu_y, mu_x) -> (max F, mean F, anomalous) over the density/percentile grid."""
    grouped: Dict[Tuple[str, str], List[MetricsRow]] = {}
    for r in rows:
        grouped.setdefault((r.mu_y, r.mu_x), []).append(r)
    out = {}
    for key, cells in sorted(grouped.items()):
        fs = [c.f_score for c in cells]
        out[key] = (max(fs), sum(fs) / len(fs), cells[0].anomalous)
    return out


def landscape_text(rows: Sequence[MetricsRow], mu_y: str, mu_x: str) -> str:
    """One density x percentile F-score matrix as plain TSV text."""
    cells = {(r.density, r.percentile): r.f_score for r in rows if r.mu_y == mu_y and r.mu_x == mu_x}
    densities = sorted({d for d, _ in cells})
    percentiles = sorted({p for _, p in cells})
    lines = ["density\\percentile\t" + "\t".join(repr(p) for p in percentiles)]
    for d in densities:
        vals = "\t".join(repr(cells[(d, p)]) for p in percentiles)
        lines.append(f"{d!r}\t{vals}")
    return "\n".join(lines) + "\n"


def write_landscapes(rows: Sequence[MetricsRow], directory) -> List[str]:
    """Write one landscape matrix file per (mu_y, mu_x) pair; returns paths."""
    import os

    os.makedirs(directory, exist_ok=True)
    paths = []
    pairs = sorted({(r.mu_y, r.mu_x) for r in rows})
    for mu_y, mu_x in pairs:
        path = os.path.join(directory, f"{mu_y}__{mu_x}.tsv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(landscape_text(rows, mu_y, mu_x))
        paths.append(path)
    return paths
