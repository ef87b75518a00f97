"""Occurrence and co-occurrence associative network construction.

A network is a directed, weighted, relation-labeled graph over resource ids.
Occurrence networks come from direct references (a resource listing another
resource's id, e.g. citations); co-occurrence networks connect resources that
share property values, weighted by overlap:

    w(i, j) = |shared| / (|values_i| + |values_j| - |shared|)

Outgoing weights can be normalized into per-node probability distributions
for the particle walk.
"""

from __future__ import annotations

import itertools
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

from .records import Repository

OCCURRENCE = "occurrence"
COOCCURRENCE = "cooccurrence"


class RelationError(ValueError):
    pass


class AlreadyNormalizedError(ValueError):
    pass


class NetworkFormatError(ValueError):
    def __init__(self, location: str, message: str):
        super().__init__(f"{location}: {message}")
        self.location = location


@dataclass(frozen=True)
class Relation:
    """Which property a network was built from, and how."""

    kind: str  # OCCURRENCE or COOCCURRENCE
    mu: str

    def __post_init__(self):
        if self.kind not in (OCCURRENCE, COOCCURRENCE):
            raise RelationError(f"unknown relation kind: {self.kind!r}")
        if not self.mu or any(c.isspace() for c in self.mu):
            raise RelationError(f"bad property type in relation: {self.mu!r}")

    @property
    def label(self) -> str:
        return self.mu if self.kind == OCCURRENCE else "co" + self.mu


def parse_relation(label: str) -> Relation:
    """Parse a relation label such as "cite", "cokey", "occ:cost", "co:key".

    Labels starting with "co" are co-occurrence relations over the remainder
    ("cokey" -> co-occurrence over "key"); anything else is an occurrence
    relation.  The explicit "occ:"/"co:" forms disambiguate property names
    that themselves start with "co".
    """
    if not label or any(c.isspace() for c in label):
        raise RelationError(f"unknown relation label: {label!r}")
    if label.startswith("occ:"):
        return Relation(OCCURRENCE, label[4:])
    if label.startswith("co:"):
        return Relation(COOCCURRENCE, label[3:])
    if label.startswith("co") and len(label) > 2:
        return Relation(COOCCURRENCE, label[2:])
    if label == "co":
        raise RelationError(f"unknown relation label: {label!r}")
    return Relation(OCCURRENCE, label)


class AssociativeNetwork:
    """Directed weighted graph over resource ids, immutable once built."""

    def __init__(
        self,
        relation: Relation,
        nodes: Iterable[str],
        adjacency: Dict[str, Dict[str, float]],
        normalized: bool = False,
        dangling: int = 0,
    ):
        self.relation = relation
        self.nodes = frozenset(nodes)
        self._adj = {src: dict(dsts) for src, dsts in adjacency.items() if dsts}
        self.normalized = normalized
        self.dangling = dangling
        self._sorted_out: Dict[str, Tuple[Tuple[str, float], ...]] = {}
        for src, dsts in self._adj.items():
            if src not in self.nodes:
                raise ValueError(f"edge source {src!r} not in node set")
            for dst, w in dsts.items():
                if dst == src:
                    raise ValueError(f"self-loop on {src!r}")
                if dst not in self.nodes:
                    raise ValueError(f"edge target {dst!r} not in node set")
                if not w > 0.0:
                    raise ValueError(f"non-positive weight on ({src!r}, {dst!r})")

    def out_edges(self, node: str) -> Tuple[Tuple[str, float], ...]:
        """Outgoing (dst, weight) pairs sorted by destination id."""
        cached = self._sorted_out.get(node)
        if cached is None:
            cached = tuple(sorted(self._adj.get(node, {}).items()))
            self._sorted_out[node] = cached
        return cached

    def weight(self, src: str, dst: str) -> Optional[float]:
        return self._adj.get(src, {}).get(dst)

    def edges(self):
        """All (src, dst, weight) triples in sorted order."""
        for src in sorted(self._adj):
            for dst in sorted(self._adj[src]):
                yield src, dst, self._adj[src][dst]

    @property
    def edge_count(self) -> int:
        return sum(len(d) for d in self._adj.values())

    @property
    def pair_count(self) -> int:
        """Number of unordered node pairs joined by at least one edge."""
        pairs = set()
        for src, dsts in self._adj.items():
            for dst in dsts:
                pairs.add((src, dst) if src < dst else (dst, src))
        return len(pairs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AssociativeNetwork):
            return NotImplemented
        return (
            self.relation == other.relation
            and self.nodes == other.nodes
            and self._adj == other._adj
            and self.normalized == other.normalized
        )


def build_occurrence(repo: Repository, mu: str) -> AssociativeNetwork:
    """Network of direct references: each listed target gets weight
    1/|values|, where the denominator counts ALL listed values (including
    self-references and ids missing from the repository).  Self-loops are
    dropped; references to unknown ids are dropped but tallied in
    ``dangling``.
    """
    adj: Dict[str, Dict[str, float]] = {}
    dangling = 0
    for rec in repo:
        vals = rec.values(mu)
        if not vals:
            continue
        w = 1.0 / len(vals)
        out: Dict[str, float] = {}
        for target in sorted(vals):
            if target == rec.id:
                continue
            if target in repo:
                out[target] = w
            else:
                dangling += 1
        if out:
            adj[rec.id] = out
    return AssociativeNetwork(Relation(OCCURRENCE, mu), repo.ids(), adj, dangling=dangling)


def build_cooccurrence(
    repo: Repository, mu: str, max_postings: Optional[int] = None
) -> AssociativeNetwork:
    """Symmetric network of shared property values, via an inverted index.

    Equivalent to the brute-force all-pairs definition: for every pair with a
    nonempty value intersection of size c, both directed edges get weight
    c / (|values_i| + |values_j| - c).  ``max_postings`` optionally skips
    values held by more than that many resources (off by default; results
    are exact when off).
    """
    postings: Dict[str, List[str]] = defaultdict(list)
    sizes: Dict[str, int] = {}
    for rec in repo:  # iteration is sorted by id, so postings come out sorted
        vals = rec.values(mu)
        if not vals:
            continue
        sizes[rec.id] = len(vals)
        for v in vals:
            postings[v].append(rec.id)
    shared: Counter = Counter()
    for v in postings:
        ids = postings[v]
        if max_postings is not None and len(ids) > max_postings:
            continue
        for pair in itertools.combinations(ids, 2):
            shared[pair] += 1
    adj: Dict[str, Dict[str, float]] = defaultdict(dict)
    for (i, j), co in shared.items():
        w = co / (sizes[i] + sizes[j] - co)
        adj[i][j] = w
        adj[j][i] = w
    return AssociativeNetwork(Relation(COOCCURRENCE, mu), repo.ids(), adj)


def normalize(net: AssociativeNetwork) -> AssociativeNetwork:
    """Scale each node's outgoing weights into a probability distribution.

    Nodes without outgoing edges are unchanged.  Normalizing an already
    normalized network is an error.
    """
    if net.normalized:
        raise AlreadyNormalizedError(f"network {net.relation.label!r} is already normalized")
    adj: Dict[str, Dict[str, float]] = {}
    for src in sorted(net.nodes):
        out = net.out_edges(src)
        if not out:
            continue
        total = 0.0
        for _, w in out:
            total += w
        adj[src] = {dst: w / total for dst, w in out}
    return AssociativeNetwork(net.relation, net.nodes, adj, normalized=True, dangling=net.dangling)


def save_network(net: AssociativeNetwork, destination) -> None:
    """Write a network as a TSV edge list.

    Header: label, node count, edge count, normalized flag, dangling tally.
    Body: one line per isolated node (single field), then one line per edge
    ``src\\tdst\\tweight`` with the weight in C99 hex-float form so round
    trips are bit-exact.
    """
    touched = set()
    for src, dst, _ in net.edges():
        touched.add(src)
        touched.add(dst)
    with open(destination, "w", encoding="utf-8") as fh:
        fh.write(
            f"{net.relation.label}\t{len(net.nodes)}\t{net.edge_count}\t"
            f"{int(net.normalized)}\t{net.dangling}\n"
        )
        for node in sorted(net.nodes - touched):
            fh.write(node + "\n")
        for src, dst, w in net.edges():
            fh.write(f"{src}\t{dst}\t{w.hex()}\n")


def load_network(source) -> AssociativeNetwork:
    with open(source, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header.strip():
            raise NetworkFormatError(f"{source}:1", "missing header line")
        fields = header.rstrip("\n").split("\t")
        if len(fields) != 5:
            raise NetworkFormatError(f"{source}:1", f"bad header ({len(fields)} fields, expected 5)")
        label, node_count_s, edge_count_s, normalized_s, dangling_s = fields
        try:
            relation = parse_relation(label)
        except RelationError as exc:
            raise NetworkFormatError(f"{source}:1", str(exc)) from exc
        try:
            node_count = int(node_count_s)
            edge_count = int(edge_count_s)
            normalized = bool(int(normalized_s))
            dangling = int(dangling_s)
        except ValueError as exc:
            raise NetworkFormatError(f"{source}:1", f"bad header counts: {exc}") from exc
        nodes = set()
        adj: Dict[str, Dict[str, float]] = defaultdict(dict)
        n_edges = 0
        for line_no, line in enumerate(fh, start=2):
            stripped = line.rstrip("\n")
            if not stripped:
                continue
            parts = stripped.split("\t")
            if len(parts) == 1:
                nodes.add(parts[0])
            elif len(parts) == 3:
                src, dst, w_s = parts
                try:
                    w = float.fromhex(w_s)
                except ValueError as exc:
                    raise NetworkFormatError(f"{source}:{line_no}", f"bad weight {w_s!r}") from exc
                nodes.add(src)
                nodes.add(dst)
                adj[src][dst] = w
                n_edges += 1
            else:
                raise NetworkFormatError(
                    f"{source}:{line_no}", f"expected 1 or 3 fields, got {len(parts)}"
                )
        if len(nodes) != node_count or n_edges != edge_count:
            raise NetworkFormatError(
                str(source),
                f"truncated or corrupt file: header says {node_count} nodes/"
                f"{edge_count} edges, found {len(nodes)}/{n_edges}",
            )
        return AssociativeNetwork(relation, nodes, adj, normalized=normalized, dangling=dangling)
