"""Firm-to-firm interlock graph: projection, components, node merging, I/O."""

from __future__ import annotations

import csv
from collections import defaultdict, deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .exceptions import EmptyInput, InvalidPartition, IOFailure
from .ingest import AffiliationTable, format_decimal

ATTRIBUTES = ("revenue_usd", "employees", "market_cap_usd")
MERGE_POLICIES = ("sum", "max")


@dataclass(frozen=True)
class FirmNode:
    node_id: int
    member_firm_ids: frozenset[str]
    board: frozenset[str] = frozenset()
    guo_id: str | None = None
    attributes: Mapping[str, float | None] = field(default_factory=dict)
    # attributes whose merged value is missing at least one member's contribution
    partial: frozenset[str] = frozenset()

    @property
    def label(self) -> str:
        """Smallest member firm id; stable name for a (possibly merged) node."""
        return min(self.member_firm_ids)


@dataclass(frozen=True, eq=False)
class FirmGraph:
    nodes: tuple[FirmNode, ...]
    adjacency: tuple[tuple[int, ...], ...]
    provenance: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.nodes) != len(self.adjacency):
            raise ValueError("nodes and adjacency differ in length")

    def __eq__(self, other):
        if not isinstance(other, FirmGraph):
            return NotImplemented
        return self.nodes == other.nodes and self.adjacency == other.adjacency

    __hash__ = None

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @cached_property
    def n_edges(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def edges(self) -> Iterator[tuple[int, int]]:
        for u, nbrs in enumerate(self.adjacency):
            for v in nbrs:
                if u < v:
                    yield u, v

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.fromiter((len(a) for a in self.adjacency), dtype=np.int64, count=self.n_nodes)

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """``(indptr, indices)`` of the symmetric adjacency."""
        indptr = np.zeros(self.n_nodes + 1, dtype=np.int64)
        np.cumsum(self.degrees, out=indptr[1:])
        if self.n_nodes:
            indices = np.fromiter((v for a in self.adjacency for v in a), dtype=np.int64, count=int(indptr[-1]))
        else:
            indices = np.zeros(0, dtype=np.int64)
        return indptr, indices

    def sparse_adjacency(self):
        import scipy.sparse as sp

        indptr, indices = self.csr
        data = np.ones(len(indices), dtype=np.float64)
        return sp.csr_matrix((data, indices, indptr), shape=(self.n_nodes, self.n_nodes))

    @cached_property
    def firm_index(self) -> dict[str, int]:
        return {fid: n.node_id for n in self.nodes for fid in n.member_firm_ids}

    def attribute(self, name: str) -> np.ndarray:
        """Per-node attribute values, NaN where absent."""
        return np.array([np.nan if n.attributes.get(name) is None else n.attributes[name] for n in self.nodes],
                        dtype=float)

    def with_provenance(self, stage: str) -> "FirmGraph":
        return FirmGraph(self.nodes, self.adjacency, self.provenance + (stage,))


def _from_edge_set(nodes: Sequence[FirmNode], edges: Iterable[tuple[int, int]], provenance=()) -> FirmGraph:
    adj: list[set[int]] = [set() for _ in nodes]
    for u, v in edges:
        if u == v:
            continue
        adj[u].add(v)
        adj[v].add(u)
    return FirmGraph(tuple(nodes), tuple(tuple(sorted(a)) for a in adj), tuple(provenance))


def from_edges(n_nodes: int, edges: Iterable[tuple[int, int]], labels: Sequence[str] | None = None) -> FirmGraph:
    """Bare graph on ``n_nodes`` nodes; useful for tests and metrics-only runs."""
    if labels is None:
        labels = [str(i) for i in range(n_nodes)]
    nodes = [FirmNode(i, frozenset([labels[i]])) for i in range(n_nodes)]
    return _from_edge_set(nodes, edges)


def project(table: AffiliationTable, country_filter: str | None = None) -> FirmGraph:
    """Firm-to-firm projection: firms are adjacent iff they share a director.

    Node ids follow sorted ``firm_id``. Isolated firms are kept.
    """
    table = table.filter_country(country_filter)
    if not table.companies:
        raise EmptyInput("no firms to project" + (f" for country {country_filter}" if country_filter else ""))
    firm_ids = sorted(table.companies)
    index = {fid: i for i, fid in enumerate(firm_ids)}
    boards = table.boards()
    nodes = []
    for i, fid in enumerate(firm_ids):
        c = table.companies[fid]
        attrs = {a: getattr(c, a) for a in ATTRIBUTES}
        nodes.append(FirmNode(i, frozenset([fid]), boards[fid], c.guo_id, attrs))
    edges: set[tuple[int, int]] = set()
    for firms in table.director_index().values():
        ids = [index[f] for f in firms]
        edges.update(combinations(ids, 2))  # ids sorted, so u < v
    return _from_edge_set(nodes, edges, ("projected" if country_filter is None else f"projected:{country_filter}",))


def connected_components(g: FirmGraph) -> list[list[int]]:
    seen = np.zeros(g.n_nodes, dtype=bool)
    comps = []
    for s in range(g.n_nodes):
        if seen[s]:
            continue
        seen[s] = True
        comp = [s]
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in g.adjacency[u]:
                if not seen[v]:
                    seen[v] = True
                    comp.append(v)
                    queue.append(v)
        comps.append(sorted(comp))
    return comps


def induced_subgraph(g: FirmGraph, keep: Iterable[int], stage: str | None = None) -> FirmGraph:
    keep = sorted(set(keep))
    remap = {old: new for new, old in enumerate(keep)}
    nodes = []
    adj = []
    for new, old in enumerate(keep):
        n = g.nodes[old]
        nodes.append(FirmNode(new, n.member_firm_ids, n.board, n.guo_id, n.attributes, n.partial))
        adj.append(tuple(sorted(remap[v] for v in g.adjacency[old] if v in remap)))
    prov = g.provenance + ((stage,) if stage else ())
    return FirmGraph(tuple(nodes), tuple(adj), prov)


def giant_component(g: FirmGraph) -> FirmGraph:
    """Induced subgraph on the largest connected component.

    Ties between equally large components go to the one containing the
    smallest original firm id.
    """
    if g.n_nodes == 0:
        raise EmptyInput("graph has no nodes")
    comps = connected_components(g)
    best = min(comps, key=lambda c: (-len(c), min(g.nodes[u].label for u in c)))
    return induced_subgraph(g, best, "giant_component")


def _merge_attributes(members: Sequence[FirmNode], policy: str) -> tuple[dict, frozenset[str]]:
    attrs: dict[str, float | None] = {}
    partial = set()
    names = sorted({k for m in members for k in m.attributes})
    for name in names:
        vals = [m.attributes.get(name) for m in members]
        present = [v for v in vals if v is not None]
        if len(present) < len(vals) or any(name in m.partial for m in members):
            partial.add(name)
        if not present:
            attrs[name] = None
        elif policy == "sum":
            attrs[name] = sum(present)
        else:
            attrs[name] = max(present)
        if not present:
            partial.discard(name)
    return attrs, frozenset(partial)


def merge_nodes(g: FirmGraph, clusters: Iterable[Iterable[int]], policy: str = "sum",
                stage: str = "merge") -> FirmGraph:
    """Collapse each block of a node partition into a single node.

    Member ids and boards are unioned, financial attributes combined per
    ``policy`` ("sum" or "max"), edges rewired to the block node with
    self-loops and duplicates dropped. New node ids follow the smallest old
    id in each block.
    """
    if policy not in MERGE_POLICIES:
        raise ValueError(f"unknown merge policy {policy!r}; expected one of {MERGE_POLICIES}")
    blocks = [sorted(set(b)) for b in clusters]
    owner = np.full(g.n_nodes, -1, dtype=np.int64)
    for bi, block in enumerate(blocks):
        if not block:
            raise InvalidPartition("empty block in partition")
        for u in block:
            if not 0 <= u < g.n_nodes:
                raise InvalidPartition(f"node {u} out of range")
            if owner[u] != -1:
                raise InvalidPartition(f"node {u} appears in more than one block")
            owner[u] = bi
    missing = np.flatnonzero(owner == -1)
    if len(missing):
        raise InvalidPartition(f"{len(missing)} node(s) not covered by the partition, e.g. {int(missing[0])}")
    order = sorted(range(len(blocks)), key=lambda bi: blocks[bi][0])
    new_id = np.empty(len(blocks), dtype=np.int64)
    new_id[order] = np.arange(len(blocks))
    nodes = []
    for bi in order:
        members = [g.nodes[u] for u in blocks[bi]]
        if len(members) == 1:
            m = members[0]
            nodes.append(FirmNode(int(new_id[bi]), m.member_firm_ids, m.board, m.guo_id, m.attributes, m.partial))
            continue
        guos = {m.guo_id for m in members}
        attrs, partial = _merge_attributes(members, policy)
        nodes.append(FirmNode(
            int(new_id[bi]),
            frozenset().union(*(m.member_firm_ids for m in members)),
            frozenset().union(*(m.board for m in members)),
            guos.pop() if len(guos) == 1 else None,
            attrs,
            partial,
        ))
    node_map = new_id[owner]
    edges = ((int(node_map[u]), int(node_map[v])) for u, v in g.edges())
    return _from_edge_set(nodes, edges, g.provenance + (stage,))


def merge_firm_blocks(g: FirmGraph, firm_blocks: Iterable[Iterable[str]], policy: str = "sum",
                      stage: str = "merge") -> FirmGraph:
    """Merge nodes given blocks of firm ids; nodes not mentioned stay as they are.

    Every node touched by a block joins that block, so blocks expressed in
    original firm ids apply to graphs that were already partially merged.
    """
    index = g.firm_index
    owner: dict[int, int] = {}
    groups: list[set[int]] = []
    for firms in firm_blocks:
        ids = {index[f] for f in firms if f in index}
        if not ids:
            continue
        hit = {owner[u] for u in ids if u in owner}
        target = set(ids)
        for h in sorted(hit, reverse=True):
            target |= groups[h]
            groups[h] = set()
        groups.append(target)
        for u in target:
            owner[u] = len(groups) - 1
    blocks = [sorted(b) for b in groups if b]
    covered = {u for b in blocks for u in b}
    blocks.extend([u] for u in range(g.n_nodes) if u not in covered)
    return merge_nodes(g, blocks, policy, stage)


# -- export / import -------------------------------------------------------------

NODE_COLUMNS = ("node_id", "member_firm_ids", "guo_id", *ATTRIBUTES, "partial", "board")


def export_edgelist(g: FirmGraph, path) -> None:
    """Write ``u<TAB>v`` lines, u < v, in ascending order."""
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            for u, v in g.edges():
                fh.write(f"{u}\t{v}\n")
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc.strerror or exc}") from exc


def export_nodes(g: FirmGraph, path) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, delimiter="\t", lineterminator="\n")
            w.writerow(NODE_COLUMNS)
            for n in g.nodes:
                w.writerow([
                    n.node_id,
                    "|".join(sorted(n.member_firm_ids)),
                    n.guo_id or "",
                    *(format_decimal(n.attributes.get(a)) for a in ATTRIBUTES),
                    "|".join(sorted(n.partial)),
                    "|".join(sorted(n.board)),
                ])
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc.strerror or exc}") from exc


def _split(text: str) -> frozenset[str]:
    return frozenset(t for t in text.split("|") if t)


def _num(text: str):
    if text == "":
        return None
    f = float(text)
    return int(f) if text.lstrip("-").isdigit() else f


def read_graph(edges_path, nodes_path=None) -> FirmGraph:
    """Read an exported graph, or a plain whitespace-separated edge list.

    With ``nodes_path`` the node table fixes node ids and attributes. Without
    it, node labels are taken from the edge list (numeric labels ordered
    numerically, others lexicographically).
    """
    try:
        with open(edges_path, encoding="utf-8") as fh:
            pairs = [line.split() for line in fh if line.strip() and not line.startswith("#")]
    except OSError as exc:
        raise IOFailure(f"cannot read {edges_path}: {exc.strerror or exc}") from exc
    for p in pairs:
        if len(p) < 2:
            raise ValueError(f"{edges_path}: malformed edge line {' '.join(p)!r}")
    if nodes_path is not None:
        try:
            with open(nodes_path, encoding="utf-8", newline="") as fh:
                rows = list(csv.DictReader(fh, delimiter="\t"))
        except OSError as exc:
            raise IOFailure(f"cannot read {nodes_path}: {exc.strerror or exc}") from exc
        nodes = []
        for i, r in enumerate(sorted(rows, key=lambda r: int(r["node_id"]))):
            if int(r["node_id"]) != i:
                raise ValueError(f"{nodes_path}: node ids are not dense")
            attrs = {a: _num(r.get(a, "")) for a in ATTRIBUTES}
            if attrs["employees"] is not None:
                attrs["employees"] = int(attrs["employees"])
            nodes.append(FirmNode(i, _split(r["member_firm_ids"]), _split(r.get("board", "")),
                                  r.get("guo_id") or None, attrs, _split(r.get("partial", ""))))
        edges = [(int(a), int(b)) for a, b, *_ in pairs]
        for u, v in edges:
            if not (0 <= u < len(nodes) and 0 <= v < len(nodes)):
                raise ValueError(f"{edges_path}: edge ({u}, {v}) references unknown node")
        return _from_edge_set(nodes, edges, ("imported",))
    labels = sorted({t for a, b, *_ in pairs for t in (a, b)},
                    key=lambda s: (0, int(s), s) if s.lstrip("-").isdigit() else (1, 0, s))
    index = {s: i for i, s in enumerate(labels)}
    g = from_edges(len(labels), ((index[a], index[b]) for a, b, *_ in pairs), labels)
    return g.with_provenance("imported")
