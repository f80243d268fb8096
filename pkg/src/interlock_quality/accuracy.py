"""Duplicate and administrative node correction for interlock graphs.

Two passes:

* step 1 merges firms whose boards are identical and whose GUO is equal or
  jointly absent;
* step 2 groups firms by board Jaccard similarity with complete linkage and,
  inside each group, merges those whose local position (degree, average
  neighbour degree, local clustering, average neighbour clustering) is
  within a ratio band.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_fraction
from .exceptions import EmptyBoard
from .graph import FirmGraph, connected_components, from_edges, merge_firm_blocks, merge_nodes

FEATURE_NAMES = ("degree", "avg_neighbor_degree", "local_clustering", "avg_neighbor_clustering")


@dataclass(frozen=True)
class TopoFeatureVector:
    degree: int
    avg_neighbor_degree: float
    local_clustering: float
    avg_neighbor_clustering: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (float(self.degree), self.avg_neighbor_degree, self.local_clustering, self.avg_neighbor_clustering)


@dataclass
class MergeReport:
    stage: str
    parameters: dict
    clusters: list[list[str]] = field(default_factory=list)
    nodes_before: int = 0
    nodes_after: int = 0
    edges_before: int = 0
    edges_after: int = 0

    @property
    def n_merged_blocks(self) -> int:
        return len(self.clusters)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


# -- similarity primitives ---------------------------------------------------------

def board_jaccard(a: Iterable[str], b: Iterable[str]) -> float:
    """Shared directors over total unique directors."""
    a, b = frozenset(a), frozenset(b)
    if not a or not b:
        raise EmptyBoard("Jaccard similarity is undefined for an empty board")
    inter = len(a & b)
    return inter / (len(a) + len(b) - inter)


def complete_linkage(sim: np.ndarray, threshold: float) -> list[list[int]]:
    """Agglomerate by complete linkage on a similarity matrix.

    Repeatedly joins the two clusters whose smallest pairwise similarity is
    largest, stopping once that value drops below ``threshold``. Ties go to
    the lexicographically smallest pair of cluster indices, a cluster being
    indexed by its smallest member, so the result depends only on ``sim``.
    """
    k = len(sim)
    S = np.array(sim, dtype=float, copy=True)
    if S.shape != (k, k):
        raise ValueError("similarity matrix must be square")
    np.fill_diagonal(S, -np.inf)
    members = [[i] for i in range(k)]
    alive = k
    while alive > 1:
        best = S.max()
        if not best >= threshold:
            break
        hits = np.argwhere(S == best)
        i, j = next((int(a), int(b)) for a, b in hits if a < b)
        row = np.minimum(S[i], S[j])
        S[i, :] = row
        S[:, i] = row
        S[i, i] = -np.inf
        S[j, :] = -np.inf
        S[:, j] = -np.inf
        members[i].extend(members[j])
        members[j] = []
        alive -= 1
    return [sorted(m) for m in members if m]


def feature_similarity(f: np.ndarray, g: np.ndarray) -> float:
    """Worst per-feature min/max ratio; 0/0 counts as identical."""
    lo = np.minimum(f, g)
    hi = np.maximum(f, g)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(hi == 0, 1.0, lo / np.where(hi == 0, 1.0, hi))
    return float(ratio.min())


def _feature_similarity_matrix(F: np.ndarray) -> np.ndarray:
    lo = np.minimum(F[:, None, :], F[None, :, :])
    hi = np.maximum(F[:, None, :], F[None, :, :])
    safe = np.where(hi == 0, 1.0, hi)
    ratio = np.where(hi == 0, 1.0, lo / safe)
    return ratio.min(axis=2)


# -- topology features ---------------------------------------------------------------

def local_clustering(g: FirmGraph) -> np.ndarray:
    """Triangles over possible neighbour pairs; 0 for degree < 2."""
    adj_sets = [set(a) for a in g.adjacency]
    out = np.zeros(g.n_nodes)
    for u, nbrs in enumerate(g.adjacency):
        d = len(nbrs)
        if d < 2:
            continue
        # each link among neighbours is seen from both ends
        links = sum(len(adj_sets[v].intersection(nbrs)) for v in nbrs) // 2
        out[u] = links / (d * (d - 1) / 2)
    return out


def topo_feature_matrix(g: FirmGraph) -> np.ndarray:
    """``n x 4`` array with columns in :data:`FEATURE_NAMES` order."""
    deg = g.degrees.astype(float)
    cc = local_clustering(g)
    indptr, indices = g.csr
    n = g.n_nodes
    F = np.zeros((n, 4))
    F[:, 0] = deg
    F[:, 2] = cc
    if len(indices):
        owner = np.repeat(np.arange(n), g.degrees)
        nbr_deg = np.bincount(owner, weights=deg[indices], minlength=n)
        nbr_cc = np.bincount(owner, weights=cc[indices], minlength=n)
        with np.errstate(invalid="ignore", divide="ignore"):
            F[:, 1] = np.where(deg > 0, nbr_deg / np.maximum(deg, 1), 0.0)
            F[:, 3] = np.where(deg > 0, nbr_cc / np.maximum(deg, 1), 0.0)
    return F


def topo_features(g: FirmGraph) -> dict[int, TopoFeatureVector]:
    F = topo_feature_matrix(g)
    return {u: TopoFeatureVector(int(F[u, 0]), float(F[u, 1]), float(F[u, 2]), float(F[u, 3]))
            for u in range(g.n_nodes)}


# -- step 1 --------------------------------------------------------------------------------

def exact_board_blocks(g: FirmGraph) -> list[list[int]]:
    """Partition nodes by (board, guo). Board-less nodes stay singletons."""
    groups: dict[tuple, list[int]] = defaultdict(list)
    blocks = []
    for n in g.nodes:
        if not n.board:
            blocks.append([n.node_id])
        else:
            groups[(n.board, n.guo_id)].append(n.node_id)
    blocks.extend(groups.values())
    return sorted(blocks, key=lambda b: b[0])


def _report(stage: str, params: dict, g_before: FirmGraph, g_after: FirmGraph, blocks) -> MergeReport:
    clusters = sorted(
        sorted(f for u in b for f in g_before.nodes[u].member_firm_ids) for b in blocks if len(b) > 1
    )
    return MergeReport(stage, params, clusters, g_before.n_nodes, g_after.n_nodes, g_before.n_edges, g_after.n_edges)


def step1_exact_merge(g: FirmGraph, policy: str = "sum") -> tuple[FirmGraph, MergeReport]:
    """Merge firms with set-equal boards and the same (or no) GUO."""
    blocks = exact_board_blocks(g)
    out = merge_nodes(g, blocks, policy, stage="step1")
    return out, _report("step1", {"rule": "identical board and guo"}, g, out, blocks)


# -- step 2 --------------------------------------------------------------------------------

def cluster_boards(g: FirmGraph, threshold: float = 0.5) -> list[list[int]]:
    """Complete-linkage partition of nodes by board Jaccard similarity.

    Every pair inside a returned block has Jaccard >= ``threshold``. Only
    firms sharing a director can be similar, so candidates come from the
    director inverted index; agglomeration runs per connected component of
    the ``>= threshold`` candidate graph, which gives the same partition as a
    global run.
    """
    check_fraction(threshold, "threshold")
    director_nodes: dict[str, list[int]] = defaultdict(list)
    for n in g.nodes:
        for d in n.board:
            director_nodes[d].append(n.node_id)
    pairs: set[tuple[int, int]] = set()
    for ids in director_nodes.values():
        ids.sort()
        for a in range(len(ids)):
            for b in range(a + 1, len(ids)):
                pairs.add((ids[a], ids[b]))
    boards = [n.board for n in g.nodes]
    strong = [(u, v) for u, v in pairs if board_jaccard(boards[u], boards[v]) >= threshold]
    cand = from_edges(g.n_nodes, strong)
    blocks: list[list[int]] = []
    for comp in connected_components(cand):
        if len(comp) == 1:
            blocks.append(comp)
            continue
        k = len(comp)
        sim = np.zeros((k, k))
        for a in range(k):
            ba = boards[comp[a]]
            for b in range(a + 1, k):
                sim[a, b] = sim[b, a] = board_jaccard(ba, boards[comp[b]])
        for local in complete_linkage(sim, threshold):
            blocks.append([comp[i] for i in local])
    return sorted(blocks, key=lambda b: b[0])


def topo_blocks(g: FirmGraph, board_blocks: Sequence[Sequence[int]], band: float = 0.8,
                features: np.ndarray | None = None) -> list[list[int]]:
    """Split each board block by complete linkage on the feature-ratio score."""
    check_fraction(band, "band")
    F = topo_feature_matrix(g) if features is None else features
    out: list[list[int]] = []
    for block in board_blocks:
        if len(block) == 1:
            out.append(list(block))
            continue
        block = sorted(block)
        sim = _feature_similarity_matrix(F[block])
        for local in complete_linkage(sim, band):
            out.append([block[i] for i in local])
    return sorted(out, key=lambda b: b[0])


def step2_topo_merge(g: FirmGraph, jaccard_threshold: float = 0.5, band: float = 0.8,
                     policy: str = "sum") -> tuple[FirmGraph, MergeReport]:
    """Merge firms with similar boards and similar network position.

    Features are computed once on the input graph and not updated while
    merging, so the result does not depend on merge order.
    """
    board_blocks = cluster_boards(g, jaccard_threshold)
    blocks = topo_blocks(g, board_blocks, band)
    out = merge_nodes(g, blocks, policy, stage="step2")
    params = {"jaccard_threshold": jaccard_threshold, "band": band}
    return out, _report("step2", params, g, out, blocks)


def run_pipeline(g: FirmGraph, jaccard_threshold: float = 0.5, band: float = 0.8,
                 policy: str = "sum") -> tuple[FirmGraph, list[MergeReport]]:
    g1, r1 = step1_exact_merge(g, policy)
    g2, r2 = step2_topo_merge(g1, jaccard_threshold, band, policy)
    return g2, [r1, r2]


class InterlockDeduplicator(TransformerMixin, BaseEstimator):
    """Estimator wrapper around the two correction steps.

    ``fit`` learns the merge blocks (as firm ids) on a graph; ``transform``
    applies them to any graph over the same firms.

    Parameters
    ----------
    jaccard_threshold : float, default=0.5
        Minimum board Jaccard similarity for every pair in a step-2 block.
    band : float, default=0.8
        Minimum min/max ratio for each of the four position features.
    merge_policy : {"sum", "max"}, default="sum"
        How financial attributes of merged firms combine.
    steps : tuple of str, default=("step1", "step2")
        Which corrections to run, in order.
    """

    def __init__(self, jaccard_threshold=0.5, band=0.8, merge_policy="sum", steps=("step1", "step2")):
        self.jaccard_threshold = jaccard_threshold
        self.band = band
        self.merge_policy = merge_policy
        self.steps = steps

    def _check_params(self):
        check_fraction(self.jaccard_threshold, "jaccard_threshold")
        check_fraction(self.band, "band")
        unknown = set(self.steps) - {"step1", "step2"}
        if unknown:
            raise ValueError(f"unknown steps {sorted(unknown)}")

    def fit(self, X: FirmGraph, y=None):
        self._fit(X)
        return self

    def _fit(self, g: FirmGraph) -> FirmGraph:
        if not isinstance(g, FirmGraph):
            raise TypeError(f"expected a FirmGraph, got {type(g).__name__}")
        self._check_params()
        reports = []
        stages = [g]
        for step in self.steps:
            if step == "step1":
                g, rep = step1_exact_merge(g, self.merge_policy)
            else:
                g, rep = step2_topo_merge(g, self.jaccard_threshold, self.band, self.merge_policy)
            reports.append(rep)
            stages.append(g)
        self.reports_ = reports
        self.stage_graphs_ = stages
        self.n_nodes_in_ = stages[0].n_nodes
        return g

    def transform(self, X: FirmGraph) -> FirmGraph:
        check_is_fitted(self, "reports_")
        g = X
        for rep in self.reports_:
            g = merge_firm_blocks(g, rep.clusters, self.merge_policy, stage=rep.stage)
        return g

    def fit_transform(self, X: FirmGraph, y=None, **fit_params) -> FirmGraph:
        return self._fit(X)
