"""Topology summary, centralities and rank correlation against economic size."""

from __future__ import annotations

import csv
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.sparse.csgraph import shortest_path
from scipy.stats import rankdata

from ._seeding import derive_rng
from .accuracy import local_clustering
from .exceptions import DisconnectedInput, InsufficientData, KeyMismatch, NoConvergence
from .graph import FirmGraph, connected_components, giant_component

EXACT_DISTANCE_LIMIT = 5000
_BFS_BATCH = 256
_SOURCE_CHUNK = 64


@dataclass(frozen=True)
class TopologySummary:
    nodes: int
    edges: int
    density: float
    avg_degree: float
    graph_clustering: float
    avg_distance: float
    avg_distance_stderr: float = 0.0
    distance_sources: int = 0
    on_giant_component: bool = False
    clustering_kind: str = "mean_local"

    def to_dict(self) -> dict:
        return asdict(self)


def transitivity(g: FirmGraph) -> float:
    """Three times triangles over connected triples."""
    cc = local_clustering(g)
    deg = g.degrees.astype(float)
    pairs = deg * (deg - 1) / 2
    total = pairs.sum()
    if total == 0:
        return 0.0
    return float((cc * pairs).sum() / total)


def _distance_sums(g: FirmGraph, sources: np.ndarray) -> np.ndarray:
    """Mean hop distance from each source to every other node."""
    A = g.sparse_adjacency()
    out = np.empty(len(sources))
    for start in range(0, len(sources), _BFS_BATCH):
        batch = sources[start:start + _BFS_BATCH]
        D = shortest_path(A, directed=False, unweighted=True, indices=batch)
        out[start:start + len(batch)] = D.sum(axis=1) / (g.n_nodes - 1)
    return out


def topology_summary(g: FirmGraph, distance_sample: int | None = None, *, seed: int = 0,
                     exact: bool = False, clustering: str = "mean_local") -> TopologySummary:
    """Size, density, average degree, clustering and average distance.

    Distances are exact (all-sources BFS) when ``distance_sample`` is None
    and the graph has at most 5000 nodes; otherwise they are averaged over
    uniformly sampled sources and a standard error is reported. A
    disconnected graph gets its distances from the giant component unless
    ``exact`` is set, which raises :class:`DisconnectedInput` instead.
    """
    if clustering not in ("mean_local", "transitivity"):
        raise ValueError(f"unknown clustering kind {clustering!r}")
    n, m = g.n_nodes, g.n_edges
    density = 2 * m / (n * (n - 1)) if n > 1 else 0.0
    avg_degree = 2 * m / n if n else 0.0
    cc = float(local_clustering(g).mean()) if clustering == "mean_local" else transitivity(g)
    dg = g
    on_giant = False
    if n and len(connected_components(g)) > 1:
        if exact:
            raise DisconnectedInput("average distance is undefined on a disconnected graph")
        dg = giant_component(g)
        on_giant = True
    nd = dg.n_nodes
    if nd < 2:
        return TopologySummary(n, m, density, avg_degree, cc, 0.0, 0.0, nd, on_giant, clustering)
    if distance_sample is None and nd <= EXACT_DISTANCE_LIMIT:
        per_source = _distance_sums(dg, np.arange(nd))
        avg, stderr, k = float(per_source.mean()), 0.0, nd
    else:
        k = min(int(distance_sample or 1000), nd)
        rng = derive_rng(seed, "distance-sample")
        sources = np.sort(rng.choice(nd, size=k, replace=False))
        per_source = _distance_sums(dg, sources)
        avg = float(per_source.mean())
        stderr = float(per_source.std(ddof=1) / math.sqrt(k)) if k > 1 else 0.0
        if k == nd:
            stderr = 0.0
    return TopologySummary(n, m, density, avg_degree, cc, avg, stderr, k, on_giant, clustering)


def pagerank(g: FirmGraph, damping: float = 0.85, tol: float = 1e-9, max_iter: int = 200,
             strict: bool = True) -> np.ndarray:
    """PageRank by power iteration, each undirected edge acting as two arcs.

    Isolated nodes spread their mass uniformly. Convergence is declared when
    the L1 change between iterates drops below ``tol``. If ``max_iter`` is
    reached, :class:`NoConvergence` carries the last iterate (or, with
    ``strict=False``, it is returned with a warning).
    """
    n = g.n_nodes
    if n == 0:
        raise ValueError("pagerank of an empty graph")
    deg = g.degrees.astype(float)
    indptr, indices = g.csr
    owner = np.repeat(np.arange(n), g.degrees)
    dangling = deg == 0
    x = np.full(n, 1.0 / n)
    inv_deg = np.where(dangling, 0.0, 1.0 / np.maximum(deg, 1))
    for it in range(1, max_iter + 1):
        share = x * inv_deg
        incoming = np.bincount(indices, weights=share[owner], minlength=n)
        x_new = (1 - damping) / n + damping * (incoming + x[dangling].sum() / n)
        x_new /= x_new.sum()
        delta = np.abs(x_new - x).sum()
        x = x_new
        if delta < tol:
            return x
    msg = f"pagerank did not converge in {max_iter} iterations"
    if strict:
        raise NoConvergence(msg, scores=x, iterations=max_iter)
    warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return x


def _brandes_chunk(adjacency: Sequence[Sequence[int]], sources: Sequence[int]) -> np.ndarray:
    n = len(adjacency)
    bc = [0.0] * n
    for s in sources:
        stack = []
        pred: list[list[int]] = [[] for _ in range(n)]
        sigma = [0] * n
        sigma[s] = 1
        dist = [-1] * n
        dist[s] = 0
        queue = [s]
        head = 0
        while head < len(queue):
            v = queue[head]
            head += 1
            stack.append(v)
            dv = dist[v] + 1
            sv = sigma[v]
            for w in adjacency[v]:
                if dist[w] < 0:
                    dist[w] = dv
                    queue.append(w)
                if dist[w] == dv:
                    sigma[w] += sv
                    pred[w].append(v)
        delta = [0.0] * n
        while stack:
            w = stack.pop()
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in pred[w]:
                delta[v] += sigma[v] * coeff
            if w != s:
                bc[w] += delta[w]
    return np.array(bc)


def betweenness(g: FirmGraph, sample_sources: int | None = None, *, seed: int = 0,
                threads: int = 1) -> np.ndarray:
    """Unnormalised shortest-path betweenness, each unordered pair counted once.

    With ``sample_sources`` only that many uniformly drawn sources are
    expanded and the total is scaled by ``n / k``. Work is split into fixed
    source chunks whose partial sums are added in chunk order, so the result
    does not depend on ``threads``.
    """
    n = g.n_nodes
    if sample_sources is None or sample_sources >= n:
        sources = np.arange(n)
        scale = 0.5
    else:
        rng = derive_rng(seed, "betweenness-sample")
        sources = np.sort(rng.choice(n, size=int(sample_sources), replace=False))
        scale = 0.5 * n / len(sources)
    chunks = [sources[i:i + _SOURCE_CHUNK].tolist() for i in range(0, len(sources), _SOURCE_CHUNK)]
    adjacency = g.adjacency
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: _brandes_chunk(adjacency, c), chunks))
    else:
        parts = [_brandes_chunk(adjacency, c) for c in chunks]
    total = np.zeros(n)
    for p in parts:
        total += p
    return total * scale


@dataclass
class CentralityTable:
    degree: np.ndarray
    pagerank: np.ndarray
    betweenness: np.ndarray
    parameters: dict = field(default_factory=dict)

    def as_dict(self) -> dict[str, np.ndarray]:
        return {"degree": self.degree, "pagerank": self.pagerank, "betweenness": self.betweenness}

    def to_csv(self, path, fmt=lambda x: f"{x:.12g}") -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["node_id", "degree", "pagerank", "betweenness"])
            for u in range(len(self.degree)):
                w.writerow([u, int(self.degree[u]), fmt(self.pagerank[u]), fmt(self.betweenness[u])])


def centralities(g: FirmGraph, damping: float = 0.85, betweenness_sample: int | None = None, *,
                 seed: int = 0, threads: int = 1) -> CentralityTable:
    return CentralityTable(
        g.degrees.astype(float),
        pagerank(g, damping),
        betweenness(g, betweenness_sample, seed=seed, threads=threads),
        {"damping": damping, "betweenness_normalized": False, "betweenness_sample": betweenness_sample},
    )


def spearman_values(x, y) -> float:
    """Spearman correlation of two value vectors, ties given average ranks."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("inputs must be 1-d arrays of equal length")
    if len(x) < 3:
        raise InsufficientData("Spearman correlation needs at least 3 observations")
    rx = rankdata(x) - (len(x) + 1) / 2
    ry = rankdata(y) - (len(y) + 1) / 2
    denom = math.sqrt(float((rx * rx).sum() * (ry * ry).sum()))
    if denom == 0:
        return float("nan")
    return float((rx * ry).sum() / denom)


def spearman(rank_a: Sequence, rank_b: Sequence) -> float:
    """Spearman correlation of two best-first orderings of the same keys."""
    if len(rank_a) != len(rank_b) or set(rank_a) != set(rank_b) or len(set(rank_a)) != len(rank_a):
        raise KeyMismatch("rankings must order the same set of distinct keys")
    pos_b = {k: i for i, k in enumerate(rank_b)}
    return spearman_values(np.arange(len(rank_a)), [pos_b[k] for k in rank_a])


@dataclass
class RankCorrelationCurve:
    economic: str
    points: dict[str, list[tuple[int, float]]]

    def rows(self):
        for measure in sorted(self.points):
            for k, rho in self.points[measure]:
                yield measure, self.economic, k, rho


def rank_correlation_curve(g: FirmGraph, centralities: Mapping[str, np.ndarray] | CentralityTable,
                           economic: str, k_grid: Sequence[int]) -> RankCorrelationCurve:
    """Spearman correlation between economic size and centrality among the top-k firms.

    For each ``k`` the ``k`` largest firms by the economic variable are
    taken (ties broken by firm label) and their economic values are rank
    correlated with their centrality values.
    """
    if isinstance(centralities, CentralityTable):
        centralities = centralities.as_dict()
    values = g.attribute(economic)
    present = np.flatnonzero(~np.isnan(values))
    kmax = max(k_grid)
    if len(present) < kmax:
        raise InsufficientData(f"{economic!r} is present on {len(present)} nodes, need {kmax}")
    order = sorted(present, key=lambda u: (-values[u], g.nodes[u].label))
    points = {}
    for name, scores in centralities.items():
        scores = np.asarray(scores, dtype=float)
        pts = []
        for k in sorted(k_grid):
            top = order[:k]
            pts.append((int(k), spearman_values(values[top], scores[top])))
        points[name] = pts
    return RankCorrelationCurve(economic, points)
