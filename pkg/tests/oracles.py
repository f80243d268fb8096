"""Slow, independent reference implementations used only by the tests.

None of these import the package's algorithms; they work on plain Python
adjacency sets so a shared bug cannot hide on both sides of a comparison.
"""

from __future__ import annotations

import itertools
import math
import random


def adjacency_sets(n, edges):
    adj = [set() for _ in range(n)]
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    return adj


def brute_force_projection(boards: dict[str, frozenset]) -> set[tuple[str, str]]:
    """Edge between every pair of firms whose boards intersect."""
    ids = sorted(boards)
    return {(a, b) for a, b in itertools.combinations(ids, 2) if boards[a] & boards[b]}


def triangle_clustering(adj) -> list[float]:
    """Local clustering by checking every neighbour pair."""
    out = []
    for u in range(len(adj)):
        nb = sorted(adj[u])
        k = len(nb)
        if k < 2:
            out.append(0.0)
            continue
        links = sum(1 for a, b in itertools.combinations(nb, 2) if b in adj[a])
        out.append(links / (k * (k - 1) / 2))
    return out


def path_count_betweenness(adj) -> list[float]:
    """Floyd-Warshall distances and path counts, then sum sigma_sv*sigma_vt/sigma_st.

    Each unordered pair {s, t} is counted once.
    """
    n = len(adj)
    INF = math.inf
    d = [[INF] * n for _ in range(n)]
    sigma = [[0] * n for _ in range(n)]
    for u in range(n):
        d[u][u] = 0
        sigma[u][u] = 1
        for v in adj[u]:
            d[u][v] = 1
            sigma[u][v] = 1
    for k in range(n):
        dk = d[k]
        for i in range(n):
            dik = d[i][k]
            if dik == INF:
                continue
            di = d[i]
            for j in range(n):
                if i == j or j == k or i == k:
                    continue
                alt = dik + dk[j]
                if alt < di[j]:
                    di[j] = alt
    # path counts from distances: sigma_ij = sum over neighbours w of j with d_iw = d_ij - 1
    for i in range(n):
        order = sorted(range(n), key=lambda j: d[i][j])
        for j in order:
            if j == i or d[i][j] == INF:
                continue
            sigma[i][j] = sum(sigma[i][w] for w in adj[j] if d[i][w] == d[i][j] - 1)
    bc = [0.0] * n
    for s, t in itertools.combinations(range(n), 2):
        if d[s][t] == INF or d[s][t] < 2:
            continue
        for v in range(n):
            if v in (s, t):
                continue
            if d[s][v] + d[v][t] == d[s][t]:
                bc[v] += sigma[s][v] * sigma[v][t] / sigma[s][t]
    return bc


def pagerank_dense(adj, damping=0.85, iters=5000):
    """Plain Jacobi iteration with dangling mass spread uniformly."""
    n = len(adj)
    p = [1.0 / n] * n
    for _ in range(iters):
        dangling = sum(p[u] for u in range(n) if not adj[u])
        q = [(1 - damping) / n + damping * dangling / n] * n
        for u in range(n):
            if adj[u]:
                share = damping * p[u] / len(adj[u])
                for v in adj[u]:
                    q[v] += share
        p = q
    return p


def star_pagerank(leaves: int, damping: float = 0.85) -> tuple[float, float]:
    """Closed form for a star: solve c = (1-d)/n + d*k*l, l = (1-d)/n + d*c/k."""
    n = leaves + 1
    base = (1 - damping) / n
    c = (base + damping * leaves * base) / (1 - damping ** 2)
    leaf = base + damping * c / leaves
    return c, leaf


def bfs_distances(adj, s):
    dist = {s: 0}
    frontier = [s]
    while frontier:
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
        frontier = nxt
    return dist


def average_distance(adj) -> float:
    total = pairs = 0
    for s in range(len(adj)):
        for t, dd in bfs_distances(adj, s).items():
            if t != s:
                total += dd
                pairs += 1
    return total / pairs


def spearman_no_ties(x, y) -> float:
    """Textbook 1 - 6*sum(d^2)/(n(n^2-1)); valid only without ties."""
    n = len(x)
    rx = {v: i for i, v in enumerate(sorted(x))}
    ry = {v: i for i, v in enumerate(sorted(y))}
    d2 = sum((rx[a] - ry[b]) ** 2 for a, b in zip(x, y))
    return 1 - 6 * d2 / (n * (n * n - 1))


def sir_final_size_complete(n: int, beta: float, gamma: float, runs: int, seed: int) -> list[float]:
    """Monte Carlo SIR on K_n with the stdlib generator.

    On a complete graph every susceptible node sees every infected one, so
    it escapes infection in an iteration with probability (1-beta)**I.
    """
    rng = random.Random(seed)
    out = []
    for _ in range(runs):
        S, I, R = n - 1, 1, 0
        while I:
            escape = (1 - beta) ** I
            new = sum(1 for _ in range(S) if rng.random() >= escape)
            rec = sum(1 for _ in range(I) if rng.random() < gamma)
            S, I, R = S - new, I - rec + new, R + rec
        out.append(R / n)
    return out


def sir_expected_final_size_complete(n: int, beta: float, gamma: float) -> float:
    """Exact mean final size on K_n from the (S, I) Markov chain."""
    from functools import lru_cache

    def binom(k, p):
        return [math.comb(k, j) * p ** j * (1 - p) ** (k - j) for j in range(k + 1)]

    @lru_cache(maxsize=None)
    def final_removed(S, I):
        # expected number of nodes eventually recovered, starting from S susceptible and I infected
        if I == 0:
            return 0.0
        p_inf = 1 - (1 - beta) ** I
        new = binom(S, p_inf)
        rec = binom(I, gamma)
        # the all-stay transition (no new infections, no recoveries) is a self-loop
        stay = new[0] * rec[0]
        total = 0.0
        for a, pa in enumerate(new):
            for b, pb in enumerate(rec):
                if a == 0 and b == 0:
                    continue
                total += pa * pb * (b + final_removed(S - a, I - b + a))
        return total / (1 - stay)

    import sys
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 10 * n * n))
    try:
        return final_removed(n - 1, 1) / n
    finally:
        sys.setrecursionlimit(old)


def random_graph(rng: random.Random, n: int, p: float):
    return [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]


def naive_complete_linkage(sim, threshold):
    """Recompute every cluster-pair linkage from scratch at each merge.

    Clusters are ordered by their smallest member and ties go to the first
    pair in that order.
    """
    k = len(sim)
    clusters = [[i] for i in range(k)]
    while len(clusters) > 1:
        clusters.sort(key=min)
        best, pick = None, None
        for a in range(len(clusters)):
            for b in range(a + 1, len(clusters)):
                link = min(sim[i][j] for i in clusters[a] for j in clusters[b])
                if best is None or link > best:
                    best, pick = link, (a, b)
        if best < threshold:
            break
        a, b = pick
        clusters[a] = clusters[a] + clusters[b]
        del clusters[b]
    return sorted(sorted(c) for c in clusters)
