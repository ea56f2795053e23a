"""Exact small-instance oracles for the tour layer (exponential, test use only)."""

import itertools
import math

import numpy as np

from quietpath.tsp import ClusterInstance


def held_karp(C):
    """Optimal closed tour through all nodes of C (inf = no arc); returns (cost, order from 0)."""
    C = np.asarray(C, dtype=float)
    n = len(C)
    if n == 1:
        return 0.0, [0]
    full = 1 << (n - 1)
    # dp[mask][j]: cheapest path 0 -> ... -> j visiting exactly mask (bits for nodes 1..n-1)
    dp = np.full((full, n), math.inf)
    parent = np.full((full, n), -1, dtype=int)
    for j in range(1, n):
        dp[1 << (j - 1), j] = C[0, j]
    for mask in range(1, full):
        for j in range(1, n):
            if not mask >> (j - 1) & 1 or not math.isfinite(dp[mask, j]):
                continue
            for k in range(1, n):
                if mask >> (k - 1) & 1:
                    continue
                nm = mask | 1 << (k - 1)
                v = dp[mask, j] + C[j, k]
                if v < dp[nm, k]:
                    dp[nm, k] = v
                    parent[nm, k] = j
    last = full - 1
    costs = [dp[last, j] + C[j, 0] for j in range(1, n)]
    j = int(np.argmin(costs)) + 1
    best = costs[j - 1]
    if not math.isfinite(best):
        return math.inf, []
    order, mask = [], last
    while j > 0:
        order.append(j)
        pj = parent[mask, j]
        mask &= ~(1 << (j - 1))
        j = pj
    return float(best), [0] + order[::-1]


def brute_atsp(C):
    n = len(C)
    best = (math.inf, None)
    for perm in itertools.permutations(range(1, n)):
        t = (0,) + perm
        c = sum(C[a][b] for a, b in zip(t, t[1:] + (0,)))
        if c < best[0]:
            best = (c, list(t))
    return best


def brute_gtsp(inst: ClusterInstance):
    """Every cluster order (first cluster fixed) times every node choice."""
    k = len(inst.clusters)
    best = (math.inf, None)
    for perm in itertools.permutations(range(1, k)):
        order = (0,) + perm
        for nodes in itertools.product(*(inst.clusters[c] for c in order)):
            c = inst.tour_cost(list(nodes))
            if c < best[0]:
                best = (c, list(nodes))
    return best


def random_cluster_instance(rng, n_clusters, max_d, inf_prob=0.1):
    sizes = rng.integers(1, max_d + 1, n_clusters)
    clusters, nxt = [], 0
    for s in sizes:
        clusters.append(list(range(nxt, nxt + s)))
        nxt += s
    N = nxt
    C = rng.integers(1, 100, (N, N)).astype(float)
    C[rng.random((N, N)) < inf_prob] = np.inf
    cl = np.repeat(np.arange(n_clusters), sizes)
    C[cl[:, None] == cl[None, :]] = np.inf
    return ClusterInstance(clusters, C)
