"""Brute-force reference implementations and random fixture generators used by the tests."""

from __future__ import annotations

import numpy as np

from teamscope.corpus import ingest_papers


def set_partitions(n):
    """All set partitions of range(n) as restricted growth label lists."""
    def rec(i, labels, k):
        if i == n:
            yield list(labels)
            return
        for c in range(k + 1):
            labels.append(c)
            yield from rec(i + 1, labels, max(k, c + 1))
            labels.pop()
    yield from rec(0, [], 0)


def brute_modularity(W, labels, resolution=1.0):
    """Q = 1/2m sum_ij (A_ij - k_i k_j / 2m) delta(c_i, c_j), written as the double sum."""
    two_m = W.sum()
    k = W.sum(axis=1)
    n = len(labels)
    q = 0.0
    for i in range(n):
        for j in range(n):
            if labels[i] == labels[j]:
                q += W[i, j] - resolution * k[i] * k[j] / two_m
    return q / two_m


def exhaustive_best_q(W, resolution=1.0):
    return max(brute_modularity(W, p, resolution) for p in set_partitions(W.shape[0]))


def random_weighted_graph(rng, n_min=3, n_max=8):
    n = int(rng.integers(n_min, n_max + 1))
    while True:
        W = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < 0.5:
                    W[i, j] = W[j, i] = float(rng.integers(1, 6))
        if W.sum() > 0:
            return W


def random_citation_records(rng, n_nodes=50, n_external=5):
    """Papers with random years and references to earlier (and a few external) papers."""
    n = int(rng.integers(5, n_nodes + 1))
    years = np.sort(rng.integers(1990, 2010, size=n))
    records = []
    for i in range(n):
        earlier = [j for j in range(i) if years[j] <= years[i]]
        refs = []
        if earlier:
            k = int(rng.integers(0, min(6, len(earlier)) + 1))
            refs = [f"p{j}" for j in rng.choice(earlier, size=k, replace=False)]
        if rng.random() < 0.2:
            refs.append(f"ext{int(rng.integers(n_external))}")
        records.append({"id": f"p{i}", "year": int(years[i]), "authors": [f"a{i % 7}"], "refs": refs})
    return records


def brute_disruption(records, focal):
    """Enumerate every later paper and place it in the (i, j, k) bucket by definition."""
    by_id = {r["id"]: r for r in records}
    f = by_id[focal]
    refs = set(f["refs"])
    n_i = n_j = n_k = 0
    for r in records:
        if r["id"] == focal or r["year"] <= f["year"]:
            continue
        cites_f = focal in r["refs"]
        cites_r = any(x in refs for x in r["refs"])
        if cites_f and not cites_r:
            n_i += 1
        elif cites_f and cites_r:
            n_j += 1
        elif cites_r:
            n_k += 1
    total = n_i + n_j + n_k
    return n_i, n_j, n_k, ((n_i - n_j) / total if total else float("nan"))


def corpus_from(records):
    return ingest_papers(records)


def random_panel(rng):
    """Small unbalanced panel with entity effects correlated with the regressors."""
    G = int(rng.integers(3, 9))
    sizes = rng.integers(1, 6, size=G)
    ids = np.repeat(np.arange(G), sizes)
    alpha = rng.normal(size=G)
    k = int(rng.integers(1, 4))
    X = rng.normal(size=(len(ids), k)) + alpha[ids, None]
    beta = rng.normal(size=k)
    y = X @ beta + alpha[ids] + rng.normal(scale=0.5, size=len(ids))
    return y, X, ids


def two_cluster_bags(rng, n_papers=400, size=10, per_paper=(3, 6)):
    """Keyword bags drawn from one of two disjoint vocabularies."""
    A = [f"a{i}" for i in range(size)]
    B = [f"b{i}" for i in range(size)]
    bags = []
    for _ in range(n_papers):
        pool = A if rng.random() < 0.5 else B
        k = int(rng.integers(per_paper[0], per_paper[1] + 1))
        bags.append(list(rng.choice(pool, size=k, replace=False)))
    return bags, A, B
