"""Activity co-occurrence network and weighted modularity clustering."""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .lexicon import ACTIVITIES, REFERENCE_PARTITION

_EPS = 1e-12


@dataclass
class CooccurrenceGraph:
    nodes: tuple[str, ...]
    weights: np.ndarray  # symmetric, zero diagonal

    def weight(self, a: str, b: str) -> float:
        i, j = self.nodes.index(a), self.nodes.index(b)
        return float(self.weights[i, j])

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum()) / 2.0


@dataclass
class ActivityPartition:
    labels: dict[str, int]
    modularity: float

    @property
    def clusters(self) -> list[list[str]]:
        groups: dict[int, list[str]] = defaultdict(list)
        for node, lab in self.labels.items():
            groups[lab].append(node)
        return [groups[k] for k in sorted(groups)]

    def to_json(self) -> dict:
        q = self.modularity
        return {"labels": dict(self.labels), "Q": None if math.isnan(q) else q}


def build_cooccurrence(
    profiles: Iterable,
    nodes: Sequence[str] = ACTIVITIES,
    unit: str = "pair",
) -> CooccurrenceGraph:
    """Count activity pairs performed by the same author on the same paper.

    Parameters
    ----------
    profiles : iterable of ActivityProfile
    nodes : activity order of the weight matrix
    unit : "pair" counts (paper, author) profiles; "paper" counts papers on
        which at least one author performed both activities.
    """
    nodes = tuple(nodes)
    pos = {a: i for i, a in enumerate(nodes)}
    W = np.zeros((len(nodes), len(nodes)))
    if unit == "pair":
        groups = ([p.activities] for p in profiles)
    elif unit == "paper":
        by_paper: dict[str, list] = defaultdict(list)
        for p in profiles:
            by_paper[p.paper_id].append(p.activities)
        groups = by_paper.values()
    else:
        raise ValueError(f"unknown co-occurrence unit {unit!r}")
    for acts_list in groups:
        seen = set()
        for acts in acts_list:
            idx = sorted(pos[a] for a in acts if a in pos)
            for i, j in itertools.combinations(idx, 2):
                seen.add((i, j))
        for i, j in seen:
            W[i, j] += 1
            W[j, i] += 1
    return CooccurrenceGraph(nodes, W)


def _as_labels(graph_nodes, partition) -> np.ndarray:
    if isinstance(partition, ActivityPartition):
        partition = partition.labels
    if isinstance(partition, Mapping):
        raw = [partition[n] for n in graph_nodes]
    else:
        raw = list(partition)
        if len(raw) != len(graph_nodes):
            raise ValueError("partition length does not match node count")
    _, inv = np.unique(np.asarray(raw, dtype=object).astype(str), return_inverse=True)
    return inv


def modularity_matrix(W: np.ndarray, labels: Sequence[int], resolution: float = 1.0) -> float:
    """Weighted Newman modularity of ``labels`` on the symmetric matrix ``W``."""
    two_m = W.sum()
    if two_m <= 0:
        return float("nan")
    labels = np.asarray(labels)
    k = W.sum(axis=1)
    q = 0.0
    for c in np.unique(labels):
        mask = labels == c
        q += W[np.ix_(mask, mask)].sum() - resolution * k[mask].sum() ** 2 / two_m
    return float(q / two_m)


def modularity(graph: CooccurrenceGraph, partition, resolution: float = 1.0) -> float:
    """Q of a partition (mapping node -> label or label sequence); NaN on an empty graph."""
    return modularity_matrix(graph.weights, _as_labels(graph.nodes, partition), resolution)


def _local_moves(A: np.ndarray, comm: np.ndarray, order: np.ndarray, two_m: float,
                 resolution: float) -> bool:
    """Greedy single-node moves until no move raises Q. Returns True if anything moved."""
    k = A.sum(axis=1)
    n = len(comm)
    tot = np.bincount(comm, weights=k, minlength=n).astype(float)
    moved_any = False
    while True:
        moved = False
        for i in order:
            ci = comm[i]
            tot[ci] -= k[i]
            links = np.bincount(comm, weights=A[i], minlength=n)
            links[ci] -= A[i, i]
            gain = links - resolution * k[i] * tot / two_m
            occupied = np.bincount(comm, minlength=n) - (np.arange(n) == ci) > 0
            # neighbours, own community, or the first empty slot
            cand = (links > 0) | (np.arange(n) == ci)
            free = np.flatnonzero(~occupied)
            if len(free):
                cand[free[0]] = True
            top = gain[cand].max()
            best = ci
            if top > gain[ci] + _EPS:
                best = int(np.flatnonzero(cand & (gain >= top - _EPS))[0])
            comm[i] = best
            tot[best] += k[i]
            if best != ci:
                moved = moved_any = True
        if not moved:
            return moved_any


def _relabel(comm: np.ndarray) -> np.ndarray:
    _, first = np.unique(comm, return_index=True)
    order = np.argsort(first)
    mapping = np.empty(comm.max() + 1, dtype=int)
    mapping[np.unique(comm)[order]] = np.arange(len(order))
    return mapping[comm]


def _louvain(W: np.ndarray, rng: np.random.Generator, resolution: float) -> np.ndarray:
    n = W.shape[0]
    two_m = W.sum()
    membership = np.arange(n)
    A = W.copy()
    while True:
        comm = np.arange(A.shape[0])
        order = rng.permutation(A.shape[0])
        moved = _local_moves(A, comm, order, two_m, resolution)
        comm = _relabel(comm)
        membership = comm[membership]
        if not moved or comm.max() + 1 == A.shape[0]:
            break
        g = comm.max() + 1
        P = np.zeros((A.shape[0], g))
        P[np.arange(A.shape[0]), comm] = 1.0
        A = P.T @ A @ P
    return _relabel(membership)


def _refine(W: np.ndarray, labels: np.ndarray, resolution: float) -> np.ndarray:
    """Polish a partition with node moves and pairwise community merges."""
    two_m = W.sum()
    labels = labels.copy()
    order = np.arange(W.shape[0])
    while True:
        _local_moves(W, labels, order, two_m, resolution)
        labels = _relabel(labels)
        g = labels.max() + 1
        P = np.zeros((W.shape[0], g))
        P[np.arange(W.shape[0]), labels] = 1.0
        E = P.T @ W @ P
        tot = E.sum(axis=1)
        best, pair = _EPS, None
        for a in range(g):
            for b in range(a + 1, g):
                gain = 2 * E[a, b] - 2 * resolution * tot[a] * tot[b] / two_m
                if gain > best:
                    best, pair = gain, (a, b)
        if pair is None:
            return labels
        labels[labels == pair[1]] = pair[0]
        labels = _relabel(labels)


def cluster_modularity(
    graph: CooccurrenceGraph,
    seed: int = 0,
    resolution: float = 1.0,
    restarts: int = 8,
) -> ActivityPartition:
    """Louvain-style agglomerative modularity maximization.

    Each restart visits nodes in a seeded random order and its result is
    polished with node moves and community merges; the best restart wins. Ties
    keep the lowest-index community, so equal seeds give equal output.
    """
    W = np.asarray(graph.weights, dtype=float)
    n = W.shape[0]
    if n == 0:
        raise ValueError("empty graph")
    if W.sum() <= 0:
        return ActivityPartition({node: i for i, node in enumerate(graph.nodes)}, float("nan"))
    rng = np.random.default_rng(seed)
    best_q, best_labels = -math.inf, None
    for _ in range(max(1, restarts)):
        labels = _refine(W, _louvain(W, rng, resolution), resolution)
        q = modularity_matrix(W, labels, resolution)
        if q > best_q + _EPS:
            best_q, best_labels = q, labels
    return ActivityPartition(
        {node: int(c) for node, c in zip(graph.nodes, best_labels)}, best_q
    )


def label_clusters(partition: ActivityPartition,
                   reference: Mapping[str, str] = REFERENCE_PARTITION) -> dict[str, str]:
    """Name each found cluster after the reference role it overlaps most.

    Clusters are matched one-to-one to reference roles by maximum overlap;
    surplus clusters take the role of their plurality.
    """
    roles = sorted(set(reference.values()))
    clusters = sorted(set(partition.labels.values()))
    overlap = np.zeros((len(clusters), len(roles)))
    for node, c in partition.labels.items():
        if node in reference:
            overlap[clusters.index(c), roles.index(reference[node])] += 1
    rows, cols = linear_sum_assignment(-overlap)
    name = {clusters[r]: roles[c] for r, c in zip(rows, cols)}
    for i, c in enumerate(clusters):
        if c not in name:
            name[c] = roles[int(np.argmax(overlap[i]))]
    return {node: name[c] for node, c in partition.labels.items()}


def agreement_with_reference(partition: ActivityPartition,
                             reference: Mapping[str, str] = REFERENCE_PARTITION) -> float:
    """Fraction of activities whose matched cluster equals the reference role."""
    named = label_clusters(partition, reference)
    shared = [a for a in named if a in reference]
    if not shared:
        return float("nan")
    return sum(named[a] == reference[a] for a in shared) / len(shared)
