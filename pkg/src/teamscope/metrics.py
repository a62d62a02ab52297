"""Paper-level outcomes: novelty, disruption/development, productivity, citation windows."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
from scipy.stats import rankdata

from .corpus import AuthorIndex, CitationGraph, Corpus, PaperRecord
from .embeddings import EmbeddingModel
from .lexicon import Role

NAN = float("nan")


def typicality(k1: str, k2: str, model: EmbeddingModel) -> float:
    """Inner product of two keyword vectors; NaN if either keyword is missing."""
    if k1 not in model or k2 not in model:
        return NAN
    return float(np.dot(model[k1], model[k2]))


def novelty(k1: str, k2: str, model: EmbeddingModel) -> float:
    return -typicality(k1, k2, model)


@dataclass
class NoveltyResult:
    paper_id: str
    pair_novelty: list[float]
    score: float
    top_novel: bool = False

    @property
    def defined(self) -> bool:
        return not math.isnan(self.score)


def paper_novelty(paper: PaperRecord, model: EmbeddingModel, quantile: float = 0.9) -> NoveltyResult:
    """Upper quantile of pairwise keyword novelty over the paper's embedded topics."""
    keys = [k for k in dict.fromkeys(paper.topics) if k in model]
    if len(keys) < 2:
        return NoveltyResult(paper.paper_id, [], NAN)
    M = np.stack([model[k] for k in keys])
    G = M @ M.T
    iu = np.triu_indices(len(keys), 1)
    values = -G[iu]
    return NoveltyResult(paper.paper_id, values.tolist(), float(np.quantile(values, quantile)))


def top_share_flags(scores: Mapping[str, float], years: Mapping[str, int],
                    share: float = 0.1) -> dict[str, bool]:
    """Flag the top ``share`` of defined scores within each year cohort.

    A cohort of n papers flags ceil(share * n) of them; ties are broken by
    paper id so the result is deterministic.
    """
    cohorts: dict[int, list[str]] = defaultdict(list)
    for pid, s in scores.items():
        if not math.isnan(s):
            cohorts[years[pid]].append(pid)
    flags = {pid: False for pid in scores}
    for members in cohorts.values():
        k = math.ceil(share * len(members) - 1e-9)
        ranked = sorted(members, key=lambda p: (-scores[p], p))
        for pid in ranked[:k]:
            flags[pid] = True
    return flags


@dataclass
class DisruptionResult:
    paper_id: str
    n_i: int
    n_j: int
    n_k: int
    D: float
    development_percentile: float = NAN
    flags: tuple[str, ...] = ()

    @property
    def development(self) -> float:
        return -self.D


def citer_buckets(focal: str, graph: CitationGraph, strict_after: bool = True
                  ) -> tuple[set[str], set[str], set[str]] | None:
    """(focal-only, both, references-only) citer sets, or None if the focal year is unknown."""
    y0 = graph.year.get(focal)
    if y0 is None:
        return None

    def later(p):
        yp = graph.year.get(p)
        if yp is None:
            return False
        return yp > y0 if strict_after else yp >= y0

    refs = set(graph.references(focal))
    f_citers = {p for p in graph.citers(focal) if p != focal and later(p)}
    r_citers = set()
    for r in refs:
        r_citers.update(p for p in graph.citers(r) if p != focal and later(p))
    return f_citers - r_citers, f_citers & r_citers, r_citers - f_citers


def disruption(focal: str, graph: CitationGraph, strict_after: bool = True) -> DisruptionResult:
    """D = (n_i - n_j) / (n_i + n_j + n_k) over papers published after the focal paper."""
    if focal not in graph.year:
        raise KeyError(f"{focal} not in citation graph")
    buckets = citer_buckets(focal, graph, strict_after)
    if buckets is None:
        return DisruptionResult(focal, 0, 0, 0, NAN, flags=("unknown_year",))
    only_f, both, only_r = buckets
    n_i, n_j, n_k = len(only_f), len(both), len(only_r)
    denom = n_i + n_j + n_k
    if denom == 0:
        return DisruptionResult(focal, 0, 0, 0, NAN, flags=("no_citers",))
    return DisruptionResult(focal, n_i, n_j, n_k, (n_i - n_j) / denom)


def development_percentiles(results: Iterable[DisruptionResult], graph: CitationGraph) -> None:
    """Fill ``development_percentile`` in place: share (0-100] of the year cohort at or below."""
    cohorts: dict[int, list[DisruptionResult]] = defaultdict(list)
    for r in results:
        if not math.isnan(r.D):
            cohorts[graph.year[r.paper_id]].append(r)
    for members in cohorts.values():
        dev = np.array([r.development for r in members])
        ranks = rankdata(dev, method="max")
        for r, rk in zip(members, ranks):
            r.development_percentile = float(100.0 * rk / len(members))


def disruption_table(graph: CitationGraph, papers: Iterable[str] | None = None,
                     strict_after: bool = True) -> dict[str, DisruptionResult]:
    if papers is None:
        papers = [p for p, y in graph.year.items() if y is not None]
    out = {p: disruption(p, graph, strict_after) for p in papers}
    development_percentiles(out.values(), graph)
    return out


def productivity(author_id: str, year: int, index_or_corpus) -> int:
    """Number of the author's papers dated exactly ``year``."""
    if isinstance(index_or_corpus, AuthorIndex):
        return index_or_corpus.productivity(author_id, year)
    return sum(1 for p in index_or_corpus if p.year == year and author_id in p.byline)


def team_productivity_split(paper: PaperRecord, roles: Mapping[str, Role],
                            index: AuthorIndex) -> tuple[float, float]:
    """Mean same-year productivity of Lead authors and of Support authors (NaN if none)."""
    lead, support = [], []
    for a in paper.byline:
        r = roles.get(a, Role.UNKNOWN)
        if r == Role.LEAD:
            lead.append(index.productivity(a, paper.year))
        elif r in (Role.DIRECT, Role.INDIRECT):
            support.append(index.productivity(a, paper.year))
    mean = lambda v: sum(v) / len(v) if v else NAN  # noqa: E731
    return mean(lead), mean(support)


@dataclass(frozen=True)
class CitationWindows:
    c_short: int
    c_long: int
    long_observable: bool


def citation_windows(paper_id: str, graph: CitationGraph, short: int = 10, long_after: int = 20,
                     include_pub_year: bool = True, horizon: int | None = None
                     ) -> CitationWindows | None:
    """Citations within ``short`` years and strictly after ``long_after`` years.

    Returns None when the focal year is unknown. ``long_observable`` is
    False when the corpus horizon ends before year y + long_after + 1.
    """
    y = graph.year.get(paper_id)
    if y is None:
        return None
    if horizon is None:
        horizon = graph.horizon
    first = y if include_pub_year else y + 1
    c_short = c_long = 0
    for citer in graph.citers(paper_id):
        cy = graph.year.get(citer)
        if cy is None:
            continue
        if first <= cy <= y + short:
            c_short += 1
        elif cy > y + long_after:
            c_long += 1
    observable = horizon is not None and horizon >= y + long_after + 1
    return CitationWindows(c_short, c_long, observable)


@dataclass
class MetricOptions:
    quantile: float = 0.9
    top_share: float = 0.1
    short_window: int = 10
    long_after: int = 20
    include_pub_year: bool = True
    strict_after: bool = True


METRIC_COLUMNS = (
    "paper_id", "year", "n", "lratio", "novelty_score", "top_novel", "D",
    "development_pct", "prod_lead", "prod_support", "c10", "c20plus", "flags",
    "age_mean", "age_sd",
)


def compute_metrics(
    corpus: Corpus,
    graph: CitationGraph,
    index: AuthorIndex,
    lratios: Mapping[str, float],
    roles: Mapping[str, Mapping[str, Role]],
    model: EmbeddingModel | None = None,
    options: MetricOptions | None = None,
) -> list[dict]:
    """One row of outcomes per paper with an L-ratio.

    ``lratios`` maps paper id -> L-ratio; ``roles`` maps paper id ->
    {author: role}. Career-age mean and SD (population SD) of the team in the
    publication year are included as regression controls.
    """
    opt = options or MetricOptions()
    papers = [corpus[p] for p in lratios if p in corpus]
    disrupt = disruption_table(graph, [p.paper_id for p in papers], opt.strict_after)
    nov = {}
    if model is not None:
        nov = {p.paper_id: paper_novelty(p, model, opt.quantile) for p in papers}
    top = top_share_flags({k: v.score for k, v in nov.items()},
                          {p.paper_id: p.year for p in papers}, opt.top_share)
    horizon = graph.horizon
    rows = []
    for p in papers:
        flags = []
        lr = lratios[p.paper_id]
        d = disrupt[p.paper_id]
        flags.extend(d.flags)
        nv = nov.get(p.paper_id)
        if nv is None or not nv.defined:
            flags.append("no_novelty")
        prod_lead, prod_support = team_productivity_split(p, roles.get(p.paper_id, {}), index)
        win = citation_windows(p.paper_id, graph, opt.short_window, opt.long_after,
                               opt.include_pub_year, horizon)
        if not win.long_observable:
            flags.append("c20_censored")
        ages = np.array([index.career_age(a, p.year) for a in p.byline], dtype=float)
        rows.append({
            "paper_id": p.paper_id,
            "year": p.year,
            "n": p.team_size,
            "lratio": lr,
            "novelty_score": nv.score if nv is not None else NAN,
            "top_novel": int(top.get(p.paper_id, False)) if nv is not None and nv.defined else NAN,
            "D": d.D,
            "development_pct": d.development_percentile,
            "prod_lead": prod_lead,
            "prod_support": prod_support,
            "c10": win.c_short,
            "c20plus": win.c_long,
            "flags": ";".join(flags),
            "age_mean": float(ages.mean()),
            "age_sd": float(ages.std()),
        })
    return rows
