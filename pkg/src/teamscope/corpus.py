"""Publication corpus: record ingestion, citation graph, author career index.

Input is line-delimited JSON, one paper per line::

    {"id": "p1", "year": 2010, "venue": "PNAS",
     "authors": [{"id": "a1", "name": "Lingfei Wu"}, "a2"],
     "corresponding": ["a1"], "refs": ["p0"], "topics": ["k1", "k2"],
     "statement": "L.W. designed research."}

Author entries are either bare ids or ``{"id", "name"}`` objects; a bare id
doubles as the display name.
"""

from __future__ import annotations

import bisect
import io
import json
import logging
import math
import pickle
import struct
import zlib
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

logger = logging.getLogger(__name__)

YEAR_RANGE = (1900, 2100)
SNAPSHOT_MAGIC = b"TEAMSCOPE-SNAPSHOT"
SNAPSHOT_VERSION = 1


class SnapshotVersionError(RuntimeError):
    pass


class RecordError(ValueError):
    """A single input record violates the schema."""


@dataclass(frozen=True)
class PaperRecord:
    paper_id: str
    year: int
    venue: str
    byline: tuple[str, ...]
    corresponding: frozenset[str] = frozenset()
    references: tuple[str, ...] = ()
    topics: tuple[str, ...] = ()
    statement_text: str | None = None
    author_names: tuple[str, ...] = ()

    @property
    def team_size(self) -> int:
        return len(self.byline)

    def name_of(self, author_id: str) -> str:
        if self.author_names:
            return self.author_names[self.byline.index(author_id)]
        return author_id

    def to_json(self) -> dict:
        authors = [
            {"id": a, "name": n} if n != a else a
            for a, n in zip(self.byline, self.author_names or self.byline)
        ]
        out = {
            "id": self.paper_id,
            "year": self.year,
            "venue": self.venue,
            "authors": authors,
            "corresponding": [a for a in self.byline if a in self.corresponding],
            "refs": list(self.references),
            "topics": list(self.topics),
        }
        if self.statement_text is not None:
            out["statement"] = self.statement_text
        return out


def _str_list(raw: dict, key: str, required: bool = False) -> list[str]:
    if key not in raw:
        if required:
            raise RecordError(f"missing field {key!r}")
        return []
    value = raw[key]
    if not isinstance(value, list):
        raise RecordError(f"field {key!r} must be a list")
    return value


def parse_record(raw: dict, year_range: tuple[int, int] = YEAR_RANGE) -> PaperRecord:
    """Validate one raw record and build a :class:`PaperRecord`.

    Raises
    ------
    RecordError
        If a field is missing, mistyped, or breaks a record invariant.
    """
    if not isinstance(raw, dict):
        raise RecordError("record is not an object")
    pid = raw.get("id")
    if not isinstance(pid, str) or not pid:
        raise RecordError("missing or invalid 'id'")
    year = raw.get("year")
    if isinstance(year, bool) or not isinstance(year, int):
        raise RecordError(f"{pid}: 'year' must be an integer")
    if not year_range[0] <= year <= year_range[1]:
        raise RecordError(f"{pid}: year {year} outside {year_range}")
    venue = raw.get("venue", "")
    if not isinstance(venue, str):
        raise RecordError(f"{pid}: 'venue' must be a string")

    byline, names = [], []
    for entry in _str_list(raw, "authors", required=True):
        if isinstance(entry, str):
            aid, name = entry, entry
        elif isinstance(entry, dict) and isinstance(entry.get("id"), str):
            aid = entry["id"]
            name = entry.get("name") or aid
            if not isinstance(name, str):
                raise RecordError(f"{pid}: author name must be a string")
        else:
            raise RecordError(f"{pid}: malformed author entry")
        byline.append(aid)
        names.append(name)
    if not byline:
        raise RecordError(f"{pid}: empty byline")
    if len(set(byline)) != len(byline):
        raise RecordError(f"{pid}: duplicate authors in byline")

    corresponding = _str_list(raw, "corresponding")
    if not all(isinstance(a, str) for a in corresponding):
        raise RecordError(f"{pid}: corresponding ids must be strings")
    if not set(corresponding) <= set(byline):
        raise RecordError(f"{pid}: corresponding author not in byline")

    refs = _str_list(raw, "refs")
    topics = _str_list(raw, "topics")
    if not all(isinstance(r, str) for r in refs) or not all(isinstance(t, str) for t in topics):
        raise RecordError(f"{pid}: refs and topics must be string lists")
    if pid in refs:
        logger.warning("%s: self-reference dropped", pid)
        refs = [r for r in refs if r != pid]
    # keep first occurrence order, drop repeated references
    refs = list(dict.fromkeys(refs))

    statement = raw.get("statement")
    if statement is not None and not isinstance(statement, str):
        raise RecordError(f"{pid}: 'statement' must be a string")

    return PaperRecord(
        paper_id=pid,
        year=year,
        venue=venue,
        byline=tuple(byline),
        corresponding=frozenset(corresponding),
        references=tuple(refs),
        topics=tuple(topics),
        statement_text=statement,
        author_names=tuple(names),
    )


@dataclass
class Corpus:
    papers: dict[str, PaperRecord] = field(default_factory=dict)
    skipped: int = 0
    warnings: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.papers)

    def __iter__(self) -> Iterator[PaperRecord]:
        return iter(self.papers.values())

    def __getitem__(self, paper_id: str) -> PaperRecord:
        return self.papers[paper_id]

    def __contains__(self, paper_id: object) -> bool:
        return paper_id in self.papers

    def with_statements(self) -> list[PaperRecord]:
        return [p for p in self.papers.values() if p.statement_text]


def ingest_papers(records: Iterable, year_range: tuple[int, int] = YEAR_RANGE) -> Corpus:
    """Build a corpus from raw records (dicts or JSON lines).

    Malformed records are counted in ``Corpus.skipped`` and never abort the
    run. Duplicate ids keep the last record seen.
    """
    corpus = Corpus()
    for i, raw in enumerate(records):
        if isinstance(raw, (str, bytes)):
            if not raw.strip():
                continue
            try:
                raw = json.loads(raw)
            except json.JSONDecodeError as exc:
                corpus.skipped += 1
                corpus.warnings.append(f"record {i}: invalid JSON ({exc.msg})")
                logger.warning("record %d: invalid JSON", i)
                continue
        try:
            paper = parse_record(raw, year_range)
        except RecordError as exc:
            corpus.skipped += 1
            corpus.warnings.append(f"record {i}: {exc}")
            logger.warning("record %d: %s", i, exc)
            continue
        if paper.paper_id in corpus.papers:
            del corpus.papers[paper.paper_id]
        corpus.papers[paper.paper_id] = paper
    return corpus


def iter_lines(paths: Iterable[str | Path]) -> Iterator[str]:
    """Yield lines from one or more UTF-8 NDJSON files (OSError on unreadable input)."""
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            yield from fh


def read_corpus(paths, year_range: tuple[int, int] = YEAR_RANGE) -> Corpus:
    if isinstance(paths, (str, Path)):
        paths = [paths]
    return ingest_papers(iter_lines(paths), year_range)


def write_ndjson(corpus: Corpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for paper in corpus:
            fh.write(json.dumps(paper.to_json(), ensure_ascii=False, sort_keys=True) + "\n")


@dataclass
class CitationGraph:
    """Paper -> reference adjacency plus its transpose.

    References to papers outside the corpus stay in the graph as sink nodes
    whose year is None.
    """

    out_edges: dict[str, tuple[str, ...]]
    in_edges: dict[str, tuple[str, ...]]
    year: dict[str, int | None]
    anomalies: int = 0

    @property
    def n_edges(self) -> int:
        return sum(len(v) for v in self.out_edges.values())

    def citers(self, paper_id: str) -> tuple[str, ...]:
        return self.in_edges.get(paper_id, ())

    def references(self, paper_id: str) -> tuple[str, ...]:
        return self.out_edges.get(paper_id, ())

    @property
    def horizon(self) -> int | None:
        years = [y for y in self.year.values() if y is not None]
        return max(years) if years else None


def build_citation_graph(corpus: Corpus) -> CitationGraph:
    out_edges: dict[str, tuple[str, ...]] = {}
    in_lists: dict[str, list[str]] = defaultdict(list)
    year: dict[str, int | None] = {}
    anomalies = 0
    for paper in corpus:
        out_edges[paper.paper_id] = paper.references
        year[paper.paper_id] = paper.year
    for paper in corpus:
        for ref in paper.references:
            in_lists[ref].append(paper.paper_id)
            if ref not in year:
                year[ref] = None
                out_edges[ref] = ()
            elif year[ref] is not None and paper.year < year[ref]:
                anomalies += 1
    in_edges = {pid: tuple(in_lists.get(pid, ())) for pid in out_edges}
    if anomalies:
        logger.info("%d citation edges point forward in time", anomalies)
    return CitationGraph(out_edges=out_edges, in_edges=in_edges, year=year, anomalies=anomalies)


class AuthorIndex:
    """Per-author career histories, queried strictly before a given year.

    All ``prior_*`` methods answer "as of the end of year ``y - 1``": papers
    dated ``y`` or later, including the focal paper, never contribute.
    """

    def __init__(self):
        self.first_year: dict[str, int] = {}
        self.papers_by_year: dict[str, dict[int, int]] = {}
        self._years: dict[str, list[int]] = {}
        self._cum_papers: dict[str, list[int]] = {}
        self._cum_topics: dict[str, list[frozenset[str]]] = {}
        self._cum_refs: dict[str, list[frozenset[str]]] = {}
        self._citation_years: dict[str, list[int]] = {}

    def __contains__(self, author_id: object) -> bool:
        return author_id in self.first_year

    @property
    def authors(self) -> list[str]:
        return list(self.first_year)

    def _slot(self, author_id: str, year: int) -> int:
        """Index of the last publishing year strictly before ``year`` (-1 if none)."""
        return bisect.bisect_left(self._years[author_id], year) - 1

    def career_age(self, author_id: str, year: int) -> int:
        return year - self.first_year[author_id]

    def prior_papers(self, author_id: str, year: int) -> int:
        if author_id not in self._years:
            return 0
        i = self._slot(author_id, year)
        return self._cum_papers[author_id][i] if i >= 0 else 0

    def prior_topics(self, author_id: str, year: int) -> frozenset[str]:
        if author_id not in self._years:
            return frozenset()
        i = self._slot(author_id, year)
        return self._cum_topics[author_id][i] if i >= 0 else frozenset()

    def prior_references(self, author_id: str, year: int) -> frozenset[str]:
        if author_id not in self._years:
            return frozenset()
        i = self._slot(author_id, year)
        return self._cum_refs[author_id][i] if i >= 0 else frozenset()

    def prior_citations(self, author_id: str, year: int) -> int:
        """Citations dated before ``year`` to the author's papers dated before ``year``."""
        arr = self._citation_years.get(author_id)
        if not arr:
            return 0
        return bisect.bisect_left(arr, year)

    def productivity(self, author_id: str, year: int) -> int:
        return self.papers_by_year.get(author_id, {}).get(year, 0)


def build_author_index(corpus: Corpus, graph: CitationGraph | None = None) -> AuthorIndex:
    if graph is None:
        graph = build_citation_graph(corpus)
    index = AuthorIndex()
    per_author: dict[str, list[PaperRecord]] = defaultdict(list)
    for paper in corpus:
        for aid in paper.byline:
            per_author[aid].append(paper)

    for aid, papers in per_author.items():
        papers.sort(key=lambda p: (p.year, p.paper_id))
        years = sorted({p.year for p in papers})
        counts: dict[int, int] = defaultdict(int)
        for p in papers:
            counts[p.year] += 1
        cum_papers, cum_topics, cum_refs = [], [], []
        n, topics, refs = 0, set(), set()
        by_year: dict[int, list[PaperRecord]] = defaultdict(list)
        for p in papers:
            by_year[p.year].append(p)
        for y in years:
            for p in by_year[y]:
                n += 1
                topics.update(p.topics)
                refs.update(p.references)
                refs.add(p.paper_id)
            cum_papers.append(n)
            cum_topics.append(frozenset(topics))
            cum_refs.append(frozenset(refs))

        cites = []
        for p in papers:
            for citer in graph.citers(p.paper_id):
                cy = graph.year.get(citer)
                if cy is not None:
                    cites.append(max(p.year, cy))
        cites.sort()

        index.first_year[aid] = years[0]
        index.papers_by_year[aid] = dict(counts)
        index._years[aid] = years
        index._cum_papers[aid] = cum_papers
        index._cum_topics[aid] = cum_topics
        index._cum_refs[aid] = cum_refs
        index._citation_years[aid] = cites
    return index


@dataclass(frozen=True)
class CorpusStats:
    n_papers: int
    mean_team_size: float
    mean_topics: float
    mean_references: float
    mean_citations: float
    skipped: int = 0

    def as_dict(self) -> dict:
        return {k: (None if isinstance(v, float) and math.isnan(v) else v)
                for k, v in self.__dict__.items()}


def summarize(corpus: Corpus, graph: CitationGraph | None = None) -> CorpusStats:
    """Corpus-level means; an empty corpus reports NaN rather than zero."""
    n = len(corpus)
    if n == 0:
        nan = float("nan")
        return CorpusStats(0, nan, nan, nan, nan, corpus.skipped)
    if graph is None:
        graph = build_citation_graph(corpus)
    papers = list(corpus)
    return CorpusStats(
        n_papers=n,
        mean_team_size=sum(p.team_size for p in papers) / n,
        mean_topics=sum(len(p.topics) for p in papers) / n,
        mean_references=sum(len(p.references) for p in papers) / n,
        mean_citations=sum(len(graph.citers(p.paper_id)) for p in papers) / n,
        skipped=corpus.skipped,
    )


@dataclass
class Snapshot:
    corpus: Corpus
    graph: CitationGraph
    index: AuthorIndex


def load_corpus_bundle(corpus: Corpus) -> Snapshot:
    graph = build_citation_graph(corpus)
    return Snapshot(corpus, graph, build_author_index(corpus, graph))


def save_snapshot(snapshot: Snapshot, path: str | Path) -> None:
    """Write corpus + indices as a zlib-compressed pickle behind a versioned header."""
    payload = zlib.compress(pickle.dumps(snapshot, protocol=pickle.HIGHEST_PROTOCOL), 6)
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<HQ", SNAPSHOT_VERSION, len(payload)))
        fh.write(payload)


def load_snapshot(path: str | Path) -> Snapshot:
    with open(path, "rb") as fh:
        data = fh.read()
    buf = io.BytesIO(data)
    if buf.read(len(SNAPSHOT_MAGIC)) != SNAPSHOT_MAGIC:
        raise SnapshotVersionError(f"{path}: not a teamscope snapshot")
    header = buf.read(struct.calcsize("<HQ"))
    if len(header) != struct.calcsize("<HQ"):
        raise SnapshotVersionError(f"{path}: truncated header")
    version, size = struct.unpack("<HQ", header)
    if version != SNAPSHOT_VERSION:
        raise SnapshotVersionError(
            f"{path}: snapshot version {version}, expected {SNAPSHOT_VERSION}"
        )
    payload = buf.read()
    if len(payload) != size:
        raise SnapshotVersionError(f"{path}: truncated payload")
    return pickle.loads(zlib.decompress(payload))
