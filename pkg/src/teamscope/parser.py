"""Rule-based extraction of per-author activities from contribution statements.

Statements are formulaic ("L.W. and J.E. designed research; L.W. performed
research."), so a deterministic pipeline is enough:

1. author mentions (initials, full names, collective phrases such as
   "All authors") are located and replaced by placeholders;
2. the text is split into sentences on ``.`` and ``;``;
3. each sentence is split into clauses at every subject run, i.e. a run of
   mentions joined by ``and``/``,``/``&`` that is followed by a word;
4. the first word after a subject run is the predicate, and further verbs
   coordinated with ``and``/``,`` are added to it.
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .corpus import Corpus, PaperRecord
from .lexicon import ActivityLexicon, default_lexicon

COLLECTIVE_PHRASES = (
    "all authors", "all the authors", "all of the authors", "both authors",
    "the authors", "each author", "all co-authors", "all coauthors",
)

# tokens skipped between a subject and its verb
_SKIP = frozenset({
    "also", "jointly", "together", "equally", "additionally", "further",
    "has", "have", "had", "was", "were", "each", "both", "all", "then",
})
_CONNECTORS = frozenset({"and", ",", "&", "and,"})

_INITIALS = re.compile(r"(?<![\w.])(?:[A-Z][a-z]?\.\s?-?\s?){1,4}(?![\w])|(?<![\w.])[A-Z]{2,4}(?![\w.])")
_WORD = re.compile(r"@M\d+@|[A-Za-z][A-Za-z'/-]*|,|&")
_SENTENCE = re.compile(r"[.;:!?]+")


def initials_of(name: str) -> set[str]:
    """Initials keys for a full name: all-parts and given+family variants."""
    parts = [p for p in re.split(r"[\s.]+", name.strip()) if p]
    letters = []
    for part in parts:
        for sub in part.split("-"):
            if sub:
                letters.append(sub[0].upper())
    if not letters:
        return set()
    keys = {"".join(letters)}
    if len(parts) >= 2:
        given = "".join(s[0].upper() for s in parts[0].split("-") if s)
        keys.add(given + parts[-1][0].upper())
    return keys


@dataclass
class MentionMap:
    """Surface mention -> author ids, plus what failed to resolve."""

    mentions: dict[str, frozenset[str]] = field(default_factory=dict)
    unmatched: list[str] = field(default_factory=list)
    ambiguous: list[str] = field(default_factory=list)
    byline: tuple[str, ...] = ()
    # (start, end, key) spans found in the statement text
    spans: list[tuple[int, int, str]] = field(default_factory=list)

    def __getitem__(self, token: str) -> frozenset[str]:
        return self.mentions[token]

    def get(self, token, default=None):
        return self.mentions.get(token, default)


def resolve_author_mentions(
    statement_text: str,
    byline: Sequence[tuple[str, str]],
    collective: Iterable[str] = COLLECTIVE_PHRASES,
) -> MentionMap:
    """Map the author mentions of a statement onto byline author ids.

    Parameters
    ----------
    statement_text : str
    byline : sequence of (author_id, full_name)
    collective : phrases that denote every author on the byline

    Ambiguous initials resolve to every matching author and are also listed
    in ``ambiguous``; initials matching nobody go to ``unmatched``.
    """
    ids = tuple(a for a, _ in byline)
    result = MentionMap(byline=ids)
    by_key: dict[str, list[str]] = defaultdict(list)
    full_names: dict[str, str] = {}
    for aid, name in byline:
        for key in initials_of(name):
            if aid not in by_key[key]:
                by_key[key].append(aid)
        if name and " " in name.strip():
            full_names[name.strip()] = aid

    taken: list[tuple[int, int]] = []

    def free(s, e):
        return all(e <= a or s >= b for a, b in taken)

    everyone = frozenset(ids)
    for phrase in sorted(collective, key=len, reverse=True):
        for m in re.finditer(r"(?<!\w)" + re.escape(phrase) + r"(?!\w)", statement_text, re.I):
            if free(*m.span()):
                taken.append(m.span())
                result.spans.append((m.start(), m.end(), m.group(0)))
                result.mentions[m.group(0)] = everyone

    for name in sorted(full_names, key=len, reverse=True):
        for m in re.finditer(r"(?<!\w)" + re.escape(name) + r"(?!\w)", statement_text):
            if free(*m.span()):
                taken.append(m.span())
                result.spans.append((m.start(), m.end(), m.group(0)))
                result.mentions[m.group(0)] = frozenset({full_names[name]})

    for m in _INITIALS.finditer(statement_text):
        token = m.group(0).rstrip()
        s, e = m.start(), m.start() + len(token)
        if not free(s, e):
            continue
        key = re.sub(r"[^A-Z]", "", token)
        # bare capitals like "DNA" only count when they match an author
        if "." not in token and key not in by_key:
            continue
        matches = by_key.get(key, [])
        taken.append((s, e))
        result.spans.append((s, e, token))
        if not matches:
            if token not in result.unmatched:
                result.unmatched.append(token)
            continue
        if len(matches) > 1 and token not in result.ambiguous:
            result.ambiguous.append(token)
        result.mentions[token] = frozenset(matches)
    result.spans.sort()
    return result


@dataclass(frozen=True)
class Clause:
    authors: frozenset[str]
    verb: str


def _mask(text: str, mention_map: MentionMap) -> tuple[str, dict[str, frozenset[str]]]:
    """Replace mention spans by ``@M<i>@`` placeholders."""
    if not mention_map.spans:
        spans = []
        for token in sorted(mention_map.mentions, key=len, reverse=True):
            for m in re.finditer(r"(?<![\w.])" + re.escape(token) + r"(?![\w])", text):
                if all(m.end() <= a or m.start() >= b for a, b, _ in spans):
                    spans.append((m.start(), m.end(), token))
        spans.sort()
    else:
        spans = mention_map.spans
    pieces, placeholders, last = [], {}, 0
    for i, (s, e, token) in enumerate(spans):
        pieces.append(text[last:s])
        key = f"@M{i}@"
        pieces.append(f" {key} ")
        placeholders[key] = mention_map.mentions.get(token, frozenset())
        last = e
    pieces.append(text[last:])
    return "".join(pieces), placeholders


def _is_mention(tok: str) -> bool:
    return tok.startswith("@M")


def _subject_run(tokens: list[str], i: int) -> int:
    """End index (exclusive) of a mention run starting at ``i``."""
    j = i
    end = i
    while j < len(tokens):
        if _is_mention(tokens[j]):
            j += 1
            end = j
        elif tokens[j].lower() in _CONNECTORS:
            j += 1
        else:
            break
    return end


def parse_statement(
    statement_text: str,
    mention_map: MentionMap,
    lexicon: ActivityLexicon | None = None,
) -> list[Clause]:
    """Split a statement into (author set, surface verb) clauses.

    A clause whose subject is not an author mention still yields a Clause
    with an empty author set so callers can count it as unattributed.
    """
    if not statement_text or not statement_text.strip():
        return []
    lexicon = lexicon or default_lexicon()
    masked, placeholders = _mask(statement_text, mention_map)
    clauses: list[Clause] = []
    for sentence in _SENTENCE.split(masked):
        tokens = _WORD.findall(sentence)
        if not tokens:
            continue
        # subject runs: at sentence start or after a connector, followed by a word
        starts = []
        i = 0
        while i < len(tokens):
            if _is_mention(tokens[i]) and (i == 0 or tokens[i - 1].lower() in _CONNECTORS):
                end = _subject_run(tokens, i)
                if end < len(tokens) and not _is_mention(tokens[end]) and tokens[end] not in (",", "&"):
                    starts.append((i, end))
                i = end
            else:
                i += 1
        if not starts or starts[0][0] != 0:
            # leading text without an author subject
            head_end = starts[0][0] if starts else len(tokens)
            verb = next((t for t in tokens[:head_end] if lexicon.is_known_form(t)), None)
            if verb is not None:
                clauses.append(Clause(frozenset(), verb))
        for k, (s, e) in enumerate(starts):
            stop = starts[k + 1][0] if k + 1 < len(starts) else len(tokens)
            authors = frozenset().union(*(placeholders.get(t, frozenset()) for t in tokens[s:e] if _is_mention(t)))
            body = tokens[e:stop]
            # trailing connector belongs to the next clause
            while body and body[-1].lower() in _CONNECTORS:
                body.pop()
            for verb in _predicates(body, lexicon):
                clauses.append(Clause(authors, verb))
    return clauses


def _predicates(body: list[str], lexicon: ActivityLexicon) -> list[str]:
    j = 0
    while j < len(body) and body[j].lower() in _SKIP:
        j += 1
    if j >= len(body) or _is_mention(body[j]) or body[j] in (",", "&"):
        return []
    verbs = [body[j]]
    for k in range(j + 1, len(body)):
        tok = body[k]
        prev = body[k - 1].lower()
        if prev in _CONNECTORS or (prev in _SKIP and k >= 2 and body[k - 2].lower() in _CONNECTORS):
            if not _is_mention(tok) and _looks_like_verb(tok, lexicon):
                verbs.append(tok)
    return verbs


def _looks_like_verb(tok: str, lexicon: ActivityLexicon) -> bool:
    low = tok.lower()
    return lexicon.is_known_form(low) or (len(low) > 4 and low.endswith("ed"))


def canonicalize_verb(surface: str, lexicon: ActivityLexicon | None = None) -> str | None:
    """Canonical activity for a surface verb, or None if it is not one of the 25."""
    return (lexicon or default_lexicon()).canonicalize(surface)


@dataclass
class ActivityProfile:
    paper_id: str
    author_id: str
    activities: frozenset[str]
    unmatched_verbs: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "paper_id": self.paper_id,
            "author_id": self.author_id,
            "activities": sorted(self.activities),
            "unmatched_verbs": list(self.unmatched_verbs),
        }

    @classmethod
    def from_json(cls, raw: dict) -> "ActivityProfile":
        return cls(raw["paper_id"], raw["author_id"], frozenset(raw["activities"]),
                   tuple(raw.get("unmatched_verbs", ())))


@dataclass
class PaperParse:
    paper_id: str
    profiles: list[ActivityProfile]
    n_verbs: int
    n_matched: int
    n_unattributed: int
    unmatched_mentions: list[str]
    ambiguous_mentions: list[str]

    @property
    def match_fraction(self) -> float:
        return self.n_matched / self.n_verbs if self.n_verbs else float("nan")


def parse_paper(paper: PaperRecord, lexicon: ActivityLexicon | None = None,
                collective: Iterable[str] = COLLECTIVE_PHRASES) -> PaperParse:
    lexicon = lexicon or default_lexicon()
    text = paper.statement_text or ""
    names = list(zip(paper.byline, paper.author_names or paper.byline))
    mmap = resolve_author_mentions(text, names, collective)
    acts: dict[str, set[str]] = {a: set() for a in paper.byline}
    unmatched: dict[str, list[str]] = {a: [] for a in paper.byline}
    n_verbs = n_matched = n_unattr = 0
    for clause in parse_statement(text, mmap, lexicon):
        n_verbs += 1
        canon = lexicon.canonicalize(clause.verb)
        if canon is not None:
            n_matched += 1
        if not clause.authors:
            n_unattr += 1
            continue
        for aid in clause.authors:
            if canon is None:
                unmatched[aid].append(clause.verb)
            else:
                acts[aid].add(canon)
    profiles = [
        ActivityProfile(paper.paper_id, a, frozenset(acts[a]), tuple(unmatched[a]))
        for a in paper.byline
    ]
    return PaperParse(paper.paper_id, profiles, n_verbs, n_matched, n_unattr,
                      list(mmap.unmatched), list(mmap.ambiguous))


@dataclass
class CoverageReport:
    n_papers: int
    n_verbs: int
    n_matched: int
    n_unattributed: int
    mean_unique_activities: float
    ambiguous_mentions: int
    unmatched_mentions: int
    paper_match_fraction: dict[str, float] = field(default_factory=dict)

    @property
    def coverage(self) -> float:
        return self.n_matched / self.n_verbs if self.n_verbs else float("nan")

    def to_json(self) -> dict:
        cov = self.coverage
        return {
            "n_papers": self.n_papers,
            "n_verbs": self.n_verbs,
            "n_matched": self.n_matched,
            "coverage": None if cov != cov else cov,
            "n_unattributed": self.n_unattributed,
            "mean_unique_activities": self.mean_unique_activities,
            "ambiguous_mentions": self.ambiguous_mentions,
            "unmatched_mentions": self.unmatched_mentions,
        }


def extract_profiles(
    corpus: Corpus | Iterable[PaperRecord],
    lexicon: ActivityLexicon | None = None,
    collective: Iterable[str] = COLLECTIVE_PHRASES,
) -> tuple[list[ActivityProfile], CoverageReport]:
    """Parse every statement in the corpus into per-author profiles.

    Papers without statement text are skipped.
    """
    lexicon = lexicon or default_lexicon()
    collective = tuple(collective)
    profiles: list[ActivityProfile] = []
    n_papers = n_verbs = n_matched = n_unattr = n_amb = n_unm = 0
    unique_counts = []
    fractions = {}
    for paper in corpus:
        if not paper.statement_text:
            continue
        parsed = parse_paper(paper, lexicon, collective)
        n_papers += 1
        n_verbs += parsed.n_verbs
        n_matched += parsed.n_matched
        n_unattr += parsed.n_unattributed
        n_amb += len(parsed.ambiguous_mentions)
        n_unm += len(parsed.unmatched_mentions)
        unique_counts.append(len(set().union(*(p.activities for p in parsed.profiles))))
        fractions[paper.paper_id] = parsed.match_fraction
        profiles.extend(parsed.profiles)
    mean_unique = sum(unique_counts) / len(unique_counts) if unique_counts else float("nan")
    report = CoverageReport(n_papers, n_verbs, n_matched, n_unattr, mean_unique, n_amb, n_unm, fractions)
    return profiles, report
