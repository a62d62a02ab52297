import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from teamscope.corpus import ingest_papers, parse_record
from teamscope.lexicon import ACTIVITIES, ActivityLexicon, default_lexicon, load_lexicon
from teamscope.parser import (
    Clause, canonicalize_verb, extract_profiles, initials_of, parse_paper, parse_statement,
    resolve_author_mentions,
)
from teamscope.synth import planted_profiles, render_statement

BYLINE = [("a", "Lu Wu"), ("b", "Jan Evans"), ("c", "Mo Kim")]
TEXT = ("L.W. and J.E. designed research; L.W. performed research and analyzed data. "
        "All authors wrote the paper. The data were collected by M.K.")


def _paper(text, byline=BYLINE):
    return parse_record({"id": "x", "year": 2000, "statement": text,
                         "authors": [{"id": a, "name": n} for a, n in byline]})


@pytest.mark.parametrize("surface,canon", [
    ("performed", "perform"), ("wrote", "write"), ("written", "write"), ("analysed", "analyze"),
    ("Designed", "design"), ("supervising", "supervise"), ("did", "do"), ("purified", "purify"),
    ("carried", "carry"), ("contributed", "contribute"), ("ran", None), ("synthesized", None),
])
def test_canonicalize_verb(surface, canon):
    assert canonicalize_verb(surface) == canon


def test_lexicon_has_25_activities_in_three_clusters():
    lex = default_lexicon()
    assert len(lex.activities) == 25 == len(ACTIVITIES)
    assert isinstance(load_lexicon(), ActivityLexicon)


def test_lexicon_file_missing(tmp_path):
    with pytest.raises(OSError):
        load_lexicon(tmp_path / "missing.tsv")


def test_initials_of():
    assert initials_of("Lu Wu") == {"LW"}
    assert initials_of("Jean-Paul Sartre") == {"JPS"}
    assert initials_of("Anna Maria Costa") == {"AMC", "AC"}


def test_resolve_mentions_with_collective_and_full_names():
    m = resolve_author_mentions(TEXT + " Jan Evans edited.", BYLINE)
    assert m["All authors"] == {"a", "b", "c"}
    assert m["L.W."] == {"a"}
    assert m["M.K."] == {"c"}
    assert m["Jan Evans"] == {"b"}
    assert m.unmatched == [] and m.ambiguous == []


def test_ambiguous_and_unmatched_initials():
    m = resolve_author_mentions("J.S. designed; JS ran tests; X.Y. edited.",
                                [("a", "John Smith"), ("b", "Jane Stone")])
    assert m["J.S."] == {"a", "b"}
    assert "J.S." in m.ambiguous
    assert m.unmatched == ["X.Y."]


def test_parse_statement_clauses():
    m = resolve_author_mentions(TEXT, BYLINE)
    clauses = parse_statement(TEXT, m)
    assert clauses == [
        Clause(frozenset({"a", "b"}), "designed"),
        Clause(frozenset({"a"}), "performed"),
        Clause(frozenset({"a"}), "analyzed"),
        Clause(frozenset({"a", "b", "c"}), "wrote"),
        Clause(frozenset(), "collected"),
    ]


def test_parse_paper_profiles_and_counts():
    parsed = parse_paper(_paper(TEXT))
    acts = {p.author_id: p.activities for p in parsed.profiles}
    assert acts == {"a": {"design", "perform", "analyze", "write"}, "b": {"design", "write"},
                    "c": {"write"}}
    assert parsed.n_verbs == 5 and parsed.n_matched == 5 and parsed.n_unattributed == 1


def test_unmatched_verbs_kept_per_author():
    parsed = parse_paper(_paper("L.W. ran the assays and designed experiments."))
    prof = parsed.profiles[0]
    assert prof.activities == {"design"}
    assert prof.unmatched_verbs == ("ran",)
    assert parsed.match_fraction == 0.5


def test_empty_statement():
    assert parse_statement("", resolve_author_mentions("", BYLINE)) == []
    parsed = parse_paper(_paper("   "))
    assert all(not p.activities for p in parsed.profiles)


def test_extract_profiles_skips_papers_without_statement(small_records):
    profiles, report = extract_profiles(ingest_papers(small_records))
    assert report.n_papers == 1
    assert [(p.author_id, set(p.activities)) for p in profiles] == [("a2", set()), ("a3", set())]
    # "A.L." matches nobody on p3's byline
    assert report.unmatched_mentions == 1
    assert report.to_json()["coverage"] == 1.0


def test_coverage_on_bundled_corpus(bundled_snapshot):
    _, report = extract_profiles(bundled_snapshot.corpus)
    assert report.coverage == 1.0
    assert report.n_unattributed == 0


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_render_then_parse_round_trip(seed):
    (names, profiles), = planted_profiles(1, seed)
    text = render_statement(profiles, names, np.random.default_rng(seed))
    paper = _paper(text, [(a, names[a]) for a in names])
    got = {p.author_id: p.activities for p in parse_paper(paper).profiles}
    assert got == profiles
