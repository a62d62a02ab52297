import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _oracles import brute_disruption, corpus_from, random_citation_records
from teamscope.corpus import build_author_index, build_citation_graph, parse_record
from teamscope.embeddings import EmbeddingConfig, EmbeddingModel
from teamscope.lexicon import Role
from teamscope.metrics import (
    MetricOptions, citation_windows, compute_metrics, development_percentiles, disruption,
    disruption_table, novelty, paper_novelty, productivity, team_productivity_split,
    top_share_flags, typicality,
)


def _graph(records):
    return build_citation_graph(corpus_from(records))


def _rec(pid, year, refs=(), authors=("a",)):
    return {"id": pid, "year": year, "authors": list(authors), "refs": list(refs)}


def toy_model():
    vecs = np.array([[1.0, 0, 0], [1, 1, 0], [-1, 1, 0]])
    return EmbeddingModel(["k1", "k2", "k3"], vecs, EmbeddingConfig(dim=3))


def test_typicality_and_novelty():
    m = toy_model()
    assert typicality("k1", "k2", m) == 1.0
    assert novelty("k1", "k3", m) == 1.0
    assert math.isnan(typicality("k1", "zz", m))


def test_paper_novelty_quantile():
    m = toy_model()
    p = parse_record({"id": "x", "year": 2000, "authors": ["a"], "topics": ["k1", "k2", "k3", "k1"]})
    res = paper_novelty(p, m)
    # pair novelties {-1, 0, 1}; 0.9 quantile with linear interpolation is 0.8
    assert sorted(res.pair_novelty) == [-1.0, 0.0, 1.0]
    assert res.score == pytest.approx(0.8)
    one = parse_record({"id": "y", "year": 2000, "authors": ["a"], "topics": ["k1", "unseen"]})
    assert not paper_novelty(one, m).defined


def test_top_share_flags_per_cohort():
    scores = {f"p{i:02d}": float(i) for i in range(15)}
    scores["nan"] = float("nan")
    years = {p: 2000 for p in scores}
    years.update({"p00": 2001, "p01": 2001})
    flags = top_share_flags(scores, years)
    # 2000 cohort has 13 defined scores -> ceil(1.3) = 2; 2001 cohort has 2 -> 1
    assert sorted(p for p, f in flags.items() if f) == ["p01", "p13", "p14"]
    assert flags["nan"] is False


def star(kind):
    recs = [_rec("R", 1990), _rec("F", 2000, ["R"])]
    if kind == "disruptive":
        recs += [_rec(f"c{i}", 2005, ["F"]) for i in range(4)]
    else:
        recs += [_rec(f"c{i}", 2005, ["F", "R"]) for i in range(4)]
    return _graph(recs)


def test_disruption_extremes():
    assert disruption("F", star("disruptive")).D == 1.0
    assert disruption("F", star("developmental")).D == -1.0
    assert disruption("F", star("developmental")).development == 1.0


def test_disruption_mixed_case():
    g = _graph([
        _rec("R", 1990), _rec("F", 2000, ["R"]),
        _rec("c1", 2001, ["F"]), _rec("c2", 2002, ["F"]),
        _rec("c3", 2003, ["F", "R"]), _rec("c4", 2004, ["R"]),
        _rec("same_year", 2000, ["F", "R"]), _rec("old", 1995, ["R"]),
    ])
    d = disruption("F", g)
    assert (d.n_i, d.n_j, d.n_k, d.D) == (2, 1, 1, 0.25)
    loose = disruption("F", g, strict_after=False)
    assert (loose.n_j, loose.D) == (2, 0.0)


def test_disruption_undefined_cases():
    g = _graph([_rec("F", 2000, ["ext"])])
    assert disruption("F", g).flags == ("no_citers",)
    assert disruption("ext", g).flags == ("unknown_year",)
    with pytest.raises(KeyError):
        disruption("missing", g)


def test_development_percentiles():
    g = _graph([_rec("R1", 1990), _rec("R2", 1990), _rec("R3", 1990),
                _rec("F1", 2000, ["R1"]), _rec("F2", 2000, ["R2"]), _rec("F3", 2000, ["R3"]),
                _rec("c1", 2001, ["F1"]), _rec("c2", 2001, ["F2", "R2"]), _rec("c3", 2001, ["F3"]),
                _rec("c4", 2001, ["F3", "R3"])])
    table = disruption_table(g, ["F1", "F2", "F3"])
    assert [table[p].D for p in ("F1", "F2", "F3")] == [1.0, -1.0, 0.0]
    # development -1, 1, 0 -> share of cohort at or below
    pct = {p: table[p].development_percentile for p in table}
    assert pct == {"F1": pytest.approx(100 / 3), "F2": 100.0, "F3": pytest.approx(200 / 3)}


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 100_000))
def test_disruption_matches_brute_force(seed):
    records = random_citation_records(np.random.default_rng(seed), n_nodes=30)
    g = _graph(records)
    for r in records:
        d = disruption(r["id"], g)
        n_i, n_j, n_k, D = brute_disruption(records, r["id"])
        assert (d.n_i, d.n_j, d.n_k) == (n_i, n_j, n_k)
        assert (math.isnan(d.D) and math.isnan(D)) or d.D == pytest.approx(D, abs=1e-12)
        if not math.isnan(d.D):
            assert -1 <= d.D <= 1


def test_citation_windows():
    recs = [_rec("F", 2000)] + [_rec(f"c{y}", y, ["F"]) for y in (2000, 2010, 2011, 2020, 2021)]
    g = _graph(recs)
    w = citation_windows("F", g)
    assert (w.c_short, w.c_long, w.long_observable) == (2, 1, True)
    assert citation_windows("F", g, include_pub_year=False).c_short == 1
    assert citation_windows("F", g, horizon=2020).long_observable is False
    assert citation_windows("c2021", g).long_observable is False


def test_productivity_and_team_split():
    recs = [_rec("p1", 2000, authors=["a", "b"]), _rec("p2", 2000, authors=["a"]),
            _rec("p3", 2001, authors=["b", "c"])]
    corpus = corpus_from(recs)
    idx = build_author_index(corpus)
    assert productivity("a", 2000, idx) == 2 == productivity("a", 2000, corpus)
    assert productivity("c", 2000, idx) == 0
    lead, support = team_productivity_split(corpus["p1"], {"a": Role.LEAD, "b": Role.DIRECT}, idx)
    assert (lead, support) == (2.0, 1.0)
    lead, support = team_productivity_split(corpus["p1"], {"a": Role.LEAD, "b": Role.LEAD}, idx)
    assert lead == 1.5 and math.isnan(support)


def test_compute_metrics_rows():
    recs = [_rec("R", 1990, authors=["x"]),
            {**_rec("F", 2000, ["R"], authors=["a", "b"]), "topics": ["k1", "k2", "k3"]},
            _rec("c1", 2005, ["F"], authors=["c"])]
    corpus = corpus_from(recs)
    g = build_citation_graph(corpus)
    idx = build_author_index(corpus, g)
    rows = compute_metrics(corpus, g, idx, {"F": 0.5}, {"F": {"a": Role.LEAD, "b": Role.DIRECT}},
                           toy_model(), MetricOptions())
    (row,) = rows
    assert row["paper_id"] == "F" and row["n"] == 2 and row["lratio"] == 0.5
    assert row["D"] == 1.0 and row["development_pct"] == 100.0
    assert row["novelty_score"] == pytest.approx(0.8) and row["top_novel"] == 1
    assert row["c10"] == 1 and row["c20plus"] == 0
    assert "c20_censored" in row["flags"]
    assert row["age_mean"] == 0.0 and row["age_sd"] == 0.0


def test_development_percentiles_skip_undefined():
    g = _graph([_rec("F", 2000)])
    res = [disruption("F", g)]
    development_percentiles(res, g)
    assert math.isnan(res[0].development_percentile)
