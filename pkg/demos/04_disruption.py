"""Disruption D and development percentiles on toy citation graphs."""
from teamscope.corpus import build_citation_graph, ingest_papers
from teamscope.metrics import citation_windows, disruption, disruption_table


def rec(pid, year, refs=()):
    return {"id": pid, "year": year, "authors": ["a"], "refs": list(refs)}


# F cites R. Later papers cite F alone (i), F and R (j), or R alone (k).
records = [rec("R", 1990), rec("F", 2000, ["R"]),
           rec("c1", 2001, ["F"]), rec("c2", 2002, ["F"]),
           rec("c3", 2003, ["F", "R"]), rec("c4", 2004, ["R"])]
g = build_citation_graph(ingest_papers(records))
d = disruption("F", g)
print(f"n_i={d.n_i} n_j={d.n_j} n_k={d.n_k}  D=(n_i-n_j)/(n_i+n_j+n_k)={d.D:.3f}")

print("\nextremes:")
only_f = [rec("R", 1990), rec("F", 2000, ["R"])] + [rec(f"c{i}", 2001, ["F"]) for i in range(3)]
both = [rec("R", 1990), rec("F", 2000, ["R"])] + [rec(f"c{i}", 2001, ["F", "R"]) for i in range(3)]
for label, recs in (("citers skip R", only_f), ("citers also cite R", both)):
    print(f"  {label:20} D = {disruption('F', build_citation_graph(ingest_papers(recs))).D:+.1f}")

table = disruption_table(g, ["R", "F"])
print("\ndevelopment percentile within year cohort:")
for pid, res in table.items():
    print(f"  {pid}: D={res.D!s:6} pct={res.development_percentile}")

w = citation_windows("R", g)
print(f"\nR: {w.c_short} citations within 10 years, {w.c_long} after 20 (observable={w.long_observable})")
