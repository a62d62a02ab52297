"""L-ratio distribution and role composition by team size."""
from importlib import resources

from teamscope.corpus import read_corpus
from teamscope.parser import extract_profiles
from teamscope.roles import (
    assign_roles, composition_by_size, lratio_distribution_by_size, lratios_from_assignments,
)

corpus = read_corpus(str(resources.files("teamscope") / "data" / "synthetic" / "papers.ndjson"))
profiles, _ = extract_profiles(corpus)
roles = assign_roles(profiles)
lrs = lratios_from_assignments(roles)

tall = sum(lr.tall for lr in lrs if lr.valid)
print(f"{len(lrs)} papers with statements, {tall} tall (L-ratio < 0.5)")

print("\nsize  papers  mean   q25    median q75")
for n, d in lratio_distribution_by_size(lrs).items():
    print(f"{n:>4}  {d.n_papers:>6}  {d.mean:.3f}  {d.q25:.3f}  {d.median:.3f}  {d.q75:.3f}")

print("\nsize  lead  direct  indirect")
for n, (lead, direct, indirect) in composition_by_size(roles).items():
    print(f"{n:>4}  {lead:.2f}  {direct:.2f}    {indirect:.2f}")
