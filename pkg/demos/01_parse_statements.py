"""Turn a contribution statement into per-author activity sets and roles."""
from teamscope.corpus import parse_record
from teamscope.parser import parse_paper, resolve_author_mentions, parse_statement
from teamscope.roles import assign_roles, lratios_from_assignments

text = ("L.W. and J.E. designed research; L.W. performed research and analyzed data. "
        "M.K. contributed new reagents. All authors wrote the paper.")
byline = [("lw", "Lingfei Wu"), ("je", "James Evans"), ("mk", "Mina Kim")]

print("statement:\n ", text)

mentions = resolve_author_mentions(text, byline)
print("\nmentions resolved to author ids:")
for token, ids in mentions.mentions.items():
    print(f"  {token!r:15} -> {sorted(ids)}")

print("\nclauses (author set, surface verb):")
for clause in parse_statement(text, mentions):
    print(" ", sorted(clause.authors), clause.verb)

paper = parse_record({"id": "demo", "year": 2019, "statement": text,
                      "authors": [{"id": a, "name": n} for a, n in byline]})
parsed = parse_paper(paper)
print("\ncanonical activities:")
for prof in parsed.profiles:
    print(f"  {prof.author_id}: {sorted(prof.activities)}")

roles = assign_roles(parsed.profiles)
print("\nroles (Lead beats Direct beats Indirect):")
for r in roles:
    print(f"  {r.author_id}: {r.role.value}")

(lr,) = lratios_from_assignments(roles)
print(f"\nL-ratio = {lr.n_lead}/{lr.n} = {lr.value:.3f}  tall={lr.tall}")
