"""Synthetic corpora with planted roles, statements, and citation structure.

Everything here is seeded; the same seed gives the same bytes on disk.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .lexicon import (
    DIRECT_ACTIVITIES, INDIRECT_ACTIVITIES, LEAD_ACTIVITIES, Role, default_lexicon,
)
from .predictor import FEATURE_NAMES

GIVEN = (
    "Alice", "Bruno", "Chen", "Dana", "Emil", "Fatima", "Goran", "Hana", "Ivan", "Julia",
    "Kenji", "Lena", "Marco", "Nadia", "Omar", "Priya", "Quinn", "Rosa", "Sven", "Tara",
    "Uma", "Victor", "Wen", "Xenia", "Yusuf", "Zoe",
)
FAMILY = (
    "Adams", "Berg", "Costa", "Dietz", "Evans", "Fischer", "Garcia", "Horvat", "Ito", "Jensen",
    "Kowalski", "Li", "Moreau", "Novak", "Okafor", "Petrov", "Quist", "Rossi", "Silva", "Tanaka",
    "Ueda", "Varga", "Wu", "Xu", "Yilmaz", "Zhang",
)

# surface verb used by the template grammar for each activity
SURFACE = {
    "conceive": "conceived", "design": "designed", "lead": "led", "supervise": "supervised",
    "coordinate": "coordinated", "interpret": "interpreted", "write": "wrote",
    "help": "helped", "assist": "assisted", "prepare": "prepared", "develop": "developed",
    "collect": "collected", "generate": "generated", "purify": "purified", "carry": "carried",
    "do": "did", "perform": "performed", "conduct": "conducted", "analyze": "analyzed",
    "participate": "participated", "provide": "provided", "contribute": "contributed",
    "comment": "commented", "discuss": "discussed", "edit": "edited",
}
OBJECTS = {
    "conceive": ["the study", "the project"], "design": ["research", "the experiments"],
    "lead": ["the project", "the field work"], "supervise": ["the project", "the work"],
    "coordinate": ["the consortium", "the study"], "interpret": ["the results", "the data"],
    "write": ["the paper", "the manuscript"], "help": ["with experiments", "with sampling"],
    "assist": ["with surgery", "with imaging"], "prepare": ["samples", "the figures"],
    "develop": ["software", "new methods"], "collect": ["samples", "field data"],
    "generate": ["mutant lines", "the libraries"], "purify": ["proteins", "the enzyme"],
    "carry": ["out experiments", "out the survey"], "do": ["the measurements", "simulations"],
    "perform": ["research", "experiments"], "conduct": ["the survey", "experiments"],
    "analyze": ["data", "the sequences"], "participate": ["in discussions", "in fieldwork"],
    "provide": ["reagents", "materials"], "contribute": ["new reagents", "analytic tools"],
    "comment": ["on the manuscript", "on drafts"], "discuss": ["the results", "the findings"],
    "edit": ["the manuscript", "the paper"],
}
ROLE_POOLS = {Role.LEAD: LEAD_ACTIVITIES, Role.DIRECT: DIRECT_ACTIVITIES,
              Role.INDIRECT: INDIRECT_ACTIVITIES}


def initials(name: str, spaced: bool = False) -> str:
    parts = name.split()
    sep = ". " if spaced else "."
    return sep.join(p[0] for p in parts) + "."


def _join_mentions(tokens: list[str], rng) -> str:
    if len(tokens) == 1:
        return tokens[0]
    if rng.random() < 0.5:
        return ", ".join(tokens[:-1]) + " and " + tokens[-1]
    return ", ".join(tokens[:-1]) + ", and " + tokens[-1]


def render_statement(profiles: dict[str, Sequence[str]], names: dict[str, str],
                     rng: np.random.Generator) -> str:
    """Write a statement whose parse is exactly ``profiles``.

    ``profiles`` maps author id -> activities; ``names`` maps author id ->
    full name with distinct initials on the byline.
    """
    acts = sorted({a for v in profiles.values() for a in v})
    order = [acts[i] for i in rng.permutation(len(acts))]
    clauses = []
    for act in order:
        who = [a for a in profiles if act in profiles[a]]
        tokens = [initials(names[a], spaced=rng.random() < 0.2) for a in who]
        obj = OBJECTS[act][int(rng.integers(len(OBJECTS[act])))]
        clauses.append(f"{_join_mentions(tokens, rng)} {SURFACE[act]} {obj}")
    # merge some adjacent clauses with a coordinating "and", others with ";" or "."
    out = clauses[0]
    for c in clauses[1:]:
        r = rng.random()
        out += (" and " if r < 0.25 else "; " if r < 0.6 else ". ") + c
    return out + "."


@dataclass
class SyntheticAuthor:
    author_id: str
    name: str
    start: int
    field: int


def _make_authors(n: int, rng, year_lo: int, year_hi: int, n_fields: int) -> list[SyntheticAuthor]:
    pairs = [(g, f) for g in GIVEN for f in FAMILY]
    pick = rng.choice(len(pairs), size=n, replace=False)
    authors = []
    for i, k in enumerate(pick):
        g, f = pairs[k]
        authors.append(SyntheticAuthor(f"a{i:04d}", f"{g} {f}", int(rng.integers(year_lo, year_hi)),
                                       int(rng.integers(n_fields))))
    return authors


def generate_synthetic_corpus(out_dir: str | Path, n_papers: int = 200, seed: int = 0,
                              statement_share: float = 0.75, n_fields: int = 4,
                              keywords_per_field: int = 12) -> dict:
    """Write ``papers.ndjson`` and ``ground_truth.json`` into ``out_dir``.

    Roles are planted per paper (1..n leads), with leads skewed towards
    senior authors, the first byline slot, and the corresponding flag.
    Statements are rendered from the planted activities by the template
    grammar; ``statement_share`` of papers carry one. A quarter of papers
    are planted as disruptive (later citers skip their references) and a
    quarter as developmental (later citers also cite one of their references).
    Returns the ground-truth dict.
    """
    rng = np.random.default_rng(seed)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    year_lo, year_hi = 1980, 2020
    authors = _make_authors(max(40, int(n_papers * 1.25)), rng, year_lo - 10, year_hi - 5, n_fields)
    keywords = [[f"k{f}_{j:02d}" for j in range(keywords_per_field)] for f in range(n_fields)]
    years = np.sort(rng.integers(year_lo, year_hi + 1, size=n_papers))

    papers, truth = [], {}
    history: dict[str, list[int]] = {a.author_id: [] for a in authors}
    kind = {}
    for i, year in enumerate(years):
        pid = f"p{i:04d}"
        active = [a for a in authors if a.start <= year]
        if len(active) < 2:
            active = authors[:8]
        n = int(min(len(active), rng.integers(2, 9)))
        field_ = int(rng.integers(n_fields))
        # prefer same-field, active authors
        w = np.array([3.0 if a.field == field_ else 1.0 for a in active])
        team_idx = rng.choice(len(active), size=n, replace=False, p=w / w.sum())
        team = [active[k] for k in team_idx]
        # distinct initials within the byline
        seen, byline = set(), []
        for a in team:
            key = initials(a.name)
            if key not in seen:
                seen.add(key)
                byline.append(a)
        team = byline
        n = len(team)
        if n < 2:
            team = team + [next(a for a in active if initials(a.name) not in seen)]
            n = len(team)
        n_lead = int(rng.integers(1, n + 1))
        age = np.array([year - a.start for a in team], dtype=float)
        lw = np.exp(age / 8.0)
        lead_idx = set(rng.choice(n, size=n_lead, replace=False, p=lw / lw.sum()).tolist())
        roles = {}
        for k, a in enumerate(team):
            if k in lead_idx:
                roles[a.author_id] = Role.LEAD
            else:
                roles[a.author_id] = Role.DIRECT if rng.random() < 0.65 else Role.INDIRECT
        leads = [a for a in team if roles[a.author_id] == Role.LEAD]
        supports = [a for a in team if roles[a.author_id] != Role.LEAD]
        rng.shuffle(leads)
        rng.shuffle(supports)
        senior_lead = max(leads, key=lambda a: (year - a.start, a.author_id))
        if supports and rng.random() < 0.3:
            first = supports.pop(0)
        else:
            first = leads.pop(0)
        rest = leads + supports
        rest = [rest[k] for k in rng.permutation(len(rest))]
        order = [first] + rest
        corresponding = [senior_lead.author_id]

        activities = {}
        for a in order:
            pool = ROLE_POOLS[roles[a.author_id]]
            k = int(rng.integers(1, min(3, len(pool)) + 1))
            activities[a.author_id] = sorted(rng.choice(pool, size=k, replace=False).tolist())

        # topics: field keywords, occasionally one from another field
        n_top = int(rng.integers(3, 8))
        topics = rng.choice(keywords[field_], size=min(n_top, keywords_per_field), replace=False).tolist()
        if rng.random() < 0.3:
            other = int((field_ + 1 + rng.integers(n_fields - 1)) % n_fields)
            topics.append(keywords[other][int(rng.integers(keywords_per_field))])

        # references: earlier papers, partly through the leads' own past work
        earlier = [p for p in papers if p["year"] < year]
        refs = []
        if earlier:
            lead_papers = sorted({papers[j]["id"] for a in team if roles[a.author_id] == Role.LEAD
                                  for j in history[a.author_id] if papers[j]["year"] < year})
            n_refs = int(min(len(earlier), rng.integers(2, 9)))
            if lead_papers:
                take = min(len(lead_papers), n_refs // 2)
                refs += rng.choice(lead_papers, size=take, replace=False).tolist()
            pool = [p["id"] for p in earlier if p["id"] not in refs]
            if pool:
                more = rng.choice(len(pool), size=min(len(pool), n_refs - len(refs)), replace=False)
                refs += [pool[k] for k in more]
            extra = []
            by_id = {p["id"]: p for p in earlier}
            for r in list(refs):
                if kind.get(r) == "developmental" and by_id[r]["refs"]:
                    extra.append(by_id[r]["refs"][0])
            refs = list(dict.fromkeys(refs + extra))
            disruptive_refs = {x for r in refs if kind.get(r) == "disruptive" for x in by_id[r]["refs"]}
            refs = [r for r in refs if r not in disruptive_refs or kind.get(r) == "disruptive"]
        kind[pid] = ["disruptive", "developmental", "plain", "plain"][int(rng.integers(4))]

        has_statement = rng.random() < statement_share
        record = {
            "id": pid,
            "year": int(year),
            "venue": ["PNAS", "Nature", "Science", "PLOS ONE"][int(rng.integers(4))],
            "authors": [{"id": a.author_id, "name": a.name} for a in order],
            "corresponding": corresponding,
            "refs": refs,
            "topics": topics,
        }
        if has_statement:
            names = {a.author_id: a.name for a in order}
            record["statement"] = render_statement(activities, names, rng)
        papers.append(record)
        for a in order:
            history[a.author_id].append(i)
        truth[pid] = {
            "lratio": n_lead / n,
            "n_lead": n_lead,
            "roles": {a.author_id: roles[a.author_id].value for a in order},
            "activities": activities,
            "has_statement": has_statement,
            "kind": kind[pid],
        }

    with open(out_dir / "papers.ndjson", "w", encoding="utf-8") as fh:
        for rec in papers:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    with open(out_dir / "ground_truth.json", "w", encoding="utf-8") as fh:
        json.dump({"seed": seed, "papers": truth}, fh, sort_keys=True, indent=1)
    return truth


def planted_profiles(n: int, seed: int = 0, max_team: int = 8):
    """Random (byline names, per-author activity sets) pairs for round-trip tests."""
    rng = np.random.default_rng(seed)
    pairs = [(g, f) for g in GIVEN for f in FAMILY]
    out = []
    all_acts = default_lexicon().activities
    for _ in range(n):
        size = int(rng.integers(1, max_team + 1))
        names, keys = [], set()
        while len(names) < size:
            g, f = pairs[int(rng.integers(len(pairs)))]
            key = g[0] + f[0]
            if key not in keys:
                keys.add(key)
                names.append(f"{g} {f}")
        profiles = {}
        for i in range(size):
            k = int(rng.integers(1, 5))
            profiles[f"x{i}"] = frozenset(rng.choice(all_acts, size=k, replace=False).tolist())
        out.append(({f"x{i}": nm for i, nm in enumerate(names)}, profiles))
    return out


def synthetic_role_features(n_papers: int = 2000, seed: int = 0, noise: float = 1.0,
                            shuffle_labels: bool = False):
    """Feature-level generative model of lead and support authors.

    Each paper has n in [2, 10] authors and a planted number of leads drawn
    uniformly from 1..n. Features are drawn from role-conditional
    distributions; ``noise`` scales the within-role spread.

    Returns
    -------
    X : (rows, len(FEATURE_NAMES)) array
    y : 1 for Lead, 0 for Support
    paper_ids : per-row paper id
    lratio : dict paper id -> planted L-ratio
    """
    rng = np.random.default_rng(seed)
    rows, labels, ids, lratio = [], [], [], {}
    for i in range(n_papers):
        pid = f"s{i:05d}"
        n = int(rng.integers(2, 11))
        n_lead = int(rng.integers(1, n + 1))
        is_lead = np.zeros(n, dtype=bool)
        is_lead[rng.choice(n, n_lead, replace=False)] = True
        order = rng.permutation(n)
        lead_first = rng.random() < 0.8
        first = np.flatnonzero(is_lead if lead_first or n_lead == n else ~is_lead)[0]
        corr = rng.choice(np.flatnonzero(is_lead))
        for k in range(n):
            lead = is_lead[k]
            age = max(0.0, rng.normal(18 if lead else 6, 4 * noise))
            feats = {
                "is_first_author": float(k == first),
                "is_corresponding": float(k == corr),
                "frac_refs_introduced": float(np.clip(rng.normal(0.55 if lead else 0.2, 0.15 * noise), 0, 1)),
                "frac_topics_directed": float(np.clip(rng.normal(0.6 if lead else 0.25, 0.15 * noise), 0, 1)),
                "career_age": age,
                "log_prior_citations": max(0.0, rng.normal(0.25 * age, 0.8 * noise)),
                "n_prior_topics": max(0.0, rng.normal(2.0 * age, 5 * noise)),
                "n_prior_papers": max(0.0, rng.normal(1.5 * age, 4 * noise)),
                "byline_position_norm": float(np.where(order == k)[0][0] / (n - 1)),
                "refs_missing": 0.0,
                "topics_missing": 0.0,
            }
            rows.append([feats[f] for f in FEATURE_NAMES])
            labels.append(int(lead))
            ids.append(pid)
        lratio[pid] = n_lead / n
    y = np.array(labels)
    if shuffle_labels:
        y = rng.permutation(y)
    return np.array(rows), y, np.array(ids), lratio
