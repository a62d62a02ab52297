"""Role assignment, L-ratio, and team-size composition tables."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .lexicon import REFERENCE_PARTITION, Role

TALL_THRESHOLD = 0.5
HIST_EDGES = np.round(np.linspace(0.0, 1.0, 11), 10)


@dataclass(frozen=True)
class RoleAssignment:
    paper_id: str
    author_id: str
    role: Role
    source: str = "parsed"  # "parsed" | "predicted"

    def to_json(self) -> dict:
        return {"paper_id": self.paper_id, "author_id": self.author_id,
                "role": self.role.value, "source": self.source}

    @classmethod
    def from_json(cls, raw: dict) -> "RoleAssignment":
        return cls(raw["paper_id"], raw["author_id"], Role(raw["role"]), raw.get("source", "parsed"))


def assign_role(activities, partition: Mapping[str, str] = REFERENCE_PARTITION) -> Role:
    """Lead > DirectSupport > IndirectSupport priority over an activity set.

    ``activities`` may be an ActivityProfile or any iterable of activity
    names; ``partition`` maps activity -> role name.
    """
    acts = getattr(activities, "activities", activities)
    found = {partition.get(a) for a in acts}
    if Role.LEAD.value in found:
        return Role.LEAD
    if Role.DIRECT.value in found:
        return Role.DIRECT
    if acts:
        return Role.INDIRECT
    return Role.UNKNOWN


def assign_roles(profiles: Iterable, partition: Mapping[str, str] = REFERENCE_PARTITION,
                 source: str = "parsed") -> list[RoleAssignment]:
    return [RoleAssignment(p.paper_id, p.author_id, assign_role(p, partition), source)
            for p in profiles]


@dataclass(frozen=True)
class LRatio:
    paper_id: str
    n: int
    n_lead: int
    value: float
    tall: bool
    source: str = "parsed"
    flags: tuple[str, ...] = field(default=())

    @property
    def valid(self) -> bool:
        """False when the paper is incomplete or has no Lead author."""
        return not ({"incomplete", "no_lead"} & set(self.flags))


def compute_lratio(
    paper_id: str,
    byline: Sequence[str],
    roles: Mapping[str, Role],
    promote: str | None = None,
    corresponding: Iterable[str] = (),
    source: str = "parsed",
) -> LRatio:
    """Fraction of Lead authors on the byline.

    Papers with no Lead author get value NaN and the ``no_lead`` flag, unless
    ``promote`` is "first" (first author becomes Lead) or "corresponding"
    (first corresponding author in byline order, else the first author).
    Any author whose role is Unknown or missing flags the paper ``incomplete``.
    """
    n = len(byline)
    if n == 0:
        raise ValueError(f"{paper_id}: empty byline")
    flags = []
    missing = [a for a in byline if roles.get(a, Role.UNKNOWN) == Role.UNKNOWN]
    if missing:
        flags.append("incomplete")
    n_lead = sum(1 for a in byline if roles.get(a) == Role.LEAD)
    if n_lead == 0:
        if promote in ("first", "corresponding"):
            corr = set(corresponding)
            chosen = byline[0]
            if promote == "corresponding":
                chosen = next((a for a in byline if a in corr), byline[0])
            n_lead = 1
            flags.append(f"promoted:{chosen}")
        elif promote is not None:
            raise ValueError(f"unknown promote rule {promote!r}")
        else:
            flags.append("no_lead")
            return LRatio(paper_id, n, 0, float("nan"), False, source, tuple(flags))
    value = n_lead / n
    return LRatio(paper_id, n, n_lead, value, value < TALL_THRESHOLD, source, tuple(flags))


def lratios_from_assignments(
    assignments: Iterable[RoleAssignment],
    bylines: Mapping[str, Sequence[str]] | None = None,
    promote: str | None = None,
    corresponding: Mapping[str, Iterable[str]] | None = None,
) -> list[LRatio]:
    """Group role assignments by paper and compute each paper's L-ratio.

    Without ``bylines`` the team is taken to be the set of assigned authors
    in first-seen order.
    """
    by_paper: dict[str, dict[str, Role]] = defaultdict(dict)
    sources: dict[str, str] = {}
    for a in assignments:
        by_paper[a.paper_id][a.author_id] = a.role
        sources.setdefault(a.paper_id, a.source)
    out = []
    for pid, roles in by_paper.items():
        byline = bylines[pid] if bylines is not None and pid in bylines else list(roles)
        corr = corresponding.get(pid, ()) if corresponding else ()
        out.append(compute_lratio(pid, byline, roles, promote, corr, sources[pid]))
    return out


def composition_by_size(
    assignments: Iterable[RoleAssignment],
    max_size: int | None = None,
) -> dict[int, tuple[float, float, float]]:
    """Share of Lead, Direct-only, Indirect-only authors per team size.

    Team size is the number of assignments per paper. Unknown roles count
    in the denominator only, so each row sums to at most 1.
    """
    by_paper: dict[str, list[Role]] = defaultdict(list)
    for a in assignments:
        by_paper[a.paper_id].append(a.role)
    counts: dict[int, np.ndarray] = defaultdict(lambda: np.zeros(4))
    col = {Role.LEAD: 0, Role.DIRECT: 1, Role.INDIRECT: 2, Role.UNKNOWN: 3}
    for roles in by_paper.values():
        n = len(roles)
        if max_size is not None and n > max_size:
            continue
        for r in roles:
            counts[n][col[r]] += 1
    table = {}
    for n in sorted(counts):
        c = counts[n]
        total = c.sum()
        table[n] = (c[0] / total, c[1] / total, c[2] / total)
    return table


@dataclass(frozen=True)
class SizeDistribution:
    n_papers: int
    mean: float
    q25: float
    median: float
    q75: float
    hist: tuple[int, ...]


def lratio_distribution_by_size(lratios: Iterable[LRatio], include_flagged: bool = False
                                ) -> dict[int, SizeDistribution]:
    """Mean, quartiles, and a 10-bin histogram of L-ratio per team size."""
    groups: dict[int, list[float]] = defaultdict(list)
    for lr in lratios:
        if math.isnan(lr.value) or not (lr.valid or include_flagged):
            continue
        groups[lr.n].append(lr.value)
    out = {}
    for n in sorted(groups):
        v = np.asarray(groups[n])
        q25, q50, q75 = np.quantile(v, [0.25, 0.5, 0.75])
        hist, _ = np.histogram(v, bins=HIST_EDGES)
        out[n] = SizeDistribution(len(v), float(v.mean()), float(q25), float(q50), float(q75),
                                  tuple(int(h) for h in hist))
    return out
