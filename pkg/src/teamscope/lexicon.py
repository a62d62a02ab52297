"""The 25-activity verb lexicon and the three-way role partition of activities."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path


class Role(str, enum.Enum):
    LEAD = "Lead"
    DIRECT = "DirectSupport"
    INDIRECT = "IndirectSupport"
    UNKNOWN = "Unknown"


LEAD_ACTIVITIES = (
    "conceive", "design", "lead", "supervise", "coordinate", "interpret", "write",
)
DIRECT_ACTIVITIES = (
    "help", "assist", "prepare", "develop", "collect", "generate", "purify",
    "carry", "do", "perform", "conduct", "analyze",
)
INDIRECT_ACTIVITIES = (
    "participate", "provide", "contribute", "comment", "discuss", "edit",
)
ACTIVITIES = LEAD_ACTIVITIES + DIRECT_ACTIVITIES + INDIRECT_ACTIVITIES

REFERENCE_PARTITION = {
    **{a: Role.LEAD.value for a in LEAD_ACTIVITIES},
    **{a: Role.DIRECT.value for a in DIRECT_ACTIVITIES},
    **{a: Role.INDIRECT.value for a in INDIRECT_ACTIVITIES},
}

# Suffix rules tried when a surface form is not listed in the inflection table.
_SUFFIX_RULES = (
    ("ied", "y"), ("ies", "y"), ("ing", ""), ("ing", "e"), ("ed", ""),
    ("ed", "e"), ("es", ""), ("es", "e"), ("s", ""), ("d", ""),
)


@dataclass(frozen=True)
class ActivityLexicon:
    """Surface-form table mapping inflected verbs onto canonical activities."""

    forms: dict[str, str]
    clusters: dict[str, str]
    activities: tuple[str, ...] = field(default=ACTIVITIES)

    def __post_init__(self):
        if len(self.activities) != 25 or len(set(self.activities)) != 25:
            raise ValueError("lexicon must define exactly 25 distinct activities")
        unknown = set(self.forms.values()) - set(self.activities)
        if unknown:
            raise ValueError(f"inflections map to unknown activities: {sorted(unknown)}")
        for role, members in (
            (Role.LEAD, LEAD_ACTIVITIES),
            (Role.DIRECT, DIRECT_ACTIVITIES),
            (Role.INDIRECT, INDIRECT_ACTIVITIES),
        ):
            got = {a for a, c in self.clusters.items() if c == role.value}
            if got != set(members):
                raise ValueError(f"{role.value} cluster must be exactly {sorted(members)}")

    def canonicalize(self, surface: str) -> str | None:
        """Return the canonical activity for ``surface``, or None when unmatched."""
        word = surface.strip().lower().strip(".,;:!?\"'()")
        if not word:
            return None
        hit = self.forms.get(word)
        if hit is not None:
            return hit
        for suffix, repl in _SUFFIX_RULES:
            if word.endswith(suffix) and len(word) > len(suffix) + 1:
                stem = word[: -len(suffix)] + repl
                if stem in self.clusters:
                    return stem
        return None

    def is_known_form(self, surface: str) -> bool:
        return self.canonicalize(surface) is not None


def load_lexicon(path: str | Path | None = None) -> ActivityLexicon:
    """Load a lexicon table (tab-separated: activity, comma-joined forms, cluster).

    With ``path=None`` the bundled default table is used.
    """
    if path is None:
        text = resources.files("teamscope.data").joinpath("lexicon.tsv").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    forms: dict[str, str] = {}
    clusters: dict[str, str] = {}
    order: list[str] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"lexicon line {lineno}: expected 3 tab-separated fields")
        activity, raw_forms, cluster = (p.strip() for p in parts)
        order.append(activity)
        clusters[activity] = cluster
        forms[activity] = activity
        for form in raw_forms.split(","):
            form = form.strip().lower()
            if form:
                forms[form] = activity
    return ActivityLexicon(forms=forms, clusters=clusters, activities=tuple(order))


_DEFAULT: ActivityLexicon | None = None


def default_lexicon() -> ActivityLexicon:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = load_lexicon()
    return _DEFAULT
