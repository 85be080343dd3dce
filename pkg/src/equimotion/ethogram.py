"""Cue-based emotion coding for horse head-and-neck images.

Four emotions are coded from four observable cue dimensions (eyes, ears,
nose, neck). Each emotion has one canonical cue profile; an annotation's
cues are matched against the profiles by per-dimension agreement count,
with ties broken by canonical label order and surfaced via an ambiguity
flag rather than an error, so review tooling can show them.

Note the eyes dimension has three values for four profiles: an open eye
with little or no sclera is the coded appearance for both the alarmed
and the curious profile, so that one value is necessarily shared.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from importlib import resources


class EmotionLabel(enum.IntEnum):
    """The four emotion classes, in canonical (tie-breaking / axis) order."""

    ALARMED = 0
    ANNOYED = 1
    CURIOUS = 2
    RELAXED = 3

    @property
    def label(self) -> str:
        return self.name.capitalize()

    @classmethod
    def from_name(cls, name: str) -> "EmotionLabel":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown label {name!r}; expected one of "
                             f"{[e.label for e in cls]}") from None


class Eyes(enum.Enum):
    OPEN_NO_SCLERA = "open_no_sclera"
    OPEN_SOME_SCLERA = "open_some_sclera"
    PARTIALLY_TO_MOSTLY_SHUT = "partially_to_mostly_shut"


class Ears(enum.Enum):
    STIFF_FORWARD = "stiff_forward"
    STIFF_BACK_PINNED = "stiff_back_pinned"
    FORWARD_RELAXED = "forward_relaxed"
    RELAXED_SIDEWAYS = "relaxed_sideways"


class Nose(enum.Enum):
    OPEN_NOSTRILS_TENSE = "open_nostrils_tense"
    CLOSED_NOSTRILS_TENSE = "closed_nostrils_tense"
    OPEN_NOSTRILS_RELAXED = "open_nostrils_relaxed"
    RELAXED_ALL = "relaxed_all"


class Neck(enum.Enum):
    ABOVE_PARALLEL = "above_parallel"
    PARALLEL_OR_ABOVE = "parallel_or_above"
    APPROX_PARALLEL = "approx_parallel"
    PARALLEL_OR_BELOW = "parallel_or_below"


CUE_DIMENSIONS = ("eyes", "ears", "nose", "neck")
_CUE_ENUMS = {"eyes": Eyes, "ears": Ears, "nose": Nose, "neck": Neck}


def cue_dimension_values() -> dict:
    """Dimension name -> allowed cue value strings, in enum order."""
    return {d: [v.value for v in _CUE_ENUMS[d]] for d in CUE_DIMENSIONS}


@dataclass(frozen=True)
class CueAnnotation:
    """One observed value per cue dimension."""

    eyes: Eyes
    ears: Ears
    nose: Nose
    neck: Neck

    def as_dict(self) -> dict:
        return {d: getattr(self, d).value for d in CUE_DIMENSIONS}

    @classmethod
    def from_dict(cls, data: dict) -> "CueAnnotation":
        kwargs = {}
        for dim in CUE_DIMENSIONS:
            if dim not in data:
                raise ValueError(f"missing cue dimension {dim!r}")
            try:
                kwargs[dim] = _CUE_ENUMS[dim](data[dim])
            except ValueError:
                raise ValueError(f"unknown {dim} cue {data[dim]!r}") from None
        return cls(**kwargs)


class CueProfileTable:
    """Immutable map of emotion -> canonical cue profile."""

    def __init__(self, profiles: dict[EmotionLabel, CueAnnotation]):
        self._profiles = dict(profiles)

    def __getitem__(self, label: EmotionLabel) -> CueAnnotation:
        return self._profiles[label]

    def __len__(self) -> int:
        return len(self._profiles)

    def items(self):
        return [(label, self._profiles[label]) for label in sorted(self._profiles)]

    def to_text(self) -> str:
        """Human-auditable table: one row per emotion, tab-separated cues."""
        lines = ["emotion\t" + "\t".join(CUE_DIMENSIONS)]
        for label, prof in self.items():
            lines.append(label.label + "\t" + "\t".join(getattr(prof, d).value for d in CUE_DIMENSIONS))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "CueProfileTable":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        header = lines[0].split("\t")
        if header != ["emotion", *CUE_DIMENSIONS]:
            raise ValueError(f"bad profile table header: {lines[0]!r}")
        profiles = {}
        for ln in lines[1:]:
            cells = ln.split("\t")
            if len(cells) != 5:
                raise ValueError(f"bad profile row: {ln!r}")
            label = EmotionLabel.from_name(cells[0])
            if label in profiles:
                raise ValueError(f"duplicate profile for {label.label}")
            profiles[label] = CueAnnotation.from_dict(dict(zip(CUE_DIMENSIONS, cells[1:])))
        return cls(profiles)


def canonical_profile_table() -> CueProfileTable:
    """The shipped coding table (versioned data asset)."""
    text = resources.files("equimotion.data").joinpath("cue_profiles.tsv").read_text()
    return CueProfileTable.from_text(text)


@dataclass(frozen=True)
class CueMatchResult:
    best: EmotionLabel
    score: int                      # matching dimensions against `best`, 0..4
    tied: tuple[EmotionLabel, ...]  # every label achieving `score`
    ambiguous: bool


def classify_cues(cues: CueAnnotation, table: CueProfileTable | None = None) -> CueMatchResult:
    """Match cues against each profile; most agreeing dimensions wins.

    Ties keep every winner in `tied`, set `ambiguous`, and pick the
    earliest label in canonical order as `best`. Total over all valid
    cue combinations; never raises.
    """
    table = table if table is not None else canonical_profile_table()
    scores = {}
    for label, prof in table.items():
        scores[label] = sum(getattr(cues, d) == getattr(prof, d) for d in CUE_DIMENSIONS)
    top = max(scores.values())
    tied = tuple(sorted(lbl for lbl, s in scores.items() if s == top))
    return CueMatchResult(best=tied[0], score=top, tied=tied, ambiguous=len(tied) > 1)


def validate_profile_table(table: CueProfileTable) -> list[str]:
    """Check a profile table against the coding-system shape.

    Returns a list of violation messages (empty means ok):
      - exactly four profiles, one per emotion;
      - every pair of profiles differs in at least one dimension;
      - within a dimension no value is reused beyond what the pigeonhole
        bound forces (eyes: 3 values across 4 profiles, so one value may
        appear twice; ears/nose/neck must be pairwise distinct).
    """
    violations = []
    if len(table) != 4:
        violations.append(f"expected 4 profiles, found {len(table)}")
    labels = [label for label, _ in table.items()]
    for missing in set(EmotionLabel) - set(labels):
        violations.append(f"missing profile for {missing.label}")

    items = table.items()
    for i, (la, pa) in enumerate(items):
        for lb, pb in items[i + 1:]:
            if all(getattr(pa, d) == getattr(pb, d) for d in CUE_DIMENSIONS):
                violations.append(f"profiles not distinct: {la.label} and {lb.label}")

    n_profiles = max(len(table), 1)
    for dim in CUE_DIMENSIONS:
        n_values = len(_CUE_ENUMS[dim])
        allowed = max(1, -(-n_profiles // n_values))  # ceil
        counts = {}
        for _, prof in items:
            counts[getattr(prof, dim)] = counts.get(getattr(prof, dim), 0) + 1
        for value, count in counts.items():
            if count > allowed:
                violations.append(
                    f"{dim} value {value.value!r} used by {count} profiles (at most {allowed})")
    return violations
