"""Dataset manifest: image records, annotations and split assignments.

The on-disk form is a line-delimited text file, one JSON object per line,
tagged by "kind" (image / annotation / split). Writes always go through
an atomic temp-file replace so concurrent readers never see a torn file.

Split names use "scheme.part" (a bare "train"/"val" pair belongs to the
implicit "holdout" scheme); parts of one scheme must be disjoint.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field, replace

from ..errors import DataError
from ..ethogram import CueAnnotation, EmotionLabel, classify_cues


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned pixel box, origin top-left, (x, y, w, h)."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.x < 0 or self.y < 0:
            raise DataError(f"box origin must be non-negative: {self}")
        if self.w < 1 or self.h < 1:
            raise DataError(f"box size must be at least 1x1: {self}")

    @property
    def area(self) -> int:
        return self.w * self.h

    def as_list(self) -> list[int]:
        return [self.x, self.y, self.w, self.h]

    def clamped(self, width: int, height: int) -> "BoundingBox":
        """Clip to image bounds; raises if nothing remains."""
        x1 = min(max(self.x, 0), width)
        y1 = min(max(self.y, 0), height)
        x2 = min(self.x + self.w, width)
        y2 = min(self.y + self.h, height)
        if x2 - x1 < 1 or y2 - y1 < 1:
            raise DataError(f"box {self.as_list()} lies outside a {width}x{height} image")
        return BoundingBox(x1, y1, x2 - x1, y2 - y1)


def box_from_list(values) -> BoundingBox:
    if len(values) != 4:
        raise DataError(f"box must have 4 entries, got {values!r}")
    try:
        x, y, w, h = (int(v) for v in values)
    except (TypeError, ValueError):
        raise DataError(f"box entries must be integers: {values!r}") from None
    return BoundingBox(x, y, w, h)


@dataclass(frozen=True)
class ImageRecord:
    id: str
    uri: str
    width: int
    height: int

    def __post_init__(self):
        if not self.id:
            raise DataError("image record needs a non-empty id")
        if self.width < 1 or self.height < 1:
            raise DataError(f"image {self.id!r} has invalid size {self.width}x{self.height}")


@dataclass(frozen=True)
class Annotation:
    """One head-and-neck ROI for an image, with optional label and cues.

    `override` records a deliberate human decision to keep a label that
    disagrees with what the cue profiles suggest.
    """

    image_id: str
    box: BoundingBox
    label: EmotionLabel | None = None
    cues: CueAnnotation | None = None
    override: bool = False


@dataclass
class DatasetManifest:
    records: list[ImageRecord] = field(default_factory=list)
    annotations: list[Annotation] = field(default_factory=list)
    splits: dict[str, list[str]] = field(default_factory=dict)

    def record_by_id(self, image_id: str) -> ImageRecord:
        idx = self._index()
        if image_id not in idx:
            raise DataError(f"unknown image id {image_id!r}")
        return idx[image_id]

    def _index(self) -> dict[str, ImageRecord]:
        return {r.id: r for r in self.records}

    def annotations_for(self, image_id: str) -> list[Annotation]:
        return [a for a in self.annotations if a.image_id == image_id]

    def labeled_ids_by_class(self) -> dict[EmotionLabel, list[str]]:
        """Image ids with a labeled annotation, grouped by label.

        The first labeled annotation of an image decides its class.
        """
        out: dict[EmotionLabel, list[str]] = {lbl: [] for lbl in EmotionLabel}
        seen = set()
        for ann in self.annotations:
            if ann.label is None or ann.image_id in seen:
                continue
            seen.add(ann.image_id)
            out[ann.label].append(ann.image_id)
        return out

    def validate(self) -> None:
        ids = set()
        for rec in self.records:
            if rec.id in ids:
                raise DataError(f"duplicate id {rec.id!r}")
            ids.add(rec.id)
        for ann in self.annotations:
            if ann.image_id not in ids:
                raise DataError(f"annotation references unknown image id {ann.image_id!r}")
            if ann.label is not None and ann.cues is not None and not ann.override:
                suggested = classify_cues(ann.cues).best
                if suggested != ann.label:
                    raise DataError(
                        f"annotation for {ann.image_id!r}: cues suggest "
                        f"{suggested.label} but label is {ann.label.label} "
                        f"(set override to keep it)")
        for name, members in self.splits.items():
            for image_id in members:
                if image_id not in ids:
                    raise DataError(f"split {name!r} references unknown image id {image_id!r}")
        for scheme, parts in self._schemes().items():
            seen: dict[str, str] = {}
            for part_name, members in parts.items():
                for image_id in members:
                    if image_id in seen:
                        raise DataError(
                            f"image {image_id!r} in both {seen[image_id]!r} and "
                            f"{part_name!r} of split scheme {scheme!r}")
                    seen[image_id] = part_name

    def _schemes(self) -> dict[str, dict[str, list[str]]]:
        out: dict[str, dict[str, list[str]]] = {}
        for name, members in self.splits.items():
            scheme = name.rsplit(".", 1)[0] if "." in name else "holdout"
            out.setdefault(scheme, {})[name] = members
        return out


def _annotation_to_obj(ann: Annotation) -> dict:
    obj: dict = {"kind": "annotation", "image_id": ann.image_id, "box": ann.box.as_list()}
    if ann.label is not None:
        obj["label"] = ann.label.label
    if ann.cues is not None:
        obj["cues"] = ann.cues.as_dict()
    if ann.override:
        obj["override"] = True
    return obj


def _annotation_from_obj(obj: dict, lineno: int) -> Annotation:
    try:
        box = box_from_list(obj["box"])
    except KeyError:
        raise DataError(f"line {lineno}: annotation missing box") from None
    label = None
    if "label" in obj:
        try:
            label = EmotionLabel.from_name(obj["label"])
        except ValueError as exc:
            raise DataError(f"line {lineno}: {exc}") from None
    cues = None
    if "cues" in obj:
        try:
            cues = CueAnnotation.from_dict(obj["cues"])
        except ValueError as exc:
            raise DataError(f"line {lineno}: {exc}") from None
    return Annotation(image_id=obj.get("image_id", ""), box=box, label=label,
                      cues=cues, override=bool(obj.get("override", False)))


def load_manifest(path) -> DatasetManifest:
    """Parse and validate a manifest file.

    Row order is preserved. Annotation boxes are clamped to their image's
    bounds; a box with no overlap at all is an error.
    """
    if not os.path.exists(path):
        raise DataError(f"manifest not found: {path}")
    manifest = DatasetManifest()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"line {lineno}: malformed record ({exc.msg})") from None
            kind = obj.get("kind")
            if kind == "image":
                try:
                    rec = ImageRecord(id=str(obj["id"]), uri=str(obj["uri"]),
                                      width=int(obj["width"]), height=int(obj["height"]))
                except KeyError as exc:
                    raise DataError(f"line {lineno}: image record missing {exc}") from None
                manifest.records.append(rec)
            elif kind == "annotation":
                manifest.annotations.append(_annotation_from_obj(obj, lineno))
            elif kind == "split":
                name = obj.get("name")
                if not name:
                    raise DataError(f"line {lineno}: split record missing name")
                manifest.splits[str(name)] = [str(i) for i in obj.get("ids", [])]
            else:
                raise DataError(f"line {lineno}: unknown record kind {kind!r}")
    manifest.validate()
    index = manifest._index()
    clamped = []
    for ann in manifest.annotations:
        rec = index[ann.image_id]
        clamped.append(replace(ann, box=ann.box.clamped(rec.width, rec.height)))
    manifest.annotations = clamped
    return manifest


def save_manifest(manifest: DatasetManifest, path) -> None:
    """Serialize with an atomic replace (single-writer safe)."""
    manifest.validate()
    lines = []
    for rec in manifest.records:
        lines.append(json.dumps({"kind": "image", "id": rec.id, "uri": rec.uri,
                                 "width": rec.width, "height": rec.height}))
    for ann in manifest.annotations:
        lines.append(json.dumps(_annotation_to_obj(ann)))
    for name in manifest.splits:
        lines.append(json.dumps({"kind": "split", "name": name, "ids": manifest.splits[name]}))
    payload = "\n".join(lines) + ("\n" if lines else "")
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".manifest-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
