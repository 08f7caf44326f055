"""Dataset model: manifests, annotation files, splits, merges, validation.

A dataset on disk is a JSON manifest plus one plain-text annotation file per
image.  Annotation lines look like ``class_id cx cy w h`` with all geometry
normalized to [0, 1] relative to image width/height, box coordinates giving
the *center* point.  In memory everything is immutable; paths are resolved to
absolute the moment a manifest is loaded.
"""
from __future__ import annotations

import json
import logging
import math
import random
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

from .errors import DataError

log = logging.getLogger(__name__)

_EDGE_TOL = 1e-9  # slack when checking boxes against the [0, 1] frame


class Condition(str, Enum):
    """Capture condition of a dataset. ``mixed`` marks heterogeneous merges."""

    SUNNY = "sunny"
    REAL_NIGHT = "real_night"
    REAL_DROPLET = "real_droplet"
    FAKE_NIGHT = "fake_night"
    FAKE_DROPLET = "fake_droplet"
    MIXED = "mixed"

    @classmethod
    def parse(cls, value: str) -> "Condition":
        try:
            return cls(value)
        except ValueError:
            allowed = ", ".join(c.value for c in cls)
            raise DataError(f"unknown condition {value!r} (expected one of: {allowed})") from None


@dataclass(frozen=True)
class BoundingBox:
    """One labeled box in normalized center format."""

    class_id: int
    cx: float
    cy: float
    w: float
    h: float

    @property
    def x1(self) -> float:
        return self.cx - self.w / 2.0

    @property
    def y1(self) -> float:
        return self.cy - self.h / 2.0

    @property
    def x2(self) -> float:
        return self.cx + self.w / 2.0

    @property
    def y2(self) -> float:
        return self.cy + self.h / 2.0

    @property
    def area(self) -> float:
        return self.w * self.h

    def clamped(self) -> "BoundingBox | None":
        """Clip the box extent to the [0, 1] frame.

        Returns None when nothing of the box survives clipping.
        """
        x1, x2 = max(self.x1, 0.0), min(self.x2, 1.0)
        y1, y2 = max(self.y1, 0.0), min(self.y2, 1.0)
        if x2 - x1 <= 0.0 or y2 - y1 <= 0.0:
            return None
        return BoundingBox(self.class_id, (x1 + x2) / 2.0, (y1 + y2) / 2.0, x2 - x1, y2 - y1)

    def inside_frame(self) -> bool:
        return (
            self.x1 >= -_EDGE_TOL
            and self.y1 >= -_EDGE_TOL
            and self.x2 <= 1.0 + _EDGE_TOL
            and self.y2 <= 1.0 + _EDGE_TOL
        )


@dataclass(frozen=True)
class ImageRecord:
    """One image plus its annotations. Paths are absolute once loaded."""

    id: str
    image_path: Path
    width: int
    height: int
    annotations: tuple[BoundingBox, ...]
    annotations_path: Path | None = None


@dataclass(frozen=True)
class Dataset:
    name: str
    condition: Condition
    class_map: dict[int, str]
    records: tuple[ImageRecord, ...]
    manifest_path: Path | None = None

    def __len__(self) -> int:
        return len(self.records)

    def record_ids(self) -> list[str]:
        return [r.id for r in self.records]


@dataclass(frozen=True)
class Violation:
    record_id: str
    kind: str
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    dataset_name: str
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        if self.ok:
            return f"{self.dataset_name}: ok"
        lines = [f"{self.dataset_name}: {len(self.violations)} violation(s)"]
        lines += [f"  [{v.kind}] {v.record_id}: {v.detail}" for v in self.violations]
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# annotation file format


def format_annotation(box: BoundingBox) -> str:
    return f"{box.class_id} {box.cx:.6f} {box.cy:.6f} {box.w:.6f} {box.h:.6f}"


def parse_annotation_line(line: str, source: str = "<string>", lineno: int = 0) -> BoundingBox:
    parts = line.split()
    if len(parts) != 5:
        raise DataError(f"{source}:{lineno}: expected 5 fields, got {len(parts)}: {line!r}")
    try:
        class_id = int(parts[0])
        cx, cy, w, h = (float(p) for p in parts[1:])
    except ValueError as exc:
        raise DataError(f"{source}:{lineno}: {exc}") from None
    return BoundingBox(class_id, cx, cy, w, h)


def read_annotations(path: Path) -> list[BoundingBox]:
    if not path.is_file():
        raise DataError(f"annotation file not found: {path}")
    boxes = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        boxes.append(parse_annotation_line(line, source=str(path), lineno=lineno))
    return boxes


def write_annotations(path: Path, boxes: list[BoundingBox] | tuple[BoundingBox, ...]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    body = "".join(format_annotation(b) + "\n" for b in boxes)
    path.write_text(body, encoding="utf-8", newline="\n")


# ---------------------------------------------------------------------------
# manifest load / save


def load_manifest(path: str | Path) -> Dataset:
    """Load and validate a dataset manifest.

    Boxes that overhang the image frame are clipped back in (with a warning);
    anything else that violates the dataset rules raises :class:`DataError`.
    """
    manifest_path = Path(path).resolve()
    if not manifest_path.is_file():
        raise DataError(f"manifest not found: {manifest_path}")
    try:
        payload = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{manifest_path}: invalid JSON ({exc})") from None

    for key in ("name", "condition", "class_map", "images"):
        if key not in payload:
            raise DataError(f"{manifest_path}: missing required key {key!r}")

    condition = Condition.parse(payload["condition"])
    try:
        class_map = {int(k): str(v) for k, v in payload["class_map"].items()}
    except (ValueError, AttributeError):
        raise DataError(f"{manifest_path}: class_map must map integer ids to names") from None

    root = manifest_path.parent
    records: list[ImageRecord] = []
    clamp_count = 0
    for entry in payload["images"]:
        for key in ("id", "path", "width", "height", "annotations_path"):
            if key not in entry:
                raise DataError(f"{manifest_path}: image entry missing key {key!r}: {entry}")
        image_path = (root / entry["path"]).resolve()
        ann_path = (root / entry["annotations_path"]).resolve()
        if not image_path.is_file():
            raise DataError(f"{manifest_path}: image file not found: {image_path}")
        boxes: list[BoundingBox] = []
        for box in read_annotations(ann_path):
            if not box.inside_frame():
                clipped = box.clamped()
                if clipped is None:
                    raise DataError(
                        f"{ann_path}: box for class {box.class_id} lies entirely outside the frame"
                    )
                clamp_count += 1
                box = clipped
            boxes.append(box)
        records.append(
            ImageRecord(
                id=str(entry["id"]),
                image_path=image_path,
                width=int(entry["width"]),
                height=int(entry["height"]),
                annotations=tuple(boxes),
                annotations_path=ann_path,
            )
        )

    if clamp_count:
        log.warning("%s: clamped %d box(es) to the image frame", manifest_path.name, clamp_count)

    ds = Dataset(
        name=str(payload["name"]),
        condition=condition,
        class_map=class_map,
        records=tuple(records),
        manifest_path=manifest_path,
    )
    report = validate_dataset(ds)
    if not report.ok:
        raise DataError(f"{manifest_path}: dataset invalid\n{report.summary()}")
    return ds


def save_manifest(ds: Dataset, manifest_path: str | Path) -> Path:
    """Write ``ds`` back to disk: a manifest plus one annotation file per record.

    Annotation files land in ``labels/`` next to the manifest.  Image files are
    referenced (relative when possible), never copied.
    """
    manifest_path = Path(manifest_path).resolve()
    root = manifest_path.parent
    root.mkdir(parents=True, exist_ok=True)
    entries = []
    for rec in ds.records:
        rel_ann = Path("labels") / f"{rec.id}.txt"
        write_annotations(root / rel_ann, rec.annotations)
        try:
            img_ref = rec.image_path.relative_to(root).as_posix()
        except ValueError:
            img_ref = rec.image_path.as_posix()
        entries.append(
            {
                "id": rec.id,
                "path": img_ref,
                "width": rec.width,
                "height": rec.height,
                "annotations_path": rel_ann.as_posix(),
            }
        )
    payload = {
        "name": ds.name,
        "condition": ds.condition.value,
        "class_map": {str(k): v for k, v in sorted(ds.class_map.items())},
        "images": entries,
    }
    manifest_path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return manifest_path


# ---------------------------------------------------------------------------
# operations


def validate_dataset(ds: Dataset) -> ValidationReport:
    """Check dataset invariants; returns a report instead of raising."""
    violations: list[Violation] = []
    seen: set[str] = set()
    for rec in ds.records:
        if rec.id in seen:
            violations.append(Violation(rec.id, "duplicate-id", "record id appears more than once"))
        seen.add(rec.id)
        if not rec.image_path.is_file():
            violations.append(Violation(rec.id, "missing-image", str(rec.image_path)))
        if rec.annotations_path is not None and not rec.annotations_path.is_file():
            violations.append(Violation(rec.id, "missing-annotations", str(rec.annotations_path)))
        if rec.width <= 0 or rec.height <= 0:
            violations.append(Violation(rec.id, "bad-dimensions", f"{rec.width}x{rec.height}"))
        for i, box in enumerate(rec.annotations):
            if box.class_id not in ds.class_map:
                violations.append(
                    Violation(rec.id, "unknown-class", f"box {i} has class {box.class_id}")
                )
            if box.w <= 0.0 or box.h <= 0.0:
                violations.append(Violation(rec.id, "zero-area", f"box {i} is {box.w}x{box.h}"))
            elif not box.inside_frame():
                violations.append(
                    Violation(
                        rec.id,
                        "box-out-of-range",
                        f"box {i} spans [{box.x1:.4f},{box.x2:.4f}]x[{box.y1:.4f},{box.y2:.4f}]",
                    )
                )
    return ValidationReport(dataset_name=ds.name, violations=tuple(violations))


def split_dataset(ds: Dataset, fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Split into train/holdout parts of sizes floor(fraction*N) / the rest.

    The choice of records is seeded and the original record order is kept
    within each side, so a given (dataset, fraction, seed) always produces the
    same two datasets.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    if len(ds.records) < 2:
        raise ValueError(f"cannot split dataset with {len(ds.records)} record(s)")
    n_train = int(math.floor(fraction * len(ds.records) + 1e-9))
    n_train = min(max(n_train, 1), len(ds.records) - 1)
    indices = list(range(len(ds.records)))
    random.Random(seed).shuffle(indices)
    train_idx = sorted(indices[:n_train])
    hold_idx = sorted(indices[n_train:])
    train = replace(
        ds,
        name=f"{ds.name}-train",
        records=tuple(ds.records[i] for i in train_idx),
        manifest_path=None,
    )
    hold = replace(
        ds,
        name=f"{ds.name}-holdout",
        records=tuple(ds.records[i] for i in hold_idx),
        manifest_path=None,
    )
    return train, hold


def merge_datasets(parts: list[Dataset] | tuple[Dataset, ...]) -> Dataset:
    """Concatenate datasets, namespacing record ids by source dataset name.

    A single-element merge is the identity.  Class maps must agree exactly;
    the merged condition is the shared one, or ``mixed`` when sources differ.
    """
    if not parts:
        raise ValueError("merge_datasets needs at least one dataset")
    if len(parts) == 1:
        return parts[0]
    first = parts[0]
    for other in parts[1:]:
        if other.class_map != first.class_map:
            raise DataError(
                f"class map mismatch: {first.name} has {first.class_map}, "
                f"{other.name} has {other.class_map}"
            )
    records: list[ImageRecord] = []
    seen: set[str] = set()
    for part in parts:
        for rec in part.records:
            new_id = f"{part.name}/{rec.id}"
            if new_id in seen:
                raise DataError(f"duplicate record id after merge: {new_id}")
            seen.add(new_id)
            records.append(replace(rec, id=new_id))
    conditions = {p.condition for p in parts}
    condition = conditions.pop() if len(conditions) == 1 else Condition.MIXED
    return Dataset(
        name="+".join(p.name for p in parts),
        condition=condition,
        class_map=dict(first.class_map),
        records=tuple(records),
        manifest_path=None,
    )
