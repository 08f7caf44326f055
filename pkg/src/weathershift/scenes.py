"""Procedural desk-scale scene generator.

Renders a flat track seen from a low camera with colored triangular marker
cones (class 0 = blue, class 1 = yellow), writes YOLO-style annotation files
alongside the PNGs, and can re-render the same scenes under simulated night
(darken + desaturate + sensor noise) or lens-droplet (local blur discs)
conditions.  Everything is driven by numpy Generators seeded per image, so a
given (seed, count, size, condition) always produces byte-identical output.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, ImageFilter

from .dataset import BoundingBox, Condition, Dataset, ImageRecord, load_manifest, save_manifest
from .errors import ConfigError

CLASS_MAP = {0: "blue_cone", 1: "yellow_cone"}

_CONE_COLORS = {
    0: np.array([0.10, 0.18, 0.78], dtype=np.float32),
    1: np.array([0.88, 0.72, 0.10], dtype=np.float32),
}

_CONDITION_ALIASES = {
    "sunny": Condition.SUNNY,
    "night": Condition.REAL_NIGHT,
    "droplet": Condition.REAL_DROPLET,
    Condition.SUNNY.value: Condition.SUNNY,
    Condition.REAL_NIGHT.value: Condition.REAL_NIGHT,
    Condition.REAL_DROPLET.value: Condition.REAL_DROPLET,
}


@dataclass(frozen=True)
class SceneParams:
    count: int
    seed: int
    image_size: int = 64
    condition: str = "sunny"
    min_cones: int = 2
    max_cones: int = 6


def _pixel_iou(a: tuple[float, float, float, float], b: tuple[float, float, float, float]) -> float:
    ix = max(0.0, min(a[2], b[2]) - max(a[0], b[0]))
    iy = max(0.0, min(a[3], b[3]) - max(a[1], b[1]))
    inter = ix * iy
    if inter <= 0.0:
        return 0.0
    union = (a[2] - a[0]) * (a[3] - a[1]) + (b[2] - b[0]) * (b[3] - b[1]) - inter
    return inter / union


def _render_base(rng: np.random.Generator, size: int, min_cones: int, max_cones: int):
    """Render one sunny scene. Returns (image [0,1] HxWx3, list[BoundingBox])."""
    h = w = size
    img = np.empty((h, w, 3), dtype=np.float32)
    brightness = rng.uniform(0.92, 1.08)

    horizon = rng.uniform(0.32, 0.42)
    hy = horizon * h
    ys = np.arange(h, dtype=np.float32)

    # Sky: vertical gradient toward the horizon.
    sky_top = np.array([0.42, 0.62, 0.92], dtype=np.float32)
    sky_low = np.array([0.72, 0.83, 0.95], dtype=np.float32)
    t_sky = np.clip(ys / max(hy, 1.0), 0.0, 1.0)[:, None]
    img[:] = (sky_top * (1.0 - t_sky) + sky_low * t_sky)[:, None, :]

    # Ground: asphalt gray, slightly lighter near the horizon.
    ground_far = np.array([0.52, 0.52, 0.53], dtype=np.float32)
    ground_near = np.array([0.38, 0.38, 0.40], dtype=np.float32)
    t_gnd = np.clip((ys - hy) / max(h - hy, 1.0), 0.0, 1.0)[:, None]
    ground = (ground_far * (1.0 - t_gnd) + ground_near * t_gnd)[:, None, :]
    mask = (ys >= hy)[:, None, None]
    img = np.where(mask, ground, img)

    # Track: a lighter trapezoid narrowing toward a vanishing point.
    vx = 0.5 * w + rng.uniform(-0.08, 0.08) * w
    half_near = rng.uniform(0.30, 0.42) * w
    xs = np.arange(w, dtype=np.float32)[None, :]
    depth = np.clip((ys[:, None] - hy) / max(h - hy, 1.0), 0.0, 1.0)
    half = 1.5 + half_near * depth
    track = (np.abs(xs - vx) <= half) & (ys[:, None] >= hy)
    img[track] = img[track] * 0.9 + 0.08

    img *= brightness
    img += rng.normal(0.0, 0.008, size=img.shape).astype(np.float32)

    # Cones, far ones first so near ones paint over them.
    n_cones = int(rng.integers(min_cones, max_cones + 1))
    placements: list[tuple[float, float, float, float, int]] = []  # x1,y1,x2,y2 px + class
    for _ in range(n_cones):
        for _attempt in range(12):
            depth_t = rng.uniform(0.15, 0.95)
            base_y = hy + depth_t * (h - 2 - hy)
            cone_h = (0.07 + 0.22 * depth_t) * h * rng.uniform(0.85, 1.15)
            cone_h = max(cone_h, 4.0)
            cone_w = cone_h * rng.uniform(0.62, 0.78)
            cx = rng.uniform(cone_w / 2 + 1.0, w - 2 - cone_w / 2)
            rect = (cx - cone_w / 2, base_y - cone_h, cx + cone_w / 2, base_y)
            if rect[1] < 1.0:
                continue
            if all(_pixel_iou(rect, other[:4]) <= 0.2 for other in placements):
                placements.append((*rect, int(rng.integers(0, 2))))
                break

    placements.sort(key=lambda p: p[3])  # draw back-to-front
    boxes: list[BoundingBox] = []
    for x1, y1, x2, y2, class_id in placements:
        color = _CONE_COLORS[class_id] * rng.uniform(0.9, 1.05, size=3).astype(np.float32)
        cone_h = y2 - y1
        for row in range(int(np.ceil(y1)), int(np.floor(y2)) + 1):
            if not 0 <= row < h:
                continue
            t = (row - y1) / cone_h
            half_row = max(t * (x2 - x1) / 2.0, 0.5)
            cx = (x1 + x2) / 2.0
            a = max(int(np.ceil(cx - half_row)), 0)
            b = min(int(np.floor(cx + half_row)) + 1, w)
            if a >= b:
                continue
            row_color = color
            if 0.45 <= t <= 0.62:  # reflective stripe
                row_color = color * 0.25 + 0.70
            img[row, a:b] = row_color
        boxes.append(
            BoundingBox(
                class_id,
                cx=((x1 + x2) / 2.0) / w,
                cy=((y1 + y2) / 2.0) / h,
                w=(x2 - x1) / w,
                h=(y2 - y1) / h,
            )
        )
    return np.clip(img, 0.0, 1.0), boxes


def night_transform(img: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Darken, desaturate, add a blue cast and sensor noise."""
    factor = rng.uniform(0.20, 0.28)
    out = img * factor
    gray = out @ np.array([0.299, 0.587, 0.114], dtype=np.float32)
    out = 0.45 * gray[..., None] + 0.55 * out
    out *= np.array([0.92, 0.96, 1.20], dtype=np.float32)
    out += rng.normal(0.0, 0.015, size=out.shape).astype(np.float32)
    return np.clip(out, 0.0, 1.0)


def droplet_transform(img: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Composite locally blurred discs over the image, as if the lens were wet."""
    h, w = img.shape[:2]
    radius = rng.uniform(2.0, 3.2)
    pil = Image.fromarray((np.clip(img, 0, 1) * 255).round().astype(np.uint8))
    blurred = np.asarray(pil.filter(ImageFilter.GaussianBlur(radius)), dtype=np.float32) / 255.0

    yy, xx = np.mgrid[0:h, 0:w].astype(np.float32)
    mask = np.zeros((h, w), dtype=np.float32)
    for _ in range(int(rng.integers(4, 9))):
        cy, cx = rng.uniform(0, h), rng.uniform(0, w)
        r = rng.uniform(0.10, 0.22) * h
        dist = np.sqrt((yy - cy) ** 2 + (xx - cx) ** 2)
        mask = np.maximum(mask, np.clip(1.6 - dist / r, 0.0, 1.0))
    mask = np.clip(mask, 0.0, 1.0)[..., None]
    out = img * (1.0 - mask) + (blurred * 1.03 + 0.02) * mask
    return np.clip(out, 0.0, 1.0)


def generate_scenes(
    out_dir: str | Path,
    count: int,
    seed: int,
    image_size: int = 64,
    condition: str | Condition = "sunny",
    name: str | None = None,
    min_cones: int = 2,
    max_cones: int = 6,
) -> Dataset:
    """Render ``count`` scenes into ``out_dir`` and return the loaded dataset.

    Output layout: ``images/*.png``, ``labels/*.txt``, ``manifest.json`` and a
    ``generation_log.json`` recording per-image box counts.
    """
    if count < 1:
        raise ConfigError(f"count must be >= 1, got {count}")
    if image_size < 16:
        raise ConfigError(f"image_size must be >= 16, got {image_size}")
    if not 1 <= min_cones <= max_cones:
        raise ConfigError(f"bad cone range [{min_cones}, {max_cones}]")
    key = condition.value if isinstance(condition, Condition) else str(condition)
    if key not in _CONDITION_ALIASES:
        raise ConfigError(f"unsupported scene condition {key!r} (use sunny, night or droplet)")
    cond = _CONDITION_ALIASES[key]

    out = Path(out_dir).resolve()
    (out / "images").mkdir(parents=True, exist_ok=True)
    ds_name = name or f"scenes-{cond.value}-s{seed}"

    records: list[ImageRecord] = []
    per_image_boxes: dict[str, int] = {}
    class_counts = {cid: 0 for cid in CLASS_MAP}
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        img, boxes = _render_base(rng, image_size, min_cones, max_cones)
        if cond is Condition.REAL_NIGHT:
            img = night_transform(img, np.random.default_rng([seed, i, 1]))
        elif cond is Condition.REAL_DROPLET:
            img = droplet_transform(img, np.random.default_rng([seed, i, 2]))

        rec_id = f"img_{i:04d}"
        img_path = out / "images" / f"{rec_id}.png"
        Image.fromarray((img * 255.0).round().astype(np.uint8)).save(img_path)
        records.append(
            ImageRecord(
                id=rec_id,
                image_path=img_path,
                width=image_size,
                height=image_size,
                annotations=tuple(boxes),
            )
        )
        per_image_boxes[rec_id] = len(boxes)
        for b in boxes:
            class_counts[b.class_id] += 1

    ds = Dataset(name=ds_name, condition=cond, class_map=dict(CLASS_MAP), records=tuple(records))
    manifest = save_manifest(ds, out / "manifest.json")

    log_payload = {
        "seed": seed,
        "condition": cond.value,
        "image_size": image_size,
        "count": count,
        "total_boxes": sum(per_image_boxes.values()),
        "class_counts": {CLASS_MAP[c]: n for c, n in class_counts.items()},
        "per_image_boxes": per_image_boxes,
    }
    (out / "generation_log.json").write_text(
        json.dumps(log_payload, indent=2) + "\n", encoding="utf-8"
    )
    return load_manifest(manifest)
