"""Import COCO ground truth and detection files as a scenario.

Ground truth is the standard instances layout (images, annotations,
categories); detections are the standard results list (image_id, category_id,
bbox, score).  Category ids are remapped to a contiguous 0-based range in
ascending id order, pixel boxes are normalized by image size into center
format, and each detection becomes a one-hot-style score vector carrying its
score at its category.  Targets whose original category id appears in the
caller's old-category set are tagged old; everything else is tagged new.
"""

from __future__ import annotations

import json
from collections.abc import Iterable
from dataclasses import dataclass

from .cost import Origin, Prediction, Target
from .errors import CocoFormatError, ScenarioSyntaxError
from .geometry import Box
from .scenario import ImageRecord, Scenario

__all__ = ["CocoImport", "from_coco", "normalize_bbox"]


@dataclass(frozen=True)
class CocoImport:
    """A converted scenario plus the category id remapping used to build it."""

    scenario: Scenario
    category_map: dict[int, int]


def _load_json(data: bytes | str, what: str) -> object:
    try:
        return json.loads(data)
    except json.JSONDecodeError as exc:
        raise ScenarioSyntaxError(f"{what} is not valid JSON: {exc}") from None


def _require(obj: dict, key: str, where: str) -> object:
    if key not in obj:
        raise CocoFormatError(f"{where} is missing {key!r}")
    return obj[key]


def _as_dict(value: object, where: str) -> dict:
    if not isinstance(value, dict):
        raise CocoFormatError(f"{where} must be an object")
    return value


def _as_list(value: object, where: str) -> list:
    if not isinstance(value, list):
        raise CocoFormatError(f"{where} must be a list")
    return value


def _number(value: object, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise CocoFormatError(f"{where} must be a number")
    return float(value)


def normalize_bbox(
    bbox: Iterable[float], width: float, height: float, where: str = "bbox"
) -> Box:
    """Convert a COCO [x, y, w, h] pixel box to normalized center form."""
    vals = [_number(v, f"{where}[{k}]") for k, v in enumerate(bbox)]
    if len(vals) != 4:
        raise CocoFormatError(f"{where} must have 4 entries, got {len(vals)}")
    x, y, w, h = vals
    if w < 0 or h < 0:
        raise CocoFormatError(f"{where} has negative size ({w}, {h})")
    return Box(
        (x + w / 2.0) / width,
        (y + h / 2.0) / height,
        w / width,
        h / height,
    )


def _id_sort_key(image_id: object) -> tuple[int, float, str]:
    # numeric ids first in numeric order, then string ids lexically
    if isinstance(image_id, int) and not isinstance(image_id, bool):
        return (0, image_id, "")
    return (1, 0.0, str(image_id))


def _parse_images(gt: dict) -> dict[object, tuple[float, float]]:
    sizes: dict[object, tuple[float, float]] = {}
    for k, img in enumerate(_as_list(_require(gt, "images", "ground truth"), "images")):
        where = f"images[{k}]"
        obj = _as_dict(img, where)
        image_id = _require(obj, "id", where)
        if not isinstance(image_id, (int, str)) or isinstance(image_id, bool):
            raise CocoFormatError(f"{where}.id must be an integer or string")
        width = _number(_require(obj, "width", where), f"{where}.width")
        height = _number(_require(obj, "height", where), f"{where}.height")
        if width <= 0 or height <= 0:
            raise CocoFormatError(f"{where} has non-positive size {width}x{height}")
        if image_id in sizes:
            raise CocoFormatError(f"{where} repeats image id {image_id!r}")
        sizes[image_id] = (width, height)
    return sizes


def _parse_categories(gt: dict) -> dict[int, int]:
    ids = []
    raw = _as_list(_require(gt, "categories", "ground truth"), "categories")
    for k, cat in enumerate(raw):
        where = f"categories[{k}]"
        obj = _as_dict(cat, where)
        cid = _require(obj, "id", where)
        if isinstance(cid, bool) or not isinstance(cid, int):
            raise CocoFormatError(f"{where}.id must be an integer")
        ids.append(cid)
    if not ids:
        raise CocoFormatError("ground truth declares no categories")
    if len(set(ids)) != len(ids):
        raise CocoFormatError("ground truth repeats a category id")
    return {cid: index for index, cid in enumerate(sorted(ids))}


def from_coco(
    gt_data: bytes | str,
    det_data: bytes | str,
    old_category_ids: Iterable[int] = (),
) -> CocoImport:
    """Build a scenario from COCO ground truth and detection JSON.

    ``old_category_ids`` uses original COCO ids and must be a subset of the
    declared categories.  Images are emitted in ascending id order with their
    ids stringified; annotation and detection order within an image follows
    the input files.
    """
    gt = _as_dict(_load_json(gt_data, "ground truth"), "ground truth")
    dets = _as_list(_load_json(det_data, "detections"), "detections")

    sizes = _parse_images(gt)
    category_map = _parse_categories(gt)
    num_classes = len(category_map)

    old_ids = {int(c) for c in old_category_ids}
    unknown_old = old_ids - category_map.keys()
    if unknown_old:
        raise CocoFormatError(
            f"old category ids {sorted(unknown_old)} are not declared categories"
        )

    targets: dict[object, list[Target]] = {i: [] for i in sizes}
    raw_anns = _as_list(_require(gt, "annotations", "ground truth"), "annotations")
    for k, ann in enumerate(raw_anns):
        where = f"annotations[{k}]"
        obj = _as_dict(ann, where)
        image_id = _require(obj, "image_id", where)
        if image_id not in sizes:
            raise CocoFormatError(f"{where} references unknown image {image_id!r}")
        cid = _require(obj, "category_id", where)
        if not isinstance(cid, int) or isinstance(cid, bool) or cid not in category_map:
            raise CocoFormatError(f"{where} references unknown category {cid!r}")
        width, height = sizes[image_id]
        box = normalize_bbox(
            _as_list(_require(obj, "bbox", where), f"{where}.bbox"),
            width,
            height,
            f"{where}.bbox",
        )
        origin = Origin.OLD if cid in old_ids else Origin.NEW
        targets[image_id].append(
            Target(category_id=category_map[cid], box=box, origin=origin)
        )

    predictions: dict[object, list[Prediction]] = {i: [] for i in sizes}
    for k, det in enumerate(dets):
        where = f"detections[{k}]"
        obj = _as_dict(det, where)
        image_id = _require(obj, "image_id", where)
        if image_id not in sizes:
            raise CocoFormatError(f"{where} references unknown image {image_id!r}")
        cid = _require(obj, "category_id", where)
        if not isinstance(cid, int) or isinstance(cid, bool) or cid not in category_map:
            raise CocoFormatError(f"{where} references unknown category {cid!r}")
        score = _number(_require(obj, "score", where), f"{where}.score")
        if not 0.0 <= score <= 1.0:
            raise CocoFormatError(f"{where}.score {score} is outside [0, 1]")
        width, height = sizes[image_id]
        box = normalize_bbox(
            _as_list(_require(obj, "bbox", where), f"{where}.bbox"),
            width,
            height,
            f"{where}.bbox",
        )
        scores = tuple(
            score if index == category_map[cid] else 0.0 for index in range(num_classes)
        )
        predictions[image_id].append(Prediction(scores=scores, box=box))

    images = tuple(
        ImageRecord(
            id=str(image_id),
            predictions=tuple(predictions[image_id]),
            targets=tuple(targets[image_id]),
        )
        for image_id in sorted(sizes, key=_id_sort_key)
    )
    return CocoImport(
        scenario=Scenario(num_classes=num_classes, images=images),
        category_map=dict(category_map),
    )
