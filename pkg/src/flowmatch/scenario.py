"""Scenario files: the on-disk unit of work for the matchers.

A scenario is a JSON document holding a class count and a list of images,
each image carrying score-and-box predictions plus class-and-box targets
tagged with their origin.  This module loads and saves that format with
path-qualified validation errors, and synthesizes scenarios with a seeded
generator whose output is reproducible byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .cost import Origin, Prediction, Target
from .errors import (
    DomainError,
    MalformedInputError,
    ScenarioInvariantError,
    ScenarioSchemaError,
    ScenarioSyntaxError,
)
from .geometry import Box

__all__ = [
    "ImageRecord",
    "Scenario",
    "SynthConfig",
    "load_scenario",
    "save_scenario",
    "scenario_to_jsonable",
    "generate_synthetic",
]


@dataclass(frozen=True)
class ImageRecord:
    """Predictions and targets for one image."""

    id: str
    predictions: tuple[Prediction, ...] = ()
    targets: tuple[Target, ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.id, str):
            raise MalformedInputError(f"image id must be a string, got {self.id!r}")
        object.__setattr__(self, "predictions", tuple(self.predictions))
        object.__setattr__(self, "targets", tuple(self.targets))
        for p in self.predictions:
            if not isinstance(p, Prediction):
                raise MalformedInputError(f"predictions must hold Prediction, got {p!r}")
        for t in self.targets:
            if not isinstance(t, Target):
                raise MalformedInputError(f"targets must hold Target, got {t!r}")


@dataclass(frozen=True)
class Scenario:
    """A class count plus an ordered list of image records.

    Construction checks the cross-cutting invariants: every prediction's
    score vector has exactly ``num_classes`` entries and every target's
    category index is strictly below it.
    """

    num_classes: int
    images: tuple[ImageRecord, ...] = ()

    def __post_init__(self) -> None:
        if isinstance(self.num_classes, bool) or not isinstance(self.num_classes, int):
            raise MalformedInputError(
                f"num_classes must be an int, got {self.num_classes!r}"
            )
        if self.num_classes < 1:
            raise ScenarioInvariantError(
                f"num_classes must be >= 1, got {self.num_classes}"
            )
        object.__setattr__(self, "images", tuple(self.images))
        for idx, img in enumerate(self.images):
            if not isinstance(img, ImageRecord):
                raise MalformedInputError(
                    f"images[{idx}] must be an ImageRecord, got {img!r}"
                )
            for p_idx, p in enumerate(img.predictions):
                if p.num_classes != self.num_classes:
                    raise ScenarioInvariantError(
                        f"images[{idx}].predictions[{p_idx}]: {p.num_classes} scores "
                        f"for a {self.num_classes}-class scenario"
                    )
            for t_idx, t in enumerate(img.targets):
                if t.category_id >= self.num_classes:
                    raise ScenarioInvariantError(
                        f"images[{idx}].targets[{t_idx}]: category_id {t.category_id} "
                        f"is out of range for {self.num_classes} classes"
                    )


def _type_name(value: object) -> str:
    return type(value).__name__


def _as_number(value: object, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioSchemaError(f"{path}: expected a number, got {_type_name(value)}")
    return float(value)


def _as_object(value: object, path: str, keys: frozenset[str]) -> dict:
    if not isinstance(value, dict):
        raise ScenarioSchemaError(f"{path}: expected an object, got {_type_name(value)}")
    missing = keys - value.keys()
    if missing:
        raise ScenarioSchemaError(f"{path}: missing key {sorted(missing)[0]!r}")
    extra = value.keys() - keys
    if extra:
        raise ScenarioSchemaError(f"{path}: unexpected key {sorted(extra)[0]!r}")
    return value


def _as_list(value: object, path: str) -> list:
    if not isinstance(value, list):
        raise ScenarioSchemaError(f"{path}: expected a list, got {_type_name(value)}")
    return value


def _parse_box(value: object, path: str) -> Box:
    items = _as_list(value, path)
    if len(items) != 4:
        raise ScenarioSchemaError(f"{path}: expected 4 box numbers, got {len(items)}")
    nums = [_as_number(v, f"{path}[{k}]") for k, v in enumerate(items)]
    try:
        return Box(*nums)
    except (MalformedInputError, DomainError) as exc:
        raise ScenarioInvariantError(f"{path}: {exc}") from None


def _parse_prediction(value: object, path: str) -> Prediction:
    obj = _as_object(value, path, frozenset({"scores", "box"}))
    scores = [
        _as_number(s, f"{path}.scores[{k}]")
        for k, s in enumerate(_as_list(obj["scores"], f"{path}.scores"))
    ]
    box = _parse_box(obj["box"], f"{path}.box")
    try:
        return Prediction(scores=tuple(scores), box=box)
    except (MalformedInputError, DomainError) as exc:
        raise ScenarioInvariantError(f"{path}: {exc}") from None


def _parse_target(value: object, path: str) -> Target:
    obj = _as_object(value, path, frozenset({"category_id", "box", "origin"}))
    cat = obj["category_id"]
    if isinstance(cat, bool) or not isinstance(cat, int):
        raise ScenarioSchemaError(
            f"{path}.category_id: expected an integer, got {_type_name(cat)}"
        )
    box = _parse_box(obj["box"], f"{path}.box")
    raw_origin = obj["origin"]
    if not isinstance(raw_origin, str):
        raise ScenarioSchemaError(
            f"{path}.origin: expected a string, got {_type_name(raw_origin)}"
        )
    try:
        origin = Origin(raw_origin)
    except ValueError:
        raise ScenarioInvariantError(
            f"{path}.origin: must be 'old' or 'new', got {raw_origin!r}"
        ) from None
    try:
        return Target(category_id=cat, box=box, origin=origin)
    except (MalformedInputError, DomainError) as exc:
        raise ScenarioInvariantError(f"{path}: {exc}") from None


def _parse_image(value: object, path: str) -> ImageRecord:
    obj = _as_object(value, path, frozenset({"id", "predictions", "targets"}))
    if not isinstance(obj["id"], str):
        raise ScenarioSchemaError(
            f"{path}.id: expected a string, got {_type_name(obj['id'])}"
        )
    preds = [
        _parse_prediction(p, f"{path}.predictions[{k}]")
        for k, p in enumerate(_as_list(obj["predictions"], f"{path}.predictions"))
    ]
    targets = [
        _parse_target(t, f"{path}.targets[{k}]")
        for k, t in enumerate(_as_list(obj["targets"], f"{path}.targets"))
    ]
    return ImageRecord(id=obj["id"], predictions=tuple(preds), targets=tuple(targets))


def load_scenario(data: bytes | str) -> Scenario:
    """Parse scenario JSON, with errors that point at the offending element.

    Raises:
        ScenarioSyntaxError: the bytes are not valid JSON.
        ScenarioSchemaError: valid JSON with the wrong shape (missing or
            unexpected keys, wrong types, wrong arity).
        ScenarioInvariantError: well-shaped data violating a value constraint
            (category out of range, score outside [0, 1], negative box size).
    """
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ScenarioSyntaxError(f"not valid JSON: {exc}") from None
    top = _as_object(raw, "$", frozenset({"num_classes", "images"}))
    num_classes = top["num_classes"]
    if isinstance(num_classes, bool) or not isinstance(num_classes, int):
        raise ScenarioSchemaError(
            f"$.num_classes: expected an integer, got {_type_name(num_classes)}"
        )
    images = [
        _parse_image(img, f"$.images[{k}]")
        for k, img in enumerate(_as_list(top["images"], "$.images"))
    ]
    try:
        return Scenario(num_classes=num_classes, images=tuple(images))
    except ScenarioInvariantError:
        raise
    except (MalformedInputError, DomainError) as exc:
        raise ScenarioInvariantError(str(exc)) from None


def scenario_to_jsonable(scenario: Scenario) -> dict:
    """Plain-dict form of a scenario, key order matching the file format."""
    return {
        "num_classes": scenario.num_classes,
        "images": [
            {
                "id": img.id,
                "predictions": [
                    {"scores": list(p.scores), "box": list(p.box.as_tuple())}
                    for p in img.predictions
                ],
                "targets": [
                    {
                        "category_id": t.category_id,
                        "box": list(t.box.as_tuple()),
                        "origin": t.origin.value,
                    }
                    for t in img.targets
                ],
            }
            for img in scenario.images
        ],
    }


def save_scenario(scenario: Scenario) -> bytes:
    """Serialize deterministically: same scenario, same bytes."""
    text = json.dumps(scenario_to_jsonable(scenario), separators=(",", ":"))
    return text.encode("utf-8")


@dataclass(frozen=True)
class SynthConfig:
    """Knobs for the synthetic scenario generator.

    Each target gets one plausible prediction whose box is jittered with a
    Gaussian whose scale depends on the target's origin tag, so the two noise
    levels control how much better one population localizes than the other.
    Additional clutter predictions carry uniformly low scores everywhere.
    """

    seed: int
    image_count: int = 100
    targets_per_image: tuple[int, int] = (1, 6)
    clutter_per_image: int = 2
    noise_old: float = 0.02
    noise_new: float = 0.12
    old_fraction: float = 0.5
    num_classes: int = 8

    def __post_init__(self) -> None:
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise MalformedInputError(f"seed must be an int, got {self.seed!r}")
        if self.seed < 0:
            raise DomainError(f"seed must be >= 0, got {self.seed}")
        if isinstance(self.image_count, bool) or not isinstance(self.image_count, int):
            raise MalformedInputError(
                f"image_count must be an int, got {self.image_count!r}"
            )
        if self.image_count < 0:
            raise DomainError(f"image_count must be >= 0, got {self.image_count}")
        lo, hi = self.targets_per_image
        if not isinstance(lo, int) or not isinstance(hi, int) or isinstance(lo, bool) or isinstance(hi, bool):
            raise MalformedInputError(
                f"targets_per_image must be a pair of ints, got {self.targets_per_image!r}"
            )
        if lo < 0 or hi < lo:
            raise DomainError(
                f"targets_per_image must satisfy 0 <= min <= max, got ({lo}, {hi})"
            )
        object.__setattr__(self, "targets_per_image", (lo, hi))
        if isinstance(self.clutter_per_image, bool) or not isinstance(self.clutter_per_image, int):
            raise MalformedInputError(
                f"clutter_per_image must be an int, got {self.clutter_per_image!r}"
            )
        if self.clutter_per_image < 0:
            raise DomainError(
                f"clutter_per_image must be >= 0, got {self.clutter_per_image}"
            )
        for name in ("noise_old", "noise_new"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v < 0.0:
                raise DomainError(f"{name} must be finite and >= 0, got {v}")
            object.__setattr__(self, name, v)
        f = float(self.old_fraction)
        if not math.isfinite(f) or not 0.0 <= f <= 1.0:
            raise DomainError(f"old_fraction must lie in [0, 1], got {f}")
        object.__setattr__(self, "old_fraction", f)
        if isinstance(self.num_classes, bool) or not isinstance(self.num_classes, int):
            raise MalformedInputError(
                f"num_classes must be an int, got {self.num_classes!r}"
            )
        if self.num_classes < 1:
            raise DomainError(f"num_classes must be >= 1, got {self.num_classes}")


def _generate_image(config: SynthConfig, index: int) -> ImageRecord:
    # independent substream per image: reordering or parallelizing image
    # generation cannot change any image's content
    rng = np.random.default_rng([config.seed, index])
    lo, hi = config.targets_per_image
    n_targets = int(rng.integers(lo, hi + 1))
    targets: list[Target] = []
    predictions: list[Prediction] = []
    for _ in range(n_targets):
        w = float(rng.uniform(0.05, 0.5))
        h = float(rng.uniform(0.05, 0.5))
        cx = float(rng.uniform(w / 2.0, 1.0 - w / 2.0))
        cy = float(rng.uniform(h / 2.0, 1.0 - h / 2.0))
        category = int(rng.integers(0, config.num_classes))
        origin = Origin.OLD if float(rng.uniform()) < config.old_fraction else Origin.NEW
        targets.append(Target(category_id=category, box=Box(cx, cy, w, h), origin=origin))

        sigma = config.noise_old if origin is Origin.OLD else config.noise_new
        jitter = rng.normal(0.0, sigma, size=4)
        pred_box = Box(
            cx + float(jitter[0]),
            cy + float(jitter[1]),
            max(w + float(jitter[2]), 1e-3),
            max(h + float(jitter[3]), 1e-3),
        )
        hit = float(rng.uniform(0.6, 0.95))
        noise_scores = rng.uniform(0.0, 0.05, size=config.num_classes)
        scores = tuple(
            hit if k == category else float(noise_scores[k])
            for k in range(config.num_classes)
        )
        predictions.append(Prediction(scores=scores, box=pred_box))
    for _ in range(config.clutter_per_image):
        w = float(rng.uniform(0.05, 0.3))
        h = float(rng.uniform(0.05, 0.3))
        cx = float(rng.uniform(w / 2.0, 1.0 - w / 2.0))
        cy = float(rng.uniform(h / 2.0, 1.0 - h / 2.0))
        scores = tuple(float(s) for s in rng.uniform(0.0, 0.15, size=config.num_classes))
        predictions.append(Prediction(scores=scores, box=Box(cx, cy, w, h)))
    return ImageRecord(
        id=f"img-{index:05d}",
        predictions=tuple(predictions),
        targets=tuple(targets),
    )


def generate_synthetic(config: SynthConfig) -> Scenario:
    """Seeded synthetic scenario; identical config gives identical output."""
    images = tuple(_generate_image(config, i) for i in range(config.image_count))
    return Scenario(num_classes=config.num_classes, images=images)
