"""Shared generators for the test suite.

Random data comes from numpy Generators seeded per test, so failures
reproduce without any cross-test coupling.
"""

from __future__ import annotations

import numpy as np

from flowmatch import Box, ImageRecord, Origin, Prediction, Scenario, Target


def rand_box(rng: np.random.Generator, min_size: float = 0.05, max_size: float = 0.7) -> Box:
    w = float(rng.uniform(min_size, max_size))
    h = float(rng.uniform(min_size, max_size))
    cx = float(rng.uniform(w / 2, 1 - w / 2))
    cy = float(rng.uniform(h / 2, 1 - h / 2))
    return Box(cx, cy, w, h)


def rand_cost(rng: np.random.Generator, n_p: int, n_q: int, lo=0.0, hi=10.0) -> np.ndarray:
    return rng.uniform(lo, hi, size=(n_p, n_q))


def rand_quality(rng: np.random.Generator, n_p: int, n_q: int) -> np.ndarray:
    return rng.uniform(0.0, 1.0, size=(n_p, n_q))


def rand_origins(rng: np.random.Generator, n_q: int) -> list[Origin]:
    return [Origin.OLD if rng.uniform() < 0.5 else Origin.NEW for _ in range(n_q)]


def rand_prediction(rng: np.random.Generator, num_classes: int) -> Prediction:
    return Prediction(
        scores=tuple(float(s) for s in rng.uniform(0.0, 1.0, size=num_classes)),
        box=rand_box(rng),
    )


def rand_target(rng: np.random.Generator, num_classes: int) -> Target:
    return Target(
        category_id=int(rng.integers(0, num_classes)),
        box=rand_box(rng),
        origin=Origin.OLD if rng.uniform() < 0.5 else Origin.NEW,
    )


def rand_image(rng: np.random.Generator, num_classes: int, image_id: str = "img") -> ImageRecord:
    n_p = int(rng.integers(0, 6))
    n_q = int(rng.integers(0, 5))
    return ImageRecord(
        id=image_id,
        predictions=tuple(rand_prediction(rng, num_classes) for _ in range(n_p)),
        targets=tuple(rand_target(rng, num_classes) for _ in range(n_q)),
    )


def rand_scenario(rng: np.random.Generator, num_images: int = 4, num_classes: int = 5) -> Scenario:
    return Scenario(
        num_classes=num_classes,
        images=tuple(
            rand_image(rng, num_classes, image_id=f"im{k}") for k in range(num_images)
        ),
    )
