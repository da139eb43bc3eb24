import json

import numpy as np
import pytest

from flowmatch import Origin, from_coco
from flowmatch.errors import CocoFormatError, ScenarioSyntaxError

from conftest import rand_box


def gt_doc(**overrides):
    base = {
        "images": [{"id": 7, "width": 100, "height": 50}],
        "annotations": [
            {"id": 1, "image_id": 7, "category_id": 3, "bbox": [10, 10, 20, 20]}
        ],
        "categories": [{"id": 3, "name": "cat"}, {"id": 9, "name": "dog"}],
    }
    base.update(overrides)
    return json.dumps(base).encode()


def det_doc(items=None):
    if items is None:
        items = [
            {"image_id": 7, "category_id": 3, "bbox": [12, 8, 18, 22], "score": 0.8}
        ]
    return json.dumps(items).encode()


class TestFromCoco:
    def test_single_annotation_and_detection(self):
        imported = from_coco(gt_doc(), det_doc())
        s = imported.scenario
        assert s.num_classes == 2
        assert len(s.images) == 1
        img = s.images[0]
        assert img.id == "7"
        assert len(img.predictions) == 1
        assert len(img.targets) == 1

    def test_bbox_normalization(self):
        imported = from_coco(gt_doc(), det_doc([]))
        box = imported.scenario.images[0].targets[0].box
        # [10,10,20,20] on 100x50: center (20/100, 20/50), size (20/100, 20/50)
        assert box.as_tuple() == pytest.approx((0.20, 0.40, 0.20, 0.40), abs=1e-12)

    def test_normalization_is_invertible(self):
        rng = np.random.default_rng(91)
        width, height = 640.0, 480.0
        for _ in range(100):
            b = rand_box(rng)
            x = (b.cx - b.w / 2) * width
            y = (b.cy - b.h / 2) * height
            gt = gt_doc(
                images=[{"id": 1, "width": width, "height": height}],
                annotations=[
                    {"id": 1, "image_id": 1, "category_id": 3, "bbox": [x, y, b.w * width, b.h * height]}
                ],
            )
            back = from_coco(gt, det_doc([])).scenario.images[0].targets[0].box
            assert back.cx * width == pytest.approx(b.cx * width, abs=1e-9)
            assert back.cy * height == pytest.approx(b.cy * height, abs=1e-9)
            assert back.w * width == pytest.approx(b.w * width, abs=1e-9)
            assert back.h * height == pytest.approx(b.h * height, abs=1e-9)

    def test_category_remap_is_contiguous_and_sorted(self):
        gt = gt_doc(
            categories=[{"id": 9}, {"id": 3}, {"id": 40}],
            annotations=[{"id": 1, "image_id": 7, "category_id": 40, "bbox": [0, 0, 10, 10]}],
        )
        imported = from_coco(gt, det_doc([]))
        assert imported.category_map == {3: 0, 9: 1, 40: 2}
        assert imported.scenario.images[0].targets[0].category_id == 2

    def test_origin_tagging_by_original_ids(self):
        gt = gt_doc(
            annotations=[
                {"id": 1, "image_id": 7, "category_id": 3, "bbox": [0, 0, 10, 10]},
                {"id": 2, "image_id": 7, "category_id": 9, "bbox": [5, 5, 10, 10]},
            ]
        )
        s = from_coco(gt, det_doc([]), old_category_ids={3}).scenario
        origins = [t.origin for t in s.images[0].targets]
        assert origins == [Origin.OLD, Origin.NEW]

    def test_detection_scores_are_one_hot_scaled(self):
        imported = from_coco(gt_doc(), det_doc())
        pred = imported.scenario.images[0].predictions[0]
        assert pred.scores == (0.8, 0.0)

    def test_images_sorted_by_id(self):
        gt = gt_doc(
            images=[
                {"id": 30, "width": 10, "height": 10},
                {"id": 4, "width": 10, "height": 10},
            ],
            annotations=[],
        )
        s = from_coco(gt, det_doc([])).scenario
        assert [img.id for img in s.images] == ["4", "30"]

    def test_unknown_image_in_detection(self):
        dets = det_doc([{"image_id": 99, "category_id": 3, "bbox": [0, 0, 1, 1], "score": 0.5}])
        with pytest.raises(CocoFormatError, match="99"):
            from_coco(gt_doc(), dets)

    def test_unknown_category_in_detection(self):
        dets = det_doc([{"image_id": 7, "category_id": 555, "bbox": [0, 0, 1, 1], "score": 0.5}])
        with pytest.raises(CocoFormatError, match="555"):
            from_coco(gt_doc(), dets)

    def test_missing_width(self):
        gt = gt_doc(images=[{"id": 7, "height": 50}])
        with pytest.raises(CocoFormatError, match="width"):
            from_coco(gt, det_doc([]))

    def test_malformed_bbox(self):
        gt = gt_doc(
            annotations=[{"id": 1, "image_id": 7, "category_id": 3, "bbox": [0, 0, -5, 5]}]
        )
        with pytest.raises(CocoFormatError, match="bbox"):
            from_coco(gt, det_doc([]))

    def test_score_out_of_range(self):
        dets = det_doc([{"image_id": 7, "category_id": 3, "bbox": [0, 0, 1, 1], "score": 1.5}])
        with pytest.raises(CocoFormatError, match="score"):
            from_coco(gt_doc(), dets)

    def test_unknown_old_category_ids(self):
        with pytest.raises(CocoFormatError, match="old category"):
            from_coco(gt_doc(), det_doc([]), old_category_ids={12345})

    def test_detections_must_be_a_list(self):
        with pytest.raises(CocoFormatError):
            from_coco(gt_doc(), b"{}")

    def test_gt_syntax_error(self):
        with pytest.raises(ScenarioSyntaxError):
            from_coco(b"{broken", det_doc([]))

    def test_no_categories_rejected(self):
        gt = gt_doc(categories=[], annotations=[])
        with pytest.raises(CocoFormatError, match="categories"):
            from_coco(gt, det_doc([]))
