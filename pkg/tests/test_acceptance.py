"""End-to-end acceptance gate.

Each test covers one required behavior at its pinned tolerance and prints a
single PASS line with the measured numbers. Run with ``pytest -v`` to get one
pass/fail line per requirement.
"""

from __future__ import annotations

import struct
import subprocess
import sys
import time

import numpy as np
import pytest

from flowmatch import (
    Box,
    CostWeights,
    ImageRecord,
    Origin,
    Prediction,
    PruneThresholds,
    Scenario,
    SynthConfig,
    Target,
    background_loss,
    brute_max_matching,
    brute_min_cost_assignment,
    brute_min_cost_max_matching,
    cost_matrix,
    flat_hungarian,
    flat_q_mcmf,
    foregrounding_stats,
    generate_synthetic,
    giou,
    hungarian_match,
    iou,
    matched_loss,
    q_mcmf_match,
    run_matcher,
    total_loss,
)
from flowmatch.cli import run as cli_run
from flowmatch.errors import RemoteMatcherError
from flowmatch.ffi import (
    decode_response,
    encode_hungarian_request,
    encode_qmcmf_request,
    read_frame,
    write_frame,
)

from conftest import rand_box, rand_image, rand_scenario


def _assignment_instances(count: int = 1000):
    rng = np.random.default_rng(1000)
    for _ in range(count):
        n_p = int(rng.integers(1, 8))
        n_q = int(rng.integers(1, 8))
        yield rng.uniform(0.0, 10.0, size=(n_p, n_q))


def _masked_instances(count: int = 500):
    """Cost matrices with an explicit edge mask realized through pruning.

    Surviving qualities sit in [0.75, 1) and pruned ones in [0, 0.45), so with
    cutoffs (0.7, 0.5) the kept edge set equals the mask for either origin.
    """
    rng = np.random.default_rng(4321)
    for _ in range(count):
        n_p = int(rng.integers(1, 9))
        n_q = int(rng.integers(1, 9))
        cost = rng.uniform(0.0, 10.0, size=(n_p, n_q))
        mask = rng.random((n_p, n_q)) < 0.55
        quality = np.where(
            mask,
            rng.uniform(0.75, 1.0, size=(n_p, n_q)),
            rng.uniform(0.0, 0.45, size=(n_p, n_q)),
        )
        origins = [Origin.OLD if rng.uniform() < 0.5 else Origin.NEW for _ in range(n_q)]
        yield cost, quality, mask, origins


def test_hungarian_totals_match_brute_oracle():
    start = time.perf_counter()
    worst = 0.0
    for cost in _assignment_instances():
        got = hungarian_match(cost).total_cost
        _, want = brute_min_cost_assignment(cost)
        worst = max(worst, abs(got - want))
        assert abs(got - want) <= 1e-9
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    print(f"PASS hungarian-exactness: 1000 instances, max diff {worst:.2e}, {elapsed:.2f}s")


def test_flow_matcher_without_pruning_reduces_to_hungarian():
    rng = np.random.default_rng(2000)
    open_thresholds = PruneThresholds(0.0, 0.0)
    worst = 0.0
    for cost in _assignment_instances():
        n_p, n_q = cost.shape
        quality = rng.uniform(0.0, 1.0, size=(n_p, n_q))
        origins = [Origin.OLD if rng.uniform() < 0.5 else Origin.NEW for _ in range(n_q)]
        flow = q_mcmf_match(cost, quality, origins, open_thresholds)
        base = hungarian_match(cost)
        assert len(flow.pairs) == min(n_p, n_q)
        worst = max(worst, abs(flow.total_cost - base.total_cost))
        assert abs(flow.total_cost - base.total_cost) <= 1e-9
    print(f"PASS flow-reduction: 1000 instances, max total diff {worst:.2e}")


def test_flow_matcher_cardinality_matches_brute_max_matching():
    thresholds = PruneThresholds(0.7, 0.5)
    for cost, quality, mask, origins in _masked_instances():
        flow = q_mcmf_match(cost, quality, origins, thresholds)
        assert len(flow.pairs) == brute_max_matching(mask)
    print("PASS max-flow-cardinality: 500 masked instances agree with brute search")


def test_flow_matcher_total_is_min_cost_among_max_matchings():
    thresholds = PruneThresholds(0.7, 0.5)
    worst = 0.0
    for cost, quality, mask, origins in _masked_instances():
        flow = q_mcmf_match(cost, quality, origins, thresholds)
        _, want = brute_min_cost_max_matching(cost, mask)
        worst = max(worst, abs(flow.total_cost - want))
        assert abs(flow.total_cost - want) <= 1e-9
    print(f"PASS min-cost-among-max-flows: 500 instances, max diff {worst:.2e}")


def _adversarial_image(image_id: str, num_classes: int) -> ImageRecord:
    """One accurate prediction plus one far background prediction.

    Both targets must be matched by any exhaustive matcher, so the far
    prediction is forced onto a target it does not overlap at all.
    """
    on_scores = tuple(0.9 if k == 0 else 0.02 for k in range(num_classes))
    far_scores = tuple(0.05 for _ in range(num_classes))
    return ImageRecord(
        id=image_id,
        predictions=(
            Prediction(scores=on_scores, box=Box(0.2, 0.2, 0.15, 0.15)),
            Prediction(scores=far_scores, box=Box(0.8, 0.2, 0.1, 0.1)),
        ),
        targets=(
            Target(category_id=0, box=Box(0.2, 0.2, 0.15, 0.15), origin=Origin.OLD),
            Target(category_id=1, box=Box(0.8, 0.8, 0.15, 0.15), origin=Origin.NEW),
        ),
    )


def test_pruned_matcher_never_violates_origin_thresholds():
    rng = np.random.default_rng(5150)
    thresholds = PruneThresholds(0.7, 0.5)
    violations = 0
    forced_images = 0
    for k in range(200):
        base = rand_scenario(rng, num_images=3, num_classes=5)
        adv = _adversarial_image(f"adv{k}", num_classes=5)
        scenario = Scenario(num_classes=5, images=base.images + (adv,))

        for image in scenario.images:
            result = run_matcher(image, "qmcmf", thresholds=thresholds)
            for q, origin in zip(result.pair_qualities, result.pair_origins):
                if q < thresholds.for_origin(origin):
                    violations += 1

        hung = run_matcher(adv, "hungarian")
        assert len(hung.matching.pairs) == 2
        if min(hung.pair_qualities) < 0.5:
            forced_images += 1

    assert violations == 0
    assert forced_images == 200
    print(
        "PASS threshold-guarantee: 0 violations over 200 scenarios; "
        "hungarian forced a sub-0.5-IoU pair in 200/200 adversarial images"
    )


def test_noisy_new_targets_reproduce_foregrounding_gap():
    start = time.perf_counter()
    config = SynthConfig(seed=77, image_count=1000, noise_old=0.01, noise_new=0.25)
    scenario = generate_synthetic(config)
    hung = foregrounding_stats(scenario, "hungarian", iou_thresholds=(0.5, 0.7))
    flow = foregrounding_stats(scenario, "qmcmf", iou_thresholds=(0.5, 0.7))
    elapsed = time.perf_counter() - start

    rate_new = hung.rate(Origin.NEW, 0.7)
    rate_old = hung.rate(Origin.OLD, 0.7)
    assert rate_new > rate_old > 0.0
    # pruning caps matched-pair quality from below, so these are structural zeros
    assert flow.rate(Origin.OLD, 0.7) == 0.0
    assert flow.rate(Origin.OLD, 0.5) == 0.0
    assert flow.rate(Origin.NEW, 0.5) == 0.0
    assert elapsed < 30.0
    print(
        f"PASS foregrounding-gap: hungarian new={rate_new:.3f} > old={rate_old:.3f} > 0, "
        f"flow rates 0 at cutoffs, {elapsed:.1f}s for 1000 images"
    )


def test_total_loss_decomposes_exactly():
    rng = np.random.default_rng(700)
    for _ in range(100):
        image = rand_image(rng, num_classes=6, image_id="scene")
        weights = CostWeights(lambda_bg=float(rng.uniform(0.0, 3.0)))
        matching = hungarian_match(cost_matrix(image.predictions, image.targets, weights))
        total = total_loss(image.predictions, image.targets, matching, weights)
        parts = matched_loss(
            image.predictions, image.targets, matching, weights
        ) + weights.lambda_bg * background_loss(image.predictions, matching, weights)
        assert total == parts

    for _ in range(10):
        n = int(rng.integers(1, 5))
        targets = tuple(
            Target(category_id=int(rng.integers(0, 6)), box=rand_box(rng), origin=Origin.OLD)
            for _ in range(n)
        )
        predictions = tuple(
            Prediction(
                scores=tuple(1.0 if k == t.category_id else 0.0 for k in range(6)),
                box=t.box,
            )
            for t in targets
        )
        matching = hungarian_match(cost_matrix(predictions, targets))
        assert total_loss(predictions, targets, matching) == 0.0
    print("PASS loss-identity: exact decomposition on 100 scenes, perfect scenes cost 0")


def test_geometry_invariants_and_hand_derived_values():
    rng = np.random.default_rng(800)
    for _ in range(1000):
        a, b = rand_box(rng), rand_box(rng)
        i_ab, i_ba = iou(a, b), iou(b, a)
        g_ab, g_ba = giou(a, b), giou(b, a)
        assert 0.0 <= i_ab <= 1.0
        assert -1.0 <= g_ab <= 1.0
        assert g_ab <= i_ab + 1e-12
        assert abs(i_ab - i_ba) <= 1e-12
        assert abs(g_ab - g_ba) <= 1e-12
        assert abs(iou(a, a) - 1.0) <= 1e-12

        dx, dy = float(rng.uniform(-2, 2)), float(rng.uniform(-2, 2))
        a2 = Box(a.cx + dx, a.cy + dy, a.w, a.h)
        b2 = Box(b.cx + dx, b.cy + dy, b.w, b.h)
        assert abs(iou(a2, b2) - i_ab) <= 1e-12
        assert abs(giou(a2, b2) - g_ab) <= 1e-12

    assert abs(iou(Box(0.5, 0.5, 0.5, 0.5), Box(0.75, 0.5, 0.5, 0.5)) - 1 / 3) <= 1e-12
    assert abs(giou(Box(0.2, 0.5, 0.2, 0.2), Box(0.8, 0.5, 0.2, 0.2)) + 0.5) <= 1e-12
    assert abs(giou(Box(0.25, 0.5, 0.5, 1.0), Box(0.75, 0.5, 0.5, 1.0))) <= 1e-12
    print("PASS geometry: invariants on 1000 pairs and 3 hand-derived values within 1e-12")


def test_cli_outputs_are_byte_deterministic(tmp_path):
    paths = [tmp_path / f"s{k}.json" for k in range(2)]
    for p in paths:
        assert cli_run(["gen", "--seed", "42", "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()

    match_bytes = {}
    for matcher in ("hungarian", "qmcmf"):
        outs = [tmp_path / f"{matcher}{k}.jsonl" for k in range(2)]
        for out in outs:
            args = ["match", "--input", str(paths[0]), "--matcher", matcher, "--out", str(out)]
            assert cli_run(args) == 0
        match_bytes[matcher] = (outs[0].read_bytes(), outs[1].read_bytes())
        assert match_bytes[matcher][0] == match_bytes[matcher][1]
    print("PASS determinism: gen and match reruns byte-identical for both matchers")


def test_wire_protocol_matches_in_process_results():
    proc = subprocess.Popen(
        [sys.executable, "-m", "flowmatch.serve"],
        stdin=subprocess.PIPE,
        stdout=subprocess.PIPE,
    )

    def ask(payload: bytes):
        write_frame(proc.stdin, payload)
        proc.stdin.flush()
        frame = read_frame(proc.stdout)
        assert frame is not None
        return decode_response(frame)

    try:
        rng = np.random.default_rng(900)
        for _ in range(200):
            n_p = int(rng.integers(1, 8))
            n_q = int(rng.integers(1, 8))
            cost = rng.uniform(0.0, 10.0, size=n_p * n_q)
            quality = rng.uniform(0.0, 1.0, size=n_p * n_q)
            tags = [int(rng.integers(0, 2)) for _ in range(n_q)]

            remote = ask(encode_hungarian_request(n_p, n_q, cost))
            local = flat_hungarian(n_p, n_q, cost)
            assert remote.pred_indices == local.pred_indices
            assert remote.target_indices == local.target_indices
            assert abs(remote.total_cost - local.total_cost) <= 1e-12

            remote = ask(encode_qmcmf_request(n_p, n_q, cost, quality, tags, 0.7, 0.5))
            local = flat_q_mcmf(n_p, n_q, cost, quality, tags, 0.7, 0.5)
            assert remote.pred_indices == local.pred_indices
            assert remote.target_indices == local.target_indices
            assert abs(remote.total_cost - local.total_cost) <= 1e-12

        # malformed request surfaces as an exception and leaves the server up
        good = encode_qmcmf_request(1, 1, [0.0], [0.9], [0], 0.7, 0.5)
        bad = good[:-16] + struct.pack("<dd", 4.0, 0.5)
        with pytest.raises(RemoteMatcherError):
            ask(bad)
        assert proc.poll() is None
        assert ask(encode_hungarian_request(1, 1, [2.5])).total_cost == 2.5

        proc.stdin.close()
        assert proc.wait(timeout=10) == 0
    finally:
        if proc.poll() is None:
            proc.kill()
        proc.stdout.close()
    print("PASS wire-protocol: 200 instances exact over the pipe, error paths survive")
