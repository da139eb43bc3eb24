"""Command-line front end.

Subcommands: ``gen`` synthesizes a scenario, ``match`` runs one matcher and
writes JSONL, ``compare`` runs both matchers and writes a joined CSV (plus a
figure) with a summary on stdout, ``stats`` does the same for a single
matcher, and ``coco-import`` converts COCO ground truth and detections into
the scenario format.

Exit codes: 0 on success, 1 for data problems (unreadable files, malformed
scenarios, domain violations), 2 for usage errors.  Results go to files,
diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import sys
from collections.abc import Sequence
from pathlib import Path

from .coco import from_coco
from .cost import CostWeights, Origin
from .errors import FlowmatchError
from .qmcmf import PruneThresholds
from .report import save_report_figure
from .scenario import SynthConfig, generate_synthetic, load_scenario, save_scenario
from .stats import (
    DEFAULT_IOU_THRESHOLDS,
    MATCHER_NAMES,
    StatsReport,
    foregrounding_stats,
    jsonl_record,
    match_scenario,
    stats_csv,
)

__all__ = ["build_parser", "run", "main"]


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _nonneg_float(text: str) -> float:
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _unit_float(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {value}")
    return value


def _threshold_list(text: str) -> tuple[float, ...]:
    try:
        values = tuple(_unit_float(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad threshold list {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("need at least one threshold")
    return values


def _id_list(text: str) -> tuple[int, ...]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad id list {text!r}")


def _add_weight_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("cost weights")
    group.add_argument("--lambda-focal", type=_nonneg_float, default=2.0,
                       help="classification term weight (default 2.0)")
    group.add_argument("--lambda-l1", type=_nonneg_float, default=5.0,
                       help="box L1 term weight (default 5.0)")
    group.add_argument("--lambda-giou", type=_nonneg_float, default=2.0,
                       help="generalized IoU term weight (default 2.0)")
    group.add_argument("--lambda-bg", type=_nonneg_float, default=1.0,
                       help="background loss weight (default 1.0)")
    group.add_argument("--gamma", type=_nonneg_float, default=2.0,
                       help="focal exponent (default 2.0)")
    group.add_argument("--alpha-focal", type=float, default=0.25,
                       help="focal class balance in (0, 1) (default 0.25)")


def _weights_from(ns: argparse.Namespace) -> CostWeights:
    return CostWeights(
        lambda_focal=ns.lambda_focal,
        lambda_l1=ns.lambda_l1,
        lambda_giou=ns.lambda_giou,
        lambda_bg=ns.lambda_bg,
        gamma=ns.gamma,
        alpha_focal=ns.alpha_focal,
    )


def _add_prune_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=_unit_float, default=0.7,
                        help="quality cutoff for old-origin targets (default 0.7)")
    parser.add_argument("--beta", type=_unit_float, default=0.5,
                        help="quality cutoff for new-origin targets (default 0.5)")


def _add_plot_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--plot", type=Path, default=None, metavar="PATH",
                        help="figure path (default: CSV path with .png suffix)")
    parser.add_argument("--no-plot", action="store_true",
                        help="skip figure rendering")


def _read_bytes(path: Path) -> bytes:
    return Path(path).read_bytes()


def _write_reports(
    reports: list[StatsReport], ns: argparse.Namespace
) -> None:
    csv_path = Path(ns.out_csv)
    csv_path.write_text(stats_csv(reports), encoding="utf-8")
    if not ns.no_plot:
        figure_path = ns.plot if ns.plot is not None else csv_path.with_suffix(".png")
        save_report_figure(reports, figure_path)


def _summary_lines(reports: list[StatsReport], thresholds: tuple[float, ...]) -> list[str]:
    lines = [f"{'matcher':<12}{'matched':>9}{'unmatched':>11}{'loss':>14}"]
    for r in reports:
        lines.append(
            f"{r.matcher:<12}{r.matched_targets:>9}{r.unmatched_targets:>11}"
            f"{r.total_loss:>14.6g}"
        )
    for t in sorted(set(thresholds)):
        for r in reports:
            old = r.rate(Origin.OLD, t)
            new = r.rate(Origin.NEW, t)
            lines.append(
                f"rate below {t:.6g}: {r.matcher} old={old:.6g} new={new:.6g}"
            )
    return lines


def _cmd_gen(ns: argparse.Namespace) -> int:
    config = SynthConfig(
        seed=ns.seed,
        image_count=ns.images,
        targets_per_image=(ns.min_targets, ns.max_targets),
        clutter_per_image=ns.clutter,
        noise_old=ns.noise_old,
        noise_new=ns.noise_new,
        old_fraction=ns.old_fraction,
        num_classes=ns.classes,
    )
    Path(ns.out).write_bytes(save_scenario(generate_synthetic(config)))
    return 0


def _cmd_match(ns: argparse.Namespace) -> int:
    scenario = load_scenario(_read_bytes(ns.input))
    results = match_scenario(
        scenario,
        ns.matcher,
        weights=_weights_from(ns),
        thresholds=PruneThresholds(alpha=ns.alpha, beta=ns.beta),
        jobs=ns.jobs,
    )
    with open(ns.out, "w", encoding="utf-8") as fh:
        for r in results:
            fh.write(jsonl_record(r) + "\n")
    return 0


def _run_reports(ns: argparse.Namespace, matchers: Sequence[str]) -> list[StatsReport]:
    scenario = load_scenario(_read_bytes(ns.input))
    weights = _weights_from(ns)
    thresholds = PruneThresholds(alpha=ns.alpha, beta=ns.beta)
    return [
        foregrounding_stats(
            scenario,
            name,
            iou_thresholds=ns.iou_thresholds,
            weights=weights,
            thresholds=thresholds,
            jobs=ns.jobs,
        )
        for name in matchers
    ]


def _cmd_compare(ns: argparse.Namespace) -> int:
    reports = _run_reports(ns, MATCHER_NAMES)
    _write_reports(reports, ns)
    for line in _summary_lines(reports, ns.iou_thresholds):
        print(line)
    return 0


def _cmd_stats(ns: argparse.Namespace) -> int:
    reports = _run_reports(ns, [ns.matcher])
    _write_reports(reports, ns)
    return 0


def _cmd_coco_import(ns: argparse.Namespace) -> int:
    imported = from_coco(
        _read_bytes(ns.gt), _read_bytes(ns.det), ns.old_categories
    )
    Path(ns.out).write_bytes(save_scenario(imported.scenario))
    if ns.category_map_out is not None:
        import json

        Path(ns.category_map_out).write_text(
            json.dumps(
                {str(k): v for k, v in sorted(imported.category_map.items())},
                indent=2,
            )
            + "\n",
            encoding="utf-8",
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowmatch",
        description="Label-assignment matchers and foregrounding reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic scenario")
    gen.add_argument("--seed", type=_nonneg_int, required=True,
                     help="generator seed (required so runs are reproducible)")
    gen.add_argument("--images", type=_nonneg_int, default=100)
    gen.add_argument("--min-targets", type=_nonneg_int, default=1)
    gen.add_argument("--max-targets", type=_nonneg_int, default=6)
    gen.add_argument("--clutter", type=_nonneg_int, default=2,
                     help="extra low-score predictions per image")
    gen.add_argument("--noise-old", type=_nonneg_float, default=0.02,
                     help="box jitter sigma for old-origin targets")
    gen.add_argument("--noise-new", type=_nonneg_float, default=0.12,
                     help="box jitter sigma for new-origin targets")
    gen.add_argument("--old-fraction", type=_unit_float, default=0.5)
    gen.add_argument("--classes", type=_positive_int, default=8)
    gen.add_argument("--out", type=Path, required=True)
    gen.set_defaults(func=_cmd_gen)

    match = sub.add_parser("match", help="run one matcher, write JSONL results")
    match.add_argument("--input", type=Path, required=True)
    match.add_argument("--matcher", choices=MATCHER_NAMES, required=True)
    _add_prune_flags(match)
    _add_weight_flags(match)
    match.add_argument("--jobs", type=_positive_int, default=1)
    match.add_argument("--out", type=Path, required=True)
    match.set_defaults(func=_cmd_match)

    compare = sub.add_parser(
        "compare", help="run both matchers, write CSV + figure, print a summary"
    )
    compare.add_argument("--input", type=Path, required=True)
    _add_prune_flags(compare)
    _add_weight_flags(compare)
    compare.add_argument("--iou-thresholds", type=_threshold_list,
                         default=DEFAULT_IOU_THRESHOLDS, metavar="T1,T2,...")
    compare.add_argument("--jobs", type=_positive_int, default=1)
    compare.add_argument("--out-csv", type=Path, required=True)
    _add_plot_flags(compare)
    compare.set_defaults(func=_cmd_compare)

    stats = sub.add_parser("stats", help="foregrounding rates for one matcher")
    stats.add_argument("--input", type=Path, required=True)
    stats.add_argument("--matcher", choices=MATCHER_NAMES, required=True)
    _add_prune_flags(stats)
    _add_weight_flags(stats)
    stats.add_argument("--iou-thresholds", type=_threshold_list,
                       default=DEFAULT_IOU_THRESHOLDS, metavar="T1,T2,...")
    stats.add_argument("--jobs", type=_positive_int, default=1)
    stats.add_argument("--out-csv", type=Path, required=True)
    _add_plot_flags(stats)
    stats.set_defaults(func=_cmd_stats)

    coco = sub.add_parser(
        "coco-import", help="convert COCO ground truth + detections to a scenario"
    )
    coco.add_argument("--gt", type=Path, required=True,
                      help="COCO instances JSON (images, annotations, categories)")
    coco.add_argument("--det", type=Path, required=True,
                      help="COCO detection results JSON (a list)")
    coco.add_argument("--old-categories", type=_id_list, default=(),
                      metavar="ID1,ID2,...",
                      help="original category ids to tag as old (default: none)")
    coco.add_argument("--out", type=Path, required=True)
    coco.add_argument("--category-map-out", type=Path, default=None,
                      help="also write the original-to-contiguous id map as JSON")
    coco.set_defaults(func=_cmd_coco_import)

    return parser


def run(argv: Sequence[str] | None = None) -> int:
    """Parse arguments and execute; returns the process exit code."""
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return ns.func(ns)
    except FlowmatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
