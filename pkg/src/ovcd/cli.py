"""Command-line interface: run pipelines over pairs and score the outputs.

`ovcd run` writes, per pair, a uint8 class-map PNG and a JSON instance file.
Multi-class vocabularies run once per class (the other classes join the
background phrases) and the per-class maps merge with earlier classes
winning conflicts.  Pairs are independent, so results are byte-identical for
any worker count.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Sequence

import numpy as np

from .components import available_backends
from .config import load_config
from .dataset import (
    PairPaths,
    discover_pairs,
    load_class_map,
    load_pair,
    read_manifest,
    save_class_map,
)
from .errors import ConfigError, OvcdError
from .geometry import masks_to_set
from .imc import run_pipeline
from .metrics import ClassScores, aggregate, evaluate, micro_average
from .model import BiTemporalPair, ChangeResult, PipelineConfig, Vocabulary
from .serialization import save_instances
from .tiling import lift_instance, stitch, tile

log = logging.getLogger("ovcd")


def _single_class_vocab(vocabulary: Vocabulary, index: int) -> Vocabulary:
    target = vocabulary.foreground[index]
    others = tuple(c.name for i, c in enumerate(vocabulary.foreground) if i != index)
    return Vocabulary(
        foreground=(target,),
        background=vocabulary.background + others,
        templates=vocabulary.templates,
    )


def _run_flat(pair: BiTemporalPair, config: PipelineConfig, vocabulary: Vocabulary) -> ChangeResult:
    if len(vocabulary.foreground) == 1:
        return run_pipeline(pair, vocabulary, config)
    index = vocabulary.class_index()
    merged = np.zeros(pair.shape, dtype=np.uint8)
    instances = []
    conflicts = 0
    for i, cls in enumerate(vocabulary.foreground):
        result = run_pipeline(pair, _single_class_vocab(vocabulary, i), config)
        found = result.class_map != 0
        conflicts += int(np.count_nonzero(found & (merged != 0)))
        merged[found & (merged == 0)] = index[cls.name]
        instances.extend(result.instances)
    if conflicts:
        log.info("pair %s: %d pixels claimed by more than one class; first class kept",
                 pair.pair_id, conflicts)
    return ChangeResult(pair.pair_id, masks_to_set(instances, "final"), merged, index)


def run_pair(pair: BiTemporalPair, config: PipelineConfig, vocabulary: Vocabulary) -> ChangeResult:
    """Run the configured pipeline on one pair, tiling first if requested."""
    if config.tile_size is None:
        return _run_flat(pair, config, vocabulary)
    tiles, grid = tile(pair, config.tile_size)
    maps = []
    instances = []
    for tile_pair, (r, c) in tiles:
        result = _run_flat(tile_pair, config, vocabulary)
        maps.append((result.class_map, (r, c)))
        for inst in result.instances:
            lifted = lift_instance(inst, grid, r, c)
            if lifted is not None:
                instances.append(lifted)
    class_map = stitch(maps, grid)
    return ChangeResult(pair.pair_id, masks_to_set(instances, "final"),
                        class_map, vocabulary.class_index())


def _process_pair(paths: PairPaths, config: PipelineConfig, vocabulary: Vocabulary,
                  out_dir: Path) -> str:
    written: list[Path] = []
    try:
        pair = load_pair(paths)
        result = run_pair(pair, config, vocabulary)
        png = out_dir / f"{paths.pair_id}.png"
        save_class_map(png, result.class_map)
        written.append(png)
        js = out_dir / f"{paths.pair_id}.json"
        save_instances(js, result.instances, paths.pair_id)
        written.append(js)
        return paths.pair_id
    except BaseException:
        # Never leave a half-written pair behind.
        for p in written:
            p.unlink(missing_ok=True)
        raise


def _pairs_from_dirs(d1: Path, d2: Path) -> list[PairPaths]:
    out = []
    for p1 in sorted(d1.iterdir()):
        if not p1.is_file():
            continue
        p2 = d2 / p1.name
        if not p2.is_file():
            raise OvcdError(f"no second-temporal file for {p1.name} in {d2}")
        out.append(PairPaths(p1.stem, p1, p2))
    if not out:
        raise OvcdError(f"no files found in {d1}")
    return out


def _collect_pairs(args: argparse.Namespace) -> list[PairPaths]:
    if args.t1 or args.t2:
        if not (args.t1 and args.t2):
            raise OvcdError("--t1 and --t2 must be given together")
        p1, p2 = Path(args.t1), Path(args.t2)
        if p1.is_dir() != p2.is_dir():
            raise OvcdError("--t1 and --t2 must both be files or both be directories")
        if p1.is_dir():
            return _pairs_from_dirs(p1, p2)
        return [PairPaths(args.pair_id or p1.stem, p1, p2)]
    if args.manifest:
        return read_manifest(args.manifest)
    if args.data:
        return discover_pairs(args.data)
    raise OvcdError("give either --t1/--t2, --data, or --manifest")


def _cmd_run(args: argparse.Namespace) -> int:
    config, vocabulary = load_config(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    pairs = _collect_pairs(args)
    ids = [p.pair_id for p in pairs]
    if len(set(ids)) != len(ids):
        raise OvcdError(f"duplicate pair ids: {sorted(ids)}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        futures = [pool.submit(_process_pair, p, config, vocabulary, out_dir) for p in pairs]
        for future in futures:
            log.info("finished pair %s", future.result())
    print(f"wrote {len(pairs)} pair(s) to {out_dir}")
    return 0


def _format_report(table: Sequence[ClassScores], pairs: int) -> str:
    micro = micro_average(table)
    width = max(len("class"), len(micro.class_name), *(len(s.class_name) for s in table))
    lines = [f"{'class':<{width}}  {'IoU%':>6}  {'F1%':>6}"]
    for scores in table:
        if scores.absent:
            lines.append(f"{scores.class_name:<{width}}  {'-':>6}  {'-':>6}")
        else:
            lines.append(
                f"{scores.class_name:<{width}}  {100 * scores.iou:>6.1f}  {100 * scores.f1:>6.1f}"
            )
    lines.append(f"{micro.class_name:<{width}}  {100 * micro.iou:>6.1f}  {100 * micro.f1:>6.1f}")
    lines.append(f"pairs evaluated: {pairs}")
    return "\n".join(lines)


def _cmd_eval(args: argparse.Namespace) -> int:
    classes = [c.strip() for c in args.classes.split(",") if c.strip()]
    if not classes:
        raise OvcdError("--classes must name at least one class")
    pred_dir = Path(args.pred)
    gt_dir = Path(args.gt)
    preds = sorted(pred_dir.glob("*.png"))
    if not preds:
        raise OvcdError(f"no .png predictions in {pred_dir}")
    tables = []
    for pred_path in preds:
        gt_path = gt_dir / pred_path.name
        if not gt_path.is_file():
            raise OvcdError(f"no ground truth for {pred_path.name} in {gt_dir}")
        tables.append(evaluate(load_class_map(pred_path), load_class_map(gt_path), classes))
    total = aggregate(tables)
    report = _format_report(total, len(tables))
    print(report)
    out_dir = Path(args.out) if args.out else pred_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "eval_report.txt").write_text(report + "\n")
    micro = micro_average(total)
    doc = {
        "pairs": len(tables),
        "classes": {
            s.class_name: {"tp": s.tp, "fp": s.fp, "fn": s.fn,
                           "iou": s.iou, "f1": s.f1, "absent": s.absent}
            for s in total
        },
        "micro": {"tp": micro.tp, "fp": micro.fp, "fn": micro.fn,
                  "iou": micro.iou, "f1": micro.f1},
    }
    (out_dir / "eval_report.json").write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return 0


def _cmd_list_backends(args: argparse.Namespace) -> int:
    for name in available_backends():
        print(name)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ovcd",
        description="Open-vocabulary change detection on bi-temporal image pairs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a pipeline and write class maps + instances")
    run.add_argument("--config", required=True, help="JSON config file")
    run.add_argument("--t1", help="first-temporal image file or directory (with --t2)")
    run.add_argument("--t2", help="second-temporal image file or directory (with --t1)")
    run.add_argument("--pair-id", help="identifier for a single --t1/--t2 file pair")
    run.add_argument("--data", help="dataset root with A/, B/ (and optional label/)")
    run.add_argument("--manifest", help="JSON manifest of pairs")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--seed", type=int, help="override the config seed")
    run.add_argument("--workers", type=int, default=1, help="parallel pair workers")
    run.set_defaults(func=_cmd_run)

    ev = sub.add_parser("eval", help="score predicted class maps against ground truth")
    ev.add_argument("--pred", required=True, help="directory of predicted .png maps")
    ev.add_argument("--gt", required=True, help="directory of ground-truth .png maps")
    ev.add_argument("--classes", required=True, help="comma-separated class names, id order")
    ev.add_argument("--out", help="report directory (default: --pred)")
    ev.set_defaults(func=_cmd_eval)

    lb = sub.add_parser("list-backends", help="list registered component backends")
    lb.set_defaults(func=_cmd_list_backends)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OvcdError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
