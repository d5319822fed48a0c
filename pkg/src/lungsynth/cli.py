"""Command-line interface: one executable, one subcommand per pipeline stage.

Machine-readable results go to stdout as JSON (or to files); diagnostics
go to stderr. Exit codes: 0 success, 1 data error, 2 usage error. With
``--strict``, any per-file error in a batch also exits 1.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dataio import load_config, scan_inputs, validate_manifest
from .errors import LungSynthError
from .fileio import load_image, load_mask, save_image, save_mask
from .image import normalize
from .losses import anomaly_map, binarize_error, total_loss
from .metrics import auc, average_precision, dice_score, image_score_from_map
from .segmentation import segment_lungs
from .synth import INPUT_PATTERNS, generate_dataset

log = logging.getLogger("lungsynth")

ENV_CONFIG = "LUNGSYNTH_CONFIG"


def _load_toolkit_config(args):
    path = args.config or os.environ.get(ENV_CONFIG)
    config = load_config(path)
    if getattr(args, "seed", None) is not None:
        config.synthesis.master_seed = args.seed
    return config


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2))


def _scan_images(directory) -> list[Path]:
    paths: list[Path] = []
    for pattern in INPUT_PATTERNS:
        paths.extend(scan_inputs(directory, pattern))
    return sorted(set(paths))


def cmd_segment(args) -> int:
    from .report import save_overlay

    config = _load_toolkit_config(args)
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    results = []
    errors = []
    for path in _scan_images(args.input):
        try:
            image = normalize(load_image(path), config.synthesis.normalize_lo,
                              config.synthesis.normalize_hi)
            trace: list | None = [] if args.trace else None
            masks = segment_lungs(image, config.synthesis.segmentation, trace=trace)
            mask_path = out_dir / f"{path.stem}_lung.png"
            save_mask(mask_path, masks.combined)
            if args.overlay:
                save_overlay(image, masks.combined, out_dir / f"{path.stem}_overlay.png")
            if trace is not None:
                (out_dir / f"{path.stem}_trace.json").write_text(
                    json.dumps(trace, indent=2), encoding="utf-8")
            results.append({"source": str(path), "lung_path": mask_path.name,
                            "lung_area": int(masks.combined.sum())})
        except Exception as exc:  # noqa: BLE001 - batch isolates per-file failures
            log.error("%s: %s", path, exc)
            errors.append({"source": str(path), "error": f"{type(exc).__name__}: {exc}"})
    _emit({"processed": len(results), "failed": len(errors),
           "results": results, "errors": errors})
    return 1 if (errors and args.strict) else 0


def cmd_synthesize(args) -> int:
    config = _load_toolkit_config(args)
    records = generate_dataset(args.input, args.output, config.synthesis,
                               jobs=args.jobs,
                               per_image_triplets=args.per_image_triplets,
                               dump_stages=args.dump_stages)
    n_err = sum(1 for r in records if r.status != "ok")
    for rec in records:
        if rec.status != "ok":
            log.error("%s: %s", rec.source, rec.error_msg)
    _emit({"inputs": len({r.source for r in records}),
           "triplets": len(records) - n_err, "failed": n_err,
           "manifest": str(Path(args.output) / "manifest.jsonl")})
    return 1 if (n_err and args.strict) else 0


def cmd_residual(args) -> int:
    config = _load_toolkit_config(args)
    tau = args.tau if args.tau is not None else config.loss.tau
    image = load_image(args.input)
    recon = load_image(args.recon)
    amap = anomaly_map(image, recon)
    mask = binarize_error(image, recon, tau)
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.input).stem
    map_path = out_dir / f"{stem}_anomap.png"
    mask_path = out_dir / f"{stem}_anomask.png"
    save_image(map_path, amap, bit_depth=8)
    save_mask(mask_path, mask)
    score = image_score_from_map(amap, config.metrics.reducer,
                                 config.metrics.top_k_fraction)
    _emit({"anomaly_map": str(map_path), "anomaly_mask": str(mask_path),
           "tau": tau, "mask_area": int(mask.sum()), "image_score": score})
    return 0


def _read_feature_csv(path) -> np.ndarray:
    text = Path(path).read_text(encoding="utf-8")
    values = [float(tok) for tok in text.replace(",", " ").split()]
    if not values:
        raise LungSynthError(f"no feature values in {path}")
    return np.asarray(values, dtype=np.float64)


def cmd_loss(args) -> int:
    config = _load_toolkit_config(args)
    tau = args.tau if args.tau is not None else config.loss.tau
    eps = args.eps if args.eps is not None else config.loss.eps
    if (args.feat_a is None) != (args.feat_b is None):
        raise LungSynthError("--feat-a and --feat-b must be given together")
    f_a = _read_feature_csv(args.feat_a) if args.feat_a else None
    f_b = _read_feature_csv(args.feat_b) if args.feat_b else None
    report = total_loss(load_image(args.norm), load_image(args.syn),
                        load_image(args.recon), load_mask(args.mask),
                        f_syn=f_a, f_norm=f_b, tau=tau, eps=eps)
    out = report.to_dict()
    out.update({"tau": tau, "eps": eps})
    _emit(out)
    return 0


def _read_scores_csv(path) -> tuple[np.ndarray, np.ndarray]:
    scores, labels = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or not "".join(row).strip():
                continue
            try:
                scores.append(float(row[0]))
                labels.append(int(row[1]))
            except (ValueError, IndexError):
                if i == 0:
                    continue  # header line
                raise LungSynthError(f"{path}: bad score row {i + 1}: {row}")
    if not scores:
        raise LungSynthError(f"{path}: no score rows")
    return np.asarray(scores), np.asarray(labels)


def cmd_eval_image(args) -> int:
    scores, labels = _read_scores_csv(args.scores)
    auc_value = auc(scores, labels)
    ap_value = average_precision(scores, labels)
    result = {"auc": auc_value, "ap": ap_value, "n": int(scores.size),
              "positives": int(labels.sum())}
    if args.report:
        from .report import save_pr_figure, save_roc_figure

        report_dir = Path(args.report)
        report_dir.mkdir(parents=True, exist_ok=True)
        save_roc_figure(scores, labels, report_dir / "roc.png", auc_value)
        save_pr_figure(scores, labels, report_dir / "pr.png", ap_value)
        with (report_dir / "summary.csv").open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["metric", "value"])
            writer.writerow(["auc", repr(auc_value)])
            writer.writerow(["ap", repr(ap_value)])
        result["report"] = str(report_dir)
    _emit(result)
    return 0


def cmd_eval_pixel(args) -> int:
    pred_paths = {p.stem: p for p in _scan_images(args.pred)}
    gt_paths = {p.stem: p for p in _scan_images(args.gt)}
    per_image = []
    errors = []
    for stem in sorted(set(pred_paths) | set(gt_paths)):
        if stem not in pred_paths or stem not in gt_paths:
            side = "prediction" if stem not in pred_paths else "ground truth"
            errors.append({"stem": stem, "error": f"missing {side}"})
            continue
        try:
            value = dice_score(load_mask(pred_paths[stem]), load_mask(gt_paths[stem]))
            per_image.append({"stem": stem, "dice": value})
        except Exception as exc:  # noqa: BLE001
            errors.append({"stem": stem, "error": f"{type(exc).__name__}: {exc}"})
    if not per_image:
        raise LungSynthError("no prediction/ground-truth pairs found")
    values = [item["dice"] for item in per_image]
    mean_dice = float(np.mean(values))
    result = {"per_image": per_image, "mean_dice": mean_dice,
              "images": len(per_image), "errors": errors}
    if args.report:
        from .report import save_dice_histogram

        report_dir = Path(args.report)
        report_dir.mkdir(parents=True, exist_ok=True)
        save_dice_histogram(values, report_dir / "dice_hist.png", mean_dice)
        with (report_dir / "dice_per_image.csv").open("w", newline="",
                                                      encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["stem", "dice"])
            for item in per_image:
                writer.writerow([item["stem"], repr(item["dice"])])
        result["report"] = str(report_dir)
    _emit(result)
    return 1 if (errors and args.strict) else 0


def cmd_validate_manifest(args) -> int:
    report = validate_manifest(args.manifest)
    _emit(report)
    return 1 if report["violations"] else 0


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="configuration file "
                     f"(default: ${ENV_CONFIG} if set, else built-in defaults)")
    sub.add_argument("--seed", type=int, help="override the master seed")
    sub.add_argument("--jobs", type=int, default=1,
                     help="parallel workers for batch commands (default 1)")
    sub.add_argument("--verbose", action="store_true",
                     help="chatty diagnostics on stderr")
    sub.add_argument("--strict", action="store_true",
                     help="exit nonzero if any per-file error occurred")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lungsynth",
        description="Lung-field segmentation and synthetic opacity generation "
                    "for chest radiographs.")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("segment", help="segment lung fields for a directory of images")
    p.add_argument("--input", required=True, help="directory of PNG/PGM images")
    p.add_argument("--output", required=True, help="directory for lung masks")
    p.add_argument("--overlay", action="store_true",
                   help="also write RGB previews with the mask boundary")
    p.add_argument("--trace", action="store_true",
                   help="also write per-threshold decision traces as JSON")
    _add_common(p)
    p.set_defaults(func=cmd_segment)

    p = subs.add_parser("synthesize", help="generate triplets and a manifest")
    p.add_argument("--input", required=True, help="directory of normal images")
    p.add_argument("--output", required=True, help="directory for triplets")
    p.add_argument("--per-image-triplets", type=int, default=1,
                   help="synthetic variants per input image (default 1)")
    p.add_argument("--dump-stages", action="store_true",
                   help="also write every intermediate layer as PNG")
    _add_common(p)
    p.set_defaults(func=cmd_synthesize)

    p = subs.add_parser("residual", help="anomaly map and mask from a reconstruction")
    p.add_argument("--input", required=True, help="image PNG")
    p.add_argument("--recon", required=True, help="reconstruction PNG")
    p.add_argument("--output", required=True, help="output directory")
    p.add_argument("--tau", type=float, help="binarization threshold on squared error")
    _add_common(p)
    p.set_defaults(func=cmd_residual)

    p = subs.add_parser("loss", help="evaluate the loss terms for one sample")
    p.add_argument("--norm", required=True, help="normal image PNG")
    p.add_argument("--syn", required=True, help="synthetic image PNG")
    p.add_argument("--recon", required=True, help="reconstruction PNG")
    p.add_argument("--mask", required=True, help="ground-truth anomaly mask PNG")
    p.add_argument("--tau", type=float, help="binarization threshold")
    p.add_argument("--eps", type=float, help="mask-area stabilizer")
    p.add_argument("--feat-a", help="CSV of synthetic-image feature values")
    p.add_argument("--feat-b", help="CSV of normal-image feature values")
    _add_common(p)
    p.set_defaults(func=cmd_loss)

    p = subs.add_parser("eval-image", help="AUC and AP from a score,label CSV")
    p.add_argument("--scores", required=True, help="CSV with 'score,label' rows")
    p.add_argument("--report", help="directory for ROC/PR figures and summary CSV")
    _add_common(p)
    p.set_defaults(func=cmd_eval_image)

    p = subs.add_parser("eval-pixel", help="per-image Dice between two mask directories")
    p.add_argument("--pred", required=True, help="directory of predicted masks")
    p.add_argument("--gt", required=True, help="directory of ground-truth masks")
    p.add_argument("--report", help="directory for the Dice histogram and CSV")
    _add_common(p)
    p.set_defaults(func=cmd_eval_pixel)

    p = subs.add_parser("validate-manifest", help="check a manifest's referential integrity")
    p.add_argument("--manifest", required=True, help="path to manifest.jsonl")
    _add_common(p)
    p.set_defaults(func=cmd_validate_manifest)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(message)s",
                        level=logging.DEBUG if args.verbose else logging.WARNING,
                        force=True)
    try:
        return args.func(args)
    except LungSynthError as exc:
        log.error("%s", exc)
        return 1
    except OSError as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
