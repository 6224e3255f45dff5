"""Command-line pipeline: feature extraction, training, evaluation, reports.

Commands:
  extract   texture features for a directory of labeled images -> CSV
  train     fit a classifier on a feature CSV -> model JSON
  eval      cross-validate one classifier on a feature CSV -> report
  compare   cross-validate several classifiers, optionally with the
            published reference rows appended
  predict   classify one image with a saved model

Mask files use 0 for outside the region of interest, nonzero for inside.
Labels come from a manifest CSV with header "id,label" where the id is
the image filename without extension and the label is "normal" or
"finding". Exit codes: 0 success, 1 some images were skipped, 2 invalid
configuration or input. THERMOCAD_LOG sets the log level (e.g. DEBUG).
"""

import argparse
import concurrent.futures
import json
import logging
import os
import sys
from pathlib import Path

from .classify import ClassifierConfig, KernelConfig, load_model, predict, save_model
from .data import LABELS, NORMAL
from .errors import ThermocadError
from .evaluation import cross_validate
from .imgio import DEFAULT_LEVELS, load_image, load_mask
from .report import (
    FeatureTable,
    read_features,
    render_comparison,
    rows_to_csv,
    write_features,
)
from .texture import DEFAULT_OFFSET, Offset, extract_features

log = logging.getLogger(__name__)

_IMAGE_SUFFIXES = (".pgm", ".png")

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_USAGE = 2


def _offset_arg(text: str) -> Offset:
    try:
        dx, dy = (int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"offset must look like 'DX,DY', got {text!r}"
        ) from None
    if (dx, dy) == (0, 0):
        raise argparse.ArgumentTypeError("offset 0,0 is not a displacement")
    return Offset(dx, dy)


def _add_extraction_flags(parser):
    parser.add_argument(
        "--offset", type=_offset_arg, default=DEFAULT_OFFSET, metavar="DX,DY",
        help="co-occurrence partner displacement (default 0,1: next row)",
    )
    parser.add_argument(
        "--levels", type=int, default=DEFAULT_LEVELS, metavar="N",
        help="gray-level count after quantization (default 256)",
    )


def _add_classifier_flags(parser, multi: bool):
    if multi:
        parser.add_argument(
            "--classifier", action="append", choices=("smo", "nb"), default=[],
            help="classifier to evaluate; repeat the flag to compare several",
        )
    else:
        parser.add_argument(
            "--classifier", choices=("smo", "nb"), default="smo",
            help="classifier to use (default smo)",
        )
    parser.add_argument("--c", type=float, default=1.0,
                        help="SVM box constraint (default 1.0)")
    parser.add_argument("--kernel", choices=("poly", "rbf"), default="poly",
                        help="SVM kernel (default poly)")
    parser.add_argument("--degree", type=int, default=1,
                        help="polynomial kernel degree (default 1)")
    parser.add_argument("--gamma", type=float, default=1.0,
                        help="rbf kernel gamma (default 1.0)")


def _classifier_config(args, kind: str) -> ClassifierConfig:
    kernel = KernelConfig(kind=args.kernel, degree=args.degree, gamma=args.gamma)
    return ClassifierConfig(kind=kind, c=args.c, kernel=kernel)


def _read_manifest(path) -> dict:
    import csv

    labels = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["id", "label"]:
            raise ValueError(
                f"{path}: manifest header must be 'id,label', found {header}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: expected 2 cells, got {len(row)}")
            sid, label = row[0].strip(), row[1].strip()
            if label not in LABELS:
                raise ValueError(
                    f"{path}:{lineno}: unknown label {label!r}; expected one of {LABELS}"
                )
            if sid in labels:
                raise ValueError(f"{path}:{lineno}: duplicate id {sid!r}")
            labels[sid] = label
    return labels


def _find_mask(masks_dir: Path, stem: str):
    for suffix in _IMAGE_SUFFIXES:
        candidate = masks_dir / (stem + suffix)
        if candidate.exists():
            return candidate
    return None


def _extract_one(path: Path, manifest, masks_dir, levels, offset):
    sid = path.stem
    if sid not in manifest:
        raise ValueError(f"no label in manifest for image {sid!r}")
    image = load_image(path, levels)
    if masks_dir is not None:
        mask_path = _find_mask(masks_dir, sid)
        if mask_path is None:
            raise ValueError(f"no mask file for image {sid!r} in {masks_dir}")
        image = load_mask(mask_path, image)
    return extract_features(image, offset, sid, manifest[sid])


def cmd_extract(args) -> int:
    images_dir = Path(args.images)
    if not images_dir.is_dir():
        raise ValueError(f"images directory {images_dir} does not exist")
    masks_dir = Path(args.masks) if args.masks else None
    if masks_dir is not None and not masks_dir.is_dir():
        raise ValueError(f"masks directory {masks_dir} does not exist")
    paths = sorted(
        (p for p in images_dir.iterdir() if p.suffix.lower() in _IMAGE_SUFFIXES),
        key=lambda p: p.stem,
    )
    if not paths:
        raise ValueError(f"no .pgm/.png images found in {images_dir}")
    manifest = _read_manifest(args.manifest)

    def work(path):
        try:
            fv = _extract_one(path, manifest, masks_dir, args.levels, args.offset)
            return path.stem, fv, None
        except (ThermocadError, ValueError, OSError) as exc:
            return path.stem, None, str(exc)

    if args.jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(work, paths))
    else:
        outcomes = [work(p) for p in paths]

    rows, failures = [], []
    for sid, fv, error in outcomes:
        if error is None:
            rows.append(fv)
        else:
            failures.append(sid)
            print(f"skipped {sid}: {error}", file=sys.stderr)

    rows.sort(key=lambda fv: fv.id)
    write_features(FeatureTable(tuple(rows)), args.out)
    log.info("wrote %d feature rows to %s", len(rows), args.out)
    if failures:
        print(
            f"{len(failures)} image(s) skipped: {', '.join(failures)}",
            file=sys.stderr,
        )
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_train(args) -> int:
    ds = read_features(args.features).to_dataset()
    config = _classifier_config(args, args.classifier)
    model = config.fit(ds, seed=args.seed)
    save_model(model, args.out)
    print(f"saved {config.name} model trained on {len(ds)} samples to {args.out}")
    return EXIT_OK


def _eval_one(args, kind: str):
    ds = read_features(args.features).to_dataset()
    config = _classifier_config(args, kind)
    report = cross_validate(ds, args.k, args.seed, config)
    return config, report


def _report_document(config, args, report) -> dict:
    return {
        "format": "thermocad-eval",
        "version": 1,
        "classifier": config.name,
        "kind": config.kind,
        "k": args.k,
        "seed": args.seed,
        **report.to_dict(),
    }


def cmd_eval(args) -> int:
    config, report = _eval_one(args, args.classifier)
    if args.out:
        Path(args.out).write_text(
            json.dumps(_report_document(config, args, report), indent=2) + "\n"
        )
    text, _ = render_comparison([(config.name, report)])
    print(text, end="")
    return EXIT_OK


def cmd_compare(args) -> int:
    if not args.classifier:
        raise ValueError("no classifiers specified; pass --classifier at least once")
    pairs = []
    for kind in args.classifier:
        config, report = _eval_one(args, kind)
        pairs.append((config.name, report))
    text, rows = render_comparison(pairs, include_reference=args.with_paper_results)
    print(text, end="")
    if args.out:
        Path(args.out).write_text(json.dumps(rows, indent=2) + "\n")
    if args.out_csv:
        Path(args.out_csv).write_text(rows_to_csv(rows))
    return EXIT_OK


def cmd_predict(args) -> int:
    model = load_model(args.model)
    image_path = Path(args.image)
    image = load_image(image_path, args.levels)
    if args.mask:
        image = load_mask(args.mask, image)
    features = extract_features(image, args.offset, image_path.stem, NORMAL)
    label, score = predict(model, features)
    print(json.dumps({"id": image_path.stem, "label": label, "score": score}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermocad",
        description=(
            "Texture-feature extraction and classification for masked "
            "grayscale thermograms."
        ),
        epilog=(
            "Masks: 0 = outside the ROI, nonzero = inside. Exit codes: "
            "0 ok, 1 some images skipped, 2 bad configuration or input. "
            "Set THERMOCAD_LOG=DEBUG for verbose logging."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract feature vectors into a CSV")
    p.add_argument("--images", required=True, help="directory of .pgm/.png images")
    p.add_argument("--masks", help="directory of ROI masks named like the images")
    p.add_argument("--manifest", required=True,
                   help="CSV with header id,label mapping image stems to classes")
    _add_extraction_flags(p)
    p.add_argument("--jobs", type=int, default=1, help="parallel workers (default 1)")
    p.add_argument("--out", required=True, help="output feature CSV path")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="train a classifier on a feature CSV")
    p.add_argument("--features", required=True, help="input feature CSV")
    _add_classifier_flags(p, multi=False)
    p.add_argument("--seed", type=int, default=1, help="random seed (default 1)")
    p.add_argument("--out", required=True, help="output model JSON path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="cross-validate one classifier")
    p.add_argument("--features", required=True, help="input feature CSV")
    _add_classifier_flags(p, multi=False)
    p.add_argument("--k", type=int, default=7,
                   help="fold count; k equal to the sample count is leave-one-out")
    p.add_argument("--seed", type=int, default=1, help="random seed (default 1)")
    p.add_argument("--out", help="output report JSON path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="cross-validate several classifiers")
    p.add_argument("--features", required=True, help="input feature CSV")
    _add_classifier_flags(p, multi=True)
    p.add_argument("--k", type=int, default=7, help="fold count (default 7)")
    p.add_argument("--seed", type=int, default=1, help="random seed (default 1)")
    p.add_argument("--with-paper-results", action="store_true",
                   help="append the published reference rows to the table")
    p.add_argument("--out", help="output JSON path for the table rows")
    p.add_argument("--out-csv", help="output CSV path for the table rows")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("predict", help="classify one image with a saved model")
    p.add_argument("--model", required=True, help="model JSON from 'train'")
    p.add_argument("--image", required=True, help="image to classify")
    p.add_argument("--mask", help="optional ROI mask for the image")
    _add_extraction_flags(p)
    p.set_defaults(func=cmd_predict)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("THERMOCAD_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ThermocadError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
