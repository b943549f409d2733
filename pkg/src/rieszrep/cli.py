"""Command-line entry point: extract, bbox, train, eval, verify, bench.

Configuration is a flat ``key = value`` text file; command-line flags
override file values.  ``--print-config`` emits the fully resolved
configuration.  Relative dataset paths are resolved against the
``RIESZ_DATA_DIR`` environment variable when it is set.

Exit codes: 0 success, 1 property/eval failure or runtime error,
2 configuration error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import classify, verify
from .image_core import load_gray_image, load_idx, save_gray_pgm
from .preprocess import BlankImageError, bbox_compute, bbox_extract
from .representation import (
    RieszConfig,
    extract_features,
    feature_paths,
    read_features_csv,
    write_features_csv,
)

log = logging.getLogger("riesz")

# key -> (parser, default); config files and flags share this schema
_SCHEMA = {
    "depth": (int, 3),
    "angles": (int, 4),
    "scale_constant": (float, 1.0),
    "pooling": (str, "mean"),
    "presmooth_sigma": (float, None),
    "seed": (int, 0),
    "images": (str, None),
    "labels": (str, None),
    "image_dir": (str, None),
    "manifest": (str, None),
    "limit": (int, None),
    "bbox": (lambda v: str(v).lower() in ("1", "true", "yes"), False),
    "pad": (int, 50),
    "threshold": (float, 0.5),
    "enlarge": (float, 0.4),
    "classifier": (str, "svm"),
    "components": (int, 20),
    "reg": (float, 1e-4),
    "epochs": (int, 50),
    "features": (str, None),
    "model": (str, None),
    "output": (str, None),
    "out_dir": (str, None),
    "jobs": (int, 1),
}


class ConfigError(ValueError):
    pass


def load_config_file(path) -> dict:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in _SCHEMA:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            parser = _SCHEMA[key][0]
            try:
                values[key] = parser(value)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}")
    return values


def resolve_config(args) -> dict:
    config = {key: default for key, (_, default) in _SCHEMA.items()}
    if getattr(args, "config", None):
        config.update(load_config_file(args.config))
    for key in _SCHEMA:
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value
    return config


def data_path(value) -> Path:
    path = Path(value)
    root = os.environ.get("RIESZ_DATA_DIR")
    if root and not path.is_absolute():
        return Path(root) / path
    return path


def riesz_config(config) -> RieszConfig:
    try:
        return RieszConfig(
            depth=config["depth"],
            angles=config["angles"],
            scale_constant=config["scale_constant"],
            pooling=config["pooling"],
            presmooth_sigma=config["presmooth_sigma"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc))


def load_input_images(config):
    """Images plus optional labels from an IDX pair or an image directory."""
    if config["images"]:
        if not config["labels"]:
            raise ConfigError("'images' requires 'labels' (IDX pair)")
        ds = load_idx(data_path(config["images"]), data_path(config["labels"]))
        images, labels = ds.images, ds.labels
    elif config["image_dir"]:
        directory = data_path(config["image_dir"])
        files = sorted(
            p
            for p in directory.iterdir()
            if p.suffix.lower() in (".pgm", ".pnm", ".txt")
        )
        if not files:
            raise ConfigError(f"no graymap or matrix files in {directory}")
        images = [load_gray_image(p) for p in files]
        labels = None
    else:
        raise ConfigError("either 'images'+'labels' or 'image_dir' is required")
    limit = config["limit"]
    if limit is not None:
        images = images[:limit]
        labels = labels[:limit] if labels is not None else None
    return images, labels


def extract_matrix(images, config):
    """Feature matrix for a list of images; flagged rows are all-NaN.

    Per-image bounding-box failures are logged with the image index and
    the run continues.
    """
    cfg = riesz_config(config)
    count = sum(cfg.angles**k for k in range(cfg.depth + 1))

    def one(item):
        index, img = item
        try:
            if config["bbox"]:
                img = bbox_extract(
                    img,
                    pad=config["pad"],
                    threshold=config["threshold"],
                    enlarge=config["enlarge"],
                )
            return extract_features(img, cfg)
        except BlankImageError as exc:
            log.warning("image %d flagged: %s", index, exc)
            return np.full(count, np.nan)

    jobs = config["jobs"]
    items = list(enumerate(images))
    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(one, items))  # map preserves input order
    else:
        rows = [one(item) for item in items]
    return np.array(rows)


def cmd_extract(config) -> int:
    if not config["output"]:
        raise ConfigError("extract requires 'output'")
    images, labels = load_input_images(config)
    matrix = extract_matrix(images, config)
    cfg = riesz_config(config)
    write_features_csv(
        config["output"], matrix, feature_paths(cfg.depth, cfg.angles), labels
    )
    log.info("wrote %d rows x %d features to %s", *matrix.shape, config["output"])
    return 0


def cmd_bbox(config) -> int:
    if not config["out_dir"]:
        raise ConfigError("bbox requires 'out_dir'")
    images, _ = load_input_images(config)
    out_dir = Path(config["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, img in enumerate(images):
        try:
            padded, tight, box = bbox_compute(
                img,
                pad=config["pad"],
                threshold=config["threshold"],
                enlarge=config["enlarge"],
            )
        except BlankImageError as exc:
            log.warning("image %d skipped: %s", i, exc)
            continue
        crop = padded[box.row0 : box.row1, box.col0 : box.col1]
        save_gray_pgm(out_dir / f"crop_{i:05d}.pgm", crop)
        log.info(
            "image %d: tight %dx%d, enlarged %dx%d",
            i,
            tight.height,
            tight.width,
            box.height,
            box.width,
        )
    return 0


def _train_model(matrix, labels, config):
    if config["classifier"] == "pca":
        return classify.pca_fit(matrix, labels, config["components"])
    if config["classifier"] == "svm":
        normalizer = classify.maxabs_fit(matrix)
        return classify.svm_fit(
            matrix,
            labels,
            reg=config["reg"],
            epochs=config["epochs"],
            seed=config["seed"],
            normalizer=normalizer,
        )
    raise ConfigError(f"unknown classifier {config['classifier']!r}")


def cmd_train(config) -> int:
    if not config["features"] or not config["output"]:
        raise ConfigError("train requires 'features' and 'output'")
    matrix, _, labels = read_features_csv(config["features"])
    if labels is None:
        raise ConfigError("training features must carry a label column")
    keep = ~np.isnan(matrix).any(axis=1)
    if not keep.all():
        log.warning("dropping %d flagged rows", int((~keep).sum()))
    model = _train_model(matrix[keep], labels[keep], config)
    classify.save_model(model, config["output"])
    log.info("wrote model to %s", config["output"])
    return 0


def _parse_manifest(path):
    shards = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            if len(tokens) != 6 or tokens[0] != "scale" or tokens[2] != "images" or tokens[4] != "labels":
                raise ConfigError(
                    f"{path}:{lineno}: expected 'scale <float> images <path> labels <path>'"
                )
            shards.append((float(tokens[1]), tokens[3], tokens[5]))
    if not shards:
        raise ConfigError(f"{path}: empty manifest")
    return shards


def cmd_eval(config) -> int:
    if not config["model"]:
        raise ConfigError("eval requires 'model'")
    model = classify.load_model(data_path(config["model"]))
    report_rows = []
    if config["manifest"]:
        for scale, images_path, labels_path in _parse_manifest(
            data_path(config["manifest"])
        ):
            ds = load_idx(data_path(images_path), data_path(labels_path))
            images, labels = ds.images, np.asarray(ds.labels)
            if config["limit"] is not None:
                images = images[: config["limit"]]
                labels = labels[: config["limit"]]
            matrix = extract_matrix(images, config)
            keep = ~np.isnan(matrix).any(axis=1)
            acc, confusion = classify.evaluate(model, matrix[keep], labels[keep])
            report_rows.append((f"{scale:g}", acc, confusion))
    elif config["features"]:
        matrix, _, labels = read_features_csv(config["features"])
        if labels is None:
            raise ConfigError("evaluation features must carry a label column")
        keep = ~np.isnan(matrix).any(axis=1)
        acc, confusion = classify.evaluate(model, matrix[keep], labels[keep])
        report_rows.append(("all", acc, confusion))
    else:
        raise ConfigError("eval requires 'features' or 'manifest'")

    print("scale,accuracy")
    for name, acc, _ in report_rows:
        print(f"{name},{acc:.4f}")
    for name, acc, confusion in report_rows:
        print(f"\n[{name}] accuracy {acc:.4f}, confusion matrix (rows = true):")
        for row in confusion:
            print("  " + " ".join(f"{v:5d}" for v in row))
    if config["output"]:
        with open(config["output"], "w", encoding="ascii") as fh:
            fh.write("scale,accuracy\n")
            for name, acc, _ in report_rows:
                fh.write(f"{name},{acc:.6f}\n")
    return 0


def cmd_verify(config, inject_fault=None) -> int:
    results = verify.run_all(seed=config["seed"], inject_fault=inject_fault)
    failed = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}: measured {r.measured:.3e} (tolerance {r.tolerance:g})")
        failed += not r.passed
    print(f"{len(results) - failed}/{len(results)} properties passed")
    return 1 if failed else 0


def cmd_bench(config, sizes=(64, 128, 256)) -> int:
    cfg = riesz_config(config)
    rng = np.random.default_rng(config["seed"])
    print("size,stage,seconds_per_image")
    for size in sizes:
        f = rng.standard_normal((size, size))
        for stage, fn in (
            ("fft2", lambda: np.fft.fft2(f)),
            ("features", lambda: extract_features(f, cfg)),
        ):
            fn()  # warm multiplier caches
            reps = 3
            start = time.perf_counter()
            for _ in range(reps):
                fn()
            print(f"{size},{stage},{(time.perf_counter() - start) / reps:.6f}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="riesz",
        description="Hierarchical Riesz feature extraction and classification",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="flat 'key = value' configuration file")
        p.add_argument("--print-config", action="store_true")
        p.add_argument("--seed", type=int)

    def add_riesz(p):
        p.add_argument("--depth", type=int)
        p.add_argument("--angles", type=int)
        p.add_argument("--scale-constant", dest="scale_constant", type=float)
        p.add_argument("--pooling", choices=("mean", "max"))
        p.add_argument("--presmooth-sigma", dest="presmooth_sigma", type=float)

    def add_input(p):
        p.add_argument("--images", help="IDX image file")
        p.add_argument("--labels", help="IDX label file")
        p.add_argument("--image-dir", dest="image_dir")
        p.add_argument("--limit", type=int)

    def add_bbox(p):
        p.add_argument("--bbox", action="store_const", const=True)
        p.add_argument("--pad", type=int)
        p.add_argument("--threshold", type=float)
        p.add_argument("--enlarge", type=float)

    p = sub.add_parser("extract", help="write a feature CSV")
    add_common(p), add_riesz(p), add_input(p), add_bbox(p)
    p.add_argument("--jobs", type=int)
    p.add_argument("--output")

    p = sub.add_parser("bbox", help="write cropped graymaps")
    add_common(p), add_input(p), add_bbox(p)
    p.add_argument("--out-dir", dest="out_dir")

    p = sub.add_parser("train", help="train a classifier from a feature CSV")
    add_common(p)
    p.add_argument("--features")
    p.add_argument("--classifier", choices=("pca", "svm"))
    p.add_argument("--components", type=int)
    p.add_argument("--reg", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--output")

    p = sub.add_parser("eval", help="evaluate a model")
    add_common(p), add_riesz(p), add_bbox(p)
    p.add_argument("--features")
    p.add_argument("--manifest")
    p.add_argument("--limit", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--model")
    p.add_argument("--output")

    p = sub.add_parser("verify", help="run the numerical property suite")
    add_common(p)
    p.add_argument("--inject-fault", dest="inject_fault", choices=("dc-not-zeroed",))

    p = sub.add_parser("bench", help="time the pipeline stages")
    add_common(p), add_riesz(p)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(message)s",
    )
    try:
        config = resolve_config(args)
        if getattr(args, "print_config", False):
            for key in sorted(config):
                print(f"{key} = {config[key]}")
        if args.command == "extract":
            return cmd_extract(config)
        if args.command == "bbox":
            return cmd_bbox(config)
        if args.command == "train":
            return cmd_train(config)
        if args.command == "eval":
            return cmd_eval(config)
        if args.command == "verify":
            return cmd_verify(config, inject_fault=args.inject_fault)
        if args.command == "bench":
            return cmd_bench(config)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
