import struct

import numpy as np
import pytest

from rieszrep.cli import data_path, load_config_file, main

from conftest import synthetic_digit


def _write_idx_pair(directory, images, labels, stem="set"):
    images = np.asarray(images)
    data = np.clip(np.rint(images * 255), 0, 255).astype(np.uint8)
    ipath = directory / f"{stem}-images.idx"
    lpath = directory / f"{stem}-labels.idx"
    with open(ipath, "wb") as fh:
        fh.write(struct.pack(">iiii", 0x803, *data.shape))
        fh.write(data.tobytes())
    with open(lpath, "wb") as fh:
        fh.write(struct.pack(">ii", 0x801, len(labels)))
        fh.write(bytes(labels))
    return ipath, lpath


def _two_class_images(rng, per_class=12, size=16):
    """Smooth blobs vs. checkerboard texture; easy to separate."""
    images, labels = [], []
    x = np.arange(size)
    checker = (x[:, None] + x[None, :]) % 2
    for _ in range(per_class):
        smooth = np.exp(
            -((x[:, None] - rng.uniform(6, 10)) ** 2 + (x[None, :] - rng.uniform(6, 10)) ** 2)
            / 20.0
        )
        images.append(smooth)
        labels.append(0)
        images.append(0.5 + 0.4 * checker + rng.random((size, size)) * 0.1)
        labels.append(1)
    return np.array(images), labels


def test_verify_all_pass(capsys):
    assert main(["verify"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out
    lines = [l for l in out.splitlines() if l.startswith("PASS")]
    assert len(lines) == 12
    assert out.splitlines()[-1] == "12/12 properties passed"


def test_verify_fault_injection(capsys):
    assert main(["verify", "--inject-fault", "dc-not-zeroed"]) == 1
    out = capsys.readouterr().out
    assert "FAIL all-pass" in out
    assert "FAIL zero-integral" in out


def test_config_file_unknown_key(tmp_path):
    cfg = tmp_path / "riesz.cfg"
    cfg.write_text("depht = 3\n")
    assert main(["verify", "--config", str(cfg)]) == 2


def test_config_file_parsing(tmp_path):
    cfg = tmp_path / "riesz.cfg"
    cfg.write_text("# comment\ndepth = 2\nangles = 8\npooling = max  # inline\n")
    values = load_config_file(cfg)
    assert values == {"depth": 2, "angles": 8, "pooling": "max"}


def test_config_file_bad_line(tmp_path):
    cfg = tmp_path / "riesz.cfg"
    cfg.write_text("depth 2\n")
    assert main(["verify", "--config", str(cfg)]) == 2


def test_print_config(tmp_path, capsys):
    cfg = tmp_path / "riesz.cfg"
    cfg.write_text("depth = 2\n")
    # flag overrides file
    main(["verify", "--config", str(cfg), "--print-config", "--seed", "5"])
    out = capsys.readouterr().out
    assert "depth = 2" in out
    assert "seed = 5" in out


def test_missing_required_option():
    assert main(["extract"]) == 2  # no input source
    assert main(["train"]) == 2  # no features/output
    assert main(["eval"]) == 2  # no model


def test_invalid_riesz_config(tmp_path, rng):
    ipath, lpath = _write_idx_pair(tmp_path, rng.random((2, 8, 8)), [0, 1])
    out = tmp_path / "f.csv"
    code = main(
        ["extract", "--images", str(ipath), "--labels", str(lpath),
         "--angles", "6", "--output", str(out)]
    )
    assert code == 2


def test_extract_idx_end_to_end(tmp_path, rng):
    from rieszrep.representation import read_features_csv

    images, labels = _two_class_images(rng, per_class=3)
    ipath, lpath = _write_idx_pair(tmp_path, images, labels)
    out = tmp_path / "features.csv"
    code = main(
        ["extract", "--images", str(ipath), "--labels", str(lpath),
         "--depth", "1", "--output", str(out)]
    )
    assert code == 0
    matrix, paths, got_labels = read_features_csv(out)
    assert matrix.shape == (6, 5)
    assert list(got_labels) == labels
    assert not np.isnan(matrix).any()


def test_extract_deterministic_bytes(tmp_path, rng):
    images, labels = _two_class_images(rng, per_class=2)
    ipath, lpath = _write_idx_pair(tmp_path, images, labels)
    args = ["extract", "--images", str(ipath), "--labels", str(lpath), "--depth", "1"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--output", str(a)]) == 0
    assert main(args + ["--output", str(b), "--jobs", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_extract_image_dir(tmp_path, rng):
    from rieszrep.image_core import save_gray_pgm
    from rieszrep.representation import read_features_csv

    d = tmp_path / "imgs"
    d.mkdir()
    for i in range(3):
        save_gray_pgm(d / f"img_{i}.pgm", rng.random((8, 8)))
    out = tmp_path / "f.csv"
    assert main(["extract", "--image-dir", str(d), "--depth", "0", "--output", str(out)]) == 0
    matrix, _, labels = read_features_csv(out)
    assert matrix.shape == (3, 1)
    assert labels is None


def test_extract_limit(tmp_path, rng):
    from rieszrep.representation import read_features_csv

    images, labels = _two_class_images(rng, per_class=3)
    ipath, lpath = _write_idx_pair(tmp_path, images, labels)
    out = tmp_path / "f.csv"
    main(["extract", "--images", str(ipath), "--labels", str(lpath),
          "--depth", "0", "--limit", "2", "--output", str(out)])
    matrix, _, _ = read_features_csv(out)
    assert matrix.shape[0] == 2


def test_extract_blank_image_flagged(tmp_path, rng):
    from rieszrep.representation import read_features_csv

    images = np.stack([np.zeros((12, 12)), synthetic_digit(12)])
    ipath, lpath = _write_idx_pair(tmp_path, images, [7, 3])
    out = tmp_path / "f.csv"
    code = main(
        ["extract", "--images", str(ipath), "--labels", str(lpath),
         "--depth", "1", "--bbox", "--output", str(out)]
    )
    assert code == 0  # run continues past the blank image
    matrix, _, labels = read_features_csv(out)
    assert np.isnan(matrix[0]).all()
    assert not np.isnan(matrix[1]).any()
    assert list(labels) == [7, 3]


def test_data_dir_resolution(tmp_path, monkeypatch):
    monkeypatch.setenv("RIESZ_DATA_DIR", str(tmp_path))
    assert data_path("sub/file.idx") == tmp_path / "sub" / "file.idx"
    assert data_path("/abs/file.idx") == __import__("pathlib").Path("/abs/file.idx")
    monkeypatch.delenv("RIESZ_DATA_DIR")
    assert data_path("sub/file.idx") == __import__("pathlib").Path("sub/file.idx")


def test_bbox_command(tmp_path, rng):
    from rieszrep.image_core import load_gray_image

    images = np.stack([synthetic_digit(32), np.zeros((32, 32)), synthetic_digit(32)])
    ipath, lpath = _write_idx_pair(tmp_path, images, [0, 0, 0])
    out_dir = tmp_path / "crops"
    code = main(
        ["bbox", "--images", str(ipath), "--labels", str(lpath),
         "--out-dir", str(out_dir)]
    )
    assert code == 0
    written = sorted(p.name for p in out_dir.iterdir())
    assert written == ["crop_00000.pgm", "crop_00002.pgm"]  # blank skipped
    crop = load_gray_image(out_dir / "crop_00000.pgm")
    assert crop.max() > 0.5


def test_train_eval_round_trip(tmp_path, rng, capsys):
    images, labels = _two_class_images(rng, per_class=12)
    ipath, lpath = _write_idx_pair(tmp_path, images, labels)
    features = tmp_path / "features.csv"
    model = tmp_path / "model.txt"
    report = tmp_path / "report.csv"
    assert main(["extract", "--images", str(ipath), "--labels", str(lpath),
                 "--depth", "1", "--output", str(features)]) == 0
    assert main(["train", "--features", str(features), "--classifier", "svm",
                 "--output", str(model)]) == 0
    capsys.readouterr()
    assert main(["eval", "--features", str(features), "--model", str(model),
                 "--output", str(report)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("scale,accuracy\n")
    acc = float(out.splitlines()[1].split(",")[1])
    assert acc >= 0.9
    assert report.read_text().startswith("scale,accuracy\n")


def test_train_pca_and_eval(tmp_path, rng, capsys):
    images, labels = _two_class_images(rng, per_class=10)
    ipath, lpath = _write_idx_pair(tmp_path, images, labels)
    features = tmp_path / "features.csv"
    model = tmp_path / "model.txt"
    main(["extract", "--images", str(ipath), "--labels", str(lpath),
          "--depth", "1", "--output", str(features)])
    assert main(["train", "--features", str(features), "--classifier", "pca",
                 "--components", "2", "--output", str(model)]) == 0
    capsys.readouterr()
    assert main(["eval", "--features", str(features), "--model", str(model)]) == 0
    acc = float(capsys.readouterr().out.splitlines()[1].split(",")[1])
    assert acc >= 0.9


def test_train_deterministic_model_bytes(tmp_path, rng):
    images, labels = _two_class_images(rng, per_class=6)
    ipath, lpath = _write_idx_pair(tmp_path, images, labels)
    features = tmp_path / "features.csv"
    main(["extract", "--images", str(ipath), "--labels", str(lpath),
          "--depth", "1", "--output", str(features)])
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    main(["train", "--features", str(features), "--seed", "3", "--output", str(a)])
    main(["train", "--features", str(features), "--seed", "3", "--output", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_eval_manifest(tmp_path, rng, capsys, monkeypatch):
    images, labels = _two_class_images(rng, per_class=8)
    _write_idx_pair(tmp_path, images, labels, stem="s1")
    manifest = tmp_path / "manifest.txt"
    manifest.write_text(
        "# one shard\nscale 1 images s1-images.idx labels s1-labels.idx\n"
    )
    features = tmp_path / "features.csv"
    model = tmp_path / "model.txt"
    monkeypatch.setenv("RIESZ_DATA_DIR", str(tmp_path))
    main(["extract", "--images", "s1-images.idx", "--labels", "s1-labels.idx",
          "--depth", "1", "--output", str(features)])
    main(["train", "--features", str(features), "--output", str(model)])
    capsys.readouterr()
    code = main(["eval", "--manifest", "manifest.txt", "--model", str(model),
                 "--depth", "1"])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "scale,accuracy"
    scale, acc = lines[1].split(",")
    assert scale == "1"
    assert float(acc) >= 0.9


def test_eval_manifest_malformed(tmp_path):
    manifest = tmp_path / "m.txt"
    manifest.write_text("scale 1 imgs a labels b\n")
    model = tmp_path / "model.txt"
    model.write_text("riesz-model v1\nkind svm\n")
    assert main(["eval", "--manifest", str(manifest), "--model", str(model)]) in (1, 2)


def test_bench_output(capsys):
    from rieszrep.cli import cmd_bench, resolve_config

    class Args:
        config = None

    config = resolve_config(Args())
    config["depth"] = 1
    assert cmd_bench(config, sizes=(16,)) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "size,stage,seconds_per_image"
    assert lines[1].startswith("16,fft2,")
    assert lines[2].startswith("16,features,")


def test_pipeline_scale_commutation_smoke(tmp_path):
    """Features of a digit and its 2x upscale agree after bbox cropping."""
    from rieszrep.preprocess import bbox_extract, rescale
    from rieszrep.representation import RieszConfig, extract_features

    img = synthetic_digit(112)
    cfg = RieszConfig(depth=3, angles=4)
    a = extract_features(bbox_extract(img), cfg)
    b = extract_features(bbox_extract(rescale(img, 2, "bilinear")), cfg)
    assert np.abs(a - b).max() / np.abs(a).max() <= 0.05
