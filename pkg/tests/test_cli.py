import csv
import json

import pytest
import torch

from helpers import make_gen, random_model
from zsiis import (EvalReport, ModelConfig, TrainConfig, init_model,
                   load_checkpoint, load_image, make_optimizer, quantize8,
                   save_checkpoint, save_image, snapshot, synthetic_images)
from zsiis.cli import main

MC = ModelConfig(num_blocks=2, channels_per_branch=12, growth=8,
                 num_subnet_layers=3)
TC = TrainConfig(learning_rate=1e-3, batch_size=4, epochs=1, crop_size=16,
                 seed=0, model=MC)


@pytest.fixture(scope="module")
def ckpt_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("ckpt") / "model.ckpt"
    model = random_model(MC, seed=4, final_std=0.02)
    opt = make_optimizer(model, TC)
    save_checkpoint(snapshot(model, opt, TC, 0, 0, make_gen(0)), path)
    return path


@pytest.fixture(scope="module")
def fresh_ckpt_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("ckpt_fresh") / "fresh.ckpt"
    model = init_model(MC, 0)
    save_checkpoint(snapshot(model, make_optimizer(model, TC), TC, 0, 0,
                             make_gen(0)), path)
    return path


@pytest.fixture(scope="module")
def image_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("imgs")
    for i, img in enumerate(synthetic_images(5, size=16, seed=77)):
        save_image(img, d / f"img_{i}.png")
    return d


def write_config(path, dataset_dir, out_dir, **train_overrides):
    train = {"batch_size": 4, "epochs": 2, "crop_size": 16, "seed": 1,
             "learning_rate": 1e-3}
    train.update(train_overrides)
    cfg = {"model": {"num_blocks": 2, "growth": 8, "num_subnet_layers": 3},
           "train": train,
           "paths": {"dataset_dir": str(dataset_dir), "output_dir": str(out_dir)}}
    path.write_text(json.dumps(cfg))
    return path


def test_train_smoke(tmp_path):
    data = tmp_path / "data"
    data.mkdir()
    for i, img in enumerate(synthetic_images(8, size=20, seed=5)):
        save_image(img, data / f"t{i}.png")
    out = tmp_path / "run"
    cfg_path = write_config(tmp_path / "cfg.json", data, out)
    assert main(["train", "--config", str(cfg_path)]) == 0
    assert (out / "latest.ckpt").exists()
    assert (out / "loss_log.csv").exists()
    echoed = json.loads((out / "effective_config.json").read_text())
    assert echoed["train"]["seed"] == 1
    assert echoed["model"]["num_blocks"] == 2
    load_checkpoint(out / "latest.ckpt")


def test_train_malformed_json_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["train", "--config", str(bad)]) == 2
    assert "malformed JSON" in capsys.readouterr().err


def test_train_unknown_key_exits_2_naming_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"train": {"learning_rat": 1e-3}}))
    assert main(["train", "--config", str(cfg)]) == 2
    assert "learning_rat" in capsys.readouterr().err


def test_train_missing_dataset_exits_3(tmp_path):
    cfg_path = write_config(tmp_path / "cfg.json", tmp_path / "nope",
                            tmp_path / "out")
    assert main(["train", "--config", str(cfg_path)]) == 3


def test_conceal_reveal_round_trip(tmp_path, ckpt_path):
    imgs = synthetic_images(2, size=16, seed=9)
    cover_p, secret_p = tmp_path / "cover.png", tmp_path / "secret.png"
    save_image(imgs[0], cover_p)
    save_image(imgs[1], secret_p)
    stego_p = tmp_path / "stego.png"
    assert main(["conceal", str(ckpt_path), str(cover_p), str(secret_p),
                 str(stego_p)]) == 0
    assert stego_p.exists()
    out_p = tmp_path / "revealed.png"
    assert main(["reveal", str(ckpt_path), str(stego_p), str(out_p),
                 "--seed", "3"]) == 0
    first = load_image(out_p)
    assert main(["reveal", str(ckpt_path), str(stego_p), str(out_p),
                 "--seed", "3"]) == 0
    assert torch.equal(load_image(out_p), first)


def test_conceal_lam_one_returns_quantized_cover(tmp_path, ckpt_path):
    imgs = synthetic_images(2, size=16, seed=10)
    cover_p, secret_p = tmp_path / "c.png", tmp_path / "s.png"
    save_image(imgs[0], cover_p)
    save_image(imgs[1], secret_p)
    out_p = tmp_path / "stego.png"
    assert main(["conceal", str(ckpt_path), str(cover_p), str(secret_p),
                 str(out_p), "--lam", "1.0"]) == 0
    assert torch.equal(load_image(out_p), quantize8(load_image(cover_p)))


def test_conceal_dimension_mismatch_exits_5(tmp_path, ckpt_path):
    save_image(synthetic_images(1, size=16, seed=1)[0], tmp_path / "a.png")
    save_image(synthetic_images(1, size=32, seed=2)[0], tmp_path / "b.png")
    assert main(["conceal", str(ckpt_path), str(tmp_path / "a.png"),
                 str(tmp_path / "b.png"), str(tmp_path / "o.png")]) == 5


def test_conceal_odd_size_exits_5(tmp_path, ckpt_path):
    img = torch.rand(3, 15, 15, generator=make_gen(0))
    save_image(img, tmp_path / "odd.png")
    assert main(["conceal", str(ckpt_path), str(tmp_path / "odd.png"),
                 str(tmp_path / "odd.png"), str(tmp_path / "o.png")]) == 5


def test_unreadable_input_exits_3(tmp_path, ckpt_path):
    assert main(["reveal", str(ckpt_path), str(tmp_path / "missing.png"),
                 str(tmp_path / "o.png")]) == 3
    assert main(["detect", str(tmp_path / "no.ckpt"),
                 str(tmp_path)]) == 3


def test_detect_directory_lines_and_determinism(image_dir, ckpt_path, capsys):
    assert main(["detect", str(ckpt_path), str(image_dir), "--seed", "5"]) == 0
    out1 = capsys.readouterr().out.strip().splitlines()
    assert len(out1) == 5
    for line in out1:
        path, score, verdict = line.split("\t")
        float(score)
        assert verdict in ("cover", "stego")
    assert main(["detect", str(ckpt_path), str(image_dir), "--seed", "5"]) == 0
    assert capsys.readouterr().out.strip().splitlines() == out1


def test_detect_json_mode(image_dir, ckpt_path, capsys):
    assert main(["detect", str(ckpt_path), str(image_dir), "--json"]) == 0
    records = json.loads(capsys.readouterr().out)
    assert len(records) == 5
    assert {"path", "psnr_db", "verdict", "threshold_db"} <= set(records[0])
    assert all(r["threshold_db"] == 25.0 for r in records)


def test_evaluate_outputs(tmp_path, ckpt_path, image_dir):
    out = tmp_path / "eval"
    assert main(["evaluate", str(ckpt_path), "--covers", str(image_dir),
                 "--secrets", str(image_dir), "--out", str(out),
                 "--seed", "2"]) == 0
    report = EvalReport.from_json((out / "report.json").read_text())
    assert report.n_cover == 5 and report.n_stego == 5
    assert report.threshold_db == 25.0
    with open(out / "histogram.csv") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["image_id", "label", "psnr_db"]
    assert len(rows) == 1 + 10
    with open(out / "sweep.csv") as f:
        sweep_rows = list(csv.reader(f))
    assert sweep_rows[0] == ["threshold_db", "balanced_accuracy"]
    thrs = [float(r[0]) for r in sweep_rows[1:]]
    scores = [float(r[2]) for r in rows[1:]]
    if min(scores) < 25.0 < max(scores):
        assert 25.0 in thrs
    assert (out / "effective_config.json").exists()


def test_histogram_command(tmp_path, ckpt_path, image_dir):
    out = tmp_path / "hist"
    assert main(["histogram", str(ckpt_path), str(image_dir), "--out",
                 str(out), "--seed", "1"]) == 0
    with open(out / "histogram.csv") as f:
        rows = list(csv.reader(f))
    assert len(rows) == 1 + 5
    assert all(r[1] == "unknown" for r in rows[1:])


def test_checkpoint_config_echo_matches_loaded_model(ckpt_path):
    ckpt = load_checkpoint(ckpt_path)
    assert ckpt.config.model == MC
    model = ckpt.to_model()
    assert model.config == MC
