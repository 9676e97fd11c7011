"""Python smoke tests for the bound C++ core."""

import json
import math
import os

import numpy as np
import pytest
import torch

import sragan


def test_mask_algebra_values():
    a = np.array([[[[1.0, 1.0], [0.0, 0.0]]]])
    b = np.array([[[[1.0, 0.0], [1.0, 0.0]]]])
    assert sragan.iou_hard(a, b) == pytest.approx(1.0 / 3.0, abs=0)
    assert sragan.iou_soft(a, b) == pytest.approx(1.0 / 3.0, abs=1e-5)
    assert sragan.iou_hard(np.zeros((1, 1, 2, 2)), np.zeros((1, 1, 2, 2))) == 1.0

    s = np.full((1, 1, 2, 2), 0.5)
    assert sragan.threshold_hard(s).min() == 1.0
    assert sragan.threshold_soft(s, 0.1) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        sragan.threshold_soft(s, -1.0)


def test_masked_mse_and_downsample():
    logits = np.zeros((1, 1, 2, 2))
    logits[0, 0, 0, 0] = 0.5
    target = np.ones_like(logits)
    mask = np.zeros_like(logits)
    mask[0, 0, 0, 0] = 1.0
    assert sragan.masked_mse(logits, target, mask) == pytest.approx(0.25, abs=1e-6)

    checker = np.indices((8, 8)).sum(axis=0) % 2 == 0
    down = sragan.downsample8(checker.astype(np.float64)[None, None])
    assert down.shape == (1, 1, 1, 1)
    assert down[0, 0, 0, 0] == pytest.approx(0.5)


def test_fid_and_schedule():
    assert sragan.fid(np.array([0.0]), np.array([[1.0]]), np.array([1.0]), np.array([[1.0]])) == pytest.approx(1.0, abs=1e-8)
    feats = np.random.default_rng(0).normal(size=(32, 8))
    assert sragan.fid_features(feats, feats) == 0.0
    mu, sigma = sragan.fit_gaussian(np.array([[0.0], [2.0]]))
    assert mu[0] == pytest.approx(1.0)
    assert sigma[0, 0] == pytest.approx(2.0)

    assert sragan.lr_schedule(200, 0.0002, 100, 0) == 0.0002
    assert sragan.lr_schedule(200, 0.0002, 100, 99) == 0.0002
    assert sragan.lr_schedule(200, 0.0002, 100, 150) == 0.0001
    assert sragan.total_loss(2.0, 0.25, -4.0) == -15.5


def test_generator_and_discriminator_contracts():
    gen = sragan.Generator(base_channels=8, n_bottleneck=2, sn_positions="0", seed=0)
    img = np.random.default_rng(1).uniform(-1, 1, size=(1, 3, 32, 32))
    sal = np.random.default_rng(2).uniform(0, 1, size=(1, 1, 32, 32))
    out = gen.forward(img, sal)
    assert out.shape == img.shape
    assert np.abs(out).max() < 1.0
    assert gen.sanorm_count() == 1
    assert sragan.Generator(8, 2, "none", 0).sanorm_count() == 0

    disc = sragan.Discriminator(seed=0)
    main, aux = disc.forward(np.random.default_rng(3).uniform(-1, 1, size=(1, 3, 64, 64)))
    assert main.shape == (1, 1, 4, 4)
    assert aux.shape == (1, 1, 8, 8)


def test_synthetic_detector_and_miou():
    det = sragan.SaliencyDetector.synthetic()
    img01 = np.full((1, 3, 16, 16), 0.1)
    img01[:, :, 4:12, 4:12] = 0.9
    s = det.detect(img01)
    assert s.shape == (1, 1, 16, 16)
    assert s[0, 0, 8, 8] > 0.9
    assert s[0, 0, 0, 0] < 0.1
    assert det.num_parameters() == 0

    imgs = img01 * 2 - 1
    assert sragan.saliency_miou([imgs], [imgs], det) == 1.0


def test_pretrained_adapter_roundtrip(tmp_path):
    class MeanSaliency(torch.nn.Module):
        def __init__(self):
            super().__init__()
            self.scale = torch.nn.Parameter(torch.ones(1))

        def forward(self, x):
            return (x.mean(dim=1, keepdim=True) * self.scale).clamp(0, 1)

    path = tmp_path / "toy_saliency.pt"
    torch.jit.script(MeanSaliency()).save(str(path))

    det = sragan.SaliencyDetector.pretrained(str(path))
    assert det.num_parameters() == 1
    img01 = np.random.default_rng(4).uniform(0, 1, size=(1, 3, 16, 16))
    out = det.detect(img01)
    assert out.shape == (1, 1, 16, 16)
    np.testing.assert_allclose(out[0, 0], img01[0].mean(axis=0), atol=1e-6)
    np.testing.assert_array_equal(out, det.detect(img01))  # deterministic and frozen

    with pytest.raises(RuntimeError):
        sragan.SaliencyDetector.pretrained(str(tmp_path / "missing.pt"))


def test_train_infer_evaluate_cycle(tmp_path):
    data = tmp_path / "data"
    runs = tmp_path / "runs"
    sragan.make_synthetic_task(str(data), n_train=4, n_test=2, size=32, seed=9)
    os.environ["SRAGAN_RUNS_DIR"] = str(runs)
    try:
        cfg = tmp_path / "smoke.cfg"
        cfg.write_text(
            "\n".join(
                [
                    "run.name = pysmoke",
                    f"data.root = {data}",
                    "data.resize_to = 32",
                    "trainer.epochs = 1",
                    "trainer.decay_start_epoch = 0",
                    "trainer.pool_size = 2",
                    "gen.base_channels = 8",
                    "gen.n_bottleneck = 2",
                    "gen.sn_positions = 0",
                ]
            )
            + "\n"
        )
        assert sragan.run_train(str(cfg)) == 0
        metrics = runs / "pysmoke" / "metrics.log"
        lines = [json.loads(l) for l in metrics.read_text().splitlines() if l]
        assert len(lines) == 4
        assert all(math.isfinite(l["total"]) for l in lines)

        ckpt = runs / "pysmoke" / "checkpoints" / "latest.pt"
        out = tmp_path / "stylized"
        assert sragan.run_infer(str(ckpt), str(data / "testX"), str(out)) == 0
        assert sorted(p.name for p in out.iterdir()) == ["img_0000.png", "img_0001.png"]

        report = sragan.evaluate_report(str(ckpt), str(data / "testX"), str(data / "trainY"))
        assert report["extractor"] == "toy"
        assert report["n_generated"] == 2
        assert 0.0 <= report["saliency_miou"] <= 1.0
        assert report["fid"] >= 0.0

        identity = sragan.evaluate_report(
            str(ckpt), str(data / "testX"), str(data / "trainY"), identity=True
        )
        assert identity["saliency_miou"] == 1.0
        selffid = sragan.evaluate_report(
            str(ckpt), str(data / "testX"), str(data / "trainY"), self_fid=True
        )
        assert selffid["fid"] < 1e-3

        assert sragan.run_train(str(cfg), ["trainer.epochs=notanint"]) == 2
    finally:
        os.environ.pop("SRAGAN_RUNS_DIR", None)


def test_training_through_torchscript_backends(tmp_path):
    """Full integration: pretrained (TorchScript) saliency detector inside the
    training loop, and a TorchScript feature network behind the FID metric."""

    class MeanSaliency(torch.nn.Module):
        def forward(self, x):
            return x.mean(dim=1, keepdim=True).clamp(0, 1)

    class TinyFeatures(torch.nn.Module):
        def forward(self, x):
            return x.mean(dim=(2, 3))  # (B, 3)

    detector_path = tmp_path / "detector.pt"
    features_path = tmp_path / "features.pt"
    torch.jit.script(MeanSaliency()).save(str(detector_path))
    torch.jit.script(TinyFeatures()).save(str(features_path))

    data = tmp_path / "data"
    runs = tmp_path / "runs"
    sragan.make_synthetic_task(str(data), n_train=4, n_test=2, size=32, seed=11)
    os.environ["SRAGAN_RUNS_DIR"] = str(runs)
    try:
        cfg = tmp_path / "jit.cfg"
        cfg.write_text(
            "\n".join(
                [
                    "run.name = jitsmoke",
                    f"data.root = {data}",
                    "data.resize_to = 32",
                    "trainer.epochs = 1",
                    "trainer.decay_start_epoch = 0",
                    "trainer.pool_size = 2",
                    "gen.base_channels = 8",
                    "gen.n_bottleneck = 2",
                    "gen.sn_positions = 0",
                    "saliency.backend = pretrained",
                    f"saliency.weights_path = {detector_path}",
                    "eval.extractor = inception",
                    f"eval.weights_path = {features_path}",
                ]
            )
            + "\n"
        )
        assert sragan.run_train(str(cfg)) == 0
        metrics = runs / "jitsmoke" / "metrics.log"
        lines = [json.loads(l) for l in metrics.read_text().splitlines() if l]
        assert len(lines) == 4
        assert all(math.isfinite(l["total"]) for l in lines)
        assert any(l["siou"] != 0.0 for l in lines)  # gradients flowed through the detector

        ckpt = runs / "jitsmoke" / "checkpoints" / "latest.pt"
        report = sragan.evaluate_report(str(ckpt), str(data / "testX"), str(data / "trainY"))
        assert report["extractor"] == "inception"
        assert report["fid"] >= 0.0
        assert 0.0 <= report["saliency_miou"] <= 1.0
    finally:
        os.environ.pop("SRAGAN_RUNS_DIR", None)


def test_config_keys_enumerated():
    keys = {k for k, _, _, _ in sragan.config_keys()}
    for expected in ("data.resize_to", "saliency.tau", "trainer.lambda2", "gen.sn_positions"):
        assert expected in keys
