import numpy as np
import pytest
import torch

from fribackend.corpus import (TEXTURE_CLASSES, build_texture_corpus,
                               export_manifest_split, save_corpus_npz,
                               texture_sample)
from fribackend.nets import ArchConfig, ToyCnn
from fribackend.train import TrainRun, _augment_crops, _distort, train, train_arrays
from fribackend.weights_io import read_weights

SMALL = ArchConfig(input_side=16, conv1_filters=8, conv2_filters=8, fc1_units=24)


def micro_corpus(n=60, side=16):
    x = np.empty((n, side, side, 3), dtype=np.uint8)
    y = np.empty(n, dtype=np.int64)
    for i in range(n):
        y[i] = i % 10
        x[i] = texture_sample(5, i, int(y[i]), side)
    return x, y


class TestCorpus:
    def test_seeded_and_balanced(self):
        x1, y1, *_ = build_texture_corpus(3, 40, 10)
        x2, y2, *_ = build_texture_corpus(3, 40, 10)
        assert np.array_equal(x1, x2) and np.array_equal(y1, y2)
        assert sorted(np.bincount(y1)) == [4] * 10

    def test_npz_round_trip(self, tmp_path):
        from fribackend.corpus import load_corpus_npz
        x_tr, y_tr, x_te, y_te = build_texture_corpus(4, 20, 10)
        save_corpus_npz(tmp_path / "c.npz", x_tr, y_tr, x_te, y_te)
        back = load_corpus_npz(tmp_path / "c.npz")
        assert all(np.array_equal(a, b)
                   for a, b in zip(back, (x_tr, y_tr, x_te, y_te)))

    def test_manifest_export(self, tmp_path):
        import json
        x, y, *_ = build_texture_corpus(5, 12, 10)
        mpath = export_manifest_split(tmp_path / "imgs", x[:6], y[:6],
                                      TEXTURE_CLASSES)
        doc = json.loads(mpath.read_text())
        assert len(doc["entries"]) == 6
        assert (tmp_path / "imgs" / doc["entries"][0]["path"]).exists()


class TestAugmentations:
    def test_distort_shape_and_range(self):
        rng = np.random.default_rng(0)
        x, _ = micro_corpus(8)
        out = _distort(rng, x)
        assert out.shape == x.shape
        assert out.min() >= 0 and out.max() <= 255

    def test_crop_augment_shape(self):
        rng = np.random.default_rng(1)
        x, _ = micro_corpus(8)
        out = _augment_crops(rng, x, min_side=10, full=16)
        assert out.shape == x.shape


class TestTraining:
    def test_zero_epoch_export_is_format_valid(self, tmp_path):
        x, y = micro_corpus()
        run = TrainRun(dataset="", out=str(tmp_path / "z.tcnnw"), epochs=0,
                       seed=9, arch=SMALL)
        _, summary = train_arrays(run, x, y, x[:20], y[:20], log=lambda m: None)
        arrays, meta = read_weights(tmp_path / "z.tcnnw")
        assert arrays["conv1_w"].shape == (5, 5, 3, 8)
        assert meta["netspec"]["input_side"] == 16
        golden = np.load(tmp_path / "z.tcnnw.golden.npz")
        assert golden["inputs"].shape[0] == 10

    def test_seeded_training_reproducible(self, tmp_path):
        x, y = micro_corpus()
        outs = []
        for name in ("a", "b"):
            run = TrainRun(dataset="", out=str(tmp_path / f"{name}.tcnnw"),
                           epochs=1, seed=42, arch=SMALL)
            train_arrays(run, x, y, x[:20], y[:20], log=lambda m: None)
            outs.append((tmp_path / f"{name}.tcnnw").read_bytes())
        assert outs[0] == outs[1]

    def test_golden_vectors_agree_with_model(self, tmp_path):
        x, y = micro_corpus()
        run = TrainRun(dataset="", out=str(tmp_path / "g.tcnnw"), epochs=1,
                       seed=7, arch=SMALL)
        net, _ = train_arrays(run, x, y, x[:20], y[:20], log=lambda m: None)
        golden = np.load(tmp_path / "g.tcnnw.golden.npz")
        logits = net.logits_from_uint8(golden["inputs"]).numpy()
        assert np.allclose(logits, golden["logits"], atol=1e-6)

    def test_divergence_aborts_with_seed(self, tmp_path):
        # an infinite step corrupts the weights; the next batch must abort
        x, y = micro_corpus()
        run = TrainRun(dataset="", out=str(tmp_path / "d.tcnnw"), epochs=2,
                       seed=13, lr=float("inf"), arch=SMALL)
        with pytest.raises(RuntimeError, match="seed 13"):
            train_arrays(run, x, y, x[:20], y[:20], log=lambda m: None)

    def test_pool_variants_export_consistent_sidecars(self, tmp_path):
        x, y = micro_corpus()
        for name, arch in (
                ("p3", ArchConfig(input_side=16, conv1_filters=8, conv2_filters=8,
                                  fc1_units=24, pool1_stride=1, pool1_pad="same",
                                  pool2_size=3, pool2_stride=1,
                                  conv1_bias_frozen=True)),
                ("pg", ArchConfig(input_side=16, conv1_filters=8, conv2_filters=8,
                                  fc1_units=24, pool1_stride=1, pool1_pad="same",
                                  pool2_size=16, pool2_stride=1,
                                  conv1_bias_frozen=True))):
            run = TrainRun(dataset="", out=str(tmp_path / f"{name}.tcnnw"),
                           epochs=0, seed=1, arch=arch)
            net, _ = train_arrays(run, x, y, x[:20], y[:20], log=lambda m: None)
            arrays, meta = read_weights(tmp_path / f"{name}.tcnnw")
            assert meta["netspec"]["pool2_size"] == arch.pool2_size
            assert arrays["fc1_w"].shape[0] == arch.fc1_in()
            assert np.array_equal(arrays["conv1_b"], np.zeros(8, np.float32))

    def test_train_from_config_json(self, tmp_path):
        import json
        x_tr, y_tr, x_te, y_te = build_texture_corpus(6, 40, 10, side=16)
        save_corpus_npz(tmp_path / "c.npz", x_tr, y_tr, x_te, y_te)
        cfg = {"dataset": str(tmp_path / "c.npz"),
               "out": str(tmp_path / "t.tcnnw"), "epochs": 1, "seed": 2,
               "dropout": 0.5, "weight_decay": 1e-4, "distortions": True,
               "augment_min_side": 10,
               "arch": {"input_side": 16, "conv1_filters": 8,
                        "conv2_filters": 8, "fc1_units": 24}}
        (tmp_path / "run.json").write_text(json.dumps(cfg))
        run = TrainRun.from_json(tmp_path / "run.json")
        summary = train(run, log=lambda m: None)
        assert (tmp_path / "t.tcnnw").exists()
        assert 0.0 <= summary["test_accuracy"] <= 1.0


class TestTorchModelServing:
    def test_checkpoint_round_trip(self, tmp_path):
        from fribackend.models import TorchModel
        from fribackend.train import save_torch_checkpoint

        torch.manual_seed(0)
        net = ToyCnn(SMALL)
        save_torch_checkpoint(net, tmp_path / "ckpt", ["a", "b"])
        model = TorchModel(tmp_path / "ckpt")
        assert model.info.num_classes == 10
        rng = np.random.default_rng(3)
        px = rng.integers(0, 256, (2, 16, 16, 3), dtype=np.uint8)
        scores = model.batch_scores(px)
        assert scores.shape == (2, 10)
        assert np.allclose(scores.sum(axis=1), 1.0)
        expect = torch.softmax(net.logits_from_uint8(px).double(), 1).numpy()
        assert np.allclose(scores, expect, atol=1e-6)
