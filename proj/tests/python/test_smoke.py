import json
import pathlib

import pytest

import vihsd

ROOT = pathlib.Path(__file__).resolve().parents[2]
FIXTURE = ROOT / "data" / "fixture"


def test_normalize_and_tokenize():
    assert vihsd.normalize_text("Xin CHÀO, bạn 2019!!") == "xin chào bạn number"
    assert vihsd.normalize_text(vihsd.normalize_text("A.b  12c")) == vihsd.normalize_text("A.b  12c")
    assert vihsd.tokenize("học sinh giỏi", ["học sinh"]) == ["học_sinh", "giỏi"]
    assert vihsd.tokenize("học sinh giỏi") == ["học", "sinh", "giỏi"]


def test_vocabulary_round_trip():
    vocab = vihsd.Vocabulary.build([["b", "a"], ["b", "c"]])
    assert vocab.tokens == ["[PAD]", "[UNK]", "b", "a", "c"]
    assert len(vocab) == 5
    ids = vocab.encode(["a", "zzz", "b"], max_len=5)
    assert ids == [3, 1, 2, 0, 0]
    assert vocab.decode(ids) == ["a", "[UNK]", "b"]
    assert vocab.encode(["a"] * 9, max_len=2) == [3, 3]


def test_metrics_and_weights():
    report = vihsd.evaluate_predictions([0, 0, 1, 2], [0, 1, 1, 2])
    assert report["accuracy"] == pytest.approx(0.75)
    assert report["micro_f1"] == pytest.approx(0.75)
    assert report["confusion"][0] == [1, 1, 0]
    assert report["macro_f1"] == pytest.approx((2 / 3 + 2 / 3 + 1) / 3)
    w = vihsd.class_weights([6, 3, 1])
    assert w == pytest.approx((10 / 18, 10 / 9, 10 / 3))


def test_stratified_split_partitions():
    labels = [0] * 10 + [1] * 6 + [2] * 4
    train, val = vihsd.stratified_split(labels, 0.5, seed=3)
    assert sorted(train + val) == list(range(20))
    assert sorted(labels[i] for i in val) == [0] * 5 + [1] * 3 + [2] * 2


def test_errors_carry_kind():
    with pytest.raises(vihsd.Error, match=r"\[config\]"):
        vihsd.class_weights([1, 0, 2])
    with pytest.raises(vihsd.Error, match=r"\[io\]"):
        vihsd.Classifier.load("/nonexistent/checkpoint")


def test_verify_suite_passes():
    results = vihsd.verify()
    assert results and all(r["passed"] for r in results)


def test_train_and_predict(tmp_path):
    cfg = json.loads((FIXTURE / "config.json").read_text())
    for key in ("train_data", "test_data", "vectors", "lexicon"):
        cfg[key] = str(FIXTURE / cfg[key])
    cfg["training"]["max_epochs"] = 5
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))

    runs = vihsd.train(path, model="textcnn", out_dir=str(tmp_path / "runs"))
    assert len(runs) == 1 and runs[0]["model"] == "textcnn"
    assert 0.0 <= runs[0]["macro_f1"] <= 1.0
    assert "test" in runs[0]

    clf = vihsd.Classifier.load(runs[0]["run_dir"])
    assert clf.model == "textcnn"
    out = clf.predict(["xin chào", "đồ ngu"])
    assert len(out) == 2
    for label, probs in out:
        assert label in (0, 1, 2)
        assert sum(probs) == pytest.approx(1.0, abs=1e-5)
        assert label == max(range(3), key=lambda k: (probs[k], -k))
    assert clf.predict(["xin chào"])[0] == out[0]
    report = clf.evaluate(["xin chào", "đồ ngu"], [0, 1])
    assert report["count"] == 2
