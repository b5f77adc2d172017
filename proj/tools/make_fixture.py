#!/usr/bin/env python3
"""Writes the small synthetic corpus under data/fixture/.

    python3 tools/make_fixture.py data/fixture

Each comment mixes neutral filler syllables with phrases tied to its label,
so the classes are separable by keyword. Output is deterministic.
"""
import csv
import json
import random
import sys
from pathlib import Path

FILLER = ("hôm nay trời mình đi xem trận bóng với bạn bè ở trong nước thi đấu "
          "thể thao chuyên nghiệp bài này video ảnh nhà quán ăn").split()
PHRASES = {
    0: ["thương quá", "cảm ơn bạn", "đẹp quá", "hay lắm", "chúc mừng", "dễ thương"],
    1: ["vl", "vãi", "đm", "bạc bẽo vl", "vãi cả", "đéo hiểu"],
    2: ["thằng ngu", "đồ chó", "cút đi", "bọn mọi", "thằng ngũ", "lũ súc vật"],
}
LEXICON = ["thể thao", "chuyên nghiệp", "bạn bè", "cảm ơn", "dễ thương", "bạc bẽo",
           "đồ chó", "thằng ngu", "súc vật", "trong nước"]
COUNTS = {0: 30, 1: 18, 2: 16}
DIM = 16


def comment(rng, label):
    words = rng.sample(FILLER, rng.randint(3, 7))
    pos = rng.randint(0, len(words))
    words.insert(pos, rng.choice(PHRASES[label]))
    text = " ".join(words)
    roll = rng.random()
    if roll < 0.3:
        text = text.capitalize() + rng.choice(["!!!", " :(", "...", "?"])
    elif roll < 0.5:
        text = f"{text} {rng.randint(1, 2019)} lần"
    return text


def rows(rng, counts):
    out = [(comment(rng, label), label) for label, n in counts.items() for _ in range(n)]
    rng.shuffle(out)
    return out


def write_csv(path, data):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["text", "label"])
        w.writerows(data)


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "data/fixture")
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(2019)
    write_csv(out / "train.csv", rows(rng, COUNTS))
    write_csv(out / "test.csv", rows(rng, {0: 10, 1: 7, 2: 7}))
    (out / "lexicon.txt").write_text("\n".join(LEXICON) + "\n", encoding="utf-8")

    # Vectors for about two thirds of the filler vocabulary; the rest stay OOV.
    vocab = sorted(set(FILLER))[::3] + sorted(set(FILLER))[1::3] + ["thể_thao", "vl", "cảm_ơn"]
    lines = [f"{len(vocab)} {DIM}"]
    for tok in vocab:
        lines.append(tok + " " + " ".join(f"{rng.uniform(-0.3, 0.3):.5f}" for _ in range(DIM)))
    (out / "vectors.vec").write_text("\n".join(lines) + "\n", encoding="utf-8")

    config = {
        "train_data": "train.csv",
        "test_data": "test.csv",
        "vectors": "vectors.vec",
        "lexicon": "lexicon.txt",
        "out_dir": "../../runs/fixture",
        "model": "bigru-lstm-cnn",
        "seed": 7,
        "model_spec": {
            "max_len": 20, "embed_dim": DIM, "dropout_rate": 0.2,
            "gru_units": 8, "lstm_units": 8, "conv_filters": 8, "kernel_widths": [3],
            "textcnn_filters": 8, "textcnn_kernel_widths": [3, 4, 5],
        },
        "training": {
            "batch_size": 16, "max_epochs": 200, "learning_rate": 0.01, "patience": 10,
            "class_weighting": "inverse", "val_fraction": 0.0,
        },
    }
    (out / "config.json").write_text(json.dumps(config, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
