"""Smoke test for the crybio extension: synth, extract, fit, score."""

import csv
import json
import os
import sys
import tempfile

import crybio


def main() -> int:
    names = crybio.feature_names()
    assert len(names) == 38, names

    cfg = crybio.Config.from_text("cv.folds = 3\n")
    assert "cv.folds = 3" in cfg.to_text()
    try:
        crybio.Config.from_text("nope.key = 1")
    except ValueError as e:
        assert "unknown key" in str(e)
    else:
        raise AssertionError("unknown key accepted")

    with tempfile.TemporaryDirectory() as tmp:
        manifest = crybio.synth_corpus(tmp, profile="separated", seed=3, n_per_class=8)
        with open(manifest, newline="") as f:
            entries = list(csv.DictReader(f))
        assert len(entries) == 16

        rows, labels = [], []
        for e in entries:
            path = os.path.join(tmp, e["path"])
            samples, rate = crybio.load_audio(path)
            assert rate == 16000 and len(samples) > rate
            seg = crybio.segment(path)
            assert len(seg) > 0 and seg.total_cry_seconds > 3.0
            feats = crybio.extract(path, cfg)
            assert feats is not None and feats.names == names
            rows.append(feats.values)
            labels.append(0 if e["label"] == "normal" else 1)

    model = crybio.ScreeningModel.fit(rows, labels, names, reg_strength=0.1)
    scores = model.predict_proba(rows)
    auc = crybio.roc_auc(scores, labels)
    assert 0.5 < auc <= 1.0, auc
    again = crybio.ScreeningModel.from_json(model.to_json())
    assert again.predict_proba(rows) == scores
    assert json.loads(model.to_json())["features"] == names
    assert crybio.roc_auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75
    assert crybio.sensitivity_at_specificity([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1], 1.0) == 0.5

    sel = crybio.select_features(
        [[0.0, 1.0], [1.0, 0.0], [0.1, 0.9], [0.9, 0.2], [0.2, 1.0], [1.1, 0.3]] * 2,
        [0, 1, 0, 1, 0, 1] * 2,
        ["up", "down"],
        ["ESUTH"] * 6 + ["SCDM"] * 6,
        ["ESUTH", "SCDM"],
    )
    assert sel == {"up": 1, "down": -1}, sel
    print(f"crybio smoke test passed, in-sample AUC {auc:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
