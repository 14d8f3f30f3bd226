"""Tests for corpus/dataset plumbing and the batch CLI."""

import hashlib
import json

import numpy as np
import pytest

from gyronet import cli, data, embed
from gyronet.geometry import lorentz_inner


# ---------------------------------------------------------------------------
# Corpus ingestion
# ---------------------------------------------------------------------------

def test_ingest_corpus_characters(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text("游泳", encoding="utf-8")
    assert list(data.ingest_corpus(path)) == ["游", "泳"]


def test_ingest_corpus_whitespace_and_keep(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text("a b\nc", encoding="utf-8")
    assert list(data.ingest_corpus(path)) == ["a", "b", "c"]
    assert list(data.ingest_corpus(path, keep_whitespace=True)) == list("a b\nc")


def test_ingest_corpus_empty_file(tmp_path):
    path = tmp_path / "empty.txt"
    path.write_bytes(b"")
    with pytest.raises(ValueError, match="empty"):
        list(data.ingest_corpus(path))


def test_ingest_corpus_bom_stripped(tmp_path):
    plain = tmp_path / "plain.txt"
    bom = tmp_path / "bom.txt"
    plain.write_text("héllo", encoding="utf-8")
    bom.write_text("héllo", encoding="utf-8-sig")
    assert list(data.ingest_corpus(bom)) == list(data.ingest_corpus(plain))


def test_ingest_corpus_invalid_utf8_offset(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_bytes(b"ok\xff\xfe")
    with pytest.raises(ValueError, match="byte offset 2"):
        list(data.ingest_corpus(path))


# ---------------------------------------------------------------------------
# Intent datasets
# ---------------------------------------------------------------------------

def test_load_intent_dataset_split_sizes(tmp_path):
    path = tmp_path / "d.tsv"
    rows = [f"utt{i}\tlabel{i % 4}" for i in range(100)]
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    ds = data.load_intent_dataset(path, holdout_fraction=0.15, seed=0)
    assert len(ds.records) == 100
    assert abs(len(ds.train_indices) - 85) <= 1
    assert abs(len(ds.heldout_indices) - 15) <= 1
    assert sorted(ds.train_indices + ds.heldout_indices) == list(range(100))


def test_load_intent_dataset_duplicates_retained(tmp_path):
    path = tmp_path / "d.tsv"
    path.write_text("same\ta\nsame\ta\nother\tb\n", encoding="utf-8")
    ds = data.load_intent_dataset(path, holdout_fraction=0.0)
    assert len(ds.records) == 3


def test_load_intent_dataset_malformed_line(tmp_path):
    path = tmp_path / "d.tsv"
    path.write_text("fine\ta\nbroken-line\n", encoding="utf-8")
    with pytest.raises(ValueError, match=":2"):
        data.load_intent_dataset(path)


def test_split_deterministic(tmp_path):
    path = tmp_path / "d.tsv"
    rows = [f"utt{i}\tlabel{i % 3}" for i in range(60)]
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    a = data.load_intent_dataset(path, 0.2, seed=5)
    b = data.load_intent_dataset(path, 0.2, seed=5)
    assert a.train_indices == b.train_indices
    assert a.heldout_indices == b.heldout_indices
    c = data.load_intent_dataset(path, 0.2, seed=6)
    assert a.heldout_indices != c.heldout_indices


# ---------------------------------------------------------------------------
# Synthetic generator
# ---------------------------------------------------------------------------

def test_generator_deterministic():
    a = data.generate_synthetic_intents(6, 10, 40, seed=3)
    b = data.generate_synthetic_intents(6, 10, 40, seed=3)
    assert a.records == b.records
    assert a.train_indices == b.train_indices


def test_generator_shape_and_labels():
    ds = data.generate_synthetic_intents(8, 12, 48, seed=0, composites=2)
    assert len(ds.records) == 8 * 12
    assert len(ds.label_to_id) == 8
    composite_labels = [lab for lab in ds.label_to_id if "+" in lab]
    assert len(composite_labels) == 2


def test_generator_composites_contain_parent_signatures():
    ds = data.generate_synthetic_intents(6, 15, 48, seed=1, composites=2, noise_len=2)
    by_label = {}
    for utt, lab in ds.records:
        by_label.setdefault(lab, []).append(utt)
    for lab in ds.label_to_id:
        if "+" not in lab:
            continue
        left, right = lab.split("+")
        # signature chars of a base class appear in all of its utterances
        sig_left = set.intersection(*(set(u) for u in by_label[left]))
        sig_right = set.intersection(*(set(u) for u in by_label[right]))
        assert sig_left and sig_right
        for utt in by_label[lab]:
            assert sig_left <= set(utt) and sig_right <= set(utt)


def test_generator_separable_two_classes():
    ds = data.generate_synthetic_intents(2, 10, 30, seed=2, composites=0, noise_len=0)
    by_label = {}
    for utt, lab in ds.records:
        by_label.setdefault(lab, []).append(set(utt))
    sigs = {lab: set.intersection(*sets) for lab, sets in by_label.items()}
    labels = list(sigs)
    assert sigs[labels[0]].isdisjoint(sigs[labels[1]])


def test_generator_validation_errors():
    with pytest.raises(ValueError):
        data.generate_synthetic_intents(1, 5, 30, seed=0)
    with pytest.raises(ValueError):
        data.generate_synthetic_intents(4, 5, 30, seed=0, composites=4)
    with pytest.raises(ValueError):
        data.generate_synthetic_intents(8, 5, 10, seed=0, composites=0)


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def _sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_cli_gen_data_deterministic(tmp_path):
    out1, out2 = tmp_path / "a.tsv", tmp_path / "b.tsv"
    base = ["gen-data", "--classes", "4", "--per-class", "5",
            "--vocab-size", "30", "--composites", "1", "--seed", "9"]
    assert cli.main(base + ["--out", str(out1)]) == 0
    assert cli.main(base + ["--out", str(out2)]) == 0
    assert _sha(out1) == _sha(out2)
    ds = data.load_intent_dataset(out1)
    assert len(ds.records) == 20


def test_cli_train_embeddings_and_convert(tmp_path, caplog):
    corpus = tmp_path / "corpus.txt"
    rng = np.random.default_rng(0)
    corpus.write_text("".join(chr(0x4E00 + int(i)) for i in rng.integers(0, 12, 400)),
                      encoding="utf-8")
    emb = tmp_path / "emb.txt"
    argv = ["train-embeddings", "--corpus", str(corpus), "--dim", "3",
            "--epochs", "2", "--window", "1", "--negatives", "2",
            "--seed", "1", "--out", str(emb)]
    import logging
    with caplog.at_level(logging.INFO, logger="gyronet"):
        assert cli.main(argv) == 0
    epoch_lines = [r.message for r in caplog.records if r.message.startswith("epoch")]
    assert len(epoch_lines) == 2
    for line in epoch_lines:
        fields = line.split()
        assert fields[0] == "epoch" and fields[2] == "loss"
        float(fields[3])  # parseable

    tokens, matrix, geometry = embed.read_embeddings(emb)
    assert geometry == "hyperboloid"
    assert matrix.shape[1] == 4  # dim + 1 columns
    np.testing.assert_allclose(lorentz_inner(matrix, matrix), -1.0, atol=1e-6)

    # determinism of the output file
    emb2 = tmp_path / "emb2.txt"
    assert cli.main(argv[:-1] + [str(emb2)]) == 0
    assert _sha(emb) == _sha(emb2)

    # convert round trip preserves tokens and coordinates
    ball = tmp_path / "ball.txt"
    back = tmp_path / "back.txt"
    assert cli.main(["convert", "--in", str(emb), "--out", str(ball)]) == 0
    assert cli.main(["convert", "--in", str(ball), "--out", str(back)]) == 0
    tokens_b, matrix_b, geometry_b = embed.read_embeddings(ball)
    assert geometry_b == "poincare" and tokens_b == tokens
    tokens_r, matrix_r, geometry_r = embed.read_embeddings(back)
    assert geometry_r == "hyperboloid" and tokens_r == tokens
    np.testing.assert_allclose(matrix_r, matrix, atol=1e-9)


def test_cli_convert_rejects_euclidean(tmp_path, capsys):
    path = tmp_path / "e.txt"
    embed.write_embeddings(path, ["x"], np.array([[0.1, 0.2]]), "euclidean")
    code = cli.main(["convert", "--in", str(path), "--out", str(tmp_path / "o.txt")])
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_cli_geometry_check(capsys):
    assert cli.main(["geometry-check"]) == 0
    out = capsys.readouterr().out
    names = [line.split()[1] for line in out.strip().splitlines()]
    assert len(names) == len(set(names)) == 5
    assert all("PASS" in line for line in out.strip().splitlines())


def test_cli_unknown_command(capsys):
    assert cli.main(["frobnicate"]) == 2
    assert "unknown command" in capsys.readouterr().err


def test_cli_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("classes=3\nper-class=4\nvocab-size=30\ncomposites=1\nseed=2\n", encoding="utf-8")
    out = tmp_path / "d.tsv"
    assert cli.main(["gen-data", "--config", str(cfg), "--out", str(out)]) == 0
    ds = data.load_intent_dataset(out)
    assert len(ds.records) == 12 and len(ds.label_to_id) == 3
    # explicit flags win over the config file
    out2 = tmp_path / "d2.tsv"
    assert cli.main(["gen-data", "--config", str(cfg), "--classes", "4",
                     "--out", str(out2)]) == 0
    assert len(data.load_intent_dataset(out2).label_to_id) == 4


def test_cli_config_file_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("classez=3\n", encoding="utf-8")
    code = cli.main(["gen-data", "--config", str(cfg), "--out", str(tmp_path / "x")])
    assert code == 1
    assert "unknown config key" in capsys.readouterr().err


def test_cli_classifier_train_evaluate_round_trip(tmp_path):
    # tiny end-to-end: gen-data -> train-embeddings -> train-classifier -> evaluate
    dataset = tmp_path / "d.tsv"
    assert cli.main(["gen-data", "--classes", "3", "--per-class", "8",
                     "--vocab-size", "30", "--composites", "1", "--seed", "4",
                     "--out", str(dataset)]) == 0
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("".join(u for u, _ in data.load_intent_dataset(dataset).records),
                      encoding="utf-8")
    emb = tmp_path / "emb.txt"
    assert cli.main(["train-embeddings", "--corpus", str(corpus), "--dim", "6",
                     "--epochs", "1", "--window", "1", "--negatives", "2",
                     "--out", str(emb)]) == 0
    model = tmp_path / "model.bin"
    argv = ["train-classifier", "--embeddings", str(emb), "--data", str(dataset),
            "--epochs", "2", "--layers", "1", "--heads", "2", "--seed", "0",
            "--out", str(model)]
    assert cli.main(argv) == 0
    metrics = json.loads((tmp_path / "model.bin.metrics.json").read_text())
    assert set(metrics) == {"accuracy", "cross_entropy", "epochs", "geometry",
                            "dims", "seed"}
    assert metrics["geometry"] == "poincare" and metrics["dims"] == 6

    # training is deterministic: byte-identical bundle on re-run
    model2 = tmp_path / "model2.bin"
    assert cli.main(argv[:-1] + [str(model2)]) == 0
    assert _sha(model) == _sha(model2)

    out_metrics = tmp_path / "eval.json"
    assert cli.main(["evaluate", "--model", str(model), "--embeddings", str(emb),
                     "--data", str(dataset), "--metrics-out", str(out_metrics)]) == 0
    report = json.loads(out_metrics.read_text())
    assert set(report) == set(metrics)
    assert report["accuracy"] == pytest.approx(metrics["accuracy"])


def test_cli_evaluate_label_mismatch(tmp_path, capsys):
    dataset = tmp_path / "d.tsv"
    assert cli.main(["gen-data", "--classes", "3", "--per-class", "6",
                     "--vocab-size", "30", "--composites", "1", "--seed", "4",
                     "--out", str(dataset)]) == 0
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("".join(u for u, _ in data.load_intent_dataset(dataset).records),
                      encoding="utf-8")
    emb = tmp_path / "emb.txt"
    assert cli.main(["train-embeddings", "--corpus", str(corpus), "--dim", "4",
                     "--epochs", "1", "--window", "1", "--negatives", "1",
                     "--out", str(emb)]) == 0
    model = tmp_path / "model.bin"
    assert cli.main(["train-classifier", "--embeddings", str(emb), "--data", str(dataset),
                     "--epochs", "1", "--layers", "1", "--heads", "2",
                     "--out", str(model)]) == 0
    other = tmp_path / "other.tsv"
    assert cli.main(["gen-data", "--classes", "4", "--per-class", "6",
                     "--vocab-size", "30", "--composites", "1", "--seed", "5",
                     "--out", str(other)]) == 0
    code = cli.main(["evaluate", "--model", str(model), "--embeddings", str(emb),
                     "--data", str(other)])
    assert code == 1
    assert "labels" in capsys.readouterr().err
