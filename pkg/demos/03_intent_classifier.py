"""End-to-end intent classification, hyperbolic vs euclidean.

Generates a small synthetic intent dataset (including composite "a+b"
intents), trains character embeddings and a transformer classifier in both
geometries under the identical harness, and prints the held-out metrics side
by side.  A desk-scale version of the full pipeline; the same flow is
available from the command line via `gyronet gen-data / train-embeddings /
train-classifier / evaluate`.

Run:  python3 demos/03_intent_classifier.py   (about a minute)
"""

import tempfile
from pathlib import Path

from gyronet import data, embed, train
from gyronet.hypformer import TransformerConfig


def run(geometry, dataset, corpus, workdir):
    emb_geometry = "hyperboloid" if geometry == "poincare" else "euclidean"
    emb_cfg = embed.SkipgramConfig(geometry=emb_geometry, dim=12, mu=1, m=2,
                                   epochs=2, seed=0)
    E, vocab, _ = embed.train_skipgram(corpus, emb_cfg)
    emb_path = workdir / f"emb-{emb_geometry}.txt"
    embed.write_embeddings(emb_path, vocab.id_to_token, E.A, emb_geometry)
    token_map = train.load_embedding_points(emb_path, geometry)

    config = TransformerConfig(geometry=geometry, model_dim=12, num_layers=2,
                               num_heads=3, head_dim=4, ffn_dim=24,
                               num_classes=len(dataset.label_to_id))
    settings = train.TrainSettings(epochs=30, batch_size=16, seed=0)
    print(f"-- training {geometry} classifier --")
    params, history = train.train_classifier(
        dataset, token_map, config, settings,
        log_fn=lambda msg: print("   " + msg) if "restart" in msg
        or msg.startswith(("epoch 0 ", "epoch 14 ", "epoch 29 ")) else None)
    return train.evaluate_classifier(dataset, dataset.heldout_indices,
                                     token_map, params, config)


def main():
    dataset = data.generate_synthetic_intents(
        num_classes=6, per_class=30, vocab_size=40, seed=3, composites=2,
        holdout_fraction=0.2)
    print(f"{len(dataset.records)} utterances over {len(dataset.label_to_id)} "
          f"intents ({len(dataset.train_indices)} train / "
          f"{len(dataset.heldout_indices)} held out)")
    print("labels:", ", ".join(sorted(dataset.label_to_id)))
    sample_idx = dataset.train_indices[0]
    print(f"sample: {dataset.records[sample_idx][0]!r} -> "
          f"{dataset.records[sample_idx][1]}\n")
    corpus = [ch for utt, _ in dataset.records for ch in utt]

    with tempfile.TemporaryDirectory() as tmp:
        results = {g: run(g, dataset, corpus, Path(tmp))
                   for g in ("poincare", "euclidean")}

    print("\n== held-out metrics ==")
    print(f"{'geometry':12s} {'accuracy':>9s} {'cross-entropy':>14s}")
    for geometry, metrics in results.items():
        print(f"{geometry:12s} {metrics['accuracy']:9.3f} "
              f"{metrics['cross_entropy']:14.4f}")


if __name__ == "__main__":
    main()
