"""Character skip-gram embeddings on the hyperboloid and in euclidean space.

Builds a toy corpus with strong bigram structure and trains both geometries
with the same settings.  Characters that play the same distributional role
(pair-leading letters a, c, e, g vs pair-trailing letters b, d, f, h) end up
clustered together in each geometry's own metric, because they see the same
mix of cross-pair contexts.

Run:  python3 demos/02_skipgram_embeddings.py
"""

import numpy as np

from gyronet import embed
from gyronet.geometry import hyperboloid_distance


def make_corpus(rng, length=4000):
    """Characters come in bonded pairs: 'ab', 'cd', 'ef', ... are frequent
    bigrams, so each character's best context is its partner."""
    pairs = ["ab", "cd", "ef", "gh"]
    return [ch for i in rng.integers(0, len(pairs), size=length // 2)
            for ch in pairs[i]]


def nearest(E, vocab, token, metric):
    i = vocab.token_to_id[token]
    dists = [(metric(E.A[i], E.A[j]), vocab.id_to_token[j])
             for j in range(len(vocab)) if j != i]
    return sorted(dists)


def main():
    rng = np.random.default_rng(0)
    corpus = make_corpus(rng)
    print(f"corpus: {len(corpus)} characters, e.g. {''.join(corpus[:24])}...\n")

    for geometry in ("hyperboloid", "euclidean"):
        cfg = embed.SkipgramConfig(geometry=geometry, dim=5, mu=1, m=3,
                                   epochs=5, lr=0.05, seed=1)
        E, vocab, history = embed.train_skipgram(corpus, cfg)
        print(f"== {geometry} (d={cfg.dim}) ==")
        print("epoch losses:", " ".join(f"{h:.4f}" for h in history))
        if geometry == "hyperboloid":
            metric = hyperboloid_distance
        else:
            metric = lambda u, v: float(np.linalg.norm(u - v))
        for token in ("a", "c"):
            ranked = nearest(E, vocab, token, metric)
            line = ", ".join(f"{t}:{d:.3f}" for d, t in ranked)
            print(f"distances from '{token}': {line}")
        print()


if __name__ == "__main__":
    main()
