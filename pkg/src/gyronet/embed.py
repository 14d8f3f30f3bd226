"""Skip-gram with negative sampling, in euclidean space and on the hyperboloid.

The hyperboloid variant scores a (center, context) pair with the Lorentzian
inner product plus an additive shift theta and is trained with Riemannian SGD:
explicit Minkowski gradients are projected onto tangent spaces and steps are
taken along the exponential map, so every embedding row stays on the manifold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    exp_map_hyperboloid,
    hyperboloid_renormalize,
    lorentz_inner,
    tangent_project,
)

GEOMETRIES = ("euclidean", "hyperboloid")


def tokenize(text):
    """Character tokenization: one token per Unicode scalar value."""
    return list(text)


def detokenize(tokens):
    return "".join(tokens)


class Vocabulary:
    """Token table with a unigram^alpha negative-sampling distribution."""

    def __init__(self, token_to_id, id_to_token, counts, alpha=0.75):
        self.token_to_id = token_to_id
        self.id_to_token = id_to_token
        self.counts = np.asarray(counts, dtype=float)
        self.alpha = alpha
        weights = self.counts ** alpha
        self.sampling_probs = weights / weights.sum()
        self._cum = np.cumsum(self.sampling_probs)

    def __len__(self):
        return len(self.id_to_token)

    def __contains__(self, token):
        return token in self.token_to_id

    def encode(self, tokens):
        """Map tokens to ids, silently dropping out-of-vocabulary tokens."""
        t2i = self.token_to_id
        return [t2i[t] for t in tokens if t in t2i]

    def sample_negatives(self, m, rng):
        return np.searchsorted(self._cum, rng.random(m)).tolist()


def build_vocab(tokens, min_count=1, alpha=0.75):
    counts: dict[str, int] = {}
    for t in tokens:
        counts[t] = counts.get(t, 0) + 1
    kept = sorted((t for t, n in counts.items() if n >= min_count))
    if not kept:
        raise ValueError("empty vocabulary after min_count filtering")
    id_to_token = list(kept)
    token_to_id = {t: i for i, t in enumerate(id_to_token)}
    return Vocabulary(token_to_id, id_to_token, [counts[t] for t in id_to_token], alpha)


@dataclass
class TrainingPair:
    center: int
    context: int
    negatives: list[int]


def generate_pairs(ids, mu, m, vocab, rng):
    """Yield one TrainingPair per (position, in-window offset).

    Negatives are drawn i.i.d. from the unigram^alpha table and resampled
    (up to 10 tries) when they collide with the positive context token.
    """
    if mu < 1:
        raise ValueError("window radius mu must be >= 1")
    n = len(ids)
    for k in range(n):
        for j in range(-mu, mu + 1):
            if j == 0:
                continue
            pos = k + j
            if pos < 0 or pos >= n:
                continue
            context = ids[pos]
            negs = vocab.sample_negatives(m, rng)
            for i in range(m):
                tries = 0
                while negs[i] == context and tries < 10:
                    negs[i] = vocab.sample_negatives(1, rng)[0]
                    tries += 1
            yield TrainingPair(ids[k], context, negs)


@dataclass
class EmbeddingMatrices:
    A: np.ndarray  # center representations, one row per token
    B: np.ndarray  # context representations
    geometry: str
    dim: int  # manifold dimension n (hyperboloid rows carry n+1 coordinates)


def init_embeddings(vocab_size, dim, geometry, rng):
    if geometry == "euclidean":
        a = (rng.random((vocab_size, dim)) - 0.5) / dim
        b = (rng.random((vocab_size, dim)) - 0.5) / dim
    elif geometry == "hyperboloid":
        a = _random_hyperboloid_rows(vocab_size, dim, rng)
        b = _random_hyperboloid_rows(vocab_size, dim, rng)
    else:
        raise ValueError(f"unknown geometry '{geometry}'")
    return EmbeddingMatrices(a, b, geometry, dim)


def _random_hyperboloid_rows(count, dim, rng, sigma=0.01):
    # gaussian tangent vectors at the apex, pushed through the exponential map
    origin = np.zeros(dim + 1)
    origin[-1] = 1.0
    tangents = np.concatenate(
        [rng.normal(0.0, sigma, (count, dim)), np.zeros((count, 1))], axis=-1
    )
    return exp_map_hyperboloid(origin, tangents)


def hyperboloid_logit(a, b, theta):
    """Lorentzian inner product with an additive shift."""
    return lorentz_inner(a, b) + theta


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def _pair_logits(pair, E, theta):
    rows = E.B[[pair.context] + list(pair.negatives)]
    if E.geometry == "hyperboloid":
        return hyperboloid_logit(E.A[pair.center], rows, theta), rows
    return rows @ E.A[pair.center], rows


def pair_log_likelihood(pair, E, theta=1.0):
    """Sum of log sigma((-1)^(1-y) * logit) over the positive and negatives."""
    logits, _ = _pair_logits(pair, E, theta)
    if not np.all(np.isfinite(logits)):
        raise ValueError("non-finite logit in pair_log_likelihood")
    signs = np.full(len(logits), -1.0)
    signs[0] = 1.0
    # log sigma(s*z), computed stably
    return float(np.sum(-np.logaddexp(0.0, -signs * logits)))


def minkowski_gradients(pair, E, theta=1.0):
    """Minkowski gradients of the pair log-likelihood (hyperboloid geometry).

    Returns (grad for the center row of A, {token id: grad for that row of B}).
    Repeated sample tokens accumulate, matching the multiplicity factor of the
    closed-form expression.  The Lorentzian structure already accounts for the
    time-coordinate sign relative to plain euclidean partials.
    """
    if E.geometry != "hyperboloid":
        raise ValueError("minkowski_gradients requires hyperboloid geometry")
    logits, rows = _pair_logits(pair, E, theta)
    ys = np.zeros(len(logits))
    ys[0] = 1.0
    coeff = ys - _sigmoid(logits)  # (m+1,)
    grad_a = coeff @ rows
    grads_b: dict[int, np.ndarray] = {}
    center_row = E.A[pair.center]
    sample_ids = [pair.context] + list(pair.negatives)
    for wid, ci in zip(sample_ids, coeff):
        if wid in grads_b:
            grads_b[wid] = grads_b[wid] + ci * center_row
        else:
            grads_b[wid] = ci * center_row
    return grad_a, grads_b


def euclidean_gradients(pair, E):
    """Euclidean analogue: gradients of the plain dot-product log-likelihood."""
    logits, rows = _pair_logits(pair, E, 0.0)
    ys = np.zeros(len(logits))
    ys[0] = 1.0
    coeff = ys - _sigmoid(logits)
    grad_a = coeff @ rows
    grads_b: dict[int, np.ndarray] = {}
    center_row = E.A[pair.center]
    for wid, ci in zip([pair.context] + list(pair.negatives), coeff):
        if wid in grads_b:
            grads_b[wid] = grads_b[wid] + ci * center_row
        else:
            grads_b[wid] = ci * center_row
    return grad_a, grads_b


def rsgd_step_hyperboloid(param, ambient_grad, eta):
    """exp_param(-eta * proj_param(grad)), renormalized onto the hyperboloid."""
    grad = np.asarray(ambient_grad, dtype=float)
    if not np.all(np.isfinite(grad)):
        raise ValueError("non-finite gradient in rsgd_step_hyperboloid")
    step = -eta * tangent_project(param, grad)
    return hyperboloid_renormalize(exp_map_hyperboloid(param, step))


@dataclass
class SkipgramConfig:
    geometry: str = "hyperboloid"
    dim: int = 10
    mu: int = 5
    m: int = 5
    theta: float = 1.0
    lr: float = 0.05
    epochs: int = 10
    seed: int = 0
    min_count: int = 1
    alpha: float = 0.75
    subsample: float = 0.0  # frequency subsampling threshold; 0 disables


def train_skipgram(tokens, config: SkipgramConfig, log_fn=None):
    """Train skip-gram embeddings; deterministic for a fixed seed.

    Returns (EmbeddingMatrices, Vocabulary, per-epoch mean NLL history).
    """
    if config.geometry not in GEOMETRIES:
        raise ValueError(f"unknown geometry '{config.geometry}'")
    tokens = list(tokens)
    vocab = build_vocab(tokens, min_count=config.min_count, alpha=config.alpha)
    ids = vocab.encode(tokens)
    if not ids:
        raise ValueError("corpus empty after vocabulary filtering")
    rng = np.random.default_rng(config.seed)
    E = init_embeddings(len(vocab), config.dim, config.geometry, rng)
    history = []
    for epoch in range(config.epochs):
        epoch_ids = ids
        if config.subsample > 0.0:
            freqs = vocab.counts / vocab.counts.sum()
            keep = np.sqrt(config.subsample / freqs).clip(max=1.0)
            draws = rng.random(len(ids))
            epoch_ids = [w for w, u in zip(ids, draws) if u < keep[w]]
        loss_sum = 0.0
        count = 0
        for step, pair in enumerate(generate_pairs(epoch_ids, config.mu, config.m, vocab, rng)):
            nll = -pair_log_likelihood(pair, E, config.theta)
            if not np.isfinite(nll):
                raise ValueError(f"divergence (non-finite loss) at epoch {epoch} step {step}")
            loss_sum += nll
            count += 1
            if config.geometry == "hyperboloid":
                ga, gbs = minkowski_gradients(pair, E, config.theta)
                E.A[pair.center] = rsgd_step_hyperboloid(E.A[pair.center], -ga, config.lr)
                for wid, gb in gbs.items():
                    E.B[wid] = rsgd_step_hyperboloid(E.B[wid], -gb, config.lr)
            else:
                ga, gbs = euclidean_gradients(pair, E)
                E.A[pair.center] = E.A[pair.center] + config.lr * ga
                for wid, gb in gbs.items():
                    E.B[wid] = E.B[wid] + config.lr * gb
        mean = loss_sum / max(count, 1)
        history.append(mean)
        if log_fn is not None:
            log_fn(f"epoch {epoch} loss {mean:.6f}")
    return E, vocab, history


# ---------------------------------------------------------------------------
# Embedding text format
# ---------------------------------------------------------------------------

def write_embeddings(path, tokens, matrix, geometry):
    """Text format: header "<vocab_size> <dim> <geometry>", then one row per
    token with 9-significant-digit coordinates."""
    matrix = np.asarray(matrix, dtype=float)
    dim = matrix.shape[1] - 1 if geometry == "hyperboloid" else matrix.shape[1]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{len(tokens)} {dim} {geometry}\n")
        for token, row in zip(tokens, matrix):
            coords = " ".join(f"{v:.9g}" for v in row)
            fh.write(f"{token} {coords}\n")


def read_embeddings(path):
    """Inverse of :func:`write_embeddings`; returns (tokens, matrix, geometry)."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ValueError(f"{path}: malformed embedding header")
        size, dim, geometry = int(header[0]), int(header[1]), header[2]
        cols = dim + 1 if geometry == "hyperboloid" else dim
        tokens = []
        rows = np.empty((size, cols))
        for i in range(size):
            line = fh.readline().rstrip("\n")
            if not line:
                raise ValueError(f"{path}: truncated at row {i}")
            fields = line.split(" ")
            token = " ".join(fields[: len(fields) - cols])
            tokens.append(token)
            rows[i] = [float(v) for v in fields[len(fields) - cols:]]
    return tokens, rows, geometry
