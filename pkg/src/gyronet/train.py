"""Training and evaluation harness for the transformer intent classifier.

Hyperboloid embedding files are converted into the Poincare ball on load;
euclidean embedding files feed the euclidean model.  Matrices (and MLR
normals) are updated with RMSProp; ball-valued parameters (hyperbolic biases,
MLR offsets, the UNK point) are updated with Riemannian SGD on the ball.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import diffcore as dc
from . import diffgeom as dg
from .embed import read_embeddings
from .geometry import project_to_ball, to_poincare
from .hypformer import (
    TransformerConfig,
    classifier_forward,
    cross_entropy,
    embed_sequences,
    init_params,
    manifold_param_names,
)
from .optim import RestartSchedule, RmsProp, rsgd_step_poincare


@dataclass
class TrainSettings:
    epochs: int = 50
    batch_size: int = 16
    seed: int = 0
    lr: float = 0.001  # RMSProp rate for euclidean parameters
    manifold_lr: float = 0.05  # Riemannian SGD rate for ball parameters
    restart_epoch: int | None = None  # default: epoch midpoint
    rmsprop_rho: float = 0.9
    rmsprop_eps: float = 1e-8


class TokenMap:
    """Token -> embedding-point lookup with a trainable UNK fallback."""

    def __init__(self, tokens, points):
        self.token_to_row = {t: i for i, t in enumerate(tokens)}
        self.points = np.asarray(points, dtype=float)
        self.dim = self.points.shape[1]

    def encode(self, utterance, max_len):
        chars = list(utterance)[:max_len]
        rows = np.zeros((len(chars), self.dim))
        unk = np.zeros(len(chars))
        for i, ch in enumerate(chars):
            row = self.token_to_row.get(ch)
            if row is None:
                unk[i] = 1.0
            else:
                rows[i] = self.points[row]
        return rows, unk


def load_embedding_points(path, classifier_geometry):
    """Load an embedding file and adapt it to the classifier geometry."""
    tokens, matrix, geometry = read_embeddings(path)
    if classifier_geometry == "poincare":
        if geometry == "hyperboloid":
            matrix = project_to_ball(to_poincare(matrix))
        elif geometry == "poincare":
            matrix = project_to_ball(matrix)
        else:
            raise ValueError(
                "euclidean embeddings cannot feed the hyperbolic classifier; "
                "train hyperboloid embeddings or use --geometry euclidean"
            )
    elif classifier_geometry == "euclidean":
        if geometry != "euclidean":
            raise ValueError(
                f"{geometry} embeddings cannot feed the euclidean classifier"
            )
    else:
        raise ValueError(f"unknown classifier geometry '{classifier_geometry}'")
    return TokenMap(tokens, matrix)


def _batches(indices, batch_size):
    for i in range(0, len(indices), batch_size):
        yield indices[i:i + batch_size]


def _build_batch(records, indices, token_map, max_len):
    encoded = [token_map.encode(records[i][0], max_len) for i in indices]
    length = max(max(len(rows) for rows, _ in encoded), 1)
    n = token_map.dim
    points = np.zeros((len(indices), length, n))
    unk = np.zeros((len(indices), length, 1))
    mask = np.zeros((len(indices), length))
    for j, (rows, flags) in enumerate(encoded):
        points[j, :len(rows)] = rows
        unk[j, :len(rows), 0] = flags
        mask[j, :len(rows)] = 1.0
    return points, unk, mask


def _forward_batch(params_np, points_np, unk_np, mask, labels, config,
                   rng=None, training=False):
    tape = dc.Tape()
    tensors = {name: tape.leaf(value, requires_grad=True, name=name)
               for name, value in params_np.items()}
    pts = embed_sequences(tape, points_np, unk_np, tensors["unk"])
    if config.geometry == "poincare":
        # UNK substitution is additive on coordinates; clamp keeps it a ball point
        pts = dg.project(pts, config.curvature)
    scores = classifier_forward(tape, tensors, pts, mask, config,
                                rng=rng, training=training)
    loss = cross_entropy(scores, labels) if labels is not None else None
    return tape, tensors, scores, loss


def train_classifier(dataset, token_map, config: TransformerConfig,
                     settings: TrainSettings, log_fn=None):
    """Train on the dataset's training split; returns (params, history).

    ``history`` is a list of per-epoch dicts with the mean train loss and
    train accuracy.  Deterministic for fixed seeds.
    """
    rng = np.random.default_rng(settings.seed)
    params = init_params(config, rng)
    manifold = manifold_param_names(config)
    opt = RmsProp(lr=settings.lr, rho=settings.rmsprop_rho, eps=settings.rmsprop_eps)
    restart_epoch = settings.restart_epoch
    if restart_epoch is None:
        restart_epoch = settings.epochs // 2
    schedule = RestartSchedule(restart_epoch)
    records = dataset.records
    label_to_id = dataset.label_to_id
    train_idx = np.array(dataset.train_indices)
    history = []
    for epoch in range(settings.epochs):
        if schedule.apply(epoch, [opt]) and log_fn:
            log_fn(f"epoch {epoch} restart lr {opt.lr:g}")
        order = train_idx.copy()
        rng.shuffle(order)
        loss_sum = 0.0
        correct = 0
        for batch in _batches(order.tolist(), settings.batch_size):
            points_np, unk_np, mask = _build_batch(records, batch, token_map, config.max_seq_len)
            labels = np.array([label_to_id[records[i][1]] for i in batch])
            tape, tensors, scores, loss = _forward_batch(
                params, points_np, unk_np, mask, labels, config,
                rng=rng, training=True)
            grads = dc.backward(tape, loss)
            for name in sorted(params):
                g = grads[tensors[name]]
                if name in manifold:
                    params[name] = rsgd_step_poincare(
                        params[name], g, settings.manifold_lr, config.curvature)
                else:
                    params[name] = opt.step(name, params[name], g)
            loss_sum += float(loss.value) * len(batch)
            correct += int(np.sum(np.argmax(scores.value, axis=-1) == labels))
        entry = {
            "epoch": epoch,
            "train_loss": loss_sum / len(order),
            "train_accuracy": correct / len(order),
        }
        history.append(entry)
        if log_fn:
            log_fn(f"epoch {epoch} loss {entry['train_loss']:.6f} "
                   f"acc {entry['train_accuracy']:.4f}")
    return params, history


def evaluate_classifier(dataset, indices, token_map, params, config,
                        batch_size=32):
    """Accuracy and mean cross-entropy over the given record indices."""
    records = dataset.records
    label_to_id = dataset.label_to_id
    total, correct, ce_sum = 0, 0, 0.0
    for batch in _batches(list(indices), batch_size):
        points_np, unk_np, mask = _build_batch(records, batch, token_map, config.max_seq_len)
        labels = np.array([label_to_id[records[i][1]] for i in batch])
        _, _, scores, loss = _forward_batch(
            params, points_np, unk_np, mask, labels, config, training=False)
        ce_sum += float(loss.value) * len(batch)
        correct += int(np.sum(np.argmax(scores.value, axis=-1) == labels))
        total += len(batch)
    return {
        "accuracy": correct / total,
        "cross_entropy": ce_sum / total,
    }
