"""Transformer intent classifier in euclidean and Poincare-ball geometry.

The hyperbolic variant keeps every sequence element inside the ball: linear
maps become Mobius matrix applications, biases are gyro-added, attention runs
in the tangent space at the origin (log -> scaled dot product -> exp), heads
are merged by a left-associated gyro-sum, pooling and dropout act on tangent
coordinates, and classification uses hyperbolic multinomial logistic
regression.  The euclidean variant is the same network with flat operations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import diffcore as dc
from . import diffgeom as dg

GEOMETRIES = ("euclidean", "poincare")


@dataclass
class TransformerConfig:
    geometry: str = "poincare"
    model_dim: int = 16
    num_layers: int = 2
    num_heads: int = 4
    head_dim: int = 4
    ffn_dim: int = 32
    num_classes: int = 8
    dropout: float = 0.0
    max_seq_len: int = 64
    curvature: float = 1.0
    pe_scale: float = 1.0
    use_residual: bool = False

    def __post_init__(self):
        if self.geometry not in GEOMETRIES:
            raise ValueError(f"unknown geometry '{self.geometry}'")
        if self.num_layers < 1:
            raise ValueError("need at least one layer")
        if not (0.0 <= self.dropout < 1.0):
            raise ValueError("dropout must be in [0, 1)")

    @property
    def proj_dim(self):
        # width of the concatenated heads
        return self.num_heads * self.head_dim

    def to_dict(self):
        return {
            "geometry": self.geometry,
            "model_dim": str(self.model_dim),
            "num_layers": str(self.num_layers),
            "num_heads": str(self.num_heads),
            "head_dim": str(self.head_dim),
            "ffn_dim": str(self.ffn_dim),
            "num_classes": str(self.num_classes),
            "dropout": f"{self.dropout:g}",
            "max_seq_len": str(self.max_seq_len),
            "curvature": f"{self.curvature:g}",
            "pe_scale": f"{self.pe_scale:g}",
            "use_residual": "1" if self.use_residual else "0",
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            geometry=d["geometry"],
            model_dim=int(d["model_dim"]),
            num_layers=int(d["num_layers"]),
            num_heads=int(d["num_heads"]),
            head_dim=int(d["head_dim"]),
            ffn_dim=int(d["ffn_dim"]),
            num_classes=int(d["num_classes"]),
            dropout=float(d["dropout"]),
            max_seq_len=int(d["max_seq_len"]),
            curvature=float(d["curvature"]),
            pe_scale=float(d["pe_scale"]),
            use_residual=d["use_residual"] == "1",
        )


def positional_encoding(pos, d):
    """Sinusoidal encoding of one position: sin on even slots, cos on odd."""
    pe = np.zeros(d)
    for i in range(0, d, 2):
        angle = pos / (10000.0 ** (i / d))
        pe[i] = np.sin(angle)
        if i + 1 < d:
            pe[i + 1] = np.cos(angle)
    return pe


def positional_encoding_matrix(length, d):
    return np.stack([positional_encoding(p, d) for p in range(length)])


def init_params(config: TransformerConfig, rng, gain=1.0):
    """Fresh parameter arrays.  Manifold-valued parameters (hyperbolic biases,
    MLR offsets, the UNK embedding point) start at the origin.

    Weight matrices use std = gain / sqrt(fan_out): for ``y = x @ W`` this
    keeps ||y|| close to ||x||, which matters on the ball where a shrinking
    norm chain collapses every point toward the origin.
    """

    def matrix(fan_in, fan_out):
        return rng.normal(0.0, gain / math.sqrt(fan_out), (fan_in, fan_out))

    n, pd = config.model_dim, config.proj_dim
    params: dict[str, np.ndarray] = {}
    for i in range(config.num_layers):
        for tag in ("wq", "wk", "wv"):
            params[f"layer{i}.{tag}"] = matrix(n, pd)
        params[f"layer{i}.merge"] = rng.normal(
            0.0, gain / math.sqrt(n), (config.num_heads, config.head_dim, n))
        params[f"layer{i}.ffn_w1"] = matrix(n, config.ffn_dim)
        params[f"layer{i}.ffn_w2"] = matrix(config.ffn_dim, n)
        params[f"layer{i}.ffn_b1"] = np.zeros(config.ffn_dim)
        params[f"layer{i}.ffn_b2"] = np.zeros(n)
    params["unk"] = np.zeros(n)
    if config.geometry == "poincare":
        params["mlr_a"] = rng.normal(0.0, gain / math.sqrt(n), (config.num_classes, n))
        params["mlr_p"] = np.zeros((config.num_classes, n))
    else:
        params["out_w"] = matrix(n, config.num_classes)
        params["out_b"] = np.zeros(config.num_classes)
    return params


def manifold_param_names(config: TransformerConfig):
    """Parameters that live on the ball and take Riemannian SGD updates."""
    if config.geometry != "poincare":
        return set()
    names = {"mlr_p", "unk"}
    for i in range(config.num_layers):
        names.add(f"layer{i}.ffn_b1")
        names.add(f"layer{i}.ffn_b2")
    return names


# ---------------------------------------------------------------------------
# Building blocks (operate on diffcore tensors)
# ---------------------------------------------------------------------------

def attach_positions(x, pe, config):
    """Add positional information: gyro-addition of exp_0(PE) on the ball,
    plain addition in euclidean mode.  ``pe`` is a constant tensor."""
    if config.geometry == "poincare":
        return dg.mobius_add(x, dg.expmap0(pe, config.curvature), config.curvature)
    return x + pe


def scaled_dot_attention(q, k, v, mask_bias):
    """softmax(q k^T / sqrt(d_k) + mask) v on tangent/euclidean coordinates."""
    d_k = q.shape[-1]
    if d_k == 0:
        raise ValueError("attention requires d_k > 0")
    logits = dc.matmul(q, dc.swap_last(k)) * (1.0 / math.sqrt(d_k))
    if mask_bias is not None:
        logits = logits + mask_bias
    weights = dc.softmax(logits, axis=-1)
    return dc.matmul(weights, v)


def hyperbolic_attention(q, k, v, mask_bias, c=1.0):
    """Tangent-space attention between ball points: log -> attend -> exp."""
    out = scaled_dot_attention(dg.logmap0(q, c), dg.logmap0(k, c), dg.logmap0(v, c), mask_bias)
    return dg.expmap0(out, c)


def split_heads(y, num_heads, head_dim, c=None):
    """Slice a concatenated projection into per-head blocks.

    For ball points each block is re-clamped into its own ball (a coordinate
    slice can only shrink the norm, so this is a no-op except at the shell).
    """
    heads = []
    for i in range(num_heads):
        h = y[..., i * head_dim:(i + 1) * head_dim]
        if c is not None:
            h = dg.project(h, c)
        heads.append(h)
    return heads


def merge_heads(heads, merge_w, geometry, c=1.0):
    """Project each head back to model width and combine.

    Hyperbolic mode gyro-adds the per-head results left-associated in
    ascending head order; the order is part of the contract because
    gyro-addition is not associative.  Euclidean mode sums.
    """
    parts = []
    for i, h in enumerate(heads):
        w_i = merge_w[i]
        if geometry == "poincare":
            parts.append(dg.mobius_matvec(h, w_i, c))
        else:
            parts.append(dc.matmul(h, w_i))
    out = parts[0]
    for p in parts[1:]:
        out = dg.mobius_add(out, p, c) if geometry == "poincare" else out + p
    return out


def hyperbolic_ffn(x, w1, b1, w2, b2, c=1.0):
    """Two-layer feed-forward on the ball with a lifted ReLU in between."""
    h = dg.mobius_add(dg.mobius_matvec(x, w1, c), b1, c)
    h = dg.lift_relu(h, c)
    return dg.mobius_add(dg.mobius_matvec(h, w2, c), b2, c)


def euclidean_ffn(x, w1, b1, w2, b2):
    return dc.matmul(dc.relu(dc.matmul(x, w1) + b1), w2) + b2


def tangent_dropout(x, rate, rng, training, geometry, c=1.0):
    """Inverted dropout on tangent coordinates (ball) or raw coordinates
    (euclidean); identity in eval mode."""
    if not training or rate <= 0.0:
        return x
    keep = (rng.random(x.shape) >= rate).astype(float) / (1.0 - rate)
    mask = x.tape.constant(keep)
    if geometry == "poincare":
        return dg.expmap0(dg.logmap0(x, c) * mask, c)
    return x * mask


def pooled_representation(x, mask_keep, geometry, c=1.0):
    """Coordinate-wise max over unmasked positions, taken in the tangent
    space at the origin for ball inputs.  ``mask_keep``: constant (..., L, 1),
    1 for real positions."""
    t = dg.logmap0(x, c) if geometry == "poincare" else x
    neg = (1.0 - mask_keep) * (-1e30)
    pooled = dc.tmax(t + neg, axis=-2, keepdims=False)
    if geometry == "poincare":
        return dg.expmap0(pooled, c)
    return pooled


def classifier_forward(tape, params, points, mask, config: TransformerConfig,
                       rng=None, training=False):
    """Run the full classifier.

    ``params``: dict of parameter tensors on ``tape``; ``points``: tensor of
    sequence points (B, L, n); ``mask``: numpy array (B, L) with 1 for real
    tokens.  Returns the class-score tensor (B, K); apply
    :func:`dc.softmax` for probabilities.
    """
    mask = np.asarray(mask, dtype=float)
    if not np.all(mask.sum(axis=-1) >= 1):
        raise ValueError("every sequence needs at least one unmasked position")
    c = config.curvature
    length = points.shape[-2]
    pe = tape.constant(config.pe_scale * positional_encoding_matrix(length, config.model_dim))
    mask_bias = tape.constant((-1e9) * (1.0 - mask)[..., None, :])  # (B, 1, L)
    mask_keep = tape.constant(mask[..., None])  # (B, L, 1)

    x = attach_positions(points, pe, config)
    if rng is None:
        rng = np.random.default_rng(0)
    for i in range(config.num_layers):
        wq, wk, wv = (params[f"layer{i}.{t}"] for t in ("wq", "wk", "wv"))
        if config.geometry == "poincare":
            q = dg.mobius_matvec(x, wq, c)
            k = dg.mobius_matvec(x, wk, c)
            v = dg.mobius_matvec(x, wv, c)
            ball = c
        else:
            q, k, v = dc.matmul(x, wq), dc.matmul(x, wk), dc.matmul(x, wv)
            ball = None
        q_h = split_heads(q, config.num_heads, config.head_dim, ball)
        k_h = split_heads(k, config.num_heads, config.head_dim, ball)
        v_h = split_heads(v, config.num_heads, config.head_dim, ball)
        outs = []
        for qi, ki, vi in zip(q_h, k_h, v_h):
            if config.geometry == "poincare":
                outs.append(hyperbolic_attention(qi, ki, vi, mask_bias, c))
            else:
                outs.append(scaled_dot_attention(qi, ki, vi, mask_bias))
        merged = merge_heads(outs, [params[f"layer{i}.merge"][j] for j in range(config.num_heads)],
                             config.geometry, c)
        if config.use_residual:
            merged = (dg.mobius_add(x, merged, c) if config.geometry == "poincare"
                      else x + merged)
        merged = tangent_dropout(merged, config.dropout, rng, training, config.geometry, c)
        if config.geometry == "poincare":
            ff = hyperbolic_ffn(merged, params[f"layer{i}.ffn_w1"], params[f"layer{i}.ffn_b1"],
                                params[f"layer{i}.ffn_w2"], params[f"layer{i}.ffn_b2"], c)
        else:
            ff = euclidean_ffn(merged, params[f"layer{i}.ffn_w1"], params[f"layer{i}.ffn_b1"],
                               params[f"layer{i}.ffn_w2"], params[f"layer{i}.ffn_b2"])
        if config.use_residual:
            ff = (dg.mobius_add(merged, ff, c) if config.geometry == "poincare"
                  else merged + ff)
        x = tangent_dropout(ff, config.dropout, rng, training, config.geometry, c)

    pooled = pooled_representation(x, mask_keep, config.geometry, c)
    if config.geometry == "poincare":
        scores = dg.mlr_scores(pooled, params["mlr_a"], params["mlr_p"], c)
    else:
        scores = dc.matmul(pooled, params["out_w"]) + params["out_b"]
    return scores


def embed_sequences(tape, base_points, unk_mask, unk_param):
    """Combine frozen embedding points with the trainable UNK point.

    ``base_points``: numpy (B, L, n) with zeros at UNK slots; ``unk_mask``:
    numpy (B, L, 1) flags; ``unk_param``: parameter tensor of shape (n,).
    """
    base = tape.constant(base_points)
    flags = tape.constant(np.asarray(unk_mask, dtype=float))
    return base + flags * unk_param


def cross_entropy(scores, labels):
    """Mean negative log-likelihood of integer labels under softmaxed scores."""
    tape = scores.tape
    b, k = scores.shape
    onehot = np.zeros((b, k))
    onehot[np.arange(b), np.asarray(labels, dtype=int)] = 1.0
    m = dc.tmax(scores, axis=-1, keepdims=True)
    lse = m + dc.log(dc.tsum(dc.exp(scores - m), axis=-1, keepdims=True))
    logp = scores - lse
    picked = dc.tsum(tape.constant(onehot) * logp)
    return -picked * (1.0 / b)
