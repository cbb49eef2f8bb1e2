"""Attention-pooled softmax classifier over precomputed frame embeddings.

The trainable head is a single learned scoring vector ``w`` for
self-attention pooling followed by a linear softmax classifier ``(W, b)``.
Gradients are analytic (closed-form backprop through the pooling softmax)
and optimization uses Adam. Training supports pluggable mixup strategies:
static mixing happens on raw frames, latent mixing on pooled embeddings
with gradients flowing through both pooled branches.
"""
from __future__ import annotations

import base64
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import augment
from .corpus import Corpus
from .dynamics import DatamapResult, DynamicsLog
from .errors import ConfigurationError, DegenerateCorpusError, NumericError, SchemaError
from .labels import confidence_label, mix_labels, one_hot

PROB_FLOOR = 1e-12

LABEL_MODES = ("one_hot", "confidence")


@dataclass
class ModelParams:
    """Attention scoring vector, classifier weights, and bias."""

    w: np.ndarray  # (D,)
    W: np.ndarray  # (C, D)
    b: np.ndarray  # (C,)

    def copy(self) -> "ModelParams":
        return ModelParams(w=self.w.copy(), W=self.W.copy(), b=self.b.copy())

    def validate(self):
        if not (np.isfinite(self.w).all() and np.isfinite(self.W).all() and np.isfinite(self.b).all()):
            raise NumericError("model parameters contain non-finite values")


@dataclass
class TrainConfig:
    epochs: int = 50
    # The reference setting of 1e-5 suits fine-tuning a large encoder; the
    # desk-scale head trains with 1e-3.
    learning_rate: float = 1e-3
    alpha: float = 0.5
    batch_size: int = 32
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    strategy: str = "none"
    label_mode: str = "one_hot"
    smoothing_s: float = 0.1
    seed: int = 0

    def validate(self):
        if self.strategy not in augment.STRATEGIES:
            raise ConfigurationError(f"unknown strategy {self.strategy!r}")
        if self.label_mode not in LABEL_MODES:
            raise ConfigurationError(f"label_mode must be one of {LABEL_MODES}")
        if self.alpha <= 0:
            raise ConfigurationError("mixup alpha must be > 0")
        if not 0 <= self.smoothing_s < 1:
            raise ConfigurationError("smoothing_s must be in [0, 1)")
        if self.epochs < 0 or self.batch_size < 1:
            raise ConfigurationError("need epochs >= 0 and batch_size >= 1")
        if self.learning_rate <= 0 or self.adam_eps <= 0:
            raise ConfigurationError("learning_rate and adam_eps must be > 0")
        if not (0 <= self.adam_beta1 < 1 and 0 <= self.adam_beta2 < 1):
            raise ConfigurationError("Adam betas must be in [0, 1)")


@dataclass
class TrainOutput:
    params: ModelParams
    dynamics: DynamicsLog
    loss_curve: list[float]


@dataclass
class Gradients:
    dw: np.ndarray
    dW: np.ndarray
    db: np.ndarray


@dataclass
class AdamState:
    t: int
    m_w: np.ndarray
    v_w: np.ndarray
    m_W: np.ndarray
    v_W: np.ndarray
    m_b: np.ndarray
    v_b: np.ndarray

    @classmethod
    def zeros(cls, D: int, C: int) -> "AdamState":
        return cls(
            t=0,
            m_w=np.zeros(D),
            v_w=np.zeros(D),
            m_W=np.zeros((C, D)),
            v_W=np.zeros((C, D)),
            m_b=np.zeros(C),
            v_b=np.zeros(C),
        )


def init_params(D: int, C: int, rng: np.random.Generator) -> ModelParams:
    """Uniform(-1/sqrt(D), 1/sqrt(D)) init for w and W, zero bias."""
    bound = 1.0 / np.sqrt(D)
    return ModelParams(
        w=rng.uniform(-bound, bound, size=D),
        W=rng.uniform(-bound, bound, size=(C, D)),
        b=np.zeros(C),
    )


def _pool_parts(frames: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    scores = frames @ w
    scores = scores - scores.max()
    weights = np.exp(scores)
    weights /= weights.sum()
    return weights @ frames, weights


def attention_pool(frames: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Softmax-weighted frame average with scores ``w . h_t``."""
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 2 or frames.shape[0] < 1:
        raise SchemaError("frames must be a T x D matrix with T >= 1")
    if not np.isfinite(frames).all():
        raise NumericError("non-finite frame values")
    pooled, _ = _pool_parts(frames, np.asarray(w, dtype=np.float64))
    return pooled


def forward(pooled: np.ndarray, params: ModelParams) -> np.ndarray:
    """Class probabilities ``softmax(W . pooled + b)``, numerically stabilized."""
    logits = params.W @ np.asarray(pooled, dtype=np.float64) + params.b
    logits = logits - logits.max()
    e = np.exp(logits)
    return e / e.sum()


def loss(probs: np.ndarray, label: np.ndarray) -> float:
    """Soft-label cross-entropy with probabilities clamped below at 1e-12."""
    return float(-(np.asarray(label) * np.log(np.maximum(probs, PROB_FLOOR))).sum())


def _pool_grad_w(frames: np.ndarray, weights: np.ndarray, pooled: np.ndarray, g: np.ndarray) -> np.ndarray:
    # d(pooled . g)/dw through the attention softmax.
    frame_scores = frames @ g
    ds = weights * (frame_scores - pooled @ g)
    return frames.T @ ds


def _accumulate_item(item: tuple, params: ModelParams, acc: Gradients) -> float:
    kind = item[0]
    if kind == "pooled":
        _, pooled, label = item
        probs = forward(pooled, params)
        delta = probs - label
        acc.db += delta
        acc.dW += np.outer(delta, pooled)
        return loss(probs, label)
    if kind == "frames":
        _, frames, label = item
        pooled, weights = _pool_parts(frames, params.w)
        probs = forward(pooled, params)
        delta = probs - label
        acc.db += delta
        acc.dW += np.outer(delta, pooled)
        acc.dw += _pool_grad_w(frames, weights, pooled, params.W.T @ delta)
        return loss(probs, label)
    if kind == "latent":
        _, frames_i, frames_j, lam, label = item
        pooled_i, weights_i = _pool_parts(frames_i, params.w)
        pooled_j, weights_j = _pool_parts(frames_j, params.w)
        pooled = lam * pooled_i + (1.0 - lam) * pooled_j
        probs = forward(pooled, params)
        delta = probs - label
        acc.db += delta
        acc.dW += np.outer(delta, pooled)
        g = params.W.T @ delta
        acc.dw += lam * _pool_grad_w(frames_i, weights_i, pooled_i, g)
        acc.dw += (1.0 - lam) * _pool_grad_w(frames_j, weights_j, pooled_j, g)
        return loss(probs, label)
    raise ConfigurationError(f"unknown batch item kind {kind!r}")


def _batch_gradients(items: Sequence[tuple], params: ModelParams) -> tuple[Gradients, float]:
    if not items:
        raise ConfigurationError("gradient batch must be non-empty")
    acc = Gradients(
        dw=np.zeros_like(params.w),
        dW=np.zeros_like(params.W),
        db=np.zeros_like(params.b),
    )
    total = 0.0
    for item in items:
        total += _accumulate_item(item, params, acc)
    n = len(items)
    acc.dw /= n
    acc.dW /= n
    acc.db /= n
    return acc, total / n


def gradients(batch: Sequence[tuple[np.ndarray, np.ndarray]], params: ModelParams) -> Gradients:
    """Gradient of the mean loss over ``batch`` w.r.t. (w, W, b).

    Each batch element is ``(input, label)`` where the input is either a
    T x D frame matrix (gradient flows through the pooling into ``w``) or an
    already-pooled D-vector.
    """
    items = []
    for x, label in batch:
        x = np.asarray(x, dtype=np.float64)
        items.append(("frames" if x.ndim == 2 else "pooled", x, np.asarray(label, dtype=np.float64)))
    grads, _ = _batch_gradients(items, params)
    return grads


def batch_loss(batch: Sequence[tuple[np.ndarray, np.ndarray]], params: ModelParams) -> float:
    """Mean loss over ``batch`` with the same input conventions as ``gradients``."""
    total = 0.0
    for x, label in batch:
        x = np.asarray(x, dtype=np.float64)
        pooled = attention_pool(x, params.w) if x.ndim == 2 else x
        total += loss(forward(pooled, params), label)
    return total / len(batch)


def _adam_update(param, grad, m, v, t, config: TrainConfig):
    m = config.adam_beta1 * m + (1.0 - config.adam_beta1) * grad
    v = config.adam_beta2 * v + (1.0 - config.adam_beta2) * grad * grad
    m_hat = m / (1.0 - config.adam_beta1**t)
    v_hat = v / (1.0 - config.adam_beta2**t)
    return param - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.adam_eps), m, v


def adam_step(
    params: ModelParams,
    grads: Gradients,
    state: AdamState,
    config: TrainConfig,
) -> tuple[ModelParams, AdamState]:
    """One bias-corrected Adam update; returns fresh params and state."""
    t = state.t + 1
    w, m_w, v_w = _adam_update(params.w, grads.dw, state.m_w, state.v_w, t, config)
    W, m_W, v_W = _adam_update(params.W, grads.dW, state.m_W, state.v_W, t, config)
    b, m_b, v_b = _adam_update(params.b, grads.db, state.m_b, state.v_b, t, config)
    return (
        ModelParams(w=w, W=W, b=b),
        AdamState(t=t, m_w=m_w, v_w=v_w, m_W=m_W, v_W=v_W, m_b=m_b, v_b=v_b),
    )


def train(
    corpus: Corpus,
    datamap: DatamapResult | None,
    config: TrainConfig,
) -> TrainOutput:
    """Train the head on the corpus train split under ``config.strategy``.

    Per epoch: build the training stream (mix pairs for mixup strategies,
    plain shuffled examples otherwise), run Adam over batches, then log each
    retained example's clean true-class probability. Fully deterministic
    given ``config.seed``.
    """
    config.validate()
    taxonomy = corpus.taxonomy
    C = taxonomy.n_dialects
    train_utts = corpus.split_utterances("train")
    if not train_utts:
        raise DegenerateCorpusError("corpus has no train utterances")

    retained_ids = augment.retained_set([u.id for u in train_utts], datamap, config.strategy)
    retained = [u for u in train_utts if u.id in retained_ids]
    retained_id_list = [u.id for u in retained]
    by_id = {u.id: u for u in retained}
    dialect_of = {u.id: u.dialect for u in retained}

    # map_mix forces confidence labels; sibling counts reflect the retained set.
    label_mode = "confidence" if config.strategy == "map_mix" else config.label_mode
    counts = np.bincount([u.dialect for u in retained], minlength=C)
    if label_mode == "confidence":
        base_label = {
            u.id: confidence_label(u.dialect, taxonomy, counts, config.smoothing_s)
            for u in retained
        }
    else:
        base_label = {u.id: one_hot(u.dialect, C) for u in retained}

    rng = np.random.default_rng(config.seed)
    params = init_params(corpus.D, C, rng)
    state = AdamState.zeros(corpus.D, C)
    records: dict[str, list[float]] = {uid: [] for uid in retained_id_list}
    loss_curve: list[float] = []

    for _epoch in range(config.epochs):
        if config.strategy == "none":
            order = rng.permutation(len(retained))
            items = [
                ("frames", retained[k].frames, base_label[retained[k].id]) for k in order
            ]
        else:
            pairs = augment.make_pairs(
                retained_id_list,
                datamap,
                taxonomy,
                config.strategy,
                n_pairs=len(retained),
                alpha=config.alpha,
                rng=rng,
                dialect_of=dialect_of,
            )
            items = []
            for pair in pairs:
                label = mix_labels(base_label[pair.i], base_label[pair.j], pair.lam)
                if config.strategy == "static":
                    items.append(("frames", augment.static_mix(by_id[pair.i], by_id[pair.j], pair.lam), label))
                else:
                    items.append(("latent", by_id[pair.i].frames, by_id[pair.j].frames, pair.lam, label))

        epoch_loss = 0.0
        for start in range(0, len(items), config.batch_size):
            batch = items[start : start + config.batch_size]
            grads, mean_loss = _batch_gradients(batch, params)
            epoch_loss += mean_loss * len(batch)
            params, state = adam_step(params, grads, state, config)
        loss_curve.append(epoch_loss / len(items))

        for utt in retained:
            probs = forward(attention_pool(utt.frames, params.w), params)
            records[utt.id].append(float(probs[utt.dialect]))

    return TrainOutput(
        params=params,
        dynamics=DynamicsLog(epochs=config.epochs, records=records),
        loss_curve=loss_curve,
    )


def _encode_array(arr: np.ndarray) -> dict:
    return {
        "shape": list(arr.shape),
        "data": base64.b64encode(np.ascontiguousarray(arr, dtype="<f8").tobytes()).decode("ascii"),
    }


def _decode_array(obj: dict) -> np.ndarray:
    data = base64.b64decode(obj["data"])
    return np.frombuffer(data, dtype="<f8").reshape(obj["shape"]).astype(np.float64)


def save_checkpoint(
    params: ModelParams,
    config: TrainConfig,
    path: str | Path,
    dialects: Sequence[str] | None = None,
) -> None:
    """Write params plus a config echo as JSON with base64 float64 arrays."""
    payload = {
        "format": "mapmix-checkpoint",
        "version": 1,
        "arrays": {
            "w": _encode_array(params.w),
            "W": _encode_array(params.W),
            "b": _encode_array(params.b),
        },
        "config": asdict(config),
        "dialects": list(dialects) if dialects is not None else None,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_checkpoint(path: str | Path) -> tuple[ModelParams, dict]:
    """Read a checkpoint; returns params and the raw payload (config echo etc.)."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != "mapmix-checkpoint":
        raise SchemaError(f"{path}: not a mapmix checkpoint")
    arrays = payload["arrays"]
    params = ModelParams(
        w=_decode_array(arrays["w"]),
        W=_decode_array(arrays["W"]),
        b=_decode_array(arrays["b"]),
    )
    params.validate()
    return params, payload
