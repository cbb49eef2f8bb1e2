"""Chunked evaluation and the reported metrics.

Eval utterances are scored in 8-second chunks with a 3-second stride
(signals shorter than one chunk are scored whole); the utterance
probability is the mean softmax over its chunks. Reported metrics are
accuracy, weighted F1, language-cluster accuracy, and expected calibration
error over equal-width confidence bins.
"""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import Corpus, Taxonomy
from .errors import DataError, EvaluationError
from .model import ModelParams, attention_pool, forward

logger = logging.getLogger(__name__)

CHUNK_LEN_S = 8.0
CHUNK_STRIDE_S = 3.0
DEFAULT_ECE_BINS = 10


@dataclass
class UtteranceResult:
    id: str
    probs: np.ndarray
    predicted: int
    true_dialect: int


@dataclass
class EvalReport:
    acc: float
    wf1: float
    cluster_acc: float
    ece: float
    confusion: np.ndarray  # (C, C), rows = true, columns = predicted
    n: int

    def to_dict(self, taxonomy: Taxonomy) -> dict:
        return {
            "acc": self.acc,
            "wf1": self.wf1,
            "cluster_acc": self.cluster_acc,
            "ece": self.ece,
            "n": self.n,
            "dialects": list(taxonomy.dialects),
            "confusion": self.confusion.astype(int).tolist(),
        }


def chunk_offsets(
    t_seconds: float,
    chunk_len: float = CHUNK_LEN_S,
    stride: float = CHUNK_STRIDE_S,
) -> list[tuple[float, float]]:
    """Chunk (start, end) times: starts at stride multiples while a full
    chunk fits; signals shorter than one chunk yield a single whole chunk."""
    if t_seconds <= 0:
        raise DataError(f"signal duration must be > 0, got {t_seconds}")
    if t_seconds < chunk_len:
        return [(0.0, t_seconds)]
    offsets = []
    k = 0
    while k * stride + chunk_len <= t_seconds:
        offsets.append((k * stride, k * stride + chunk_len))
        k += 1
    return offsets


def aggregate_chunks(chunk_probs: Sequence[np.ndarray]) -> np.ndarray:
    """Arithmetic mean of per-chunk probability vectors."""
    if len(chunk_probs) == 0:
        raise EvaluationError("cannot aggregate zero chunks")
    return np.mean(np.asarray(chunk_probs, dtype=np.float64), axis=0)


def evaluate(
    corpus: Corpus,
    params: ModelParams,
    frame_rate_hz: float | None = None,
) -> list[UtteranceResult]:
    """Score every eval utterance; deterministic, manifest order.

    Chunk second-offsets convert to frame indices by flooring; chunks that
    land on zero frames are skipped with a warning.
    """
    params.validate()
    rate = corpus.frame_rate_hz if frame_rate_hz is None else frame_rate_hz
    results = []
    for utt in corpus.split_utterances("eval"):
        chunk_probs = []
        for start_s, end_s in chunk_offsets(utt.duration_s):
            a = int(np.floor(start_s * rate))
            b = min(int(np.floor(end_s * rate)), utt.num_frames)
            if b <= a:
                logger.warning("utterance %s: chunk (%.2fs, %.2fs) has zero frames; skipped", utt.id, start_s, end_s)
                continue
            chunk_probs.append(forward(attention_pool(utt.frames[a:b], params.w), params))
        if not chunk_probs:
            raise EvaluationError(f"utterance {utt.id!r}: every chunk was empty")
        probs = aggregate_chunks(chunk_probs)
        results.append(
            UtteranceResult(
                id=utt.id,
                probs=probs,
                predicted=int(np.argmax(probs)),  # ties break to the lowest index
                true_dialect=utt.dialect,
            )
        )
    return results


def confusion_matrix(results: Sequence[UtteranceResult], C: int) -> np.ndarray:
    confusion = np.zeros((C, C), dtype=np.int64)
    for r in results:
        confusion[r.true_dialect, r.predicted] += 1
    return confusion


def weighted_f1(confusion: np.ndarray) -> float:
    """Per-class F1 weighted by true-class support; empty classes weigh zero."""
    confusion = np.asarray(confusion, dtype=np.float64)
    n = confusion.sum()
    if n < 1:
        raise DataError("confusion matrix must contain at least one prediction")
    support = confusion.sum(axis=1)
    predicted = confusion.sum(axis=0)
    diag = np.diag(confusion)
    weighted = 0.0
    for c in range(confusion.shape[0]):
        precision = diag[c] / predicted[c] if predicted[c] > 0 else 0.0
        recall = diag[c] / support[c] if support[c] > 0 else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        weighted += support[c] * f1
    # single final division keeps the all-diagonal case exactly 1.0
    return float(weighted / n)


def cluster_accuracy(results: Sequence[UtteranceResult], taxonomy: Taxonomy) -> float:
    """Fraction of predictions landing in the true dialect's language cluster."""
    if not results:
        raise DataError("no results to score")
    hits = sum(
        1
        for r in results
        if taxonomy.cluster_of[r.predicted] == taxonomy.cluster_of[r.true_dialect]
    )
    return hits / len(results)


def ece(probs: np.ndarray, y_true: np.ndarray, n_bins: int = DEFAULT_ECE_BINS) -> float:
    """Expected calibration error over equal-width confidence bins.

    Confidence is the max probability; bins partition [0, 1] with the last
    bin closed on the right.
    """
    probs = np.asarray(probs, dtype=np.float64)
    y_true = np.asarray(y_true)
    if probs.ndim != 2 or len(probs) != len(y_true) or len(probs) < 1:
        raise DataError("need an (N, C) probability matrix and N true labels")
    confidence = probs.max(axis=1)
    correct = (np.argmax(probs, axis=1) == y_true).astype(np.float64)
    edges = np.linspace(0.0, 1.0, n_bins + 1)
    # Bin b covers [edges[b], edges[b+1]), with the last bin right-closed.
    idx = np.digitize(confidence, edges[1:-1], right=False)
    total = 0.0
    n = len(confidence)
    for b in range(n_bins):
        mask = idx == b
        count = mask.sum()
        if count == 0:
            continue
        gap = abs(correct[mask].mean() - confidence[mask].mean())
        total += (count / n) * gap
    return float(total)


def build_report(
    results: Sequence[UtteranceResult],
    taxonomy: Taxonomy,
    n_bins: int = DEFAULT_ECE_BINS,
) -> EvalReport:
    if not results:
        raise DataError("no evaluation results")
    confusion = confusion_matrix(results, taxonomy.n_dialects)
    probs = np.stack([r.probs for r in results])
    y_true = np.array([r.true_dialect for r in results])
    acc = float(np.trace(confusion) / len(results))
    return EvalReport(
        acc=acc,
        wf1=weighted_f1(confusion),
        cluster_acc=cluster_accuracy(results, taxonomy),
        ece=ece(probs, y_true, n_bins=n_bins),
        confusion=confusion,
        n=len(results),
    )


def write_report_json(report: EvalReport, taxonomy: Taxonomy, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(taxonomy), fh, sort_keys=True, indent=2)
        fh.write("\n")


def write_confusion_csv(confusion: np.ndarray, taxonomy: Taxonomy, path: str | Path) -> None:
    """Rows = true dialect, columns = predicted dialect."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["true\\predicted", *taxonomy.dialects])
        for d, name in enumerate(taxonomy.dialects):
            writer.writerow([name, *confusion[d].astype(int).tolist()])
