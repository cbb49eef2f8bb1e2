"""Soft labels: one-hot, cluster-aware confidence labels, and mixed labels.

A confidence label keeps mass ``1 - s`` on the true dialect and spreads the
smoothing mass ``s`` over sibling dialects of the same language cluster in
proportion to their training frequency; everything outside the cluster gets
exactly zero.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .corpus import Taxonomy
from .errors import ConfigurationError, SchemaError

SIMPLEX_ATOL = 1e-9


def check_simplex(probs: np.ndarray, atol: float = SIMPLEX_ATOL) -> np.ndarray:
    """Validate that ``probs`` is a probability vector; returns it as float64."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 1:
        raise SchemaError("label must be a 1-D probability vector")
    if (probs < 0).any() or abs(probs.sum() - 1.0) > atol:
        raise SchemaError("label must be non-negative and sum to 1")
    return probs


def one_hot(dialect: int, C: int) -> np.ndarray:
    if not 0 <= dialect < C:
        raise SchemaError(f"dialect index {dialect} out of range for C={C}")
    label = np.zeros(C)
    label[dialect] = 1.0
    return label


def confidence_label(
    dialect: int,
    taxonomy: Taxonomy,
    train_counts: Sequence[int],
    s: float = 0.1,
) -> np.ndarray:
    """Cluster-aware smoothed label for ``dialect``.

    ``train_counts`` holds per-dialect training-set sizes; siblings with a
    zero count receive no mass, and a dialect with no counted siblings
    degenerates to one-hot.
    """
    C = taxonomy.n_dialects
    if not 0 <= dialect < C:
        raise SchemaError(f"dialect index {dialect} out of range for C={C}")
    if not 0 <= s < 1:
        raise ConfigurationError("smoothing mass s must be in [0, 1)")
    counts = np.asarray(train_counts, dtype=np.float64)
    if counts.shape != (C,) or (counts < 0).any():
        raise SchemaError("train_counts must be per-dialect non-negative counts")

    cluster = taxonomy.cluster_of[dialect]
    siblings = [
        c
        for c in range(C)
        if c != dialect and taxonomy.cluster_of[c] == cluster and counts[c] > 0
    ]
    if not siblings:
        return one_hot(dialect, C)

    label = np.zeros(C)
    label[dialect] = 1.0 - s
    total = counts[siblings].sum()
    for c in siblings:
        label[c] = s * counts[c] / total
    return label


def mix_labels(y_i: np.ndarray, y_j: np.ndarray, lam: float) -> np.ndarray:
    """Convex combination ``lam * y_i + (1 - lam) * y_j``."""
    if not 0 <= lam <= 1:
        raise ConfigurationError(f"mixing coefficient {lam} outside [0, 1]")
    y_i = check_simplex(y_i)
    y_j = check_simplex(y_j)
    if y_i.shape != y_j.shape:
        raise SchemaError("labels must have equal length")
    return lam * y_i + (1.0 - lam) * y_j
