"""Mixing coefficient sampling, feature mixing, and pair-sampling strategies.

The strategy catalog:

* ``none``        -- no augmentation, plain examples.
* ``static``      -- uniform pairs, raw frame matrices mixed (truncated to
                     the shorter of the two).
* ``random``      -- uniform pairs, pooled embeddings mixed.
* ``within_cluster`` / ``across_cluster`` -- the partner must share /
                     must not share the first operand's language cluster.
* ``easy`` / ``hard`` -- the partner is drawn from that datamap region.
* ``amb_easy``    -- hard region removed from training; pairs drawn from
                     easy x ambiguous.
* ``map_mix``     -- ``amb_easy`` plus confidence labels.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Taxonomy, Utterance
from .dynamics import DatamapResult
from .errors import (
    ConfigurationError,
    DataError,
    DegenerateCorpusError,
    SchemaError,
    StrategyError,
)

STRATEGIES = (
    "none",
    "static",
    "random",
    "within_cluster",
    "across_cluster",
    "easy",
    "hard",
    "amb_easy",
    "map_mix",
)

#: Strategies that cannot run without a datamap.
REGION_STRATEGIES = frozenset({"easy", "hard", "amb_easy", "map_mix"})

#: Strategies that drop the hard-to-learn region from training.
HARD_REMOVAL_STRATEGIES = frozenset({"amb_easy", "map_mix"})


@dataclass
class MixPair:
    i: str
    j: str
    lam: float


def sample_lambda(alpha: float, rng: np.random.Generator) -> float:
    """One Beta(alpha, alpha) draw, guaranteed inside the open interval (0, 1)."""
    if alpha <= 0:
        raise ConfigurationError(f"mixup alpha must be > 0, got {alpha}")
    lam = float(rng.beta(alpha, alpha))
    while not 0.0 < lam < 1.0:
        lam = float(rng.beta(alpha, alpha))
    return lam


def _check_lambda(lam: float):
    if not 0.0 <= lam <= 1.0:
        raise ConfigurationError(f"mixing coefficient {lam} outside [0, 1]")


def static_mix(u_i: Utterance, u_j: Utterance, lam: float) -> np.ndarray:
    """Mix raw frame matrices element-wise, truncated to min(T_i, T_j) frames."""
    _check_lambda(lam)
    if u_i.frames.shape[1] != u_j.frames.shape[1]:
        raise SchemaError(
            f"embedding dimension mismatch: {u_i.frames.shape[1]} vs {u_j.frames.shape[1]}"
        )
    t = min(u_i.num_frames, u_j.num_frames)
    return lam * u_i.frames[:t] + (1.0 - lam) * u_j.frames[:t]


def latent_mix(z_i: np.ndarray, z_j: np.ndarray, lam: float) -> np.ndarray:
    """Mix pooled utterance embeddings."""
    _check_lambda(lam)
    z_i = np.asarray(z_i, dtype=np.float64)
    z_j = np.asarray(z_j, dtype=np.float64)
    if z_i.shape != z_j.shape:
        raise SchemaError(f"embedding shape mismatch: {z_i.shape} vs {z_j.shape}")
    return lam * z_i + (1.0 - lam) * z_j


def retained_set(
    train_ids: Iterable[str],
    datamap: DatamapResult | None,
    strategy: str,
) -> set[str]:
    """Training ids kept under ``strategy``; hard-removal strategies drop the hard region."""
    if strategy not in STRATEGIES:
        raise ConfigurationError(f"unknown strategy {strategy!r}")
    train_ids = set(train_ids)
    if strategy in REGION_STRATEGIES:
        if datamap is None:
            raise ConfigurationError(f"strategy {strategy!r} requires a datamap")
        covered = {e.id for e in datamap.entries}
        missing = train_ids - covered
        if missing:
            raise DataError(f"datamap does not cover {len(missing)} train ids")
    if strategy in HARD_REMOVAL_STRATEGIES:
        retained = train_ids - datamap.ids_in("hard")
    else:
        retained = train_ids
    if not retained:
        raise DegenerateCorpusError("no training examples retained")
    return retained


def make_pairs(
    retained: Sequence[str],
    datamap: DatamapResult | None,
    taxonomy: Taxonomy,
    strategy: str,
    n_pairs: int,
    alpha: float,
    rng: np.random.Generator,
    dialect_of: Mapping[str, int],
) -> list[MixPair]:
    """Sample ``n_pairs`` mix pairs with fresh lambdas under ``strategy``.

    ``retained`` must be an ordered sequence (sampling is index-based so a
    fixed seed reproduces the pair stream). ``dialect_of`` maps each
    retained id to its dialect index for the cluster-constrained rules.
    """
    if strategy not in STRATEGIES:
        raise ConfigurationError(f"unknown strategy {strategy!r}")
    if strategy == "none":
        raise ConfigurationError("strategy 'none' draws no mix pairs")
    retained = list(retained)
    if not retained:
        raise DegenerateCorpusError("cannot sample pairs from an empty retained set")

    region_pool: dict[str, list[str]] = {}
    if strategy in REGION_STRATEGIES:
        if datamap is None:
            raise ConfigurationError(f"strategy {strategy!r} requires a datamap")
        region_of = datamap.region_of()
        for region in ("easy", "ambiguous", "hard"):
            region_pool[region] = [uid for uid in retained if region_of.get(uid) == region]

    cluster_pool: dict[int, list[str]] = {}
    complement_pool: dict[int, list[str]] = {}
    if strategy in ("within_cluster", "across_cluster"):
        for uid in retained:
            cluster_pool.setdefault(taxonomy.cluster_of[dialect_of[uid]], []).append(uid)
        if strategy == "across_cluster":
            if len(cluster_pool) < 2:
                raise StrategyError("across_cluster mixing needs at least two clusters in the data")
            for cluster in cluster_pool:
                complement_pool[cluster] = [
                    uid for uid in retained if taxonomy.cluster_of[dialect_of[uid]] != cluster
                ]

    def need(region: str) -> list[str]:
        pool = region_pool.get(region, [])
        if not pool:
            raise StrategyError(f"strategy {strategy!r} requires a non-empty {region} region")
        return pool

    def uniform(pool: list[str]) -> str:
        return pool[int(rng.integers(len(pool)))]

    pairs = []
    for _ in range(n_pairs):
        if strategy in ("static", "random"):
            i = uniform(retained)
            j = uniform(retained)
        elif strategy == "within_cluster":
            i = uniform(retained)
            j = uniform(cluster_pool[taxonomy.cluster_of[dialect_of[i]]])
        elif strategy == "across_cluster":
            i = uniform(retained)
            j = uniform(complement_pool[taxonomy.cluster_of[dialect_of[i]]])
        elif strategy in ("easy", "hard"):
            i = uniform(retained)
            j = uniform(need(strategy))
        else:  # amb_easy, map_mix
            i = uniform(need("easy"))
            j = uniform(need("ambiguous"))
        pairs.append(MixPair(i=i, j=j, lam=sample_lambda(alpha, rng)))
    return pairs
