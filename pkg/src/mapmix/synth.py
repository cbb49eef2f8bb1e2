"""Synthetic dialect corpora with controllable separation and label noise.

Cluster centers sit on a randomly rotated scaled simplex so their pairwise
distances equal ``cluster_sep`` exactly; dialect sub-centers are offset from
their cluster center along per-cluster orthonormal directions so siblings
are ``dialect_sep`` apart. Frames are i.i.d. Gaussian around the sub-center.
A chosen fraction of train utterances get their label flipped to a random
different dialect; the set of corrupted ids is returned as ground truth.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import DEFAULT_TAXONOMY_MAPPING, Corpus, Taxonomy, Utterance
from .errors import ConfigurationError


@dataclass
class SynthConfig:
    n_clusters: int = 5
    dialects_per_cluster: list[int] = field(default_factory=lambda: [4, 2, 2, 4, 2])
    D: int = 16
    train_per_dialect: int = 50
    eval_per_dialect: int = 10
    frames_range: tuple[int, int] = (10, 40)
    cluster_sep: float = 6.0
    dialect_sep: float = 2.0
    frame_noise: float = 4.0
    label_noise_frac: float = 0.0
    frame_rate_hz: float = 2.5
    seed: int = 0

    def validate(self):
        if len(self.dialects_per_cluster) != self.n_clusters:
            raise ConfigurationError(
                f"dialects_per_cluster has {len(self.dialects_per_cluster)} entries "
                f"for {self.n_clusters} clusters"
            )
        if any(m < 1 for m in self.dialects_per_cluster):
            raise ConfigurationError("every cluster needs at least one dialect")
        if not self.cluster_sep > self.dialect_sep > 0:
            raise ConfigurationError("require cluster_sep > dialect_sep > 0")
        if not 0 <= self.label_noise_frac < 0.5:
            raise ConfigurationError("label_noise_frac must be in [0, 0.5)")
        if self.frame_noise < 0:
            raise ConfigurationError("frame_noise must be >= 0")
        t_min, t_max = self.frames_range
        if not 1 <= t_min <= t_max:
            raise ConfigurationError("frames_range must satisfy 1 <= T_min <= T_max")
        if self.D < self.n_clusters or self.D < max(self.dialects_per_cluster):
            raise ConfigurationError(
                "D must be >= n_clusters and >= max(dialects_per_cluster) "
                "for the orthogonal center construction"
            )
        if self.train_per_dialect < 1 or self.eval_per_dialect < 0:
            raise ConfigurationError("need train_per_dialect >= 1 and eval_per_dialect >= 0")
        if self.frame_rate_hz <= 0:
            raise ConfigurationError("frame_rate_hz must be > 0")

    @property
    def n_dialects(self) -> int:
        return sum(self.dialects_per_cluster)


def _taxonomy_for(config: SynthConfig) -> Taxonomy:
    """Use the shipped LRE-17 names when the shape matches, else generic names."""
    default = Taxonomy.from_mapping(DEFAULT_TAXONOMY_MAPPING)
    counts = [sum(1 for c in default.cluster_of if c == k) for k in range(default.n_clusters)]
    if config.n_clusters == default.n_clusters and list(config.dialects_per_cluster) == counts:
        return default
    mapping = {}
    for k, m in enumerate(config.dialects_per_cluster):
        for i in range(m):
            mapping[f"c{k:02d}-d{i:02d}"] = f"cluster{k:02d}"
    return Taxonomy.from_mapping(mapping)


def _random_orthogonal(rng: np.random.Generator, d: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def generate(config: SynthConfig) -> tuple[Corpus, set[str]]:
    """Generate a corpus per ``config``; returns it with the noised-id set.

    Deterministic given ``config.seed``. Label flips change only the stored
    label, never the geometry, so corrupted examples sit at a sub-center
    inconsistent with their label.
    """
    config.validate()
    taxonomy = _taxonomy_for(config)
    rng = np.random.default_rng(config.seed)

    # Unit simplex vertices e_k scaled by sep/sqrt(2) are exactly sep apart.
    basis = _random_orthogonal(rng, config.D)
    centers = (config.cluster_sep / np.sqrt(2.0)) * basis[:, : config.n_clusters].T

    sub_centers = np.zeros((taxonomy.n_dialects, config.D))
    for k in range(config.n_clusters):
        directions = _random_orthogonal(rng, config.D)[:, : config.dialects_per_cluster[k]]
        members = [d for d in range(taxonomy.n_dialects) if taxonomy.cluster_of[d] == k]
        for i, dialect in enumerate(members):
            sub_centers[dialect] = centers[k] + (config.dialect_sep / np.sqrt(2.0)) * directions[:, i]

    t_min, t_max = config.frames_range
    utterances: list[Utterance] = []
    for split, per_dialect in (("train", config.train_per_dialect), ("eval", config.eval_per_dialect)):
        for dialect in range(taxonomy.n_dialects):
            for serial in range(per_dialect):
                t = int(rng.integers(t_min, t_max + 1))
                frames = sub_centers[dialect] + config.frame_noise * rng.standard_normal((t, config.D))
                utterances.append(
                    Utterance(
                        id=f"{taxonomy.dialects[dialect]}-{split}-{serial:04d}",
                        frames=frames,
                        dialect=dialect,
                        duration_s=t / config.frame_rate_hz,
                        split=split,
                    )
                )

    train_positions = [i for i, u in enumerate(utterances) if u.split == "train"]
    n_noised = int(round(config.label_noise_frac * len(train_positions)))
    noised_ids: set[str] = set()
    if n_noised:
        chosen = rng.choice(len(train_positions), size=n_noised, replace=False)
        for pos in sorted(chosen):
            utt = utterances[train_positions[pos]]
            # Uniform over the other C-1 dialects.
            new_label = int(rng.integers(taxonomy.n_dialects - 1))
            if new_label >= utt.dialect:
                new_label += 1
            utt.dialect = new_label
            noised_ids.add(utt.id)

    corpus = Corpus(
        taxonomy=taxonomy,
        utterances=utterances,
        D=config.D,
        frame_rate_hz=config.frame_rate_hz,
    )
    return corpus, noised_ids
