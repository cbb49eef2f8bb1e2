"""Corpus data model, on-disk formats, and duration-budget subsampling.

A corpus is a pair of files plus a taxonomy:

* manifest (JSONL): one object per utterance with fields ``id``, ``dialect``,
  ``offset``, ``num_frames``, ``duration_s``, ``split``.
* frames file (binary): magic ``MMFR``, u32-LE version (=1), u32-LE embedding
  dimension D, then per-utterance records at the manifest offsets, each a
  u32-LE frame count T followed by T*D little-endian float32 values,
  frame-major.
* taxonomy (JSON): object mapping dialect name -> cluster name; key order
  defines the dialect index order.

Frames are stored as 32-bit floats; in memory they are held (and all
arithmetic is done) at 64-bit precision.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    ConfigurationError,
    CorruptionError,
    CoverageError,
    FormatError,
    NumericError,
    SchemaError,
)

FRAMES_MAGIC = b"MMFR"
FRAMES_VERSION = 1
_HEADER = struct.Struct("<4sII")
_U32 = struct.Struct("<I")

#: Frames per second emitted by typical SSL speech encoders (20 ms hop).
DEFAULT_FRAME_RATE_HZ = 50.0

SPLITS = ("train", "eval")

#: LRE-2017 dialect inventory: 14 dialects in 5 language clusters.
DEFAULT_TAXONOMY_MAPPING = {
    "ara-acm": "Arabic",
    "ara-apc": "Arabic",
    "ara-arz": "Arabic",
    "ara-ary": "Arabic",
    "zho-cmn": "Chinese",
    "zho-nan": "Chinese",
    "eng-gbr": "English",
    "eng-usg": "English",
    "por-brz": "Iberian",
    "spa-car": "Iberian",
    "spa-eur": "Iberian",
    "spa-lac": "Iberian",
    "qsl-pol": "Slavic",
    "qsl-rus": "Slavic",
}


@dataclass(frozen=True)
class Taxonomy:
    """Ordered dialect inventory with a dialect -> cluster assignment."""

    dialects: tuple[str, ...]
    cluster_of: tuple[int, ...]
    clusters: tuple[str, ...]

    def __post_init__(self):
        if len(self.dialects) != len(self.cluster_of):
            raise SchemaError("cluster_of must assign every dialect exactly one cluster")
        if len(set(self.dialects)) != len(self.dialects):
            raise SchemaError("duplicate dialect names in taxonomy")
        if not self.dialects:
            raise SchemaError("taxonomy must contain at least one dialect")
        used = set(self.cluster_of)
        if used != set(range(len(self.clusters))):
            raise SchemaError("every cluster must contain at least one dialect")

    @classmethod
    def from_mapping(cls, mapping: dict[str, str]) -> "Taxonomy":
        """Build from a dialect -> cluster-name mapping, preserving key order.

        Clusters are ordered by first appearance.
        """
        dialects = tuple(mapping)
        clusters: list[str] = []
        cluster_of = []
        for name in dialects:
            cluster = mapping[name]
            if cluster not in clusters:
                clusters.append(cluster)
            cluster_of.append(clusters.index(cluster))
        return cls(dialects=dialects, cluster_of=tuple(cluster_of), clusters=tuple(clusters))

    def to_mapping(self) -> dict[str, str]:
        return {d: self.clusters[c] for d, c in zip(self.dialects, self.cluster_of)}

    def index_of(self, dialect_name: str) -> int:
        try:
            return self.dialects.index(dialect_name)
        except ValueError:
            raise SchemaError(f"dialect {dialect_name!r} not in taxonomy") from None

    def cluster_of_dialect(self, dialect_index: int) -> int:
        return self.cluster_of[dialect_index]

    @property
    def n_dialects(self) -> int:
        return len(self.dialects)

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)


def default_taxonomy() -> Taxonomy:
    return Taxonomy.from_mapping(DEFAULT_TAXONOMY_MAPPING)


@dataclass
class Utterance:
    """One example: a T x D frame-embedding matrix with a dialect label.

    Frames are coerced through float32 on construction (the storage
    precision) and held as float64 for arithmetic.
    """

    id: str
    frames: np.ndarray
    dialect: int
    duration_s: float
    split: str

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim != 2 or frames.shape[0] < 1 or frames.shape[1] < 1:
            raise SchemaError(f"utterance {self.id!r}: frames must be a T x D matrix with T >= 1")
        if not np.isfinite(frames).all():
            raise NumericError(f"utterance {self.id!r}: non-finite frame values")
        self.frames = frames.astype(np.float32).astype(np.float64)
        if not self.duration_s > 0:
            raise SchemaError(f"utterance {self.id!r}: duration_s must be > 0")
        if self.split not in SPLITS:
            raise SchemaError(f"utterance {self.id!r}: split must be one of {SPLITS}")

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]


@dataclass
class Corpus:
    """An immutable-by-convention collection of utterances plus taxonomy."""

    taxonomy: Taxonomy
    utterances: list[Utterance]
    D: int
    frame_rate_hz: float = DEFAULT_FRAME_RATE_HZ

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.frame_rate_hz <= 0:
            raise SchemaError("frame_rate_hz must be > 0")
        seen = set()
        for utt in self.utterances:
            if utt.id in seen:
                raise SchemaError(f"duplicate utterance id {utt.id!r}")
            seen.add(utt.id)
            if utt.frames.shape[1] != self.D:
                raise SchemaError(
                    f"utterance {utt.id!r}: embedding dimension {utt.frames.shape[1]} != corpus D={self.D}"
                )
            if not 0 <= utt.dialect < self.taxonomy.n_dialects:
                raise SchemaError(f"utterance {utt.id!r}: dialect index {utt.dialect} out of range")

    def split_utterances(self, split: str) -> list[Utterance]:
        return [u for u in self.utterances if u.split == split]

    @property
    def n_utterances(self) -> int:
        return len(self.utterances)


def write_corpus(
    corpus: Corpus,
    manifest_path: str | Path,
    frames_path: str | Path,
    taxonomy_path: str | Path | None = None,
) -> None:
    """Write a corpus to disk; ``load_corpus`` of the result is the identity.

    The taxonomy is written as a sibling ``taxonomy.json`` of the manifest
    unless an explicit path is given.
    """
    corpus.validate()
    manifest_path = Path(manifest_path)
    frames_path = Path(frames_path)
    if taxonomy_path is None:
        taxonomy_path = manifest_path.parent / "taxonomy.json"

    entries = []
    with open(frames_path, "wb") as fh:
        fh.write(_HEADER.pack(FRAMES_MAGIC, FRAMES_VERSION, corpus.D))
        offset = _HEADER.size
        for utt in corpus.utterances:
            record = _U32.pack(utt.num_frames) + utt.frames.astype("<f4").tobytes(order="C")
            fh.write(record)
            entries.append(
                {
                    "id": utt.id,
                    "dialect": corpus.taxonomy.dialects[utt.dialect],
                    "offset": offset,
                    "num_frames": utt.num_frames,
                    "duration_s": utt.duration_s,
                    "split": utt.split,
                }
            )
            offset += len(record)

    with open(manifest_path, "w", encoding="utf-8") as fh:
        for entry in entries:
            fh.write(json.dumps(entry) + "\n")

    with open(taxonomy_path, "w", encoding="utf-8") as fh:
        json.dump(corpus.taxonomy.to_mapping(), fh, indent=2)
        fh.write("\n")


_MANIFEST_FIELDS = {"id", "dialect", "offset", "num_frames", "duration_s", "split"}


def _read_manifest(manifest_path: Path) -> list[dict]:
    entries = []
    with open(manifest_path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                entry = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{manifest_path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(entry, dict) or not _MANIFEST_FIELDS.issubset(entry):
                missing = _MANIFEST_FIELDS - set(entry) if isinstance(entry, dict) else _MANIFEST_FIELDS
                raise FormatError(f"{manifest_path}:{lineno}: missing fields {sorted(missing)}")
            entries.append(entry)
    return entries


def load_taxonomy(taxonomy_path: str | Path) -> Taxonomy:
    with open(taxonomy_path, "r", encoding="utf-8") as fh:
        try:
            mapping = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{taxonomy_path}: invalid JSON: {exc}") from exc
    if not isinstance(mapping, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in mapping.items()
    ):
        raise FormatError(f"{taxonomy_path}: expected an object mapping dialect name to cluster name")
    return Taxonomy.from_mapping(mapping)


def load_corpus(
    manifest_path: str | Path,
    frames_path: str | Path,
    taxonomy_path: str | Path | None = None,
    frame_rate_hz: float = DEFAULT_FRAME_RATE_HZ,
) -> Corpus:
    """Load and fully validate a corpus from its on-disk form.

    Ingestion preserves manifest order. The taxonomy defaults to the
    ``taxonomy.json`` sibling of the manifest.
    """
    manifest_path = Path(manifest_path)
    frames_path = Path(frames_path)
    if taxonomy_path is None:
        taxonomy_path = manifest_path.parent / "taxonomy.json"
    taxonomy = load_taxonomy(taxonomy_path)

    blob = Path(frames_path).read_bytes()
    if len(blob) < _HEADER.size:
        raise FormatError(f"{frames_path}: too short for a frames header")
    magic, version, dim = _HEADER.unpack_from(blob, 0)
    if magic != FRAMES_MAGIC:
        raise FormatError(f"{frames_path}: bad magic bytes {magic!r}")
    if version != FRAMES_VERSION:
        raise FormatError(f"{frames_path}: unsupported version {version}")
    if dim < 1:
        raise FormatError(f"{frames_path}: invalid embedding dimension {dim}")

    utterances = []
    for entry in _read_manifest(manifest_path):
        uid = str(entry["id"])
        offset = entry["offset"]
        num_frames = entry["num_frames"]
        if not isinstance(offset, int) or offset < 0 or offset + _U32.size > len(blob):
            raise CorruptionError(f"utterance {uid!r}: offset {offset} out of bounds")
        (t,) = _U32.unpack_from(blob, offset)
        if t != num_frames:
            raise CorruptionError(
                f"utterance {uid!r}: record frame count {t} != manifest num_frames {num_frames}"
            )
        start = offset + _U32.size
        end = start + 4 * t * dim
        if end > len(blob):
            raise CorruptionError(f"utterance {uid!r}: frame payload truncated")
        frames = np.frombuffer(blob, dtype="<f4", count=t * dim, offset=start).reshape(t, dim)
        utterances.append(
            Utterance(
                id=uid,
                frames=frames,
                dialect=taxonomy.index_of(str(entry["dialect"])),
                duration_s=float(entry["duration_s"]),
                split=str(entry["split"]),
            )
        )
    return Corpus(taxonomy=taxonomy, utterances=utterances, D=dim, frame_rate_hz=frame_rate_hz)


def subsample_budget(corpus: Corpus, hours_per_dialect: float, seed: int) -> Corpus:
    """Keep a seeded random subset of each dialect's train split.

    Per dialect, train utterances are uniformly shuffled and accumulated
    until their total duration first reaches or exceeds
    ``hours_per_dialect * 3600`` seconds (the straddling utterance is
    included). The eval split passes through unchanged.
    """
    if hours_per_dialect <= 0:
        raise ConfigurationError("hours_per_dialect must be > 0")
    budget_s = hours_per_dialect * 3600.0

    by_dialect: dict[int, list[int]] = {d: [] for d in range(corpus.taxonomy.n_dialects)}
    for idx, utt in enumerate(corpus.utterances):
        if utt.split == "train":
            by_dialect[utt.dialect].append(idx)

    rng = np.random.default_rng(seed)
    keep: set[int] = set()
    for dialect in range(corpus.taxonomy.n_dialects):
        indices = by_dialect[dialect]
        if not indices:
            raise CoverageError(
                f"dialect {corpus.taxonomy.dialects[dialect]!r} has no train utterances"
            )
        order = rng.permutation(len(indices))
        total = 0.0
        for pos in order:
            idx = indices[pos]
            keep.add(idx)
            total += corpus.utterances[idx].duration_s
            if total >= budget_s:
                break

    utterances = [
        utt
        for idx, utt in enumerate(corpus.utterances)
        if utt.split == "eval" or idx in keep
    ]
    return Corpus(
        taxonomy=corpus.taxonomy,
        utterances=utterances,
        D=corpus.D,
        frame_rate_hz=corpus.frame_rate_hz,
    )
