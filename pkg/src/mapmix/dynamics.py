"""Datamaps: per-example training-dynamics statistics and region partition.

For each example the log holds its true-class probability after every
epoch. Confidence is the mean of that sequence and variability its
population standard deviation. Examples split into three disjoint regions:
high variability is ambiguous; the low-variability remainder splits at the
median confidence into easy (above) and hard (below).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import FormatError, LogIntegrityError, PartitionError

REGIONS = ("easy", "ambiguous", "hard")

DATAMAP_HEADER = ["id", "confidence", "variability", "region"]


@dataclass
class DynamicsLog:
    """Per-example true-class probabilities, one value per epoch."""

    epochs: int
    records: dict[str, list[float]]

    def validate(self):
        for uid, seq in self.records.items():
            if len(seq) != self.epochs:
                raise LogIntegrityError(
                    f"example {uid!r} has {len(seq)} entries for {self.epochs} epochs"
                )
            for p in seq:
                if not 0.0 <= p <= 1.0:
                    raise LogIntegrityError(f"example {uid!r}: probability {p} outside [0, 1]")


@dataclass
class DatamapEntry:
    id: str
    confidence: float
    variability: float
    region: str


@dataclass
class DatamapResult:
    entries: list[DatamapEntry]
    thresholds: tuple[float, float] | None = None

    def region_of(self) -> dict[str, str]:
        return {e.id: e.region for e in self.entries}

    def ids_in(self, region: str) -> set[str]:
        return {e.id for e in self.entries if e.region == region}


@dataclass
class DatamapConfig:
    """Percentile cuts for the two-stage partition (nearest-rank).

    ``variability_percentile`` is the cut above (>=) which entries are
    ambiguous; the default leaves roughly the top third there.
    """

    variability_percentile: float = 66.7
    confidence_percentile: float = 50.0


def compute_stats(log: DynamicsLog) -> list[tuple[str, float, float]]:
    """Return (id, confidence, variability) per example, in log order."""
    if log.epochs < 1:
        raise LogIntegrityError("need at least one epoch of dynamics")
    log.validate()
    stats = []
    for uid, seq in log.records.items():
        p = np.asarray(seq, dtype=np.float64)
        stats.append((uid, float(p.mean()), float(p.std())))
    return stats


def _nearest_rank(values: np.ndarray, percentile: float) -> float:
    n = len(values)
    rank = math.ceil(percentile / 100.0 * n)
    rank = min(max(rank, 1), n)
    return float(np.sort(values)[rank - 1])


def partition_regions(
    stats: Iterable[tuple[str, float, float]],
    config: DatamapConfig | None = None,
) -> DatamapResult:
    """Assign every example to exactly one of easy/ambiguous/hard.

    Entries with variability >= the variability percentile cut are
    ambiguous; among the rest, confidence >= the median goes easy, below
    goes hard. Ties always take the >= branch.
    """
    config = config or DatamapConfig()
    stats = list(stats)
    if len(stats) < 3:
        raise PartitionError(f"need at least 3 entries to partition, got {len(stats)}")

    variabilities = np.array([v for _, _, v in stats])
    v_star = _nearest_rank(variabilities, config.variability_percentile)

    low_var = [(uid, conf) for uid, conf, var in stats if var < v_star]
    if low_var:
        mu_star = _nearest_rank(np.array([c for _, c in low_var]), config.confidence_percentile)
    else:
        mu_star = math.nan

    entries = []
    for uid, conf, var in stats:
        if var >= v_star:
            region = "ambiguous"
        elif conf >= mu_star:
            region = "easy"
        else:
            region = "hard"
        entries.append(DatamapEntry(id=uid, confidence=conf, variability=var, region=region))
    return DatamapResult(entries=entries, thresholds=(v_star, mu_star))


def export_datamap(result: DatamapResult, path: str | Path) -> None:
    """Write ``id,confidence,variability,region`` rows in entry order.

    Floats are written with shortest round-trip precision so a re-parse
    recovers them exactly.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(DATAMAP_HEADER)
        for e in result.entries:
            writer.writerow([e.id, repr(e.confidence), repr(e.variability), e.region])


def load_datamap(path: str | Path) -> DatamapResult:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != DATAMAP_HEADER:
            raise FormatError(f"{path}: expected header {DATAMAP_HEADER}, got {header}")
        entries = []
        for row in reader:
            if len(row) != 4:
                raise FormatError(f"{path}: malformed row {row}")
            uid, conf, var, region = row
            if region not in REGIONS:
                raise FormatError(f"{path}: unknown region {region!r}")
            entries.append(
                DatamapEntry(id=uid, confidence=float(conf), variability=float(var), region=region)
            )
    return DatamapResult(entries=entries, thresholds=None)
